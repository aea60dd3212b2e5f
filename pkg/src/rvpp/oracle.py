"""Brute-force references for the robust counterpart.

Everything here is deliberately independent of the dualized formulation:
protection values come from explicit subset enumeration, and robust optima
are re-validated by fixing the committed schedule and replaying every
possible worst-case subset combination against it.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import comb

import numpy as np

from .core import MarketSet, RvppInstance, UncertaintyBudgets
from .det_model import extract_first_stage, total_cost
from .milp import SolveOptions, solve
from .robust_model import build_robust, price_legs, quantity_sources


class EnumerationCapError(RuntimeError):
    """The subset product is too large to enumerate exhaustively."""


class OracleMismatchError(AssertionError):
    """A fixed first stage failed replay against an enumerated realization."""


@dataclass(frozen=True)
class EnumerationBudget:
    """Cap on the total number of subset combinations to visit."""

    max_subsets: int = 2_000_000

    def check(self, gammas, T: int) -> int:
        total = 1
        for g in gammas:
            total *= comb(T, int(g))
            if total > self.max_subsets:
                raise EnumerationCapError(
                    f"subset product exceeds cap {self.max_subsets}"
                )
        return total


def brute_force_protection(weights, deviations, gamma: int, cap: EnumerationBudget | None = None):
    """Exact budgeted protection by enumerating all subsets: value and the
    lexicographically-smallest maximizing subset (1-based periods)."""
    w = np.asarray(weights, dtype=float)
    d = np.asarray(deviations, dtype=float)
    if len(w) != len(d):
        raise ValueError("weights and deviations must have equal length")
    if np.any(w < 0) or np.any(d < 0):
        raise ValueError("weights and deviations must be non-negative")
    T = len(w)
    if int(gamma) != gamma or not 0 <= gamma <= T:
        raise ValueError(f"gamma must be an integer within [0, {T}]")
    (cap or EnumerationBudget()).check([gamma], T)
    products = w * d
    best_value, best_subset = -np.inf, None
    for subset in itertools.combinations(range(T), int(gamma)):
        value = float(sum(products[i] for i in subset))
        if value > best_value:
            best_value, best_subset = value, subset
    return best_value, tuple(i + 1 for i in best_subset)


def duality_gap(weights, deviations, gamma: int, phi: float, zetas) -> float:
    """Gap between a dual-feasible point of the protection LP and the exact
    enumerated value; non-negative by weak duality, zero at the optimum."""
    w = np.asarray(weights, dtype=float)
    d = np.asarray(deviations, dtype=float)
    z = np.asarray(zetas, dtype=float)
    if phi < -1e-12 or np.any(z < -1e-12):
        raise ValueError("dual point must be non-negative")
    products = w * d
    slack = phi + z - products
    bad = np.nonzero(slack < -1e-9)[0]
    if len(bad):
        t = int(bad[0]) + 1
        raise ValueError(
            f"dual-infeasible point: phi + zeta < weight*deviation at period {t}"
        )
    value, _ = brute_force_protection(w, d, gamma)
    return float(gamma * phi + z.sum() - value)


# ---------------------------------------------------------------------------
# Whole-model oracle
# ---------------------------------------------------------------------------


def _dam_magnitude(p_da, dt, dev_down, dev_up):
    """Exposure magnitude of the day-ahead trade, recomputed from the trade
    itself: sold energy directly, bought energy scaled so the downward price
    deviation charges it at the upward one."""
    y = np.zeros_like(p_da)
    for i, p in enumerate(p_da):
        sell = p * dt
        ratio = dev_up[i] / dev_down[i] if dev_down[i] > 0 else dev_up[i] / max(dev_up[i], 1.0)
        buy = -ratio * p * dt
        y[i] = max(sell, buy, 0.0)
    return y


def brute_force_robust(
    instance: RvppInstance,
    budgets: UncertaintyBudgets,
    market_set: MarketSet | None = None,
    options: SolveOptions | None = None,
    cap: EnumerationBudget | None = None,
    rel_tol: float = 1e-6,
) -> float:
    """Worst-case value of the robust model's own first stage, by exhaustive
    replay of every subset combination.

    Solves the robust model, freezes the entire committed schedule, then for
    every combination of per-source worst-case subsets re-prices the schedule
    and re-checks every bound the realization tightens. Raises if any
    realization makes the schedule infeasible or if the worst replayed value
    drifts from the robust optimum.
    """
    market_set = market_set or MarketSet()
    options = options or SolveOptions(rel_gap_target=1e-9)
    cap = cap or EnumerationBudget()
    T, dt = instance.T, instance.delta_t
    m = instance.market

    model = build_robust(instance, budgets, market_set)
    sol = solve(model, options)
    if sol.status != "optimal":
        raise OracleMismatchError(f"robust model did not solve to optimality: {sol.status}")
    dec = extract_first_stage(sol, instance, market_set)
    nominal_value = -total_cost(dec, instance)

    qsources = quantity_sources(instance, budgets)
    legs = price_legs(instance, budgets)
    gammas = [g for _, g in legs.values()] + [q.gamma for q in qsources]
    cap.check(gammas, T)

    # price legs: per-subset loss tables
    dam_dev_dn = m.dam_price.median - m.dam_price.lower
    dam_dev_up = m.dam_price.upper - m.dam_price.median
    weights = {
        "da": _dam_magnitude(dec.p_da, dt, dam_dev_dn, dam_dev_up),
        "sru": dec.r_sr_up,
        "srd": dec.r_sr_down,
    }
    price_tables = []
    for leg, (dev, gamma) in legs.items():
        products = weights[leg] * dev
        losses = [
            float(sum(products[i] for i in subset))
            for subset in itertools.combinations(range(T), int(gamma))
        ]
        price_tables.append(losses)

    # quantity sources: per-subset feasibility of the frozen schedule
    tol = 1e-6 * (1.0 + max(
        [u.p_max for u in instance.ndres_units]
        + [c.sf_max_thermal for c in instance.csp_units]
        + [d.p_max for d in instance.electric_demands]
        + [d.h_max for d in instance.thermal_demands]
        + [1.0]
    ))
    series = {}
    for q in qsources:
        name = q.src.split(":", 1)[1]
        if q.src.startswith("sf:"):
            series[q.src] = dec.csp[name].p_sf
        elif q.src.startswith("res:"):
            sched = dec.ndres[name]
            series[q.src] = sched.p + sched.r_up
        elif name in dec.electric:
            series[q.src] = dec.electric[name].p
        else:
            series[q.src] = dec.thermal[name]
    quantity_tables = []
    for q in qsources:
        used = series[q.src]
        feasible = []
        for subset in itertools.combinations(range(T), int(q.gamma)):
            ok = True
            for i in subset:
                realized = q.nominal[i] - q.row_sign * q.deviation[i]
                if q.row_sign > 0:  # production cap moves down
                    if used[i] > realized + tol:
                        ok = False
                        break
                else:  # consumption floor moves up
                    if used[i] < realized - tol:
                        ok = False
                        break
            feasible.append((subset, ok))
        quantity_tables.append((q.src, feasible))

    worst = np.inf
    for price_combo in itertools.product(*[range(len(t)) for t in price_tables]):
        value = nominal_value - sum(
            price_tables[k][idx] for k, idx in enumerate(price_combo)
        )
        worst = min(worst, value)
    for src, feasible in quantity_tables:
        for subset, ok in feasible:
            if not ok:
                periods = tuple(i + 1 for i in subset)
                raise OracleMismatchError(
                    f"first stage infeasible when {src} realizes its worst case "
                    f"in periods {periods}"
                )

    scale = max(abs(worst), abs(sol.objective_value), 1.0)
    if abs(worst - sol.objective_value) > rel_tol * scale:
        raise OracleMismatchError(
            f"worst replayed value {worst} != robust optimum {sol.objective_value}"
        )
    return float(worst)
