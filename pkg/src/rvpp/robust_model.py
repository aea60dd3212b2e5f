"""Single-level robust counterpart of the bidding MILP.

Price uncertainty enters the objective through budgeted protection terms
(dualized onto per-source scalars and per-period duals); production and
consumption uncertainty tighten their bound rows at adversary-flagged
periods, linearized with per-source big-M constants. Day-ahead price risk is
asymmetric: sold energy is exposed to the downward deviation and bought
energy to the upward one, through a magnitude auxiliary per period.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import MarketSet, RvppInstance, UncertaintyBudgets
from .det_model import (
    BuildError,
    _tag,
    build_deterministic,
    v_pda,
    v_rsr,
)
from .milp import BINARY, EQ, GE, LE, MilpModel, MilpSolution

INTEGRALITY_TOL = 1e-6


# Variable names of the robust layer.


def v_yda(t):
    return f"yda[{t}]"


def v_phi_price(leg):
    return f"phi_{leg}"  # leg in {"da", "sru", "srd"}


def v_zeta_price(leg, t):
    return f"zeta_{leg}[{t}]"


def v_chi(src, t):
    return f"chi[{src},{t}]"


def v_ydev(src, t):
    return f"ydev[{src},{t}]"


def v_phi_q(src):
    return f"phiq[{src}]"


def v_zeta_q(src, t):
    return f"zetaq[{src},{t}]"


@dataclass(frozen=True)
class QuantitySource:
    """One budgeted bound-tightening source and where it enters the model."""

    src: str  # "sf:<csp>", "res:<unit>", "dem:<demand>"
    kind: str  # "production" | "consumption"
    gamma: int
    deviation: np.ndarray
    row_of_t: callable  # period -> row name to widen
    row_sign: float  # +1 widens a <= cap row, -1 widens a >= floor row
    nominal: np.ndarray


def quantity_sources(instance: RvppInstance, budgets: UncertaintyBudgets) -> list:
    out = []
    for c in instance.csp_units:
        dev = c.sf_bounds.upper - c.sf_bounds.lower
        out.append(
            QuantitySource(
                src=f"sf:{c.name}",
                kind="production",
                gamma=budgets.for_csp(c.name),
                deviation=dev,
                row_of_t=lambda t, n=c.name: f"sf_cap[{n},{t}]",
                row_sign=1.0,
                nominal=c.sf_bounds.upper,
            )
        )
    for u in instance.ndres_units:
        dev = u.production_bounds.upper - u.production_bounds.lower
        out.append(
            QuantitySource(
                src=f"res:{u.name}",
                kind="production",
                gamma=budgets.for_ndres(u.name),
                deviation=dev,
                row_of_t=lambda t, n=u.name: f"res_cap[{n},{t}]",
                row_sign=1.0,
                nominal=u.production_bounds.upper,
            )
        )
    for d in instance.electric_demands:
        dev = d.consumption_bounds.upper - d.consumption_bounds.lower
        out.append(
            QuantitySource(
                src=f"dem:{d.name}",
                kind="consumption",
                gamma=budgets.for_demand(d.name),
                deviation=dev,
                row_of_t=lambda t, n=d.name: f"ed_floor_forecast[{n},{t}]",
                row_sign=-1.0,
                nominal=d.consumption_bounds.lower,
            )
        )
    for d in instance.thermal_demands:
        dev = d.consumption_bounds.upper - d.consumption_bounds.lower
        out.append(
            QuantitySource(
                src=f"dem:{d.name}",
                kind="consumption",
                gamma=budgets.for_demand(d.name),
                deviation=dev,
                row_of_t=lambda t, n=d.name: f"td_floor_forecast[{n},{t}]",
                row_sign=-1.0,
                nominal=d.consumption_bounds.lower,
            )
        )
    return out


def price_legs(instance: RvppInstance, budgets: UncertaintyBudgets) -> dict:
    """Deviation series and budget per market price leg."""
    m = instance.market
    return {
        "da": (m.dam_price.median - m.dam_price.lower, budgets.gamma_dam),
        "sru": (m.srm_up_price.upper - m.srm_up_price.lower, budgets.gamma_srm_up),
        "srd": (m.srm_down_price.upper - m.srm_down_price.lower, budgets.gamma_srm_down),
    }


def build_robust(
    instance: RvppInstance, budgets: UncertaintyBudgets, market_set: MarketSet
) -> MilpModel:
    """Deterministic skeleton plus price-protection duals and budgeted bound
    tightening with big-M linearization."""
    budgets.validate(instance)
    model = build_deterministic(instance, market_set)
    model.name = "rvpp-robust"
    T, dt = instance.T, instance.delta_t
    m = instance.market

    # --- price uncertainty --------------------------------------------------
    dam_dev_dn = m.dam_price.median - m.dam_price.lower
    dam_dev_up = m.dam_price.upper - m.dam_price.median
    legs = price_legs(instance, budgets)
    for leg, (dev, gamma) in legs.items():
        if np.any(dev < -1e-12):
            raise BuildError(f"price leg {leg}: negative deviation")
        model.add_var(v_phi_price(leg), tag=_tag("price-protect-budget-dual", leg=leg))
        model.add_objective_term(v_phi_price(leg), -float(gamma))
        for t in range(1, T + 1):
            model.add_var(v_zeta_price(leg, t), tag=_tag("price-protect-period-dual", leg=leg, t=t))
            model.add_objective_term(v_zeta_price(leg, t), -1.0)

    for t in range(1, T + 1):
        model.add_var(v_yda(t), tag=_tag("dam-trade-magnitude", t=t))
        # sold energy enters the magnitude directly
        model.add_constraint(
            f"yda_sell[{t}]",
            {v_pda(t): dt, v_yda(t): -1.0},
            LE,
            0.0,
            tag=_tag("dam-magnitude-sell", t=t),
        )
        # bought energy is rescaled so that the downward price deviation
        # charges it at the upward one
        dn = dam_dev_dn[t - 1]
        up = dam_dev_up[t - 1]
        ratio = up / dn if dn > 0 else up / max(up, 1.0)
        if ratio > 0:
            model.add_constraint(
                f"yda_buy[{t}]",
                {v_pda(t): ratio * dt, v_yda(t): 1.0},
                GE,
                0.0,
                tag=_tag("dam-magnitude-buy", t=t),
            )
        model.add_constraint(
            f"dualfeas_da[{t}]",
            {
                v_phi_price("da"): 1.0,
                v_zeta_price("da", t): 1.0,
                v_yda(t): -dam_dev_dn[t - 1],
            },
            GE,
            0.0,
            tag=_tag("price-dual-feasibility", leg="da", t=t),
        )
        model.add_constraint(
            f"dualfeas_sru[{t}]",
            {
                v_phi_price("sru"): 1.0,
                v_zeta_price("sru", t): 1.0,
                v_rsr("u", t): -legs["sru"][0][t - 1],
            },
            GE,
            0.0,
            tag=_tag("price-dual-feasibility", leg="sru", t=t),
        )
        model.add_constraint(
            f"dualfeas_srd[{t}]",
            {
                v_phi_price("srd"): 1.0,
                v_zeta_price("srd", t): 1.0,
                v_rsr("d", t): -legs["srd"][0][t - 1],
            },
            GE,
            0.0,
            tag=_tag("price-dual-feasibility", leg="srd", t=t),
        )

    # --- production/consumption uncertainty ---------------------------------
    for q in quantity_sources(instance, budgets):
        if np.any(q.deviation < -1e-12):
            raise BuildError(f"source {q.src}: negative deviation")
        dev_cap = float(np.max(q.deviation))
        big_m = 2.0 * dev_cap + 1.0
        # duals of the per-source protection LP never exceed the largest
        # deviation, so bounding them keeps a full unit of big-M headroom
        model.add_var(
            v_phi_q(q.src), upper=dev_cap, tag=_tag("bound-protect-budget-dual", src=q.src)
        )
        for t in range(1, T + 1):
            model.add_var(v_chi(q.src, t), kind=BINARY, tag=_tag("worst-period-flag", src=q.src, t=t))
            model.add_var(
                v_ydev(q.src, t), upper=2.0 * dev_cap, tag=_tag("bound-tightening", src=q.src, t=t)
            )
            model.add_var(
                v_zeta_q(q.src, t), upper=dev_cap, tag=_tag("bound-protect-period-dual", src=q.src, t=t)
            )
            model.add_term(q.row_of_t(t), v_ydev(q.src, t), q.row_sign)
            model.add_constraint(
                f"bigm_hi[{q.src},{t}]",
                {v_ydev(q.src, t): 1.0, v_chi(q.src, t): -big_m},
                LE,
                0.0,
                tag=_tag("tightening-off-when-unflagged", src=q.src, t=t),
            )
            model.add_constraint(
                f"bigm_lo[{q.src},{t}]",
                {
                    v_ydev(q.src, t): 1.0,
                    v_phi_q(q.src): -1.0,
                    v_zeta_q(q.src, t): -1.0,
                    v_chi(q.src, t): -big_m,
                },
                GE,
                -big_m,
                tag=_tag("tightening-dual-when-flagged", src=q.src, t=t),
            )
            model.add_constraint(
                f"dualfeas_q[{q.src},{t}]",
                {v_phi_q(q.src): 1.0, v_zeta_q(q.src, t): 1.0},
                GE,
                float(q.deviation[t - 1]),
                tag=_tag("bound-dual-feasibility", src=q.src, t=t),
            )
            # implied for integral flags (dual feasibility pushes phi+zeta to
            # the deviation); stated explicitly to tighten the relaxation
            if q.deviation[t - 1] > 0:
                model.add_constraint(
                    f"tighten_lb[{q.src},{t}]",
                    {v_ydev(q.src, t): 1.0, v_chi(q.src, t): -float(q.deviation[t - 1])},
                    GE,
                    0.0,
                    tag=_tag("tightening-flag-link", src=q.src, t=t),
                )
        model.add_constraint(
            f"card[{q.src}]",
            {v_chi(q.src, t): 1.0 for t in range(1, T + 1)},
            EQ,
            float(q.gamma),
            tag=_tag("budget-cardinality", src=q.src),
        )
    return model


# ---------------------------------------------------------------------------
# Protection values and worst-case reporting
# ---------------------------------------------------------------------------


def protection_selection(weights, deviations, gamma: int):
    """Value and lexicographically-smallest argmax set of the budgeted
    protection: the gamma largest weight*deviation products."""
    w = np.asarray(weights, dtype=float)
    d = np.asarray(deviations, dtype=float)
    if len(w) != len(d):
        raise ValueError("weights and deviations must have equal length")
    if np.any(w < 0) or np.any(d < 0):
        raise ValueError("weights and deviations must be non-negative")
    if int(gamma) != gamma or not 0 <= gamma <= len(w):
        raise ValueError(f"gamma must be an integer within [0, {len(w)}]")
    products = w * d
    order = sorted(range(len(w)), key=lambda i: (-products[i], i))
    chosen = sorted(order[: int(gamma)])
    value = float(products[chosen].sum()) if chosen else 0.0
    return value, tuple(t + 1 for t in chosen)


def protection_value_primal(weights, deviations, gamma: int) -> float:
    """Optimal value of: choose at most gamma periods to realize their full
    weighted deviation. Fractional choices never help for integer budgets."""
    value, _ = protection_selection(weights, deviations, gamma)
    return value


@dataclass
class SourceWorstCase:
    source: str
    kind: str  # "price" | "production" | "consumption"
    gamma: int
    periods: tuple
    realized: np.ndarray
    protection_cost: float | None  # EUR, price sources only
    tightening_mw: float | None  # total MW of bound tightening, quantity sources


@dataclass
class WorstCaseReport:
    sources: dict  # source name -> SourceWorstCase

    def flagged(self, source: str) -> tuple:
        return self.sources[source].periods


def worst_case_report(
    solution: MilpSolution, instance: RvppInstance, budgets: UncertaintyBudgets
) -> WorstCaseReport:
    """Decode adversary choices: flagged periods, realized series, and the
    per-source protection spend."""
    if solution.status != "optimal":
        raise ValueError(f"worst-case report requires an optimal solution, got {solution.status}")
    a = solution.assignment
    T, dt = instance.T, instance.delta_t
    m = instance.market
    report = {}

    # price legs: canonical worst sets re-derived from the sort-and-sum rule
    p_da = np.array([a[v_pda(t)] for t in range(1, T + 1)])
    y_da = np.array([a[v_yda(t)] for t in range(1, T + 1)])
    r_up = np.array([a[v_rsr("u", t)] for t in range(1, T + 1)])
    r_dn = np.array([a[v_rsr("d", t)] for t in range(1, T + 1)])
    legs = {
        "dam": ("da", y_da, m.dam_price.median - m.dam_price.lower, budgets.gamma_dam),
        "srm_up": (
            "sru",
            r_up,
            m.srm_up_price.upper - m.srm_up_price.lower,
            budgets.gamma_srm_up,
        ),
        "srm_down": (
            "srd",
            r_dn,
            m.srm_down_price.upper - m.srm_down_price.lower,
            budgets.gamma_srm_down,
        ),
    }
    for name, (leg, weights, dev, gamma) in legs.items():
        _, periods = protection_selection(np.maximum(weights, 0.0), dev, gamma)
        phi = a[v_phi_price(leg)]
        zeta = sum(a[v_zeta_price(leg, t)] for t in range(1, T + 1))
        if name == "dam":
            realized = m.dam_price.median.copy()
            for t in periods:
                if p_da[t - 1] >= 0:
                    realized[t - 1] = m.dam_price.lower[t - 1]
                else:
                    realized[t - 1] = m.dam_price.upper[t - 1]
        else:
            series = m.srm_up_price if name == "srm_up" else m.srm_down_price
            realized = series.upper.copy()
            for t in periods:
                realized[t - 1] = series.lower[t - 1]
        report[name] = SourceWorstCase(
            source=name,
            kind="price",
            gamma=int(gamma),
            periods=periods,
            realized=realized,
            protection_cost=float(gamma * phi + zeta),
            tightening_mw=None,
        )

    for q in quantity_sources(instance, budgets):
        flags = []
        tightening = 0.0
        for t in range(1, T + 1):
            chi = a[v_chi(q.src, t)]
            if abs(chi - round(chi)) > INTEGRALITY_TOL:
                raise ValueError(
                    f"{q.src}: worst-period flag at t={t} is fractional ({chi})"
                )
            if round(chi) == 1:
                flags.append(t)
            tightening += a[v_ydev(q.src, t)]
        if len(flags) != q.gamma:
            raise ValueError(
                f"{q.src}: {len(flags)} flagged periods but budget is {q.gamma}"
            )
        realized = q.nominal.copy()
        for t in flags:
            realized[t - 1] = q.nominal[t - 1] - q.row_sign * q.deviation[t - 1]
        report[q.src] = SourceWorstCase(
            source=q.src,
            kind=q.kind,
            gamma=q.gamma,
            periods=tuple(flags),
            realized=realized,
            protection_cost=None,
            tightening_mw=float(tightening),
        )
    return WorstCaseReport(sources=report)


def price_protection_duals(solution: MilpSolution, instance: RvppInstance) -> dict:
    """Per-leg (phi, zeta-series) from a solved robust model."""
    T = instance.T
    a = solution.assignment
    out = {}
    for leg in ("da", "sru", "srd"):
        out[leg] = (
            a[v_phi_price(leg)],
            np.array([a[v_zeta_price(leg, t)] for t in range(1, T + 1)]),
        )
    return out


def price_protection_weights(solution: MilpSolution, instance: RvppInstance) -> dict:
    """Per-leg (weights, deviations) defining the price protection LPs."""
    T = instance.T
    a = solution.assignment
    m = instance.market
    y_da = np.array([max(a[v_yda(t)], 0.0) for t in range(1, T + 1)])
    r_up = np.array([a[v_rsr("u", t)] for t in range(1, T + 1)])
    r_dn = np.array([a[v_rsr("d", t)] for t in range(1, T + 1)])
    return {
        "da": (y_da, m.dam_price.median - m.dam_price.lower),
        "sru": (r_up, m.srm_up_price.upper - m.srm_up_price.lower),
        "srd": (r_dn, m.srm_down_price.upper - m.srm_down_price.lower),
    }
