"""Experiment harnesses: flexibility accounting, budget sweeps, market-set
comparison matrices, heat-price sensitivity, and out-of-sample Monte Carlo
evaluation of committed first stages against sampled realizations.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .core import MarketSet, RvppInstance, UncertaintyBudgets
from .datasets import STRATEGY_PRESETS, preset_budgets_for
from .det_model import (
    SCENARIOS,
    FirstStageDecision,
    build_deterministic,
    extract_first_stage,
    pw_grid,
    v_hd,
    v_hout,
    v_p,
    v_pd,
    v_ppb,
    v_psf,
    v_rdd,
    v_rdn,
    v_rdu,
    v_rup,
    v_sig,
    v_tsc,
    v_tsd,
    v_ets,
    v_x,
)
from .milp import EQ, GE, LE, MilpModel, SolveOptions, solve
from .robust_model import build_robust

MARKET_SET_LABELS = ("dam", "dam+hpa", "dam+srm", "dam+srm+hpa")


def market_set_from_label(label: str) -> MarketSet:
    return MarketSet.from_names(label.split("+"))


# ---------------------------------------------------------------------------
# Flexibility metrics
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FlexibilityRow:
    unit: str
    kind: str
    reserve_up: float  # MW summed over periods
    reserve_down: float
    up_to_capacity_pct: float  # 100 * sum_t r_t / (P_u * T)
    down_to_capacity_pct: float


@dataclass(frozen=True)
class FlexibilityTable:
    rows: tuple

    def by_unit(self, name: str) -> FlexibilityRow:
        for row in self.rows:
            if row.unit == name:
                return row
        raise KeyError(name)


def flexibility_metrics(dec: FirstStageDecision, instance: RvppInstance) -> FlexibilityTable:
    """Total and capacity-normalized reserve per unit. The normalization basis
    is the unit capacity times the horizon length (period-average share of
    capacity), which differs from a plain capacity division."""
    T = instance.T
    rows = []
    up_total = np.zeros(T)
    dn_total = np.zeros(T)

    def add(unit, kind, r_up, r_dn, capacity):
        nonlocal up_total, dn_total
        up_total = up_total + r_up
        dn_total = dn_total + r_dn
        denom = capacity * T
        rows.append(
            FlexibilityRow(
                unit=unit,
                kind=kind,
                reserve_up=float(r_up.sum()),
                reserve_down=float(r_dn.sum()),
                up_to_capacity_pct=float(100.0 * r_up.sum() / denom) if denom > 0 else 0.0,
                down_to_capacity_pct=float(100.0 * r_dn.sum() / denom) if denom > 0 else 0.0,
            )
        )

    for u in instance.ndres_units:
        s = dec.ndres[u.name]
        add(u.name, u.kind, s.r_up, s.r_down, u.p_max)
    for c in instance.csp_units:
        s = dec.csp[c.name]
        add(c.name, "csp", s.r_up, s.r_down, c.turbine_max)
    for d in instance.electric_demands:
        s = dec.electric[d.name]
        add(d.name, "electric_demand", s.r_up, s.r_down, d.p_max)

    tol = 1e-6 * (1.0 + float(np.max(np.abs(dec.r_sr_up)) + np.max(np.abs(dec.r_sr_down))))
    if np.any(np.abs(up_total - dec.r_sr_up) > tol) or np.any(
        np.abs(dn_total - dec.r_sr_down) > tol
    ):
        raise ValueError("per-unit reserves do not reconcile with the traded reserve")
    return FlexibilityTable(rows=tuple(rows))


# ---------------------------------------------------------------------------
# Budget sweep and strategy matrix
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SweepPoint:
    gamma: int
    cost: float
    energy_sold: float
    energy_bought: float
    heat_bought: float
    reserve_up: float
    reserve_down: float


def scaled_budgets(instance: RvppInstance, gamma: int) -> UncertaintyBudgets:
    """Uniform scalar budget mapped per source; daylight-limited sources
    (PV and solar fields) cap at their count of productive periods."""
    T = instance.T
    g = min(gamma, T)

    def daylight_cap(bounds):
        return int(np.count_nonzero(bounds.upper > 1e-9))

    per_ndres = {}
    for u in instance.ndres_units:
        cap = daylight_cap(u.production_bounds) if u.kind == "pv" else T
        per_ndres[u.name] = min(g, cap)
    per_csp = {c.name: min(g, daylight_cap(c.sf_bounds)) for c in instance.csp_units}
    per_dem = {d.name: g for d in instance.electric_demands}
    per_dem.update({d.name: g for d in instance.thermal_demands})
    return UncertaintyBudgets(
        gamma_dam=g,
        gamma_srm_up=g,
        gamma_srm_down=g,
        gamma_per_csp=per_csp,
        gamma_per_ndres=per_ndres,
        gamma_per_demand=per_dem,
    )


def _solve_cost(instance, budgets, market_set, options):
    deterministic = (
        budgets.gamma_dam == 0
        and budgets.gamma_srm_up == 0
        and budgets.gamma_srm_down == 0
        and all(g == 0 for g in budgets.gamma_per_csp.values())
        and all(g == 0 for g in budgets.gamma_per_ndres.values())
        and all(g == 0 for g in budgets.gamma_per_demand.values())
    )
    if deterministic:
        model = build_deterministic(instance, market_set)
    else:
        model = build_robust(instance, budgets, market_set)
    sol = solve(model, options)
    if sol.status != "optimal":
        raise RuntimeError(f"solve failed with status {sol.status}")
    dec = extract_first_stage(sol, instance, market_set)
    return -sol.objective_value, sol, dec


def budget_sweep(
    instance: RvppInstance,
    gamma_range,
    market_set: MarketSet,
    options: SolveOptions | None = None,
) -> list:
    """Cost and trade aggregates per scalar budget; cost is checked to be
    non-decreasing along the sweep."""
    options = options or SolveOptions(rel_gap_target=1e-6)
    dt = instance.delta_t
    points = []
    for gamma in gamma_range:
        if not 0 <= gamma <= instance.T:
            raise ValueError(f"gamma {gamma} outside [0, {instance.T}]")
        try:
            cost, sol, dec = _solve_cost(
                instance, scaled_budgets(instance, gamma), market_set, options
            )
        except RuntimeError as exc:
            raise RuntimeError(f"sweep aborted at gamma={gamma}: {exc}") from exc
        points.append(
            SweepPoint(
                gamma=int(gamma),
                cost=cost,
                energy_sold=float(np.sum(np.maximum(dec.p_da, 0.0)) * dt),
                energy_bought=float(np.sum(np.maximum(-dec.p_da, 0.0)) * dt),
                heat_bought=float(np.sum(dec.h_hpa) * dt),
                reserve_up=float(np.sum(dec.r_sr_up)),
                reserve_down=float(np.sum(dec.r_sr_down)),
            )
        )
    gammas = [p.gamma for p in points]
    if gammas == sorted(gammas):
        for a, b in zip(points, points[1:]):
            tol = 2.0 * options.rel_gap_target * max(abs(a.cost), abs(b.cost), 1.0) + 1e-9
            if b.cost < a.cost - tol:
                raise RuntimeError(
                    f"budget sweep is not monotone: cost({b.gamma})={b.cost} "
                    f"< cost({a.gamma})={a.cost}"
                )
    return points


def strategy_matrix(
    instance: RvppInstance,
    strategies=None,
    market_labels=MARKET_SET_LABELS,
    options: SolveOptions | None = None,
    check_ordering: bool = True,
) -> dict:
    """Cost per (conservatism strategy, market participation set)."""
    options = options or SolveOptions(rel_gap_target=1e-6)
    strategies = list(strategies or STRATEGY_PRESETS)
    out = {}
    for strat in strategies:
        budgets = preset_budgets_for(strat, instance)
        for label in market_labels:
            cost, sol, _ = _solve_cost(instance, budgets, market_set_from_label(label), options)
            out[(strat, label)] = cost
    if check_ordering:
        _check_matrix_ordering(out, strategies, market_labels, options.rel_gap_target)
    return out


def _check_matrix_ordering(matrix, strategies, labels, gap):
    def tol(a, b):
        return 2.0 * gap * max(abs(a), abs(b), 1.0) + 1e-9

    chains = [
        ("dam", "dam+hpa", "dam+srm+hpa"),
        ("dam", "dam+srm", "dam+srm+hpa"),
    ]
    for strat in strategies:
        for chain in chains:
            present = [c for c in chain if c in labels]
            for a, b in zip(present, present[1:]):
                ca, cb = matrix[(strat, a)], matrix[(strat, b)]
                if cb > ca + tol(ca, cb):
                    raise RuntimeError(
                        f"market-set ordering violated for {strat}: "
                        f"cost({b})={cb} > cost({a})={ca}"
                    )


def hpa_price_sensitivity(
    instance: RvppInstance,
    price_variants,
    budgets: UncertaintyBudgets | None = None,
    options: SolveOptions | None = None,
) -> list:
    """Cost per heat-contract price variant (label, per-period series or flat
    scalar), with the full market set active."""
    from dataclasses import replace

    options = options or SolveOptions(rel_gap_target=1e-6)
    budgets = budgets if budgets is not None else instance.budgets
    out = []
    for label, series in price_variants:
        hpa = np.full(instance.T, float(series)) if np.isscalar(series) else np.asarray(series, float)
        variant = replace(instance, market=replace(instance.market, hpa_price=hpa))
        cost, _, _ = _solve_cost(variant, budgets, MarketSet(), options)
        out.append((label, cost))
    return out


# ---------------------------------------------------------------------------
# Scenario sampling
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SampledScenario:
    index: int
    dam_price: np.ndarray
    srm_up_price: np.ndarray
    srm_down_price: np.ndarray
    production: dict  # ndres name -> MW series
    sf_thermal: dict  # csp name -> MW series
    electric_load: dict  # demand name -> MW series
    thermal_load: dict  # demand name -> MW series


def _draw(rng, bounds, distribution):
    lower, upper, median = bounds.lower, bounds.upper, bounds.median
    if distribution == "uniform":
        return rng.uniform(lower, upper)
    if distribution == "triangular":
        out = np.empty(len(lower))
        for i in range(len(lower)):
            if upper[i] - lower[i] <= 1e-12:
                out[i] = lower[i]
            else:
                mode = min(max(median[i], lower[i]), upper[i])
                out[i] = rng.triangular(lower[i], mode, upper[i])
        return out
    raise ValueError(f"unknown distribution '{distribution}' (use uniform or triangular)")


def sample_scenarios(
    instance: RvppInstance, n: int, seed: int, distribution: str = "uniform"
) -> list:
    """n in-bounds realizations of every uncertain series, reproducible from
    the seed."""
    if n < 1:
        raise ValueError("need at least one scenario")
    if distribution not in ("uniform", "triangular"):
        raise ValueError(f"unknown distribution '{distribution}' (use uniform or triangular)")
    rng = np.random.default_rng(seed)
    m = instance.market
    out = []
    for k in range(n):
        out.append(
            SampledScenario(
                index=k,
                dam_price=_draw(rng, m.dam_price, distribution),
                srm_up_price=_draw(rng, m.srm_up_price, distribution),
                srm_down_price=_draw(rng, m.srm_down_price, distribution),
                production={
                    u.name: _draw(rng, u.production_bounds, distribution)
                    for u in instance.ndres_units
                },
                sf_thermal={
                    c.name: _draw(rng, c.sf_bounds, distribution) for c in instance.csp_units
                },
                electric_load={
                    d.name: _draw(rng, d.consumption_bounds, distribution)
                    for d in instance.electric_demands
                },
                thermal_load={
                    d.name: _draw(rng, d.consumption_bounds, distribution)
                    for d in instance.thermal_demands
                },
            )
        )
    return out


# ---------------------------------------------------------------------------
# Out-of-sample evaluation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PenaltyConfig:
    """Super-marginal prices on unserved balance and undeliverable reserve."""

    energy_eur_per_mwh: float
    heat_eur_per_mwh: float
    reserve_eur_per_mw: float

    @classmethod
    def default_for(cls, instance: RvppInstance) -> "PenaltyConfig":
        anchor = 1.5 * float(np.max(instance.market.dam_price.upper))
        return cls(
            energy_eur_per_mwh=anchor,
            heat_eur_per_mwh=anchor,
            reserve_eur_per_mw=anchor,
        )


@dataclass(frozen=True)
class ScenarioOutcome:
    index: int
    cost: float
    penalty: float
    net: float


@dataclass(frozen=True)
class OutOfSampleReport:
    avg_cost: float
    avg_penalty: float
    avg_net: float
    outcomes: tuple
    solve_seconds: float


def out_of_sample(
    first_stage: FirstStageDecision,
    instance: RvppInstance,
    scenarios,
    penalty_config: PenaltyConfig | None = None,
    options: SolveOptions | None = None,
) -> OutOfSampleReport:
    """Replay a committed first stage against sampled realizations.

    Trades and unit commitment are frozen; continuous dispatch re-optimizes
    within realized bounds. Shortfalls on the settled electric balance, the
    heat balance, and reserve deliverability are priced at the penalty
    configuration. Reported cost excludes penalties; net adds them.
    """
    penalty = penalty_config or PenaltyConfig.default_for(instance)
    options = options or SolveOptions(rel_gap_target=1e-6)
    t0 = time.perf_counter()
    outcomes = []
    for sc in scenarios:
        model = _recourse_model(first_stage, instance, sc, penalty)
        sol = solve(model, options)
        if sol.status != "optimal":
            raise RuntimeError(f"recourse failed for scenario {sc.index}: {sol.status}")
        op_cost = _op_cost_of(sol.assignment, instance)
        pen = _penalty_of(sol.assignment, instance, penalty)
        market_cost = _market_cost_of(first_stage, instance, sc)
        cost = market_cost + op_cost
        outcomes.append(
            ScenarioOutcome(index=sc.index, cost=cost, penalty=pen, net=cost + pen)
        )
    avg_cost = float(np.mean([o.cost for o in outcomes]))
    avg_penalty = float(np.mean([o.penalty for o in outcomes]))
    return OutOfSampleReport(
        avg_cost=avg_cost,
        avg_penalty=avg_penalty,
        avg_net=avg_cost + avg_penalty,
        outcomes=tuple(outcomes),
        solve_seconds=time.perf_counter() - t0,
    )


def s_el(t):
    return f"slack_el[{t}]", f"spill_el[{t}]"


def s_heat(t):
    return f"slack_heat[{t}]", f"spill_heat[{t}]"


def s_res(direction, t):
    return f"slack_res{direction}[{t}]"


def s_feed(c, t):
    return f"slack_feed[{c},{t}]"


def _recourse_model(
    dec: FirstStageDecision, instance: RvppInstance, sc: SampledScenario, penalty: PenaltyConfig
) -> MilpModel:
    """Linear re-dispatch with frozen trades and commitment."""
    T, dt = instance.T, instance.delta_t
    model = MilpModel(name=f"recourse-{sc.index}")
    obj = {}

    for u in instance.ndres_units:
        cap_up = min(instance.market.t_sr * u.srm_ramp_up, u.p_max)
        cap_dn = min(instance.market.t_sr * u.srm_ramp_down, u.p_max)
        for t in range(1, T + 1):
            model.add_var(v_p(u.name, t), upper=u.p_max)
            model.add_var(v_rup(u.name, t), upper=cap_up)
            model.add_var(v_rdn(u.name, t), upper=cap_dn)
            obj[v_p(u.name, t)] = u.op_cost * dt
            model.add_constraint(
                f"res_cap[{u.name},{t}]",
                {v_p(u.name, t): 1.0, v_rup(u.name, t): 1.0},
                LE,
                float(sc.production[u.name][t - 1]),
            )
            model.add_constraint(
                f"res_floor[{u.name},{t}]",
                {v_p(u.name, t): 1.0, v_rdn(u.name, t): -1.0},
                GE,
                u.p_min,
            )

    for c in instance.csp_units:
        _recourse_csp(model, obj, dec, instance, c, sc, penalty)

    for d in instance.electric_demands:
        cap_up = min(instance.market.t_sr * d.srm_ramp_up, d.p_max)
        cap_dn = min(instance.market.t_sr * d.srm_ramp_down, d.p_max)
        for t in range(1, T + 1):
            model.add_var(v_pd(d.name, t), upper=d.p_max)
            model.add_var(v_rdu(d.name, t), upper=cap_up)
            model.add_var(v_rdd(d.name, t), upper=cap_dn)
            model.add_constraint(
                f"ed_floor_forecast[{d.name},{t}]",
                {v_pd(d.name, t): 1.0},
                GE,
                float(sc.electric_load[d.name][t - 1]),
            )
            model.add_constraint(
                f"ed_floor_flex[{d.name},{t}]",
                {v_pd(d.name, t): 1.0, v_rdu(d.name, t): -1.0},
                GE,
                d.p_min,
            )
            model.add_constraint(
                f"ed_cap_flex[{d.name},{t}]",
                {v_pd(d.name, t): 1.0, v_rdd(d.name, t): 1.0},
                LE,
                d.p_max,
            )
            model.add_constraint(
                f"ed_res_up_beta[{d.name},{t}]",
                {v_rdu(d.name, t): 1.0, v_pd(d.name, t): -d.beta_up[t - 1]},
                LE,
                0.0,
            )
            model.add_constraint(
                f"ed_res_dn_beta[{d.name},{t}]",
                {v_rdd(d.name, t): 1.0, v_pd(d.name, t): -d.beta_down[t - 1]},
                LE,
                0.0,
            )
        terms = {}
        for t in range(1, T + 1):
            terms[v_pd(d.name, t)] = dt
            terms[v_rdu(d.name, t)] = -dt
        model.add_constraint(f"ed_min_energy[{d.name}]", terms, GE, d.min_energy)

    for d in instance.thermal_demands:
        for t in range(1, T + 1):
            model.add_var(v_hd(d.name, t), lower=d.h_min, upper=d.h_max)
            model.add_constraint(
                f"td_floor_forecast[{d.name},{t}]",
                {v_hd(d.name, t): 1.0},
                GE,
                float(sc.thermal_load[d.name][t - 1]),
            )
        model.add_constraint(
            f"td_min_energy[{d.name}]",
            {v_hd(d.name, t): dt for t in range(1, T + 1)},
            GE,
            d.min_energy,
        )

    # balance with slack, reserve deliverability with slack
    for t in range(1, T + 1):
        short, surp = s_el(t)
        model.add_var(short)
        model.add_var(surp)
        obj[short] = penalty.energy_eur_per_mwh * dt
        obj[surp] = penalty.energy_eur_per_mwh * dt
        terms = {short: 1.0, surp: -1.0}
        for u in instance.ndres_units:
            terms[v_p(u.name, t)] = 1.0
        for c in instance.csp_units:
            terms[v_p(c.name, t)] = 1.0
        for d in instance.electric_demands:
            terms[v_pd(d.name, t)] = -1.0
        model.add_constraint(f"bal[no,{t}]", terms, EQ, float(dec.p_da[t - 1]))

        hshort, hsurp = s_heat(t)
        model.add_var(hshort)
        model.add_var(hsurp)
        obj[hshort] = penalty.heat_eur_per_mwh * dt
        obj[hsurp] = penalty.heat_eur_per_mwh * dt
        hterms = {hshort: 1.0, hsurp: -1.0}
        for c in instance.csp_units:
            hterms[v_hout(c.name, t)] = 1.0
        for d in instance.thermal_demands:
            hterms[v_hd(d.name, t)] = -1.0
        model.add_constraint(f"heat[{t}]", hterms, EQ, -float(dec.h_hpa[t - 1]))

        for direction, traded in (("u", dec.r_sr_up), ("d", dec.r_sr_down)):
            slack = s_res(direction, t)
            model.add_var(slack)
            obj[slack] = penalty.reserve_eur_per_mw
            terms = {slack: 1.0}
            namer = v_rup if direction == "u" else v_rdn
            for u in instance.ndres_units:
                terms[namer(u.name, t)] = 1.0
            for c in instance.csp_units:
                terms[namer(c.name, t)] = 1.0
            dnamer = v_rdu if direction == "u" else v_rdd
            for d in instance.electric_demands:
                terms[dnamer(d.name, t)] = 1.0
            model.add_constraint(
                f"res_deliver[{direction},{t}]", terms, GE, float(traded[t - 1])
            )

    model.set_objective("min", obj)
    return model


def _recourse_csp(model, obj, dec, instance, c, sc, penalty):
    T, dt = instance.T, instance.delta_t
    name = c.name
    sched = dec.csp[name]
    thermal, electric = pw_grid(c)
    npts = len(thermal)
    t_sr = instance.market.t_sr
    cap_up = min(t_sr * c.srm_ramp_up, c.srm_capacity_share * c.turbine_max)
    cap_dn = min(t_sr * c.srm_ramp_down, c.srm_capacity_share * c.turbine_max)

    model.add_var(v_sig(name, "u"), upper=1.0)
    model.add_var(v_sig(name, "d"), upper=1.0)
    for t in range(1, T + 1):
        on = float(sched.on[t - 1])
        start = float(sched.startup[t - 1])
        charging = float(sched.ts_charging_mode[t - 1])
        model.add_var(v_psf(name, t), upper=c.sf_max_thermal)
        model.add_var(v_ppb(name, t), upper=c.pb_max)
        model.add_var(v_hout(name, t))
        model.add_var(v_tsc(name, t), upper=c.ts_charge_max)
        model.add_var(v_tsd(name, t), upper=c.ts_discharge_max)
        model.add_var(v_ets(name, t), lower=c.ts_e_min, upper=c.ts_e_max)
        model.add_var(v_p(name, t), upper=c.turbine_max)
        model.add_var(v_rup(name, t), upper=cap_up)
        model.add_var(v_rdn(name, t), upper=cap_dn)
        for direction in ("u", "d"):
            model.add_var(f"rts{direction}[{name},{t}]")
            for mode in ("c", "d"):
                model.add_var(f"rts{mode}{direction}[{name},{t}]")
        feed = s_feed(name, t)
        model.add_var(feed)
        obj[feed] = penalty.heat_eur_per_mwh * dt
        obj[v_p(name, t)] = c.op_cost * dt
        obj[v_hout(name, t)] = c.op_cost * dt

        model.add_constraint(
            f"sf_cap[{name},{t}]",
            {v_psf(name, t): 1.0},
            LE,
            float(sc.sf_thermal[name][t - 1]),
        )
        model.add_constraint(
            f"pb_feed[{name},{t}]",
            {
                v_ppb(name, t): 1.0,
                v_psf(name, t): -1.0,
                v_hout(name, t): 1.0 / c.heat_efficiency,
                v_tsd(name, t): -1.0,
                v_tsc(name, t): 1.0,
                feed: -1.0,
            },
            EQ,
            -c.startup_loss_k * c.pb_max * start,
        )
        model.add_constraint(
            f"pb_cap[{name},{t}]",
            {v_ppb(name, t): 1.0, f"rtsu[{name},{t}]": 1.0},
            LE,
            c.pb_max * on,
        )
        model.add_constraint(
            f"pb_floor[{name},{t}]",
            {v_ppb(name, t): 1.0, f"rtsd[{name},{t}]": -1.0},
            GE,
            c.pb_min * on,
        )
        model.add_constraint(
            f"csp_el_cap[{name},{t}]",
            {v_p(name, t): 1.0, v_rup(name, t): 1.0},
            LE,
            c.turbine_max,
        )
        for s in SCENARIOS:
            active = sched.pw_active[t - 1, :, SCENARIOS.index(s)]
            in_terms = {}
            out_terms = {}
            sum_terms = {}
            for n in range(npts):
                xv = v_x(name, t, n, s)
                model.add_var(xv, upper=float(active[n]))
                in_terms[xv] = thermal[n]
                out_terms[xv] = electric[n]
                sum_terms[xv] = 1.0
            in_terms[v_ppb(name, t)] = -1.0
            out_terms[v_p(name, t)] = -1.0
            if s == "up":
                in_terms[f"rtsu[{name},{t}]"] = -1.0
                out_terms[v_rup(name, t)] = -1.0
            elif s == "dn":
                in_terms[f"rtsd[{name},{t}]"] = 1.0
                out_terms[v_rdn(name, t)] = 1.0
            model.add_constraint(f"pw_in[{name},{t},{s}]", in_terms, EQ, 0.0)
            model.add_constraint(f"pw_out[{name},{t},{s}]", out_terms, EQ, 0.0)
            model.add_constraint(f"pw_sum[{name},{t},{s}]", sum_terms, EQ, 1.0)

        model.add_constraint(
            f"ts_charge_floor[{name},{t}]",
            {v_tsc(name, t): 1.0, f"rtscu[{name},{t}]": -1.0},
            GE,
            c.ts_charge_min * charging,
        )
        model.add_constraint(
            f"ts_charge_cap[{name},{t}]",
            {v_tsc(name, t): 1.0, f"rtscd[{name},{t}]": 1.0},
            LE,
            c.ts_charge_max * charging,
        )
        model.add_constraint(
            f"ts_dis_cap[{name},{t}]",
            {v_tsd(name, t): 1.0, f"rtsdu[{name},{t}]": 1.0},
            LE,
            c.ts_discharge_max * (1.0 - charging),
        )
        model.add_constraint(
            f"ts_dis_floor[{name},{t}]",
            {v_tsd(name, t): 1.0, f"rtsdd[{name},{t}]": -1.0},
            GE,
            c.ts_discharge_min * (1.0 - charging),
        )
        model.add_constraint(
            f"ts_res_up[{name},{t}]",
            {f"rtsu[{name},{t}]": 1.0, f"rtscu[{name},{t}]": -1.0, f"rtsdu[{name},{t}]": -1.0},
            EQ,
            0.0,
        )
        model.add_constraint(
            f"ts_res_dn[{name},{t}]",
            {f"rtsd[{name},{t}]": 1.0, f"rtscd[{name},{t}]": -1.0, f"rtsdd[{name},{t}]": -1.0},
            EQ,
            0.0,
        )
        if t >= 2:
            model.add_constraint(
                f"ts_energy[{name},{t}]",
                {
                    v_ets(name, t): 1.0,
                    v_ets(name, t - 1): -1.0,
                    v_tsc(name, t): -c.ts_eta_charge * dt,
                    v_tsd(name, t): dt / c.ts_eta_discharge,
                },
                EQ,
                0.0,
            )
        band = c.ts_e_max - c.ts_e_min
        model.add_constraint(
            f"ts_margin_lo[{name},{t}]",
            {v_ets(name, t): 1.0, v_sig(name, "u"): -band},
            GE,
            c.ts_e_min,
        )
        model.add_constraint(
            f"ts_margin_hi[{name},{t}]",
            {v_ets(name, t): 1.0, v_sig(name, "d"): band},
            LE,
            c.ts_e_max,
        )

    model.add_constraint(
        f"ts_cycle[{name}]", {v_ets(name, 1): 1.0, v_ets(name, T): -1.0}, EQ, 0.0
    )
    band = c.ts_e_max - c.ts_e_min
    up_terms = {f"rtsu[{name},{t}]": dt / c.ts_eta_discharge for t in range(1, T + 1)}
    up_terms[v_sig(name, "u")] = -band
    model.add_constraint(f"ts_res_energy_up[{name}]", up_terms, LE, 0.0)
    dn_terms = {f"rtsd[{name},{t}]": c.ts_eta_charge * dt for t in range(1, T + 1)}
    dn_terms[v_sig(name, "d")] = -band
    model.add_constraint(f"ts_res_energy_dn[{name}]", dn_terms, LE, 0.0)


def _op_cost_of(assignment, instance: RvppInstance) -> float:
    dt = instance.delta_t
    cost = 0.0
    for u in instance.ndres_units:
        cost += u.op_cost * dt * sum(
            assignment[v_p(u.name, t)] for t in range(1, instance.T + 1)
        )
    for c in instance.csp_units:
        cost += c.op_cost * dt * sum(
            assignment[v_p(c.name, t)] + assignment[v_hout(c.name, t)]
            for t in range(1, instance.T + 1)
        )
    return float(cost)


def _penalty_of(assignment, instance: RvppInstance, penalty: PenaltyConfig) -> float:
    dt = instance.delta_t
    total = 0.0
    for t in range(1, instance.T + 1):
        short, surp = s_el(t)
        total += penalty.energy_eur_per_mwh * dt * (assignment[short] + assignment[surp])
        hshort, hsurp = s_heat(t)
        total += penalty.heat_eur_per_mwh * dt * (assignment[hshort] + assignment[hsurp])
        total += penalty.reserve_eur_per_mw * (
            assignment[s_res("u", t)] + assignment[s_res("d", t)]
        )
        for c in instance.csp_units:
            total += penalty.heat_eur_per_mwh * dt * assignment[s_feed(c.name, t)]
    return float(total)


def _market_cost_of(dec: FirstStageDecision, instance: RvppInstance, sc: SampledScenario) -> float:
    dt = instance.delta_t
    revenue = float(np.dot(sc.dam_price, dec.p_da) * dt)
    revenue += float(np.dot(sc.srm_up_price, dec.r_sr_up))
    revenue += float(np.dot(sc.srm_down_price, dec.r_sr_down))
    heat_cost = float(np.dot(instance.market.hpa_price, dec.h_hpa) * dt)
    return heat_cost - revenue
