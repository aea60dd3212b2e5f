"""Deterministic market-bidding MILP for the full plant portfolio.

The model covers day-ahead energy trades, secondary reserve capacity in both
directions, heat purchases, CSP internals (solar field, power block with a
piecewise conversion curve and dead band, thermal storage with reserve energy
margins), renewable units, and flexible demands. Every dispatch constraint is
instantiated for the three real-time reserve-activation outcomes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import MarketSet, RvppInstance
from .milp import BINARY, EQ, GE, LE, MilpModel, MilpSolution

# Real-time activation outcomes: settled dispatch, up activation, down
# activation. Signs scale the reserve contribution in each outcome.
SCENARIOS = ("no", "up", "dn")
_SCEN_SIGN = {"no": 0.0, "up": 1.0, "dn": -1.0}


class BuildError(ValueError):
    """Instance data makes the model infeasible by construction."""


def _tag(kind, **kv):
    parts = [f"kind={kind}"]
    parts.extend(f"{k}={v}" for k, v in kv.items())
    return " ".join(parts)


# Variable name helpers shared by the builders, the decoder, and the tests.


def v_pda(t):
    return f"pda[{t}]"


def v_rsr(direction, t):
    return f"rsr{direction}[{t}]"


def v_hhpa(t):
    return f"hhpa[{t}]"


def v_p(u, t):
    return f"p[{u},{t}]"


def v_rup(u, t):
    return f"rup[{u},{t}]"


def v_rdn(u, t):
    return f"rdn[{u},{t}]"


def v_psf(c, t):
    return f"psf[{c},{t}]"


def v_ppb(c, t):
    return f"ppb[{c},{t}]"


def v_hout(c, t):
    return f"hout[{c},{t}]"


def v_tsc(c, t):
    return f"tsc[{c},{t}]"


def v_tsd(c, t):
    return f"tsd[{c},{t}]"


def v_ets(c, t):
    return f"ets[{c},{t}]"


def v_u(c, t):
    return f"u[{c},{t}]"


def v_vsu(c, t):
    return f"vsu[{c},{t}]"


def v_vsd(c, t):
    return f"vsd[{c},{t}]"


def v_uts(c, t):
    return f"uts[{c},{t}]"


def v_rts(c, t, direction):
    return f"rts{direction}[{c},{t}]"


def v_rts_mode(c, t, mode, direction):
    return f"rts{mode}{direction}[{c},{t}]"


def v_sig(c, direction):
    return f"sig{direction}[{c}]"


def v_x(c, t, n, s):
    return f"x[{c},{t},{n},{s}]"


def v_seg(c, t, n, s):
    return f"seg[{c},{t},{n},{s}]"


def v_pd(d, t):
    return f"pd[{d},{t}]"


def v_hd(d, t):
    return f"hd[{d},{t}]"


def v_rdu(d, t):
    return f"rdu[{d},{t}]"


def v_rdd(d, t):
    return f"rdd[{d},{t}]"


def pw_grid(csp):
    """Thermal breakpoints of the conversion curve with the idle origin point
    prepended, and the matching electrical outputs."""
    thermal = np.concatenate(([0.0], csp.pb_breakpoints))
    electric = np.concatenate(([0.0], csp.output_at_breakpoints))
    return thermal, electric


def _static_checks(instance: RvppInstance, market_set: MarketSet) -> None:
    dt, T = instance.delta_t, instance.T
    cap_gen = sum(u.p_max for u in instance.ndres_units) + sum(
        u.turbine_max for u in instance.csp_units
    )
    cap_dem = sum(d.p_max for d in instance.electric_demands)
    if market_set.srm_enabled:
        rcap = instance.market.kappa * (cap_gen - cap_dem)
        if rcap < 0:
            raise BuildError(
                "reserve trading cap is negative: kappa * (generation capacity "
                f"- demand capacity) = {rcap:.3f} MW"
            )
    for u in instance.csp_units:
        if u.pb_min < u.pb_breakpoints[0] - 1e-9:
            raise BuildError(
                f"csp {u.name}: pb_min {u.pb_min} is below the dead-band "
                f"threshold {u.pb_breakpoints[0]}"
            )
        if u.pb_min > u.pb_max:
            raise BuildError(f"csp {u.name}: pb_min above pb_max")
    for d in instance.electric_demands:
        if np.any(d.consumption_bounds.upper > d.p_max + 1e-9):
            raise BuildError(
                f"demand {d.name}: consumption bound exceeds p_max in some period"
            )
    for d in instance.thermal_demands:
        if np.any(d.consumption_bounds.upper > d.h_max + 1e-9):
            raise BuildError(
                f"demand {d.name}: consumption bound exceeds h_max in some period"
            )
        if d.min_energy > d.h_max * dt * T + 1e-9:
            raise BuildError(f"demand {d.name}: min_energy unreachable within h_max")


def build_deterministic(instance: RvppInstance, market_set: MarketSet) -> MilpModel:
    """Build the nominal-value MILP. Uncertain series enter at their nominal
    points: median day-ahead price, upper reserve prices, upper production,
    lower consumption."""
    _static_checks(instance, market_set)
    model = MilpModel(name="rvpp-det")
    _add_variables(model, instance, market_set)
    _add_base_constraints(model, instance, market_set)
    _set_nominal_objective(model, instance, market_set)
    return model


def _add_variables(model: MilpModel, instance: RvppInstance, ms: MarketSet) -> None:
    T, dt = instance.T, instance.delta_t
    m = instance.market
    srm = ms.srm_enabled
    t_sr = m.t_sr

    cap_gen = sum(u.p_max for u in instance.ndres_units) + sum(
        u.turbine_max for u in instance.csp_units
    )
    cap_dem = sum(d.p_max for d in instance.electric_demands)
    res_cap = m.kappa * (cap_gen - cap_dem) if srm else 0.0
    hpa_cap = sum(d.h_max for d in instance.thermal_demands) if ms.hpa_enabled else 0.0

    for t in range(1, T + 1):
        model.add_var(v_pda(t), lower=-np.inf, tag=_tag("dam-trade", t=t))
        model.add_var(v_rsr("u", t), upper=res_cap, tag=_tag("srm-up-trade", t=t))
        model.add_var(v_rsr("d", t), upper=res_cap, tag=_tag("srm-down-trade", t=t))
        model.add_var(v_hhpa(t), upper=hpa_cap, tag=_tag("hpa-heat", t=t))

    for u in instance.ndres_units:
        up_cap = min(t_sr * u.srm_ramp_up, u.p_max) if srm else 0.0
        dn_cap = min(t_sr * u.srm_ramp_down, u.p_max) if srm else 0.0
        for t in range(1, T + 1):
            model.add_var(v_p(u.name, t), upper=u.p_max, tag=_tag("res-prod", u=u.name, t=t))
            model.add_var(v_rup(u.name, t), upper=up_cap, tag=_tag("res-rup", u=u.name, t=t))
            model.add_var(v_rdn(u.name, t), upper=dn_cap, tag=_tag("res-rdn", u=u.name, t=t))

    for c in instance.csp_units:
        name = c.name
        up_cap = (
            min(t_sr * c.srm_ramp_up, c.srm_capacity_share * c.turbine_max)
            if srm
            else 0.0
        )
        dn_cap = (
            min(t_sr * c.srm_ramp_down, c.srm_capacity_share * c.turbine_max)
            if srm
            else 0.0
        )
        thermal, _ = pw_grid(c)
        npts = len(thermal)
        for t in range(1, T + 1):
            model.add_var(v_psf(name, t), upper=c.sf_max_thermal, tag=_tag("sf", u=name, t=t))
            model.add_var(v_ppb(name, t), upper=c.pb_max, tag=_tag("pb-feed", u=name, t=t))
            model.add_var(v_hout(name, t), tag=_tag("csp-heat", u=name, t=t))
            model.add_var(v_tsc(name, t), upper=c.ts_charge_max, tag=_tag("ts-charge", u=name, t=t))
            model.add_var(v_tsd(name, t), upper=c.ts_discharge_max, tag=_tag("ts-discharge", u=name, t=t))
            model.add_var(
                v_ets(name, t), lower=c.ts_e_min, upper=c.ts_e_max, tag=_tag("ts-energy", u=name, t=t)
            )
            model.add_var(v_p(name, t), upper=c.turbine_max, tag=_tag("csp-el", u=name, t=t))
            model.add_var(v_rup(name, t), upper=up_cap, tag=_tag("csp-rup", u=name, t=t))
            model.add_var(v_rdn(name, t), upper=dn_cap, tag=_tag("csp-rdn", u=name, t=t))
            for direction in ("u", "d"):
                cap = 0.0 if not srm else np.inf
                model.add_var(v_rts(name, t, direction), upper=cap, tag=_tag("ts-reserve", u=name, t=t, d=direction))
                for mode in ("c", "d"):
                    model.add_var(
                        v_rts_mode(name, t, mode, direction),
                        upper=cap,
                        tag=_tag("ts-mode-reserve", u=name, t=t, m=mode, d=direction),
                    )
            # commitment status fixed over the initial obligation window
            fixed = None
            if c.initial_on > 0 and t <= min(c.initial_on, T):
                fixed = 1.0
            elif c.initial_off > 0 and t <= min(c.initial_off, T):
                fixed = 0.0
            model.add_var(
                v_u(name, t),
                kind=BINARY,
                lower=fixed if fixed is not None else 0.0,
                upper=fixed if fixed is not None else 1.0,
                tag=_tag("commit", u=name, t=t),
            )
            model.add_var(v_vsu(name, t), kind=BINARY, tag=_tag("startup", u=name, t=t))
            model.add_var(v_vsd(name, t), kind=BINARY, tag=_tag("shutdown", u=name, t=t))
            model.add_var(v_uts(name, t), kind=BINARY, tag=_tag("ts-mode", u=name, t=t))
            for s in SCENARIOS:
                for n in range(npts):
                    model.add_var(v_x(name, t, n, s), upper=1.0, tag=_tag("pw-weight", u=name, t=t, n=n, s=s))
                    model.add_var(v_seg(name, t, n, s), kind=BINARY, tag=_tag("pw-active", u=name, t=t, n=n, s=s))
        share_cap = 1.0 if srm else 0.0
        model.add_var(v_sig(name, "u"), upper=share_cap, tag=_tag("ts-share-up", u=name))
        model.add_var(v_sig(name, "d"), upper=share_cap, tag=_tag("ts-share-dn", u=name))

    for d in instance.electric_demands:
        up_cap = min(t_sr * d.srm_ramp_up, d.p_max) if srm else 0.0
        dn_cap = min(t_sr * d.srm_ramp_down, d.p_max) if srm else 0.0
        for t in range(1, T + 1):
            model.add_var(v_pd(d.name, t), upper=d.p_max, tag=_tag("ed-load", u=d.name, t=t))
            model.add_var(v_rdu(d.name, t), upper=up_cap, tag=_tag("ed-rup", u=d.name, t=t))
            model.add_var(v_rdd(d.name, t), upper=dn_cap, tag=_tag("ed-rdn", u=d.name, t=t))

    for d in instance.thermal_demands:
        for t in range(1, T + 1):
            model.add_var(
                v_hd(d.name, t), lower=d.h_min, upper=d.h_max, tag=_tag("td-load", u=d.name, t=t)
            )


def _add_base_constraints(model: MilpModel, instance: RvppInstance, ms: MarketSet) -> None:
    T, dt = instance.T, instance.delta_t
    m = instance.market

    # electric balance, one row per activation outcome
    for t in range(1, T + 1):
        for s in SCENARIOS:
            sign = _SCEN_SIGN[s]
            terms = {v_pda(t): -1.0}
            if sign > 0:
                terms[v_rsr("u", t)] = -1.0
            elif sign < 0:
                terms[v_rsr("d", t)] = 1.0
            for u in instance.ndres_units:
                terms[v_p(u.name, t)] = 1.0
                if sign > 0:
                    terms[v_rup(u.name, t)] = 1.0
                elif sign < 0:
                    terms[v_rdn(u.name, t)] = -1.0
            for c in instance.csp_units:
                terms[v_p(c.name, t)] = 1.0
                if sign > 0:
                    terms[v_rup(c.name, t)] = 1.0
                elif sign < 0:
                    terms[v_rdn(c.name, t)] = -1.0
            for d in instance.electric_demands:
                terms[v_pd(d.name, t)] = -1.0
                if sign > 0:
                    terms[v_rdu(d.name, t)] = 1.0
                elif sign < 0:
                    terms[v_rdd(d.name, t)] = -1.0
            model.add_constraint(
                f"bal[{s},{t}]", terms, EQ, 0.0, tag=_tag("electric-balance", s=s, t=t)
            )

        heat_terms = {v_hhpa(t): 1.0}
        for c in instance.csp_units:
            heat_terms[v_hout(c.name, t)] = 1.0
        for d in instance.thermal_demands:
            heat_terms[v_hd(d.name, t)] = -1.0
        model.add_constraint(f"heat[{t}]", heat_terms, EQ, 0.0, tag=_tag("heat-balance", t=t))

    # traded power envelopes
    cap_gen = sum(u.p_max for u in instance.ndres_units) + sum(
        u.turbine_max for u in instance.csp_units
    )
    cap_dem = sum(d.p_max for d in instance.electric_demands)
    for t in range(1, T + 1):
        model.add_constraint(
            f"trade_sell_cap[{t}]",
            {v_pda(t): 1.0, v_rsr("u", t): 1.0},
            LE,
            cap_gen,
            tag=_tag("sell-cap", t=t),
        )
        model.add_constraint(
            f"trade_buy_cap[{t}]",
            {v_pda(t): 1.0, v_rsr("d", t): -1.0},
            GE,
            -cap_dem,
            tag=_tag("buy-cap", t=t),
        )

    # renewables
    for u in instance.ndres_units:
        cap = u.production_bounds.upper  # nominal availability
        for t in range(1, T + 1):
            model.add_constraint(
                f"res_cap[{u.name},{t}]",
                {v_p(u.name, t): 1.0, v_rup(u.name, t): 1.0},
                LE,
                cap[t - 1],
                tag=_tag("res-availability", u=u.name, t=t),
            )
            model.add_constraint(
                f"res_floor[{u.name},{t}]",
                {v_p(u.name, t): 1.0, v_rdn(u.name, t): -1.0},
                GE,
                u.p_min,
                tag=_tag("res-floor", u=u.name, t=t),
            )

    for c in instance.csp_units:
        _add_csp_constraints(model, instance, c)

    # electric demands
    for d in instance.electric_demands:
        floor = d.consumption_bounds.lower  # nominal consumption
        for t in range(1, T + 1):
            model.add_constraint(
                f"ed_floor_forecast[{d.name},{t}]",
                {v_pd(d.name, t): 1.0},
                GE,
                floor[t - 1],
                tag=_tag("ed-forecast-floor", u=d.name, t=t),
            )
            model.add_constraint(
                f"ed_floor_flex[{d.name},{t}]",
                {v_pd(d.name, t): 1.0, v_rdu(d.name, t): -1.0},
                GE,
                d.p_min,
                tag=_tag("ed-flex-floor", u=d.name, t=t),
            )
            model.add_constraint(
                f"ed_cap_flex[{d.name},{t}]",
                {v_pd(d.name, t): 1.0, v_rdd(d.name, t): 1.0},
                LE,
                d.p_max,
                tag=_tag("ed-flex-cap", u=d.name, t=t),
            )
            model.add_constraint(
                f"ed_res_up_beta[{d.name},{t}]",
                {v_rdu(d.name, t): 1.0, v_pd(d.name, t): -d.beta_up[t - 1]},
                LE,
                0.0,
                tag=_tag("ed-beta-up", u=d.name, t=t),
            )
            model.add_constraint(
                f"ed_res_dn_beta[{d.name},{t}]",
                {v_rdd(d.name, t): 1.0, v_pd(d.name, t): -d.beta_down[t - 1]},
                LE,
                0.0,
                tag=_tag("ed-beta-down", u=d.name, t=t),
            )
        terms = {}
        for t in range(1, T + 1):
            terms[v_pd(d.name, t)] = dt
            terms[v_rdu(d.name, t)] = -dt
        model.add_constraint(
            f"ed_min_energy[{d.name}]",
            terms,
            GE,
            d.min_energy,
            tag=_tag("ed-min-energy", u=d.name),
        )

    # thermal demands
    for d in instance.thermal_demands:
        floor = d.consumption_bounds.lower
        for t in range(1, T + 1):
            model.add_constraint(
                f"td_floor_forecast[{d.name},{t}]",
                {v_hd(d.name, t): 1.0},
                GE,
                floor[t - 1],
                tag=_tag("td-forecast-floor", u=d.name, t=t),
            )
        model.add_constraint(
            f"td_min_energy[{d.name}]",
            {v_hd(d.name, t): dt for t in range(1, T + 1)},
            GE,
            d.min_energy,
            tag=_tag("td-min-energy", u=d.name),
        )


def _add_csp_constraints(model: MilpModel, instance: RvppInstance, c) -> None:
    T, dt = instance.T, instance.delta_t
    name = c.name
    thermal, electric = pw_grid(c)
    npts = len(thermal)
    sf_cap = c.sf_bounds.upper  # nominal solar-field availability
    u0 = 1 if c.initial_on > 0 else 0

    for t in range(1, T + 1):
        model.add_constraint(
            f"sf_cap[{name},{t}]",
            {v_psf(name, t): 1.0},
            LE,
            sf_cap[t - 1],
            tag=_tag("sf-availability", u=name, t=t),
        )
        # thermal feed into the power block, net of heat service and storage
        model.add_constraint(
            f"pb_feed[{name},{t}]",
            {
                v_ppb(name, t): 1.0,
                v_psf(name, t): -1.0,
                v_hout(name, t): 1.0 / c.heat_efficiency,
                v_tsd(name, t): -1.0,
                v_tsc(name, t): 1.0,
                v_vsu(name, t): c.startup_loss_k * c.pb_max,
            },
            EQ,
            0.0,
            tag=_tag("pb-thermal-feed", u=name, t=t),
        )
        model.add_constraint(
            f"pb_cap[{name},{t}]",
            {v_ppb(name, t): 1.0, v_rts(name, t, "u"): 1.0, v_u(name, t): -c.pb_max},
            LE,
            0.0,
            tag=_tag("pb-cap", u=name, t=t),
        )
        model.add_constraint(
            f"pb_floor[{name},{t}]",
            {v_ppb(name, t): 1.0, v_rts(name, t, "d"): -1.0, v_u(name, t): -c.pb_min},
            GE,
            0.0,
            tag=_tag("pb-floor", u=name, t=t),
        )
        model.add_constraint(
            f"csp_el_cap[{name},{t}]",
            {v_p(name, t): 1.0, v_rup(name, t): 1.0},
            LE,
            c.turbine_max,
            tag=_tag("csp-el-cap", u=name, t=t),
        )

        # piecewise thermal-to-electric conversion per activation outcome
        for s in SCENARIOS:
            sign = _SCEN_SIGN[s]
            in_terms = {v_x(name, t, n, s): thermal[n] for n in range(npts)}
            in_terms[v_ppb(name, t)] = -1.0
            if sign > 0:
                in_terms[v_rts(name, t, "u")] = -1.0
            elif sign < 0:
                in_terms[v_rts(name, t, "d")] = 1.0
            model.add_constraint(
                f"pw_in[{name},{t},{s}]", in_terms, EQ, 0.0, tag=_tag("pw-input", u=name, t=t, s=s)
            )
            out_terms = {v_x(name, t, n, s): electric[n] for n in range(npts)}
            out_terms[v_p(name, t)] = -1.0
            if sign > 0:
                out_terms[v_rup(name, t)] = -1.0
            elif sign < 0:
                out_terms[v_rdn(name, t)] = 1.0
            model.add_constraint(
                f"pw_out[{name},{t},{s}]", out_terms, EQ, 0.0, tag=_tag("pw-output", u=name, t=t, s=s)
            )
            model.add_constraint(
                f"pw_sum[{name},{t},{s}]",
                {v_x(name, t, n, s): 1.0 for n in range(npts)},
                EQ,
                1.0,
                tag=_tag("pw-weights-sum", u=name, t=t, s=s),
            )
            model.add_constraint(
                f"pw_segsum[{name},{t},{s}]",
                {v_seg(name, t, n, s): 1.0 for n in range(npts)},
                LE,
                2.0,
                tag=_tag("pw-active-count", u=name, t=t, s=s),
            )
            for n in range(npts):
                model.add_constraint(
                    f"pw_link[{name},{t},{n},{s}]",
                    {v_x(name, t, n, s): 1.0, v_seg(name, t, n, s): -1.0},
                    LE,
                    0.0,
                    tag=_tag("pw-weight-link", u=name, t=t, n=n, s=s),
                )
                for n2 in range(n + 2, npts):
                    model.add_constraint(
                        f"pw_adj[{name},{t},{n},{n2},{s}]",
                        {v_seg(name, t, n, s): 1.0, v_seg(name, t, n2, s): 1.0},
                        LE,
                        1.0,
                        tag=_tag("pw-adjacency", u=name, t=t, n=n, n2=n2, s=s),
                    )

        # thermal storage power windows per mode, with reserve headroom
        model.add_constraint(
            f"ts_charge_floor[{name},{t}]",
            {
                v_tsc(name, t): 1.0,
                v_rts_mode(name, t, "c", "u"): -1.0,
                v_uts(name, t): -c.ts_charge_min,
            },
            GE,
            0.0,
            tag=_tag("ts-charge-floor", u=name, t=t),
        )
        model.add_constraint(
            f"ts_charge_cap[{name},{t}]",
            {
                v_tsc(name, t): 1.0,
                v_rts_mode(name, t, "c", "d"): 1.0,
                v_uts(name, t): -c.ts_charge_max,
            },
            LE,
            0.0,
            tag=_tag("ts-charge-cap", u=name, t=t),
        )
        model.add_constraint(
            f"ts_dis_cap[{name},{t}]",
            {
                v_tsd(name, t): 1.0,
                v_rts_mode(name, t, "d", "u"): 1.0,
                v_uts(name, t): c.ts_discharge_max,
            },
            LE,
            c.ts_discharge_max,
            tag=_tag("ts-discharge-cap", u=name, t=t),
        )
        model.add_constraint(
            f"ts_dis_floor[{name},{t}]",
            {
                v_tsd(name, t): 1.0,
                v_rts_mode(name, t, "d", "d"): -1.0,
                v_uts(name, t): c.ts_discharge_min,
            },
            GE,
            c.ts_discharge_min,
            tag=_tag("ts-discharge-floor", u=name, t=t),
        )
        model.add_constraint(
            f"ts_res_up[{name},{t}]",
            {
                v_rts(name, t, "u"): 1.0,
                v_rts_mode(name, t, "c", "u"): -1.0,
                v_rts_mode(name, t, "d", "u"): -1.0,
            },
            EQ,
            0.0,
            tag=_tag("ts-reserve-up-split", u=name, t=t),
        )
        model.add_constraint(
            f"ts_res_dn[{name},{t}]",
            {
                v_rts(name, t, "d"): 1.0,
                v_rts_mode(name, t, "c", "d"): -1.0,
                v_rts_mode(name, t, "d", "d"): -1.0,
            },
            EQ,
            0.0,
            tag=_tag("ts-reserve-down-split", u=name, t=t),
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
                tag=_tag("ts-energy-balance", u=name, t=t),
            )
        band = c.ts_e_max - c.ts_e_min
        model.add_constraint(
            f"ts_margin_lo[{name},{t}]",
            {v_ets(name, t): 1.0, v_sig(name, "u"): -band},
            GE,
            c.ts_e_min,
            tag=_tag("ts-energy-floor-margin", u=name, t=t),
        )
        model.add_constraint(
            f"ts_margin_hi[{name},{t}]",
            {v_ets(name, t): 1.0, v_sig(name, "d"): band},
            LE,
            c.ts_e_max,
            tag=_tag("ts-energy-ceiling-margin", u=name, t=t),
        )

    model.add_constraint(
        f"ts_cycle[{name}]",
        {v_ets(name, 1): 1.0, v_ets(name, T): -1.0},
        EQ,
        0.0,
        tag=_tag("ts-cyclic-energy", u=name),
    )
    band = c.ts_e_max - c.ts_e_min
    up_terms = {v_rts(name, t, "u"): dt / c.ts_eta_discharge for t in range(1, T + 1)}
    up_terms[v_sig(name, "u")] = -band
    model.add_constraint(
        f"ts_res_energy_up[{name}]", up_terms, LE, 0.0, tag=_tag("ts-reserve-energy-up", u=name)
    )
    dn_terms = {v_rts(name, t, "d"): c.ts_eta_charge * dt for t in range(1, T + 1)}
    dn_terms[v_sig(name, "d")] = -band
    model.add_constraint(
        f"ts_res_energy_dn[{name}]", dn_terms, LE, 0.0, tag=_tag("ts-reserve-energy-down", u=name)
    )

    # commitment logic and minimum run lengths
    for t in range(1, T + 1):
        terms = {v_u(name, t): 1.0, v_vsu(name, t): -1.0, v_vsd(name, t): 1.0}
        rhs = float(u0) if t == 1 else 0.0
        if t >= 2:
            terms[v_u(name, t - 1)] = -1.0
        model.add_constraint(
            f"uc_logic[{name},{t}]", terms, EQ, rhs, tag=_tag("commit-logic", u=name, t=t)
        )
        model.add_constraint(
            f"uc_excl[{name},{t}]",
            {v_vsu(name, t): 1.0, v_vsd(name, t): 1.0},
            LE,
            1.0,
            tag=_tag("startup-shutdown-exclusive", u=name, t=t),
        )

    n_on = min(c.initial_on, T)
    n_off = min(c.initial_off, T)
    ut, dt_min = c.min_up, c.min_down
    for t in range(n_on + 1, T - ut + 2):
        terms = {v_u(name, tp): 1.0 for tp in range(t, t + ut)}
        terms[v_u(name, t)] = terms.get(v_u(name, t), 0.0) - ut
        rhs = 0.0
        if t >= 2:
            terms[v_u(name, t - 1)] = terms.get(v_u(name, t - 1), 0.0) + ut
        else:
            rhs = -ut * u0
        model.add_constraint(
            f"uc_min_up[{name},{t}]", terms, GE, rhs, tag=_tag("min-up", u=name, t=t)
        )
    for t in range(max(T - ut + 2, 2), T + 1):
        width = T - t + 1
        terms = {v_u(name, tp): 1.0 for tp in range(t, T + 1)}
        terms[v_u(name, t)] = terms.get(v_u(name, t), 0.0) - width
        terms[v_u(name, t - 1)] = terms.get(v_u(name, t - 1), 0.0) + width
        model.add_constraint(
            f"uc_min_up_tail[{name},{t}]", terms, GE, 0.0, tag=_tag("min-up-tail", u=name, t=t)
        )
    for t in range(n_off + 1, T - dt_min + 2):
        terms = {v_u(name, tp): 1.0 for tp in range(t, t + dt_min)}
        terms[v_u(name, t)] = terms.get(v_u(name, t), 0.0) - dt_min
        rhs = float(dt_min)
        if t >= 2:
            terms[v_u(name, t - 1)] = terms.get(v_u(name, t - 1), 0.0) + dt_min
        else:
            rhs = dt_min - dt_min * u0
        model.add_constraint(
            f"uc_min_dn[{name},{t}]", terms, LE, rhs, tag=_tag("min-down", u=name, t=t)
        )
    for t in range(max(T - dt_min + 2, 2), T + 1):
        width = T - t + 1
        terms = {v_u(name, tp): 1.0 for tp in range(t, T + 1)}
        terms[v_u(name, t)] = terms.get(v_u(name, t), 0.0) + width
        terms[v_u(name, t - 1)] = terms.get(v_u(name, t - 1), 0.0) - width
        model.add_constraint(
            f"uc_min_dn_tail[{name},{t}]", terms, LE, float(width), tag=_tag("min-down-tail", u=name, t=t)
        )


def _set_nominal_objective(model: MilpModel, instance: RvppInstance, ms: MarketSet) -> None:
    T, dt = instance.T, instance.delta_t
    m = instance.market
    terms = {}
    dam = m.dam_price.median
    sru = m.srm_up_price.upper
    srd = m.srm_down_price.upper
    for t in range(1, T + 1):
        terms[v_pda(t)] = dam[t - 1] * dt
        terms[v_rsr("u", t)] = sru[t - 1]
        terms[v_rsr("d", t)] = srd[t - 1]
        terms[v_hhpa(t)] = -m.hpa_price[t - 1] * dt
        for u in instance.ndres_units:
            terms[v_p(u.name, t)] = -u.op_cost * dt
        for c in instance.csp_units:
            terms[v_p(c.name, t)] = -c.op_cost * dt
            terms[v_hout(c.name, t)] = -c.op_cost * dt
    model.set_objective("max", terms)


# ---------------------------------------------------------------------------
# Solution decoding
# ---------------------------------------------------------------------------


@dataclass
class CspSchedule:
    p: np.ndarray
    r_up: np.ndarray
    r_down: np.ndarray
    p_sf: np.ndarray
    p_pb: np.ndarray
    heat: np.ndarray
    ts_charge: np.ndarray
    ts_discharge: np.ndarray
    ts_energy: np.ndarray
    on: np.ndarray
    startup: np.ndarray
    shutdown: np.ndarray
    ts_charging_mode: np.ndarray
    r_ts_up: np.ndarray
    r_ts_down: np.ndarray
    r_ts_mode: dict  # (mode, direction) -> array
    sigma_up: float
    sigma_down: float
    pw_weights: np.ndarray  # [T, npts, scenarios]
    pw_active: np.ndarray


@dataclass
class UnitSchedule:
    p: np.ndarray
    r_up: np.ndarray
    r_down: np.ndarray


@dataclass
class DemandSchedule:
    p: np.ndarray
    r_up: np.ndarray
    r_down: np.ndarray


@dataclass
class FirstStageDecision:
    """Market positions plus the internal dispatch behind them."""

    p_da: np.ndarray
    r_sr_up: np.ndarray
    r_sr_down: np.ndarray
    h_hpa: np.ndarray
    ndres: dict = field(default_factory=dict)  # name -> UnitSchedule
    csp: dict = field(default_factory=dict)  # name -> CspSchedule
    electric: dict = field(default_factory=dict)  # name -> DemandSchedule
    thermal: dict = field(default_factory=dict)  # name -> heat array

    def copy_arrays(self):
        return self  # decisions are treated as read-only once extracted


def _arr(assignment, namer, unit, T):
    return np.array([assignment[namer(unit, t)] for t in range(1, T + 1)])


def extract_first_stage(
    solution: MilpSolution, instance: RvppInstance, market_set: MarketSet
) -> FirstStageDecision:
    """Decode an optimal assignment into schedules and verify the per-outcome
    electric balance residuals."""
    if solution.status != "optimal":
        raise ValueError(f"cannot extract from a solution with status {solution.status}")
    a = solution.assignment
    T = instance.T
    dec = FirstStageDecision(
        p_da=np.array([a[v_pda(t)] for t in range(1, T + 1)]),
        r_sr_up=np.array([a[v_rsr("u", t)] for t in range(1, T + 1)]),
        r_sr_down=np.array([a[v_rsr("d", t)] for t in range(1, T + 1)]),
        h_hpa=np.array([a[v_hhpa(t)] for t in range(1, T + 1)]),
    )
    for u in instance.ndres_units:
        dec.ndres[u.name] = UnitSchedule(
            p=_arr(a, v_p, u.name, T),
            r_up=_arr(a, v_rup, u.name, T),
            r_down=_arr(a, v_rdn, u.name, T),
        )
    for c in instance.csp_units:
        npts = len(c.pb_breakpoints) + 1
        weights = np.zeros((T, npts, len(SCENARIOS)))
        active = np.zeros((T, npts, len(SCENARIOS)))
        for t in range(1, T + 1):
            for n in range(npts):
                for k, s in enumerate(SCENARIOS):
                    weights[t - 1, n, k] = a[v_x(c.name, t, n, s)]
                    active[t - 1, n, k] = a[v_seg(c.name, t, n, s)]
        dec.csp[c.name] = CspSchedule(
            p=_arr(a, v_p, c.name, T),
            r_up=_arr(a, v_rup, c.name, T),
            r_down=_arr(a, v_rdn, c.name, T),
            p_sf=_arr(a, v_psf, c.name, T),
            p_pb=_arr(a, v_ppb, c.name, T),
            heat=_arr(a, v_hout, c.name, T),
            ts_charge=_arr(a, v_tsc, c.name, T),
            ts_discharge=_arr(a, v_tsd, c.name, T),
            ts_energy=_arr(a, v_ets, c.name, T),
            on=_arr(a, v_u, c.name, T),
            startup=_arr(a, v_vsu, c.name, T),
            shutdown=_arr(a, v_vsd, c.name, T),
            ts_charging_mode=_arr(a, v_uts, c.name, T),
            r_ts_up=np.array([a[v_rts(c.name, t, "u")] for t in range(1, T + 1)]),
            r_ts_down=np.array([a[v_rts(c.name, t, "d")] for t in range(1, T + 1)]),
            r_ts_mode={
                (mode, direction): np.array(
                    [a[v_rts_mode(c.name, t, mode, direction)] for t in range(1, T + 1)]
                )
                for mode in ("c", "d")
                for direction in ("u", "d")
            },
            sigma_up=a[v_sig(c.name, "u")],
            sigma_down=a[v_sig(c.name, "d")],
            pw_weights=weights,
            pw_active=active,
        )
    for d in instance.electric_demands:
        dec.electric[d.name] = DemandSchedule(
            p=_arr(a, v_pd, d.name, T),
            r_up=_arr(a, v_rdu, d.name, T),
            r_down=_arr(a, v_rdd, d.name, T),
        )
    for d in instance.thermal_demands:
        dec.thermal[d.name] = _arr(a, v_hd, d.name, T)

    _check_balance(dec, instance)
    if not market_set.srm_enabled:
        for arr in (dec.r_sr_up, dec.r_sr_down):
            if np.any(np.abs(arr) > 1e-9):
                raise ValueError("reserve traded although the reserve market is disabled")
    if not market_set.hpa_enabled and np.any(np.abs(dec.h_hpa) > 1e-9):
        raise ValueError("heat purchased although the purchase agreement is disabled")
    return dec


def balance_residuals(dec: FirstStageDecision, instance: RvppInstance) -> dict:
    """Electric balance residual series for each activation outcome."""
    prod = sum((s.p for s in dec.ndres.values()), np.zeros(instance.T))
    prod = prod + sum((s.p for s in dec.csp.values()), np.zeros(instance.T))
    load = sum((s.p for s in dec.electric.values()), np.zeros(instance.T))
    rup = sum((s.r_up for s in dec.ndres.values()), np.zeros(instance.T)) + sum(
        (s.r_up for s in dec.csp.values()), np.zeros(instance.T)
    ) + sum((s.r_up for s in dec.electric.values()), np.zeros(instance.T))
    rdn = sum((s.r_down for s in dec.ndres.values()), np.zeros(instance.T)) + sum(
        (s.r_down for s in dec.csp.values()), np.zeros(instance.T)
    ) + sum((s.r_down for s in dec.electric.values()), np.zeros(instance.T))
    return {
        "no": prod - load - dec.p_da,
        "up": prod + rup - load - dec.p_da - dec.r_sr_up,
        "dn": prod - rdn - load - dec.p_da + dec.r_sr_down,
    }


def _check_balance(dec: FirstStageDecision, instance: RvppInstance) -> None:
    cap = sum(u.p_max for u in instance.ndres_units) + sum(
        u.turbine_max for u in instance.csp_units
    ) + sum(d.p_max for d in instance.electric_demands)
    tol = 1e-6 * (1.0 + cap)
    for s, resid in balance_residuals(dec, instance).items():
        worst = float(np.max(np.abs(resid))) if len(resid) else 0.0
        if worst > tol:
            raise ValueError(f"balance residual {worst:.3e} in outcome '{s}' exceeds {tol:.3e}")


def total_cost(dec: FirstStageDecision, instance: RvppInstance) -> float:
    """Net cost of a decision at nominal prices (positive = net expense)."""
    dt = instance.delta_t
    m = instance.market
    revenue = float(np.dot(m.dam_price.median, dec.p_da) * dt)
    revenue += float(np.dot(m.srm_up_price.upper, dec.r_sr_up))
    revenue += float(np.dot(m.srm_down_price.upper, dec.r_sr_down))
    cost = float(np.dot(m.hpa_price, dec.h_hpa) * dt)
    for u in instance.ndres_units:
        cost += u.op_cost * float(np.sum(dec.ndres[u.name].p)) * dt
    for c in instance.csp_units:
        sched = dec.csp[c.name]
        cost += c.op_cost * float(np.sum(sched.p) + np.sum(sched.heat)) * dt
    return cost - revenue
