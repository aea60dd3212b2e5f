"""Bundled synthetic instances.

``default_instance`` is the 24-period reference portfolio (one CSP, two wind
farms, three PV plants, three electric and two thermal demands) used by the
experiment harnesses. ``tiny_corpus`` holds desk-size instances small enough
for exhaustive subset enumeration, and ``random_instance`` generates seeded
small instances for equivalence testing.
"""

from __future__ import annotations

import numpy as np

from .core import (
    BoundSeries,
    CspUnit,
    ElectricDemand,
    MarketData,
    NdResUnit,
    RvppInstance,
    ThermalDemand,
    TimeGrid,
    UncertaintyBudgets,
)

HOURS = np.arange(1, 25)


def _band(median, rel_down, rel_up, cap=None, floor=0.0):
    median = np.asarray(median, dtype=float)
    lower = np.maximum(floor, median * (1.0 - rel_down))
    upper = median * (1.0 + rel_up)
    if cap is not None:
        upper = np.minimum(cap, upper)
    median = np.clip(median, lower, upper)
    return BoundSeries(median=median, lower=lower, upper=upper)


def _solar_shape() -> np.ndarray:
    shape = np.exp(-(((HOURS - 13.5) / 3.5) ** 2))
    shape[shape < 0.04] = 0.0
    return shape


def default_instance() -> RvppInstance:
    """24-hour reference portfolio with daylight-limited solar sources."""
    T = 24
    solar = _solar_shape()
    work = np.where((HOURS >= 8) & (HOURS <= 20), 1.0, 0.25)
    daywide = np.exp(-(((HOURS - 13.0) / 4.5) ** 2))
    morning = np.exp(-(((HOURS - 9.0) / 1.6) ** 2))
    evening = np.exp(-(((HOURS - 20.5) / 1.8) ** 2))

    sf_median = 285.0 * solar
    csp = CspUnit(
        name="csp1",
        sf_max_thermal=300.0,
        pb_breakpoints=np.array([35.0, 80.0, 140.0]),
        pb_efficiencies=np.array([0.27, 0.36, 55.0 / 140.0]),
        pb_max=140.0,
        pb_min=35.0,
        turbine_max=55.0,
        turbine_min=5.0,
        startup_loss_k=0.2,
        heat_efficiency=0.90,
        min_up=6,
        min_down=6,
        initial_on=0,
        initial_off=0,
        ts_e_max=1100.0,
        ts_e_min=110.0,
        ts_charge_max=140.0,
        ts_charge_min=0.0,
        ts_discharge_max=115.0,
        ts_discharge_min=0.0,
        ts_eta_charge=0.95,
        ts_eta_discharge=0.95,
        srm_ramp_up=25.0,
        srm_ramp_down=25.0,
        srm_capacity_share=0.5,
        op_cost=25.0,
        sf_bounds=_band(sf_median, 0.25, 0.15, cap=300.0),
    )

    def wind(name, base, amp, phase):
        profile = base + amp * np.sin(2 * np.pi * (HOURS - phase) / 24.0)
        return NdResUnit(
            name=name,
            kind="wind",
            p_max=50.0,
            p_min=0.0,
            srm_ramp_up=15.0,
            srm_ramp_down=25.0,
            op_cost=15.0,
            production_bounds=_band(profile, 0.22, 0.20, cap=50.0),
        )

    def pv(name, scale):
        return NdResUnit(
            name=name,
            kind="pv",
            p_max=50.0,
            p_min=0.0,
            srm_ramp_up=10.0,
            srm_ramp_down=25.0,
            op_cost=7.5,
            production_bounds=_band(scale * solar, 0.25, 0.15, cap=50.0),
        )

    ndres = (
        wind("wf1", 28.0, 12.0, 3.0),
        wind("wf2", 24.0, 9.0, 11.0),
        pv("pv1", 45.0),
        pv("pv2", 42.0),
        pv("pv3", 38.0),
    )

    flat10 = np.full(T, 0.10)
    electric = (
        ElectricDemand(
            name="ed_industry",
            p_max=70.0,
            p_min=2.0,
            min_energy=600.0,
            beta_up=flat10,
            beta_down=flat10,
            srm_ramp_up=30.0,
            srm_ramp_down=30.0,
            consumption_bounds=_band(25.0 + 20.0 * work, 0.10, 0.12, cap=70.0),
        ),
        ElectricDemand(
            name="ed_service",
            p_max=80.0,
            p_min=10.0,
            min_energy=800.0,
            beta_up=flat10,
            beta_down=flat10,
            srm_ramp_up=25.0,
            srm_ramp_down=25.0,
            consumption_bounds=_band(20.0 + 38.0 * daywide, 0.10, 0.12, cap=80.0),
        ),
        ElectricDemand(
            name="ed_residential",
            p_max=60.0,
            p_min=5.0,
            min_energy=600.0,
            beta_up=flat10,
            beta_down=flat10,
            srm_ramp_up=10.0,
            srm_ramp_down=10.0,
            consumption_bounds=_band(
                16.0 + 24.0 * morning + 30.0 * evening, 0.10, 0.12, cap=60.0
            ),
        ),
    )

    thermal = (
        ThermalDemand(
            name="td_industry",
            h_max=80.0,
            h_min=0.0,
            min_energy=700.0,
            consumption_bounds=_band(30.0 + 15.0 * work, 0.12, 0.15, cap=80.0),
        ),
        ThermalDemand(
            name="td_residential",
            h_max=70.0,
            h_min=0.0,
            min_energy=700.0,
            consumption_bounds=_band(
                14.0 + 22.0 * morning + 26.0 * evening, 0.12, 0.15, cap=70.0
            ),
        ),
    )

    dam_median = np.array(
        [
            48.0, 45.0, 44.0, 44.0, 46.0, 52.0,
            68.0, 85.0, 95.0, 100.0, 103.0, 105.0,
            104.0, 100.0, 97.0, 99.0, 106.0, 118.0,
            132.0, 140.0, 138.0, 120.0, 90.0, 62.0,
        ]
    )
    dam_dev_down = 8.0 + 0.10 * dam_median
    dam_dev_up = 8.0 + 0.12 * dam_median
    dam_price = BoundSeries(
        median=dam_median, lower=dam_median - dam_dev_down, upper=dam_median + dam_dev_up
    )

    sr_shape = np.clip(0.35 + 0.65 * daywide + 0.30 * evening, 0.0, 1.0)
    sru_upper = 8.0 + 21.0 * sr_shape
    srd_upper = 4.0 + 18.0 * sr_shape
    srm_up = BoundSeries(
        median=0.78 * sru_upper, lower=0.55 * sru_upper, upper=sru_upper
    )
    srm_down = BoundSeries(
        median=0.70 * srd_upper, lower=0.40 * srd_upper, upper=srd_upper
    )

    hpa = np.array([70.0] * 6 + [95.0] * 3 + [110.0] * 9 + [120.0] * 4 + [90.0] * 2)

    market = MarketData(
        dam_price=dam_price,
        srm_up_price=srm_up,
        srm_down_price=srm_down,
        hpa_price=hpa,
        kappa=0.5,
        t_sr=2.0,
    )

    instance = RvppInstance(
        time_grid=TimeGrid(periods=tuple(range(1, T + 1)), delta_t=1.0),
        csp_units=(csp,),
        ndres_units=ndres,
        electric_demands=electric,
        thermal_demands=thermal,
        market=market,
        budgets=preset_budgets_for("balanced"),
    )
    return instance


# Conservatism presets: (prices, wind, pv, solar-field, demands).
STRATEGY_PRESETS = {
    "deterministic": (0, 0, 0, 0, 0),
    "optimistic": (3, 3, 2, 2, 3),
    "balanced": (6, 6, 4, 4, 6),
    "pessimistic": (9, 9, 6, 6, 9),
}


def preset_budgets_for(strategy: str, instance: RvppInstance | None = None) -> UncertaintyBudgets:
    """Budget preset by conservatism level; unit maps are filled from the
    instance when given, else from the default portfolio layout."""
    if strategy not in STRATEGY_PRESETS:
        raise ValueError(
            f"unknown strategy '{strategy}' (have {sorted(STRATEGY_PRESETS)})"
        )
    prices, wind_g, pv_g, sf_g, dem_g = STRATEGY_PRESETS[strategy]
    if instance is None:
        per_csp = {"csp1": sf_g}
        per_ndres = {"wf1": wind_g, "wf2": wind_g, "pv1": pv_g, "pv2": pv_g, "pv3": pv_g}
        per_dem = {
            name: dem_g
            for name in (
                "ed_industry",
                "ed_service",
                "ed_residential",
                "td_industry",
                "td_residential",
            )
        }
    else:
        T = instance.T
        prices = min(prices, T)
        per_csp = {u.name: min(sf_g, T) for u in instance.csp_units}
        per_ndres = {
            u.name: min(wind_g if u.kind == "wind" else pv_g, T)
            for u in instance.ndres_units
        }
        per_dem = {d.name: min(dem_g, T) for d in instance.electric_demands}
        per_dem.update({d.name: min(dem_g, T) for d in instance.thermal_demands})
    return UncertaintyBudgets(
        gamma_dam=prices,
        gamma_srm_up=prices,
        gamma_srm_down=prices,
        gamma_per_csp=per_csp,
        gamma_per_ndres=per_ndres,
        gamma_per_demand=per_dem,
    )


# ---------------------------------------------------------------------------
# Tiny corpus for exhaustive-enumeration checks
# ---------------------------------------------------------------------------


def _flat_market(T, dam_median, dam_dev_dn, dam_dev_up, sru_upper=None, srd_upper=None,
                 kappa=0.5, hpa=60.0):
    dam_median = np.asarray(dam_median, float)
    dam = BoundSeries(
        median=dam_median,
        lower=dam_median - np.asarray(dam_dev_dn, float),
        upper=dam_median + np.asarray(dam_dev_up, float),
    )
    if sru_upper is None:
        sru_upper = np.full(T, 10.0)
    if srd_upper is None:
        srd_upper = np.full(T, 6.0)
    sru_upper = np.asarray(sru_upper, float)
    srd_upper = np.asarray(srd_upper, float)
    return MarketData(
        dam_price=dam,
        srm_up_price=BoundSeries(
            median=0.8 * sru_upper, lower=0.5 * sru_upper, upper=sru_upper
        ),
        srm_down_price=BoundSeries(
            median=0.8 * srd_upper, lower=0.5 * srd_upper, upper=srd_upper
        ),
        hpa_price=np.full(T, float(hpa)),
        kappa=kappa,
        t_sr=2.0,
    )


def _wind_unit(name, upper, dev, op_cost=5.0, p_max=None, ramp=10.0):
    upper = np.asarray(upper, float)
    dev = np.asarray(dev, float)
    cap = float(p_max if p_max is not None else np.max(upper))
    return NdResUnit(
        name=name,
        kind="wind",
        p_max=cap,
        p_min=0.0,
        srm_ramp_up=ramp,
        srm_ramp_down=ramp,
        op_cost=op_cost,
        production_bounds=BoundSeries(
            median=upper - 0.5 * dev, lower=upper - dev, upper=upper
        ),
    )


def _pv_unit(name, upper, dev, op_cost=3.0, ramp=10.0):
    upper = np.asarray(upper, float)
    dev = np.asarray(dev, float)
    return NdResUnit(
        name=name,
        kind="pv",
        p_max=float(max(np.max(upper), 1.0)),
        p_min=0.0,
        srm_ramp_up=ramp,
        srm_ramp_down=ramp,
        op_cost=op_cost,
        production_bounds=BoundSeries(
            median=upper - 0.5 * dev, lower=upper - dev, upper=upper
        ),
    )


def _edem(name, lower, dev, p_max, min_energy, beta=0.2, ramp=10.0, p_min=0.0):
    lower = np.asarray(lower, float)
    dev = np.asarray(dev, float)
    T = len(lower)
    return ElectricDemand(
        name=name,
        p_max=float(p_max),
        p_min=float(p_min),
        min_energy=float(min_energy),
        beta_up=np.full(T, beta),
        beta_down=np.full(T, beta),
        srm_ramp_up=ramp,
        srm_ramp_down=ramp,
        consumption_bounds=BoundSeries(
            median=lower + 0.5 * dev, lower=lower, upper=lower + dev
        ),
    )


def _tdem(name, lower, dev, h_max, min_energy=0.0):
    lower = np.asarray(lower, float)
    dev = np.asarray(dev, float)
    return ThermalDemand(
        name=name,
        h_max=float(h_max),
        h_min=0.0,
        min_energy=float(min_energy),
        consumption_bounds=BoundSeries(
            median=lower + 0.5 * dev, lower=lower, upper=lower + dev
        ),
    )


def _mini_csp(name, T, sf_upper, sf_dev):
    sf_upper = np.asarray(sf_upper, float)
    sf_dev = np.asarray(sf_dev, float)
    return CspUnit(
        name=name,
        sf_max_thermal=float(np.max(sf_upper) + 1.0),
        pb_breakpoints=np.array([2.0, 6.0]),
        pb_efficiencies=np.array([0.30, 0.35]),
        pb_max=6.0,
        pb_min=2.0,
        turbine_max=2.1,
        turbine_min=0.5,
        startup_loss_k=0.1,
        heat_efficiency=0.9,
        min_up=1,
        min_down=1,
        initial_on=0,
        initial_off=0,
        ts_e_max=5.0,
        ts_e_min=0.5,
        ts_charge_max=3.0,
        ts_charge_min=0.0,
        ts_discharge_max=3.0,
        ts_discharge_min=0.0,
        ts_eta_charge=0.9,
        ts_eta_discharge=0.9,
        srm_ramp_up=2.0,
        srm_ramp_down=2.0,
        srm_capacity_share=0.8,
        op_cost=4.0,
        sf_bounds=BoundSeries(
            median=sf_upper - 0.5 * sf_dev, lower=sf_upper - sf_dev, upper=sf_upper
        ),
    )


def _tiny(T, units=(), electric=(), thermal=(), market=None, budgets=None):
    return RvppInstance(
        time_grid=TimeGrid(periods=tuple(range(1, T + 1)), delta_t=1.0),
        csp_units=tuple(u for u in units if isinstance(u, CspUnit)),
        ndres_units=tuple(u for u in units if isinstance(u, NdResUnit)),
        electric_demands=tuple(electric),
        thermal_demands=tuple(thermal),
        market=market,
        budgets=budgets or UncertaintyBudgets(),
    )


def tiny_corpus() -> list:
    """Ten desk-size instances paired with the market set to solve them under.

    The quantity-uncertain members are built so the committed schedule stays
    inside the fully tightened bounds (saturated budgets, cost-dominated
    production, or consumption forced up by energy minimums); price
    uncertainty is the economically active part.
    """
    out = []

    # 1: price-only day-ahead uncertainty, energy market alone
    T = 4
    out.append(
        (
            "t01-dam-price",
            _tiny(
                T,
                units=[_wind_unit("w", [10, 10, 10, 10], [0, 0, 0, 0])],
                electric=[_edem("ld", [4, 5, 6, 4], [0, 0, 0, 0], p_max=8, min_energy=10)],
                market=_flat_market(T, [50, 60, 55, 45], [10, 12, 8, 9], [15, 10, 12, 7]),
                budgets=UncertaintyBudgets(gamma_dam=2),
            ),
            "dam",
        )
    )

    # 2: price uncertainty in all three market legs
    T = 4
    out.append(
        (
            "t02-all-prices",
            _tiny(
                T,
                units=[_wind_unit("w", [10, 11, 9, 10], [0, 0, 0, 0], ramp=3.0)],
                electric=[
                    _edem("ld", [3, 4, 5, 3], [0, 0, 0, 0], p_max=8, min_energy=8, beta=0.5)
                ],
                market=_flat_market(
                    T,
                    [60, 70, 65, 50],
                    [12, 10, 9, 8],
                    [10, 14, 9, 7],
                    sru_upper=[12, 15, 11, 9],
                    srd_upper=[8, 9, 6, 5],
                    kappa=0.6,
                ),
                budgets=UncertaintyBudgets(gamma_dam=1, gamma_srm_up=1, gamma_srm_down=1),
            ),
            "dam+srm",
        )
    )

    # 3: saturated wind budget (worst case in every period)
    T = 2
    out.append(
        (
            "t03-saturated-wind",
            _tiny(
                T,
                units=[_wind_unit("w", [10, 9], [3, 2])],
                electric=[_edem("ld", [2, 2], [0, 0], p_max=5, min_energy=4)],
                market=_flat_market(T, [55, 48], [9, 7], [8, 10]),
                budgets=UncertaintyBudgets(
                    gamma_dam=1, gamma_per_ndres={"w": 2}
                ),
            ),
            "dam",
        )
    )

    # 4: wind budget priced out (operating cost above every sale price)
    T = 4
    out.append(
        (
            "t04-priced-out-wind",
            _tiny(
                T,
                units=[_wind_unit("w", [9, 9, 8, 8], [3, 2, 2, 3], op_cost=100.0)],
                electric=[_edem("ld", [3, 3, 4, 3], [0, 0, 0, 0], p_max=6, min_energy=6)],
                market=_flat_market(T, [50, 55, 60, 52], [8, 9, 10, 7], [9, 8, 7, 11]),
                budgets=UncertaintyBudgets(gamma_dam=1, gamma_per_ndres={"w": 2}),
            ),
            "dam",
        )
    )

    # 5: demand pinned at its cap by the energy minimum
    T = 4
    out.append(
        (
            "t05-pinned-demand",
            _tiny(
                T,
                units=[_wind_unit("w", [12, 12, 12, 12], [0, 0, 0, 0])],
                electric=[
                    _edem("ld", [4, 4, 4, 4], [1.5, 1, 1, 1.5], p_max=6, min_energy=24.0)
                ],
                market=_flat_market(T, [45, 52, 58, 49], [7, 8, 9, 6], [9, 10, 6, 8]),
                budgets=UncertaintyBudgets(gamma_dam=1, gamma_per_demand={"ld": 2}),
            ),
            "dam",
        )
    )

    # 6: mini CSP with certain solar field, heat contract active
    T = 4
    out.append(
        (
            "t06-mini-csp",
            _tiny(
                T,
                units=[_mini_csp("c", T, [5, 6, 6, 4], [0, 0, 0, 0])],
                thermal=[_tdem("hd", [1, 1, 1, 1], [0, 0, 0, 0], h_max=3)],
                market=_flat_market(T, [70, 80, 75, 65], [12, 14, 10, 9], [10, 12, 9, 8], hpa=40.0),
                budgets=UncertaintyBudgets(gamma_dam=2),
            ),
            "dam+hpa",
        )
    )

    # 7: PV whose zero-output night absorbs the whole quantity budget; its
    # energy is priced out so the committed schedule never rides the cap
    T = 5
    out.append(
        (
            "t07-pv-nights",
            _tiny(
                T,
                units=[
                    _pv_unit("s", [0, 4, 6, 4, 0], [0, 1, 2, 1, 0], op_cost=100.0, ramp=0.25),
                    _wind_unit("w", [6, 6, 6, 6, 6], [0, 0, 0, 0, 0], ramp=2.0),
                ],
                electric=[
                    _edem("ld", [2, 3, 3, 3, 2], [0] * 5, p_max=5, min_energy=10, beta=0.4)
                ],
                market=_flat_market(
                    T,
                    [40, 60, 70, 55, 42],
                    [8, 9, 11, 7, 6],
                    [6, 12, 10, 9, 7],
                    sru_upper=[8, 12, 14, 10, 7],
                    srd_upper=[5, 7, 8, 6, 4],
                    kappa=0.6,
                ),
                budgets=UncertaintyBudgets(
                    gamma_dam=1, gamma_srm_up=1, gamma_per_ndres={"s": 2}
                ),
            ),
            "dam+srm",
        )
    )

    # 8: uncertain demand forced up by the energy minimum, certain wind
    T = 3
    out.append(
        (
            "t08-forced-demand",
            _tiny(
                T,
                units=[_wind_unit("w", [8, 8, 8], [0, 0, 0], ramp=2.0)],
                electric=[
                    _edem("ld", [5, 5, 5], [2, 1, 1], p_max=7, min_energy=21.0, beta=0.3)
                ],
                market=_flat_market(
                    T,
                    [52, 61, 47],
                    [9, 8, 7],
                    [7, 10, 8],
                    sru_upper=[10, 12, 9],
                    srd_upper=[6, 7, 5],
                    kappa=0.4,
                ),
                budgets=UncertaintyBudgets(gamma_srm_down=1, gamma_per_demand={"ld": 1}),
            ),
            "dam+srm",
        )
    )

    # 9: wide price enumeration across all three legs
    T = 6
    out.append(
        (
            "t09-price-grid",
            _tiny(
                T,
                units=[_wind_unit("w", [9, 10, 11, 10, 9, 8], [0] * 6, ramp=3.0)],
                electric=[
                    _edem("ld", [3, 3, 4, 4, 3, 3], [0] * 6, p_max=7, min_energy=15, beta=0.5)
                ],
                market=_flat_market(
                    T,
                    [44, 58, 66, 61, 50, 41],
                    [8, 11, 12, 9, 7, 6],
                    [7, 9, 13, 10, 8, 5],
                    sru_upper=[9, 13, 15, 12, 10, 8],
                    srd_upper=[5, 8, 9, 7, 6, 4],
                    kappa=0.5,
                ),
                budgets=UncertaintyBudgets(gamma_dam=2, gamma_srm_up=2, gamma_srm_down=2),
            ),
            "dam+srm",
        )
    )

    # 10: combined priced-out wind, forced demand, and price budgets
    T = 4
    out.append(
        (
            "t10-mixed",
            _tiny(
                T,
                units=[_wind_unit("w", [7, 8, 8, 7], [2, 2, 3, 2], op_cost=100.0, ramp=2.0)],
                electric=[
                    _edem("ld", [4, 4, 4, 4], [1, 1, 1, 1], p_max=5, min_energy=20.0, beta=0.3)
                ],
                market=_flat_market(
                    T,
                    [48, 56, 62, 51],
                    [8, 9, 10, 7],
                    [9, 7, 8, 10],
                    sru_upper=[10, 12, 13, 9],
                    srd_upper=[6, 7, 8, 5],
                    kappa=0.4,
                ),
                budgets=UncertaintyBudgets(
                    gamma_dam=2,
                    gamma_srm_up=1,
                    gamma_srm_down=1,
                    gamma_per_ndres={"w": 2},
                    gamma_per_demand={"ld": 2},
                ),
            ),
            "dam+srm",
        )
    )

    return out


# ---------------------------------------------------------------------------
# Randomized small instances
# ---------------------------------------------------------------------------


def random_instance(seed: int, max_T: int = 12, with_csp: bool | None = None) -> RvppInstance:
    """Seeded feasible small instance with random bands and budgets."""
    rng = np.random.default_rng(seed)
    T = int(rng.integers(2, max_T + 1))
    dt = 1.0

    n_wind = int(rng.integers(1, 3))
    n_pv = int(rng.integers(0, 2))
    units = []
    for i in range(n_wind):
        cap = float(rng.uniform(5, 30))
        prof = cap * rng.uniform(0.4, 0.95, size=T)
        dev = prof * rng.uniform(0.05, 0.5, size=T)
        units.append(
            _wind_unit(
                f"w{i}", prof, dev, op_cost=float(rng.uniform(2, 20)), p_max=cap,
                ramp=float(rng.uniform(1, 6)),
            )
        )
    for i in range(n_pv):
        cap = float(rng.uniform(5, 25))
        shape = np.exp(-(((np.arange(1, T + 1) - (T + 1) / 2) / max(T / 4, 1)) ** 2))
        prof = cap * shape * rng.uniform(0.6, 0.95)
        dev = prof * rng.uniform(0.1, 0.5)
        units.append(_pv_unit(f"s{i}", prof, dev, op_cost=float(rng.uniform(1, 10))))

    if with_csp is None:
        with_csp = bool(rng.random() < 0.5) and T >= 4
    if with_csp:
        shape = np.exp(-(((np.arange(1, T + 1) - (T + 1) / 2) / max(T / 4, 1)) ** 2))
        sf_upper = 8.0 * shape + 1.0
        sf_dev = sf_upper * rng.uniform(0.0, 0.4, size=T)
        units.append(_mini_csp("c0", T, sf_upper, sf_dev))

    gen_cap = sum(
        u.p_max if isinstance(u, NdResUnit) else u.turbine_max for u in units
    )
    electric = []
    n_ed = int(rng.integers(1, 3))
    for i in range(n_ed):
        cap = float(rng.uniform(2, max(3.0, 0.5 * gen_cap / n_ed)))
        floor = cap * rng.uniform(0.2, 0.6, size=T)
        dev = np.minimum(cap - floor, floor * rng.uniform(0.05, 0.5, size=T))
        min_energy = float(rng.uniform(0.5, 0.95) * floor.sum() * dt)
        electric.append(
            _edem(
                f"d{i}", floor, dev, p_max=cap, min_energy=min_energy,
                beta=float(rng.uniform(0.05, 0.5)), ramp=float(rng.uniform(1, 5)),
            )
        )
    thermal = []
    if with_csp and rng.random() < 0.8:
        floor = rng.uniform(0.3, 1.5, size=T)
        dev = floor * rng.uniform(0.0, 0.4, size=T)
        thermal.append(_tdem("h0", floor, dev, h_max=float(floor.max() + dev.max() + 1.0)))

    dam_median = rng.uniform(30, 120, size=T)
    market = _flat_market(
        T,
        dam_median,
        dam_median * rng.uniform(0.05, 0.3, size=T),
        dam_median * rng.uniform(0.05, 0.3, size=T),
        sru_upper=rng.uniform(4, 25, size=T),
        srd_upper=rng.uniform(2, 18, size=T),
        kappa=float(rng.uniform(0.1, 0.8)),
        hpa=float(rng.uniform(30, 90)),
    )

    def gam():
        return int(rng.integers(0, T + 1))

    budgets = UncertaintyBudgets(
        gamma_dam=gam(),
        gamma_srm_up=gam(),
        gamma_srm_down=gam(),
        gamma_per_ndres={u.name: gam() for u in units if isinstance(u, NdResUnit)},
        gamma_per_csp={u.name: gam() for u in units if isinstance(u, CspUnit)},
        gamma_per_demand={d.name: gam() for d in electric + thermal},
    )
    return _tiny(T, units=units, electric=electric, thermal=thermal, market=market, budgets=budgets)
