"""Domain types, instance schema, validation, and uncertainty-bound construction.

All power values are MW, energy MWh, prices EUR/MWh (EUR/MW for reserve
capacity), and period length hours. No unit conversion happens anywhere.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields, replace

import numpy as np

SCHEMA_VERSION = 1


class SchemaError(ValueError):
    """The instance document does not match the expected schema."""


class InvariantError(ValueError):
    """A structurally valid document violates a domain invariant."""


def _freeze(arr) -> np.ndarray:
    out = np.asarray(arr, dtype=float)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class TimeGrid:
    """Scheduling horizon: ordered periods 1..T, each delta_t hours long."""

    periods: tuple[int, ...]
    delta_t: float

    def __post_init__(self):
        if len(self.periods) < 1:
            raise InvariantError("time_grid: at least one period required")
        if self.delta_t <= 0:
            raise InvariantError("time_grid: delta_t must be positive")
        if tuple(self.periods) != tuple(range(1, len(self.periods) + 1)):
            raise InvariantError("time_grid: periods must be 1..T in order")
        object.__setattr__(self, "periods", tuple(int(t) for t in self.periods))

    @property
    def T(self) -> int:
        return len(self.periods)


@dataclass(frozen=True)
class BoundSeries:
    """Per-period forecast band: lower <= median <= upper."""

    median: np.ndarray
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        for name in ("median", "lower", "upper"):
            object.__setattr__(self, name, _freeze(getattr(self, name)))
        n = len(self.median)
        if len(self.lower) != n or len(self.upper) != n:
            raise InvariantError("bound series: median/lower/upper lengths differ")
        for name in ("median", "lower", "upper"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise InvariantError(f"bound series: non-finite values in {name}")
        if np.any(self.lower > self.median + 1e-12) or np.any(
            self.median > self.upper + 1e-12
        ):
            raise InvariantError("bound series: requires lower <= median <= upper")

    def __len__(self) -> int:
        return len(self.median)

    @classmethod
    def constant(cls, values) -> "BoundSeries":
        v = np.asarray(values, dtype=float)
        return cls(median=v, lower=v.copy(), upper=v.copy())

    def is_degenerate(self, tol: float = 0.0) -> bool:
        return bool(np.all(self.upper - self.lower <= tol))


# Orientation of each uncertainty source: production-like series deviate
# downward from their upper bound, consumption-like series deviate upward
# from their lower bound, and the day-ahead price deviates both ways around
# its median.


def favorable_production(bounds: BoundSeries) -> np.ndarray:
    return bounds.upper


def production_deviation(bounds: BoundSeries) -> np.ndarray:
    return bounds.upper - bounds.lower


def favorable_consumption(bounds: BoundSeries) -> np.ndarray:
    return bounds.lower


def consumption_deviation(bounds: BoundSeries) -> np.ndarray:
    return bounds.upper - bounds.lower


@dataclass(frozen=True)
class CspUnit:
    """Concentrated solar plant: solar field, power block, thermal storage."""

    name: str
    sf_max_thermal: float
    pb_breakpoints: np.ndarray  # thermal input grid, first point = dead band
    pb_efficiencies: np.ndarray  # thermal-to-electric efficiency at each point
    pb_max: float
    pb_min: float
    turbine_max: float
    turbine_min: float
    startup_loss_k: float
    heat_efficiency: float
    min_up: int
    min_down: int
    initial_on: int
    initial_off: int
    ts_e_max: float
    ts_e_min: float
    ts_charge_max: float
    ts_charge_min: float
    ts_discharge_max: float
    ts_discharge_min: float
    ts_eta_charge: float
    ts_eta_discharge: float
    srm_ramp_up: float
    srm_ramp_down: float
    srm_capacity_share: float
    op_cost: float
    sf_bounds: BoundSeries

    def __post_init__(self):
        object.__setattr__(self, "pb_breakpoints", _freeze(self.pb_breakpoints))
        object.__setattr__(self, "pb_efficiencies", _freeze(self.pb_efficiencies))
        bp, eff = self.pb_breakpoints, self.pb_efficiencies
        if len(bp) < 1 or np.any(np.diff(bp) <= 0) or bp[0] <= 0:
            raise InvariantError(
                f"csp {self.name}: pb_breakpoints must be positive and strictly increasing"
            )
        if len(eff) != len(bp):
            raise InvariantError(
                f"csp {self.name}: one efficiency per breakpoint required"
            )
        if np.any(eff <= 0) or np.any(eff > 1):
            raise InvariantError(f"csp {self.name}: efficiencies must be in (0, 1]")
        if not 0 < self.heat_efficiency <= 1:
            raise InvariantError(f"csp {self.name}: heat_efficiency must be in (0, 1]")
        if not (0 < self.ts_eta_charge <= 1 and 0 < self.ts_eta_discharge <= 1):
            raise InvariantError(f"csp {self.name}: storage efficiencies in (0, 1]")
        if self.ts_e_min >= self.ts_e_max:
            raise InvariantError(f"csp {self.name}: requires ts_e_min < ts_e_max")
        if self.turbine_min > self.turbine_max:
            raise InvariantError(f"csp {self.name}: turbine_min > turbine_max")
        if self.min_up < 1 or self.min_down < 1:
            raise InvariantError(f"csp {self.name}: min_up and min_down must be >= 1")
        if self.initial_on < 0 or self.initial_off < 0:
            raise InvariantError(f"csp {self.name}: initial periods must be >= 0")
        if self.initial_on > 0 and self.initial_off > 0:
            raise InvariantError(
                f"csp {self.name}: initial_on and initial_off are mutually exclusive"
            )

    @property
    def output_at_breakpoints(self) -> np.ndarray:
        """Electrical output at each thermal breakpoint of the conversion curve."""
        return self.pb_efficiencies * self.pb_breakpoints


@dataclass(frozen=True)
class NdResUnit:
    """Non-dispatchable renewable generator (wind farm or PV plant)."""

    name: str
    kind: str
    p_max: float
    p_min: float
    srm_ramp_up: float
    srm_ramp_down: float
    op_cost: float
    production_bounds: BoundSeries

    def __post_init__(self):
        if self.kind not in ("wind", "pv"):
            raise SchemaError(f"ndres {self.name}: kind must be 'wind' or 'pv'")
        if self.p_min > self.p_max:
            raise InvariantError(f"ndres {self.name}: p_min > p_max")
        b = self.production_bounds
        if np.any(b.lower < self.p_min - 1e-9) or np.any(b.upper > self.p_max + 1e-9):
            raise InvariantError(
                f"ndres {self.name}: production bounds outside [p_min, p_max]"
            )


@dataclass(frozen=True)
class ElectricDemand:
    """Flexible electric load able to shift within a band and offer reserve."""

    name: str
    p_max: float
    p_min: float
    min_energy: float
    beta_up: np.ndarray
    beta_down: np.ndarray
    srm_ramp_up: float
    srm_ramp_down: float
    consumption_bounds: BoundSeries

    def __post_init__(self):
        object.__setattr__(self, "beta_up", _freeze(self.beta_up))
        object.__setattr__(self, "beta_down", _freeze(self.beta_down))
        if self.p_min > self.p_max:
            raise InvariantError(f"demand {self.name}: p_min > p_max")
        for nm in ("beta_up", "beta_down"):
            b = getattr(self, nm)
            if np.any(b < 0) or np.any(b > 1):
                raise InvariantError(f"demand {self.name}: {nm} must be in [0, 1]")


@dataclass(frozen=True)
class ThermalDemand:
    """Heat load served by CSP heat output and/or the purchase agreement."""

    name: str
    h_max: float
    h_min: float
    min_energy: float
    consumption_bounds: BoundSeries

    def __post_init__(self):
        if self.h_min > self.h_max:
            raise InvariantError(f"demand {self.name}: h_min > h_max")


@dataclass(frozen=True)
class MarketData:
    """Prices and trading limits for the three trading floors."""

    dam_price: BoundSeries
    srm_up_price: BoundSeries
    srm_down_price: BoundSeries
    hpa_price: np.ndarray
    kappa: float
    t_sr: float  # minutes allowed to deliver activated reserve

    def __post_init__(self):
        object.__setattr__(self, "hpa_price", _freeze(self.hpa_price))
        if not 0 <= self.kappa <= 1:
            raise InvariantError("market: kappa must be in [0, 1]")
        if self.t_sr <= 0:
            raise InvariantError("market: t_sr must be positive")
        for nm in ("dam_price", "srm_up_price", "srm_down_price"):
            if np.any(getattr(self, nm).lower < 0):
                raise InvariantError(f"market: {nm} must be non-negative")
        if np.any(self.hpa_price < 0):
            raise InvariantError("market: hpa_price must be non-negative")


@dataclass(frozen=True)
class UncertaintyBudgets:
    """Number of periods each uncertain source spends at its worst bound."""

    gamma_dam: int = 0
    gamma_srm_up: int = 0
    gamma_srm_down: int = 0
    gamma_per_csp: dict = field(default_factory=dict)
    gamma_per_ndres: dict = field(default_factory=dict)
    gamma_per_demand: dict = field(default_factory=dict)

    def validate(self, instance: "RvppInstance") -> None:
        T = instance.time_grid.T
        scalars = {
            "gamma_dam": self.gamma_dam,
            "gamma_srm_up": self.gamma_srm_up,
            "gamma_srm_down": self.gamma_srm_down,
        }
        for nm, g in scalars.items():
            _check_gamma(nm, g, T)
        known = {
            "gamma_per_csp": {u.name for u in instance.csp_units},
            "gamma_per_ndres": {u.name for u in instance.ndres_units},
            "gamma_per_demand": {d.name for d in instance.electric_demands}
            | {d.name for d in instance.thermal_demands},
        }
        for nm, names in known.items():
            for key, g in getattr(self, nm).items():
                if key not in names:
                    raise SchemaError(f"budgets: {nm} references unknown unit '{key}'")
                _check_gamma(f"{nm}[{key}]", g, T)

    def for_csp(self, name: str) -> int:
        return int(self.gamma_per_csp.get(name, 0))

    def for_ndres(self, name: str) -> int:
        return int(self.gamma_per_ndres.get(name, 0))

    def for_demand(self, name: str) -> int:
        return int(self.gamma_per_demand.get(name, 0))


def _check_gamma(label: str, gamma, T: int) -> None:
    if int(gamma) != gamma:
        raise InvariantError(f"budgets: {label} must be an integer")
    if not 0 <= int(gamma) <= T:
        raise InvariantError(f"budgets: {label} must be within [0, {T}]")


@dataclass(frozen=True)
class MarketSet:
    """Which trading floors the plan participates in; the DAM is mandatory."""

    dam_enabled: bool = True
    srm_enabled: bool = True
    hpa_enabled: bool = True

    def __post_init__(self):
        if not self.dam_enabled:
            raise InvariantError("market set: the day-ahead market cannot be disabled")

    @classmethod
    def from_names(cls, names) -> "MarketSet":
        allowed = {"dam", "srm", "hpa"}
        got = {n.strip().lower() for n in names if n.strip()}
        unknown = got - allowed
        if unknown:
            raise SchemaError(f"market set: unknown market(s) {sorted(unknown)}")
        return cls(srm_enabled="srm" in got, hpa_enabled="hpa" in got)

    @property
    def label(self) -> str:
        parts = ["dam"]
        if self.srm_enabled:
            parts.append("srm")
        if self.hpa_enabled:
            parts.append("hpa")
        return "+".join(parts)


@dataclass(frozen=True)
class RvppInstance:
    """Full problem data for one scheduling day."""

    time_grid: TimeGrid
    csp_units: tuple[CspUnit, ...]
    ndres_units: tuple[NdResUnit, ...]
    electric_demands: tuple[ElectricDemand, ...]
    thermal_demands: tuple[ThermalDemand, ...]
    market: MarketData
    budgets: UncertaintyBudgets

    def __post_init__(self):
        object.__setattr__(self, "csp_units", tuple(self.csp_units))
        object.__setattr__(self, "ndres_units", tuple(self.ndres_units))
        object.__setattr__(self, "electric_demands", tuple(self.electric_demands))
        object.__setattr__(self, "thermal_demands", tuple(self.thermal_demands))
        T = self.time_grid.T
        names = []
        for u in (
            self.csp_units
            + self.ndres_units
            + self.electric_demands
            + self.thermal_demands
        ):
            names.append(u.name)
        dupes = {n for n in names if names.count(n) > 1}
        if dupes:
            raise SchemaError(f"instance: duplicate unit names {sorted(dupes)}")
        self._check_series_lengths(T)
        self.budgets.validate(self)
        dt, horizon = self.time_grid.delta_t, self.time_grid.T
        for d in self.electric_demands:
            if d.min_energy > d.p_max * dt * horizon + 1e-9:
                raise InvariantError(
                    f"demand {d.name}: min_energy exceeds p_max * delta_t * T"
                )

    def _check_series_lengths(self, T: int) -> None:
        def need(series_len, what):
            if series_len != T:
                raise SchemaError(f"{what}: expected {T} periods, got {series_len}")

        for u in self.csp_units:
            need(len(u.sf_bounds), f"csp {u.name}: sf_bounds")
        for u in self.ndres_units:
            need(len(u.production_bounds), f"ndres {u.name}: production_bounds")
        for d in self.electric_demands:
            need(len(d.consumption_bounds), f"demand {d.name}: consumption_bounds")
            need(len(d.beta_up), f"demand {d.name}: beta_up")
            need(len(d.beta_down), f"demand {d.name}: beta_down")
        for d in self.thermal_demands:
            need(len(d.consumption_bounds), f"demand {d.name}: consumption_bounds")
        need(len(self.market.dam_price), "market: dam_price")
        need(len(self.market.srm_up_price), "market: srm_up_price")
        need(len(self.market.srm_down_price), "market: srm_down_price")
        need(len(self.market.hpa_price), "market: hpa_price")

    @property
    def T(self) -> int:
        return self.time_grid.T

    @property
    def delta_t(self) -> float:
        return self.time_grid.delta_t


# ---------------------------------------------------------------------------
# Instance document (de)serialization
# ---------------------------------------------------------------------------


def _series_from_doc(doc, where: str) -> BoundSeries:
    if not isinstance(doc, dict):
        raise SchemaError(f"{where}: expected an object with median/lower/upper")
    missing = {"median", "lower", "upper"} - set(doc)
    if missing:
        raise SchemaError(f"{where}: missing keys {sorted(missing)}")
    return BoundSeries(
        median=np.asarray(doc["median"], dtype=float),
        lower=np.asarray(doc["lower"], dtype=float),
        upper=np.asarray(doc["upper"], dtype=float),
    )


def _series_to_doc(bs: BoundSeries) -> dict:
    return {
        "median": bs.median.tolist(),
        "lower": bs.lower.tolist(),
        "upper": bs.upper.tolist(),
    }


_MISSING = object()


def _take(doc: dict, key: str, where: str, default=_MISSING):
    if key not in doc:
        if default is not _MISSING:
            return default
        raise SchemaError(f"{where}: missing field '{key}'")
    return doc[key]


def _check_finite(value, where: str) -> float:
    v = float(value)
    if not np.isfinite(v):
        raise SchemaError(f"{where}: value must be finite")
    return v


def load_instance(document) -> RvppInstance:
    """Build a validated instance from a JSON string, bytes, or parsed dict."""
    if isinstance(document, (str, bytes)):
        try:
            doc = json.loads(document)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"instance: invalid JSON ({exc})") from None
    else:
        doc = document
    if not isinstance(doc, dict):
        raise SchemaError("instance: top level must be an object")
    version = _take(doc, "schema_version", "instance")
    if version != SCHEMA_VERSION:
        raise SchemaError(
            f"instance: unsupported schema_version {version!r} (expected {SCHEMA_VERSION})"
        )

    tg_doc = _take(doc, "time_grid", "instance")
    grid = TimeGrid(
        periods=tuple(_take(tg_doc, "periods", "time_grid")),
        delta_t=_check_finite(_take(tg_doc, "delta_t", "time_grid"), "time_grid.delta_t"),
    )

    csp_units = []
    for i, u in enumerate(_take(doc, "csp_units", "instance", [])):
        where = f"csp_units[{i}]"
        csp_units.append(
            CspUnit(
                name=str(_take(u, "name", where)),
                sf_max_thermal=_check_finite(_take(u, "sf_max_thermal", where), where),
                pb_breakpoints=np.asarray(_take(u, "pb_breakpoints", where), float),
                pb_efficiencies=np.asarray(_take(u, "pb_efficiencies", where), float),
                pb_max=_check_finite(_take(u, "pb_max", where), where),
                pb_min=_check_finite(_take(u, "pb_min", where), where),
                turbine_max=_check_finite(_take(u, "turbine_max", where), where),
                turbine_min=_check_finite(_take(u, "turbine_min", where), where),
                startup_loss_k=_check_finite(
                    _take(u, "startup_loss_k", where, 0.2), where
                ),
                heat_efficiency=_check_finite(_take(u, "heat_efficiency", where), where),
                min_up=int(_take(u, "min_up", where)),
                min_down=int(_take(u, "min_down", where)),
                initial_on=int(_take(u, "initial_on", where, 0)),
                initial_off=int(_take(u, "initial_off", where, 0)),
                ts_e_max=_check_finite(_take(u, "ts_e_max", where), where),
                ts_e_min=_check_finite(_take(u, "ts_e_min", where), where),
                ts_charge_max=_check_finite(_take(u, "ts_charge_max", where), where),
                ts_charge_min=_check_finite(_take(u, "ts_charge_min", where, 0.0), where),
                ts_discharge_max=_check_finite(
                    _take(u, "ts_discharge_max", where), where
                ),
                ts_discharge_min=_check_finite(
                    _take(u, "ts_discharge_min", where, 0.0), where
                ),
                ts_eta_charge=_check_finite(_take(u, "ts_eta_charge", where), where),
                ts_eta_discharge=_check_finite(
                    _take(u, "ts_eta_discharge", where), where
                ),
                srm_ramp_up=_check_finite(_take(u, "srm_ramp_up", where), where),
                srm_ramp_down=_check_finite(_take(u, "srm_ramp_down", where), where),
                srm_capacity_share=_check_finite(
                    _take(u, "srm_capacity_share", where, 1.0), where
                ),
                op_cost=_check_finite(_take(u, "op_cost", where), where),
                sf_bounds=_series_from_doc(
                    _take(u, "sf_bounds", where), f"{where}.sf_bounds"
                ),
            )
        )

    ndres_units = []
    for i, u in enumerate(_take(doc, "ndres_units", "instance", [])):
        where = f"ndres_units[{i}]"
        ndres_units.append(
            NdResUnit(
                name=str(_take(u, "name", where)),
                kind=str(_take(u, "kind", where)),
                p_max=_check_finite(_take(u, "p_max", where), where),
                p_min=_check_finite(_take(u, "p_min", where), where),
                srm_ramp_up=_check_finite(_take(u, "srm_ramp_up", where), where),
                srm_ramp_down=_check_finite(_take(u, "srm_ramp_down", where), where),
                op_cost=_check_finite(_take(u, "op_cost", where), where),
                production_bounds=_series_from_doc(
                    _take(u, "production_bounds", where), f"{where}.production_bounds"
                ),
            )
        )

    electric_demands = []
    for i, d in enumerate(_take(doc, "electric_demands", "instance", [])):
        where = f"electric_demands[{i}]"
        electric_demands.append(
            ElectricDemand(
                name=str(_take(d, "name", where)),
                p_max=_check_finite(_take(d, "p_max", where), where),
                p_min=_check_finite(_take(d, "p_min", where), where),
                min_energy=_check_finite(_take(d, "min_energy", where), where),
                beta_up=np.asarray(_take(d, "beta_up", where), float),
                beta_down=np.asarray(_take(d, "beta_down", where), float),
                srm_ramp_up=_check_finite(_take(d, "srm_ramp_up", where), where),
                srm_ramp_down=_check_finite(_take(d, "srm_ramp_down", where), where),
                consumption_bounds=_series_from_doc(
                    _take(d, "consumption_bounds", where),
                    f"{where}.consumption_bounds",
                ),
            )
        )

    thermal_demands = []
    for i, d in enumerate(_take(doc, "thermal_demands", "instance", [])):
        where = f"thermal_demands[{i}]"
        thermal_demands.append(
            ThermalDemand(
                name=str(_take(d, "name", where)),
                h_max=_check_finite(_take(d, "h_max", where), where),
                h_min=_check_finite(_take(d, "h_min", where), where),
                min_energy=_check_finite(_take(d, "min_energy", where), where),
                consumption_bounds=_series_from_doc(
                    _take(d, "consumption_bounds", where),
                    f"{where}.consumption_bounds",
                ),
            )
        )

    m = _take(doc, "market", "instance")
    market = MarketData(
        dam_price=_series_from_doc(_take(m, "dam_price", "market"), "market.dam_price"),
        srm_up_price=_series_from_doc(
            _take(m, "srm_up_price", "market"), "market.srm_up_price"
        ),
        srm_down_price=_series_from_doc(
            _take(m, "srm_down_price", "market"), "market.srm_down_price"
        ),
        hpa_price=np.asarray(_take(m, "hpa_price", "market"), float),
        kappa=_check_finite(_take(m, "kappa", "market"), "market.kappa"),
        t_sr=_check_finite(_take(m, "t_sr", "market"), "market.t_sr"),
    )

    b = _take(doc, "budgets", "instance", {})
    budgets = UncertaintyBudgets(
        gamma_dam=int(_take(b, "gamma_dam", "budgets", 0)),
        gamma_srm_up=int(_take(b, "gamma_srm_up", "budgets", 0)),
        gamma_srm_down=int(_take(b, "gamma_srm_down", "budgets", 0)),
        gamma_per_csp=dict(_take(b, "gamma_per_csp", "budgets", {})),
        gamma_per_ndres=dict(_take(b, "gamma_per_ndres", "budgets", {})),
        gamma_per_demand=dict(_take(b, "gamma_per_demand", "budgets", {})),
    )

    return RvppInstance(
        time_grid=grid,
        csp_units=tuple(csp_units),
        ndres_units=tuple(ndres_units),
        electric_demands=tuple(electric_demands),
        thermal_demands=tuple(thermal_demands),
        market=market,
        budgets=budgets,
    )


def load_instance_file(path) -> RvppInstance:
    with open(path, "r", encoding="utf-8") as fh:
        return load_instance(fh.read())


def instance_to_dict(instance: RvppInstance) -> dict:
    def csp(u: CspUnit) -> dict:
        return {
            "name": u.name,
            "sf_max_thermal": u.sf_max_thermal,
            "pb_breakpoints": u.pb_breakpoints.tolist(),
            "pb_efficiencies": u.pb_efficiencies.tolist(),
            "pb_max": u.pb_max,
            "pb_min": u.pb_min,
            "turbine_max": u.turbine_max,
            "turbine_min": u.turbine_min,
            "startup_loss_k": u.startup_loss_k,
            "heat_efficiency": u.heat_efficiency,
            "min_up": u.min_up,
            "min_down": u.min_down,
            "initial_on": u.initial_on,
            "initial_off": u.initial_off,
            "ts_e_max": u.ts_e_max,
            "ts_e_min": u.ts_e_min,
            "ts_charge_max": u.ts_charge_max,
            "ts_charge_min": u.ts_charge_min,
            "ts_discharge_max": u.ts_discharge_max,
            "ts_discharge_min": u.ts_discharge_min,
            "ts_eta_charge": u.ts_eta_charge,
            "ts_eta_discharge": u.ts_eta_discharge,
            "srm_ramp_up": u.srm_ramp_up,
            "srm_ramp_down": u.srm_ramp_down,
            "srm_capacity_share": u.srm_capacity_share,
            "op_cost": u.op_cost,
            "sf_bounds": _series_to_doc(u.sf_bounds),
        }

    def ndres(u: NdResUnit) -> dict:
        return {
            "name": u.name,
            "kind": u.kind,
            "p_max": u.p_max,
            "p_min": u.p_min,
            "srm_ramp_up": u.srm_ramp_up,
            "srm_ramp_down": u.srm_ramp_down,
            "op_cost": u.op_cost,
            "production_bounds": _series_to_doc(u.production_bounds),
        }

    def edem(d: ElectricDemand) -> dict:
        return {
            "name": d.name,
            "p_max": d.p_max,
            "p_min": d.p_min,
            "min_energy": d.min_energy,
            "beta_up": d.beta_up.tolist(),
            "beta_down": d.beta_down.tolist(),
            "srm_ramp_up": d.srm_ramp_up,
            "srm_ramp_down": d.srm_ramp_down,
            "consumption_bounds": _series_to_doc(d.consumption_bounds),
        }

    def tdem(d: ThermalDemand) -> dict:
        return {
            "name": d.name,
            "h_max": d.h_max,
            "h_min": d.h_min,
            "min_energy": d.min_energy,
            "consumption_bounds": _series_to_doc(d.consumption_bounds),
        }

    return {
        "schema_version": SCHEMA_VERSION,
        "time_grid": {
            "periods": list(instance.time_grid.periods),
            "delta_t": instance.time_grid.delta_t,
        },
        "csp_units": [csp(u) for u in instance.csp_units],
        "ndres_units": [ndres(u) for u in instance.ndres_units],
        "electric_demands": [edem(d) for d in instance.electric_demands],
        "thermal_demands": [tdem(d) for d in instance.thermal_demands],
        "market": {
            "dam_price": _series_to_doc(instance.market.dam_price),
            "srm_up_price": _series_to_doc(instance.market.srm_up_price),
            "srm_down_price": _series_to_doc(instance.market.srm_down_price),
            "hpa_price": instance.market.hpa_price.tolist(),
            "kappa": instance.market.kappa,
            "t_sr": instance.market.t_sr,
        },
        "budgets": {
            "gamma_dam": instance.budgets.gamma_dam,
            "gamma_srm_up": instance.budgets.gamma_srm_up,
            "gamma_srm_down": instance.budgets.gamma_srm_down,
            "gamma_per_csp": dict(instance.budgets.gamma_per_csp),
            "gamma_per_ndres": dict(instance.budgets.gamma_per_ndres),
            "gamma_per_demand": dict(instance.budgets.gamma_per_demand),
        },
    }


def instance_to_json(instance: RvppInstance, indent: int = 2) -> str:
    return json.dumps(instance_to_dict(instance), indent=indent)


# ---------------------------------------------------------------------------
# Uncertainty bound construction from history
# ---------------------------------------------------------------------------


def compute_bounds(history, low_pct: float, high_pct: float) -> BoundSeries:
    """Per-hour median plus interpolated percentile band from a days-by-hours
    sample matrix."""
    h = np.asarray(history, dtype=float)
    if h.ndim != 2 or h.shape[0] < 1 or h.shape[1] < 1:
        raise ValueError("history must be a non-empty (days x periods) matrix")
    if not np.all(np.isfinite(h)):
        raise ValueError("history contains non-finite samples")
    if not (0 <= low_pct < high_pct <= 1):
        raise ValueError("percentiles must satisfy 0 <= low < high <= 1")
    lower = np.percentile(h, 100 * low_pct, axis=0, method="linear")
    median = np.percentile(h, 50, axis=0, method="linear")
    upper = np.percentile(h, 100 * high_pct, axis=0, method="linear")
    return BoundSeries(median=median, lower=lower, upper=upper)


def load_history(path) -> np.ndarray:
    """Read a history CSV (one row per day, columns h1..hT) into a matrix."""
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        cols = [c.strip() for c in header.split(",")]
        expected = [f"h{i}" for i in range(1, len(cols) + 1)]
        if cols != expected:
            raise SchemaError(f"history: header must be {','.join(expected[:3])},...")
        rows = []
        for lineno, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            parts = line.strip().split(",")
            if len(parts) != len(cols):
                raise SchemaError(f"history: line {lineno} has {len(parts)} columns")
            rows.append([float(p) for p in parts])
    if not rows:
        raise ValueError("history: no data rows")
    return np.asarray(rows, dtype=float)


# ---------------------------------------------------------------------------
# Nominal projection
# ---------------------------------------------------------------------------


def nominal_projection(instance: RvppInstance) -> RvppInstance:
    """Collapse every uncertain band onto its nominal series: median day-ahead
    price, upper reserve prices and production, lower consumption."""

    def collapse(bs: BoundSeries, to: np.ndarray) -> BoundSeries:
        return BoundSeries.constant(to)

    market = replace(
        instance.market,
        dam_price=collapse(instance.market.dam_price, instance.market.dam_price.median),
        srm_up_price=collapse(
            instance.market.srm_up_price, instance.market.srm_up_price.upper
        ),
        srm_down_price=collapse(
            instance.market.srm_down_price, instance.market.srm_down_price.upper
        ),
    )
    csp_units = tuple(
        replace(u, sf_bounds=collapse(u.sf_bounds, u.sf_bounds.upper))
        for u in instance.csp_units
    )
    ndres_units = tuple(
        replace(
            u,
            production_bounds=collapse(u.production_bounds, u.production_bounds.upper),
        )
        for u in instance.ndres_units
    )
    electric_demands = tuple(
        replace(
            d,
            consumption_bounds=collapse(
                d.consumption_bounds, d.consumption_bounds.lower
            ),
        )
        for d in instance.electric_demands
    )
    thermal_demands = tuple(
        replace(
            d,
            consumption_bounds=collapse(
                d.consumption_bounds, d.consumption_bounds.lower
            ),
        )
        for d in instance.thermal_demands
    )
    return replace(
        instance,
        market=market,
        csp_units=csp_units,
        ndres_units=ndres_units,
        electric_demands=electric_demands,
        thermal_demands=thermal_demands,
    )
