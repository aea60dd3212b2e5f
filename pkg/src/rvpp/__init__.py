"""Robust bidding toolkit for a renewable-only virtual power plant trading
day-ahead energy, secondary reserve capacity, and contracted heat."""

from .core import (
    BoundSeries,
    CspUnit,
    ElectricDemand,
    InvariantError,
    MarketData,
    MarketSet,
    NdResUnit,
    RvppInstance,
    SchemaError,
    ThermalDemand,
    TimeGrid,
    UncertaintyBudgets,
    compute_bounds,
    instance_to_json,
    load_instance,
    load_instance_file,
    nominal_projection,
)
from .det_model import (
    FirstStageDecision,
    build_deterministic,
    extract_first_stage,
    total_cost,
)
from .milp import (
    MilpModel,
    MilpSolution,
    SolveOptions,
    check_feasibility,
    export_mps,
    solve,
)
from .robust_model import build_robust, protection_value_primal, worst_case_report

__all__ = [
    "BoundSeries",
    "CspUnit",
    "ElectricDemand",
    "FirstStageDecision",
    "InvariantError",
    "MarketData",
    "MarketSet",
    "MilpModel",
    "MilpSolution",
    "NdResUnit",
    "RvppInstance",
    "SchemaError",
    "SolveOptions",
    "ThermalDemand",
    "TimeGrid",
    "UncertaintyBudgets",
    "build_deterministic",
    "build_robust",
    "check_feasibility",
    "compute_bounds",
    "export_mps",
    "extract_first_stage",
    "instance_to_json",
    "load_instance",
    "load_instance_file",
    "nominal_projection",
    "protection_value_primal",
    "solve",
    "total_cost",
    "worst_case_report",
]

__version__ = "0.1.0"
