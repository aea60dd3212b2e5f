"""Solver-agnostic linear model IR, fixed-format MPS export, feasibility
checking, and MILP solver backends (HiGHS via scipy, GLPK via cvxopt).
"""

from __future__ import annotations

import os
import time
from dataclasses import dataclass, field

import numpy as np
import scipy.optimize as sopt
import scipy.sparse as sp

CONTINUOUS = "continuous"
BINARY = "binary"

LE, EQ, GE = "<=", "=", ">="

_SENSES = (LE, EQ, GE)


class ModelError(ValueError):
    """The model violates an IR invariant (duplicate name, bad reference...)."""


class SolverError(RuntimeError):
    """The backend failed or is unavailable."""


@dataclass
class Variable:
    name: str
    kind: str = CONTINUOUS
    lower: float = 0.0
    upper: float = float("inf")


@dataclass
class Constraint:
    name: str
    terms: dict  # variable name -> coefficient
    sense: str
    rhs: float


@dataclass
class MilpModel:
    """Pure linear model: variables, row constraints, one linear objective.

    Declaration order is meaningful: exports and solver matrices follow it.
    """

    name: str = "model"
    variables: list = field(default_factory=list)
    constraints: list = field(default_factory=list)
    objective_sense: str = "max"
    objective: dict = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self._var_index = {v.name: i for i, v in enumerate(self.variables)}
        self._con_index = {c.name: i for i, c in enumerate(self.constraints)}

    # -- construction -------------------------------------------------------

    def add_var(self, name, kind=CONTINUOUS, lower=0.0, upper=float("inf"), tag=None):
        if name in self._var_index:
            raise ModelError(f"duplicate variable name '{name}'")
        if kind not in (CONTINUOUS, BINARY):
            raise ModelError(f"variable '{name}': unknown kind '{kind}'")
        if kind == BINARY and upper == float("inf"):
            upper = 1.0
        if kind == BINARY and not (0 <= lower and upper <= 1):
            raise ModelError(f"binary variable '{name}' must have bounds within [0, 1]")
        if lower > upper:
            raise ModelError(f"variable '{name}': lower bound above upper bound")
        self._var_index[name] = len(self.variables)
        self.variables.append(Variable(name, kind, float(lower), float(upper)))
        if tag:
            self.metadata[name] = tag
        return name

    def add_constraint(self, name, terms, sense, rhs, tag=None):
        if name in self._con_index:
            raise ModelError(f"duplicate constraint name '{name}'")
        if sense not in _SENSES:
            raise ModelError(f"constraint '{name}': unknown sense '{sense}'")
        clean = {}
        for var, coef in dict(terms).items():
            if var not in self._var_index:
                raise ModelError(f"constraint '{name}' references unknown variable '{var}'")
            coef = float(coef)
            if coef != 0.0:
                clean[var] = clean.get(var, 0.0) + coef
        self._con_index[name] = len(self.constraints)
        self.constraints.append(Constraint(name, clean, sense, float(rhs)))
        if tag:
            self.metadata[name] = tag
        return name

    def constraint(self, name) -> Constraint:
        return self.constraints[self._con_index[name]]

    def add_term(self, con_name, var, coef):
        """Add a linear term to an existing row (used to widen a base model)."""
        if var not in self._var_index:
            raise ModelError(f"constraint '{con_name}' references unknown variable '{var}'")
        con = self.constraint(con_name)
        con.terms[var] = con.terms.get(var, 0.0) + float(coef)

    def set_objective(self, sense, terms):
        if sense not in ("max", "min"):
            raise ModelError(f"unknown objective sense '{sense}'")
        self.objective_sense = sense
        self.objective = {}
        for var, coef in dict(terms).items():
            if var not in self._var_index:
                raise ModelError(f"objective references unknown variable '{var}'")
            if float(coef) != 0.0:
                self.objective[var] = self.objective.get(var, 0.0) + float(coef)

    def add_objective_term(self, var, coef):
        if var not in self._var_index:
            raise ModelError(f"objective references unknown variable '{var}'")
        if float(coef) != 0.0:
            self.objective[var] = self.objective.get(var, 0.0) + float(coef)

    def fix_var(self, name, value):
        v = self.variables[self._var_index[name]]
        v.lower = v.upper = float(value)

    # -- views ---------------------------------------------------------------

    def var(self, name) -> Variable:
        return self.variables[self._var_index[name]]

    def var_names(self) -> list:
        return [v.name for v in self.variables]

    @property
    def num_vars(self) -> int:
        return len(self.variables)

    @property
    def num_binaries(self) -> int:
        return sum(1 for v in self.variables if v.kind == BINARY)

    def to_matrices(self):
        """Return (c, integrality, lb, ub, A, row_lb, row_ub) in declaration order."""
        n = len(self.variables)
        idx = self._var_index
        c = np.zeros(n)
        for var, coef in self.objective.items():
            c[idx[var]] = coef
        integrality = np.array(
            [1 if v.kind == BINARY else 0 for v in self.variables], dtype=np.int8
        )
        lb = np.array([v.lower for v in self.variables])
        ub = np.array([v.upper for v in self.variables])
        rows, cols, vals = [], [], []
        row_lb = np.empty(len(self.constraints))
        row_ub = np.empty(len(self.constraints))
        for i, con in enumerate(self.constraints):
            for var, coef in con.terms.items():
                rows.append(i)
                cols.append(idx[var])
                vals.append(coef)
            if con.sense == LE:
                row_lb[i], row_ub[i] = -np.inf, con.rhs
            elif con.sense == GE:
                row_lb[i], row_ub[i] = con.rhs, np.inf
            else:
                row_lb[i] = row_ub[i] = con.rhs
        A = sp.csr_matrix(
            (vals, (rows, cols)), shape=(len(self.constraints), n), dtype=float
        )
        return c, integrality, lb, ub, A, row_lb, row_ub


# ---------------------------------------------------------------------------
# Feasibility checking
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    name: str
    kind: str  # "constraint" or "bound"
    amount: float
    detail: str


def check_feasibility(model: MilpModel, assignment: dict, tol_abs: float) -> list:
    """Every constraint (and variable bound) violated by more than tol_abs."""
    missing = [v.name for v in model.variables if v.name not in assignment]
    if missing:
        raise ModelError(f"assignment is missing variables: {missing[:5]}...")
    out = []
    for v in model.variables:
        x = assignment[v.name]
        if x < v.lower - tol_abs:
            out.append(Violation(v.name, "bound", v.lower - x, f"{x} < lower {v.lower}"))
        elif x > v.upper + tol_abs:
            out.append(Violation(v.name, "bound", x - v.upper, f"{x} > upper {v.upper}"))
    for con in model.constraints:
        lhs = sum(coef * assignment[var] for var, coef in con.terms.items())
        if con.sense == LE:
            slack = con.rhs - lhs
        elif con.sense == GE:
            slack = lhs - con.rhs
        else:
            slack = -abs(lhs - con.rhs)
        if slack < -tol_abs:
            out.append(
                Violation(
                    con.name,
                    "constraint",
                    -slack,
                    f"lhs={lhs} {con.sense} rhs={con.rhs}",
                )
            )
    return out


def feasibility_tol(model: MilpModel, base: float = 1e-6) -> float:
    """Absolute tolerance scaled by the largest right-hand side magnitude."""
    max_rhs = max((abs(c.rhs) for c in model.constraints), default=0.0)
    return base * (1.0 + max_rhs)


# ---------------------------------------------------------------------------
# MPS export (fixed layout, deterministic bytes)
# ---------------------------------------------------------------------------


def _mps_num(v: float) -> str:
    if v == 0:
        return "0"
    return f"{v:.12G}"


def export_mps(model: MilpModel) -> bytes:
    """Fixed-layout MPS with mangled 8-character names and a comment block
    mapping them back to model names. Deterministic: identical models give
    byte-identical output.
    """
    var_ids = {}
    for i, v in enumerate(model.variables):
        var_ids[v.name] = f"C{i + 1:07d}"
    con_ids = {}
    for i, c in enumerate(model.constraints):
        con_ids[c.name] = f"R{i + 1:07d}"
    if len(set(var_ids.values())) != len(var_ids) or len(set(con_ids.values())) != len(
        con_ids
    ):
        raise ModelError("MPS name mangling collision")

    lines = []
    lines.append(f"* rows={len(model.constraints)} cols={len(model.variables)}")
    lines.append("* name dictionary (mangled -> original):")
    for c in model.constraints:
        lines.append(f"* {con_ids[c.name]} {c.name}")
    for v in model.variables:
        lines.append(f"* {var_ids[v.name]} {v.name}")
    lines.append(f"NAME          {model.name[:60]}")
    lines.append("OBJSENSE")
    lines.append(f"    {model.objective_sense.upper()}")
    lines.append("ROWS")
    lines.append(" N  OBJ")
    sense_code = {LE: "L", EQ: "E", GE: "G"}
    for c in model.constraints:
        lines.append(f" {sense_code[c.sense]}  {con_ids[c.name]}")

    # column-major entries in declaration order
    lines.append("COLUMNS")
    rows_by_var = {v.name: [] for v in model.variables}
    for c in model.constraints:
        for var in c.terms:
            rows_by_var[var].append((con_ids[c.name], c.terms[var]))
    in_int = False
    marker_no = 0
    for v in model.variables:
        want_int = v.kind == BINARY
        if want_int and not in_int:
            marker_no += 1
            lines.append(f"    MARKER{marker_no:04d}  'MARKER'                 'INTORG'")
            in_int = True
        elif not want_int and in_int:
            marker_no += 1
            lines.append(f"    MARKER{marker_no:04d}  'MARKER'                 'INTEND'")
            in_int = False
        entries = []
        if v.name in model.objective:
            entries.append(("OBJ", model.objective[v.name]))
        entries.extend(rows_by_var[v.name])
        if not entries:
            entries.append(("OBJ", 0.0))
        cid = var_ids[v.name]
        for row, coef in entries:
            lines.append(f"    {cid:<8}  {row:<8}  {_mps_num(coef)}")
    if in_int:
        marker_no += 1
        lines.append(f"    MARKER{marker_no:04d}  'MARKER'                 'INTEND'")

    lines.append("RHS")
    for c in model.constraints:
        if c.rhs != 0.0:
            lines.append(f"    RHS       {con_ids[c.name]:<8}  {_mps_num(c.rhs)}")

    lines.append("BOUNDS")
    for v in model.variables:
        cid = var_ids[v.name]
        lo, up = v.lower, v.upper
        if lo == up:
            lines.append(f" FX BND       {cid:<8}  {_mps_num(lo)}")
            continue
        if lo == -np.inf and up == np.inf:
            lines.append(f" FR BND       {cid:<8}")
            continue
        if lo == -np.inf:
            lines.append(f" MI BND       {cid:<8}")
        elif lo != 0.0:
            lines.append(f" LO BND       {cid:<8}  {_mps_num(lo)}")
        if up != np.inf:
            lines.append(f" UP BND       {cid:<8}  {_mps_num(up)}")
    lines.append("ENDATA")
    return ("\n".join(lines) + "\n").encode("ascii")


def parse_mps(data: bytes) -> MilpModel:
    """Parse MPS text produced by export_mps back into a model (names restored
    from the comment dictionary when present)."""
    names = {}
    section = None
    model = MilpModel(name="parsed")
    senses = {"L": LE, "E": EQ, "G": GE}
    row_sense = {}
    row_order = []
    col_entries = {}
    col_order = []
    int_cols = set()
    rhs = {}
    bounds = {}
    in_int = False
    for raw in data.decode("ascii").splitlines():
        if not raw.strip():
            continue
        if raw.startswith("*"):
            parts = raw[1:].split()
            if len(parts) == 2 and (parts[0][0] in "RC") and len(parts[0]) == 8:
                names[parts[0]] = parts[1]
            continue
        if not raw.startswith(" ") and not raw.startswith("\t"):
            section = raw.split()[0]
            if section == "NAME":
                toks = raw.split(None, 1)
                model.name = toks[1].strip() if len(toks) > 1 else "parsed"
            continue
        toks = raw.split()
        if section == "OBJSENSE":
            model.objective_sense = toks[0].lower()
        elif section == "ROWS":
            code, rid = toks[0], toks[1]
            if code == "N":
                continue
            row_sense[rid] = senses[code]
            row_order.append(rid)
        elif section == "COLUMNS":
            if len(toks) >= 3 and toks[1] == "'MARKER'":
                in_int = toks[2] == "'INTORG'"
                continue
            cid = toks[0]
            if cid not in col_entries:
                col_entries[cid] = []
                col_order.append(cid)
                if in_int:
                    int_cols.add(cid)
            pairs = toks[1:]
            for i in range(0, len(pairs), 2):
                col_entries[cid].append((pairs[i], float(pairs[i + 1])))
        elif section == "RHS":
            pairs = toks[1:]
            for i in range(0, len(pairs), 2):
                rhs[pairs[i]] = float(pairs[i + 1])
        elif section == "BOUNDS":
            btype, cid = toks[0], toks[2]
            val = float(toks[3]) if len(toks) > 3 else None
            bounds.setdefault(cid, []).append((btype, val))
        elif section == "ENDATA":
            break

    for cid in col_order:
        kind = BINARY if cid in int_cols else CONTINUOUS
        lo, up = 0.0, (1.0 if kind == BINARY else np.inf)
        for btype, val in bounds.get(cid, []):
            if btype == "FX":
                lo = up = val
            elif btype == "FR":
                lo, up = -np.inf, np.inf
            elif btype == "MI":
                lo = -np.inf
            elif btype == "LO":
                lo = val
            elif btype == "UP":
                up = val
        if kind == BINARY and not (lo >= 0 and up <= 1):
            kind = CONTINUOUS  # general integer columns are not produced here
        model.add_var(names.get(cid, cid), kind, lo, up)

    obj = {}
    terms_by_row = {rid: {} for rid in row_order}
    for cid in col_order:
        vname = names.get(cid, cid)
        for rid, coef in col_entries[cid]:
            if rid == "OBJ":
                if coef != 0.0:
                    obj[vname] = obj.get(vname, 0.0) + coef
            else:
                terms_by_row[rid][vname] = terms_by_row[rid].get(vname, 0.0) + coef
    for rid in row_order:
        model.add_constraint(
            names.get(rid, rid), terms_by_row[rid], row_sense[rid], rhs.get(rid, 0.0)
        )
    model.set_objective(model.objective_sense, obj)
    return model


# ---------------------------------------------------------------------------
# Solving
# ---------------------------------------------------------------------------

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
GAP_LIMIT = "gap_limit"
TIME_LIMIT = "time_limit"


@dataclass(frozen=True)
class SolveOptions:
    rel_gap_target: float = 1e-4
    time_limit_seconds: float = 300.0
    seed: int = 0

    def __post_init__(self):
        if self.rel_gap_target < 0:
            raise ValueError("rel_gap_target must be >= 0")


@dataclass(frozen=True)
class MilpSolution:
    status: str
    objective_value: float
    assignment: dict
    mip_gap: float
    solve_seconds: float


def _solve_highs(model: MilpModel, options: SolveOptions) -> MilpSolution:
    c, integrality, lb, ub, A, row_lb, row_ub = model.to_matrices()
    sign = -1.0 if model.objective_sense == "max" else 1.0
    kwargs = dict(
        c=sign * c,
        integrality=integrality,
        bounds=sopt.Bounds(lb, ub),
        options=dict(
            mip_rel_gap=options.rel_gap_target,
            time_limit=options.time_limit_seconds,
            presolve=True,
        ),
    )
    if len(model.constraints):
        kwargs["constraints"] = [sopt.LinearConstraint(A, row_lb, row_ub)]
    t0 = time.perf_counter()
    res = sopt.milp(**kwargs)
    dt = time.perf_counter() - t0
    status_map = {0: OPTIMAL, 1: TIME_LIMIT, 2: INFEASIBLE, 3: UNBOUNDED}
    status = status_map.get(res.status)
    if status is None:
        raise SolverError(f"highs: numerical failure ({res.message})")
    if status == OPTIMAL and res.x is None:
        raise SolverError(f"highs: no solution returned ({res.message})")
    gap = float(res.mip_gap) if getattr(res, "mip_gap", None) is not None else 0.0
    if status == OPTIMAL and gap > max(options.rel_gap_target, 1e-12) * 10:
        status = GAP_LIMIT
    assignment = {}
    if res.x is not None:
        for v, x in zip(model.variables, res.x):
            assignment[v.name] = float(round(x)) if v.kind == BINARY else float(x)
    obj = float(sign * res.fun) if res.fun is not None else float("nan")
    return MilpSolution(status, obj, assignment, gap, dt)


def _solve_glpk(model: MilpModel, options: SolveOptions) -> MilpSolution:
    try:
        from cvxopt import glpk, matrix, spmatrix
    except ImportError as exc:  # pragma: no cover
        raise SolverError("glpk backend unavailable (cvxopt not installed)") from exc

    c, integrality, lb, ub, A, row_lb, row_ub = model.to_matrices()
    sign = -1.0 if model.objective_sense == "max" else 1.0
    n = len(c)

    g_rows, g_cols, g_vals, h_vals = [], [], [], []
    a_rows, a_cols, a_vals, b_vals = [], [], [], []
    Acoo = A.tocoo()
    by_row = {}
    for r, cc, v in zip(Acoo.row, Acoo.col, Acoo.data):
        by_row.setdefault(int(r), []).append((int(cc), float(v)))
    for i in range(A.shape[0]):
        entries = by_row.get(i, [])
        if row_lb[i] == row_ub[i]:
            k = len(b_vals)
            for cc, v in entries:
                a_rows.append(k)
                a_cols.append(cc)
                a_vals.append(v)
            b_vals.append(row_lb[i])
        else:
            if np.isfinite(row_ub[i]):
                k = len(h_vals)
                for cc, v in entries:
                    g_rows.append(k)
                    g_cols.append(cc)
                    g_vals.append(v)
                h_vals.append(row_ub[i])
            if np.isfinite(row_lb[i]):
                k = len(h_vals)
                for cc, v in entries:
                    g_rows.append(k)
                    g_cols.append(cc)
                    g_vals.append(-v)
                h_vals.append(-row_lb[i])
    for j in range(n):
        if np.isfinite(ub[j]):
            g_rows.append(len(h_vals))
            g_cols.append(j)
            g_vals.append(1.0)
            h_vals.append(ub[j])
        if np.isfinite(lb[j]):
            g_rows.append(len(h_vals))
            g_cols.append(j)
            g_vals.append(-1.0)
            h_vals.append(-lb[j])

    G = spmatrix(g_vals, g_rows, g_cols, (len(h_vals), n)) if h_vals else spmatrix(
        [0.0], [0], [0], (1, n)
    )
    h = matrix(h_vals) if h_vals else matrix([0.0])
    kw = {}
    if b_vals:
        kw["A"] = spmatrix(a_vals, a_rows, a_cols, (len(b_vals), n))
        kw["b"] = matrix(b_vals)
    binaries = {j for j in range(n) if integrality[j]}
    t0 = time.perf_counter()
    glpk.options["msg_lev"] = "GLP_MSG_OFF"
    glpk.options["tm_lim"] = int(options.time_limit_seconds * 1000)
    status, x = glpk.ilp(matrix(sign * c), G, h, B=binaries, **kw)
    dt = time.perf_counter() - t0
    if status == "optimal":
        assignment = {}
        xv = np.array(x).ravel()
        for v, val in zip(model.variables, xv):
            assignment[v.name] = float(round(val)) if v.kind == BINARY else float(val)
        obj = float(np.dot(c, xv))
        return MilpSolution(OPTIMAL, obj, assignment, 0.0, dt)
    if "infeasible" in status:
        return MilpSolution(INFEASIBLE, float("nan"), {}, float("inf"), dt)
    if "unbounded" in status or status == "dual infeasible":
        return MilpSolution(UNBOUNDED, float("nan"), {}, float("inf"), dt)
    if status in ("time limit exceeded", "unknown"):
        return MilpSolution(TIME_LIMIT, float("nan"), {}, float("inf"), dt)
    raise SolverError(f"glpk: solver failure (status {status!r})")


_BACKENDS = {"highs": _solve_highs, "glpk": _solve_glpk}

DEFAULT_BACKEND = "highs"


def solve(
    model: MilpModel, options: SolveOptions | None = None, backend: str | None = None
) -> MilpSolution:
    """Solve the model with the selected backend (RVPP_SOLVER overrides the
    default). Deterministic for a fixed seed and single-thread backends."""
    options = options or SolveOptions()
    name = backend or os.environ.get("RVPP_SOLVER", DEFAULT_BACKEND)
    if name not in _BACKENDS:
        raise SolverError(f"unknown solver backend '{name}' (have {sorted(_BACKENDS)})")
    return _BACKENDS[name](model, options)
