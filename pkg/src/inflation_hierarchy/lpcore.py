"""Standard-form LPs (min c.x s.t. Ax = b, x >= 0), certificates and export.

Solving is delegated to HiGHS through :func:`scipy.optimize.linprog`; every
certificate it returns is re-verified here with plain numpy arithmetic before
being handed out. Infeasibility certificates come from a separate bounded LP

    max b.y  s.t.  A^T y <= 0,  -1 <= y <= 1

whose optimum is positive exactly when the original system is infeasible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.optimize import linprog

from .errors import InputError
from .model import Distribution, EventTable, lift

FEAS_TOL = 1e-7
NONNEG_TOL = 1e-9

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
NUMERICAL_FAILURE = "numerical-failure"

_HIGHS_OPTIONS = {"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10}


@dataclass(frozen=True, eq=False)
class LinearProgram:
    c: np.ndarray
    A: sparse.csr_array
    b: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.c, dtype=float).reshape(-1)
        b = np.asarray(self.b, dtype=float).reshape(-1)
        A = sparse.csr_array(self.A, dtype=float)
        if A.shape != (len(b), len(c)):
            raise InputError(f"A has shape {A.shape}, expected {(len(b), len(c))}")
        for name, arr in (("c", c), ("b", b), ("A", A.data)):
            if not np.all(np.isfinite(arr)):
                raise InputError(f"non-finite entry in {name}")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "A", A)

    @property
    def n_vars(self) -> int:
        return len(self.c)

    @property
    def n_rows(self) -> int:
        return len(self.b)


@dataclass(frozen=True, eq=False)
class SolveOutcome:
    status: str
    objective: float | None = None
    primal: np.ndarray | None = None
    dual: np.ndarray | None = None
    farkas: np.ndarray | None = None
    message: str = ""


def verify_primal(lp: LinearProgram, x: np.ndarray, tol: float = FEAS_TOL,
                  nonneg_tol: float = NONNEG_TOL) -> bool:
    if x is None or len(x) != lp.n_vars:
        return False
    resid = lp.A @ x - lp.b
    return bool((len(resid) == 0 or np.max(np.abs(resid)) <= tol)
                and (len(x) == 0 or np.min(x) >= -nonneg_tol))


def verify_farkas(lp: LinearProgram, y: np.ndarray, tol: float = FEAS_TOL) -> bool:
    if y is None or len(y) != lp.n_rows:
        return False
    yA = lp.A.T @ y
    return bool((len(yA) == 0 or np.max(yA) <= tol) and float(lp.b @ y) > tol)


def farkas_certificate(lp: LinearProgram) -> np.ndarray:
    """Solution of the bounded certificate LP (may be zero if ``lp`` is feasible)."""
    if lp.n_rows == 0:
        return np.zeros(0)
    if lp.n_vars == 0:
        return np.sign(lp.b)
    res = linprog(-lp.b, A_ub=lp.A.T.tocsr(), b_ub=np.zeros(lp.n_vars), bounds=(-1, 1),
                  method="highs", options=_HIGHS_OPTIONS)
    if res.status != 0:
        return np.zeros(lp.n_rows)
    return np.asarray(res.x)


def solve(lp: LinearProgram, tol: float = FEAS_TOL, nonneg_tol: float = NONNEG_TOL) -> SolveOutcome:
    """Solve ``lp``; every returned certificate has been checked to ``tol``."""
    if lp.n_vars == 0:
        if lp.n_rows == 0 or np.max(np.abs(lp.b)) <= tol:
            return SolveOutcome(OPTIMAL, 0.0, np.zeros(0), np.zeros(lp.n_rows))
        return SolveOutcome(INFEASIBLE, farkas=np.sign(lp.b))
    if lp.n_rows == 0:
        if np.any(lp.c < 0):
            return SolveOutcome(UNBOUNDED, message="negative cost with no constraints")
        return SolveOutcome(OPTIMAL, 0.0, np.zeros(lp.n_vars), np.zeros(0))
    res = linprog(lp.c, A_eq=lp.A, b_eq=lp.b, bounds=(0, None), method="highs",
                  options=_HIGHS_OPTIONS)
    if res.status == 0:
        x = np.maximum(np.asarray(res.x), 0.0)
        if not verify_primal(lp, x, tol, nonneg_tol):
            return SolveOutcome(NUMERICAL_FAILURE, message="primal failed verification")
        return SolveOutcome(OPTIMAL, float(lp.c @ x), x, np.asarray(res.eqlin.marginals),
                            message=res.message)
    if res.status == 2:
        y = farkas_certificate(lp)
        if verify_farkas(lp, y, tol):
            return SolveOutcome(INFEASIBLE, farkas=y, message=res.message)
        return SolveOutcome(NUMERICAL_FAILURE, farkas=y,
                            message="infeasible, but no certificate within tolerance")
    if res.status == 3:
        return SolveOutcome(UNBOUNDED, message=res.message)
    return SolveOutcome(NUMERICAL_FAILURE, message=res.message)


def _minimize_over_simplex(values: np.ndarray) -> float:
    lp = LinearProgram(values, sparse.csr_array(np.ones((1, len(values)))), np.ones(1))
    out = solve(lp)
    if out.status == UNBOUNDED:
        raise RuntimeError("witness normalization LP is unbounded; malformed constraint set")
    if out.status != OPTIMAL:
        raise RuntimeError(f"witness normalization LP failed: {out.status}")
    return out.objective


@dataclass(frozen=True, eq=False)
class Witness:
    """Polynomial incompatibility witness F(R) = coefficients . R^(x)n + offset.

    For ``basis == "outcomes"`` the coefficients run over lifted outcome tuples
    and the offset is folded in (always 0). For ``basis == "events"`` they run
    over n-tuples of measurable events, whose probabilities under R come from
    ``event_indicator``.
    """

    coefficients: np.ndarray
    degree: int
    basis: str
    outcome_cards: tuple[int, ...]
    value_at_input: float
    certified_floor: float
    certified_max: float
    offset: float = 0.0
    event_names: tuple[str, ...] = ()
    event_indicator: np.ndarray | None = None

    def lifted(self, p) -> np.ndarray:
        if isinstance(p, EventTable):
            if self.basis != "events":
                raise InputError("event table given for an outcome-basis witness")
            base = p.probabilities()
        elif isinstance(p, Distribution):
            if p.cards != tuple(self.outcome_cards):
                raise InputError("distribution does not match witness outcome space")
            if self.basis == "outcomes":
                return lift(p, self.degree).flat()
            base = self.event_indicator @ p.flat()
        else:
            base = np.asarray(p, dtype=float).reshape(-1)
            if self.basis == "events" and len(base) == int(np.prod(self.outcome_cards)):
                base = self.event_indicator @ base
        out = base
        for _ in range(self.degree - 1):
            out = np.multiply.outer(out, base)
        return np.asarray(out).reshape(-1)

    def evaluate(self, p) -> float:
        """F at ``p`` (a Distribution, an EventTable, or a flat outcome vector)."""
        return float(self.coefficients @ self.lifted(p) + self.offset)

    def label(self, r: int):
        base = len(self.event_names) if self.basis == "events" else int(np.prod(self.outcome_cards))
        parts = np.unravel_index(r, (base,) * self.degree)
        if self.basis == "events":
            return tuple(self.event_names[int(k)] for k in parts)
        return tuple(tuple(int(v) for v in np.unravel_index(int(k), self.outcome_cards))
                     for k in parts)


def extract_witness(farkas: np.ndarray, constraints, data) -> Witness:
    """Turn a Farkas vector of an inflation feasibility LP into a normalized witness.

    ``constraints`` is the :class:`~inflation_hierarchy.inflate.ConstraintSet`
    the LP came from and ``data`` the Distribution or EventTable it encoded.
    """
    y = np.asarray(farkas, dtype=float)
    k = constraints.n_product_rows
    coeffs = -y[:k]
    offset = -y[k]
    prod = constraints.product_matrix
    if constraints.basis == "outcomes":
        # diagonal marginals and liftings both sum to one: fold the constant in
        coeffs = coeffs + offset
        offset = 0.0
    column_values = prod.T @ coeffs + offset
    floor = _minimize_over_simplex(column_values)
    top = -_minimize_over_simplex(-column_values)
    scale = top - floor if top - floor > 0 else 1.0
    if constraints.basis == "outcomes":
        coeffs = (coeffs - floor) / scale
    else:
        coeffs = coeffs / scale
        offset = (offset - floor) / scale
    new_values = prod.T @ coeffs + offset
    w = Witness(coefficients=coeffs, degree=constraints.degree, basis=constraints.basis,
                outcome_cards=tuple(constraints.outcome_cards), value_at_input=float("nan"),
                certified_floor=float(np.min(new_values)), certified_max=float(np.max(new_values)),
                offset=float(offset), event_names=tuple(constraints.event_names),
                event_indicator=constraints.event_indicator)
    object.__setattr__(w, "value_at_input", w.evaluate(data))
    return w


def _fmt(x: float) -> str:
    return repr(float(x) + 0.0)


def export_lp(lp: LinearProgram, destination=None) -> str:
    """Deterministic plain-text export.

    Line 1 is ``INFLP minimize vars=<n> rows=<m>``. When there are variables,
    line 2 is ``obj`` followed by sparse ``index:coefficient`` pairs; then one
    ``eq <rhs>`` line per equality row with its pairs. Numbers use the
    shortest repr that round-trips.
    """
    lines = [f"INFLP minimize vars={lp.n_vars} rows={lp.n_rows}"]
    if lp.n_vars:
        nz = np.flatnonzero(lp.c)
        lines.append(" ".join(["obj"] + [f"{j}:{_fmt(lp.c[j])}" for j in nz]))
    A = lp.A.tocsr()
    A.sort_indices()
    for r in range(lp.n_rows):
        lo, hi = A.indptr[r], A.indptr[r + 1]
        pairs = [f"{int(j)}:{_fmt(v)}" for j, v in zip(A.indices[lo:hi], A.data[lo:hi]) if v != 0]
        lines.append(" ".join([f"eq {_fmt(lp.b[r])}"] + pairs))
    text = "\n".join(lines) + "\n"
    if destination is not None:
        if hasattr(destination, "write"):
            destination.write(text)
        else:
            with open(destination, "w", encoding="ascii", newline="\n") as fh:
                fh.write(text)
    return text


def parse_lp(text: str) -> LinearProgram:
    """Inverse of :func:`export_lp`."""
    lines = text.splitlines()
    head = lines[0].split()
    if head[:2] != ["INFLP", "minimize"]:
        raise InputError("not an INFLP export")
    n = int(head[2].split("=")[1])
    m = int(head[3].split("=")[1])
    c = np.zeros(n)
    body = lines[1:]
    if n:
        for pair in body[0].split()[1:]:
            j, v = pair.split(":")
            c[int(j)] = float(v)
        body = body[1:]
    rows, cols, vals, b = [], [], [], np.zeros(m)
    for r, line in enumerate(body):
        parts = line.split()
        b[r] = float(parts[1])
        for pair in parts[2:]:
            j, v = pair.split(":")
            rows.append(r)
            cols.append(int(j))
            vals.append(float(v))
    A = sparse.coo_array((vals, (rows, cols)), shape=(m, n)).tocsr()
    return LinearProgram(c, A, b)


def export_mps(lp: LinearProgram) -> str:
    """Free-format MPS for external solvers (not used by the test oracle)."""
    out = ["NAME INFLATION", "ROWS", " N obj"]
    out += [f" E r{r}" for r in range(lp.n_rows)]
    out.append("COLUMNS")
    A = lp.A.tocsc()
    A.sort_indices()
    for j in range(lp.n_vars):
        if lp.c[j] != 0:
            out.append(f" x{j} obj {_fmt(lp.c[j])}")
        for r, v in zip(A.indices[A.indptr[j]:A.indptr[j + 1]], A.data[A.indptr[j]:A.indptr[j + 1]]):
            out.append(f" x{j} r{int(r)} {_fmt(v)}")
    out.append("RHS")
    out += [f" rhs r{r} {_fmt(v)}" for r, v in enumerate(lp.b) if v != 0]
    out.append("ENDATA")
    return "\n".join(out) + "\n"
