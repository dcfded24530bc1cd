"""Dense two-phase primal simplex with dual multiplier extraction.

Small and deterministic by construction: Bland's anti-cycling rule is
always on, the basic solution is recomputed from the basis factorization
at every pivot, and optimal solutions come with primal/dual/slackness
residuals so callers can certify what they got. Intended for the desk-
scale epigraph programs generated by the polyhedral minimal-vector path,
not for large or sparse problems.
"""

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import DimensionMismatchError, InvalidProblemError, SolverStalledError

LE, EQ, GE = "<=", "=", ">="
_SENSES = (LE, EQ, GE)

PIVOT_TOL = 1e-10
FEAS_TOL = 1e-9
DEFAULT_PIVOT_CAP = 100_000


class LpStatus(str, Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class LinearProgram:
    """min c.x  subject to  A x (<=|=|>=) b  and  lower <= x <= upper."""

    c: np.ndarray
    a: np.ndarray
    b: np.ndarray
    senses: tuple
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        m, k = self.a.shape
        if self.c.shape != (k,):
            raise DimensionMismatchError(
                f"objective length {self.c.shape[0]} does not match {k} columns"
            )
        if self.b.shape != (m,):
            raise DimensionMismatchError(
                f"rhs length {self.b.shape[0]} does not match {m} rows"
            )
        if len(self.senses) != m:
            raise DimensionMismatchError(
                f"got {len(self.senses)} senses for {m} rows"
            )
        for s in self.senses:
            if s not in _SENSES:
                raise InvalidProblemError(f"unknown row sense {s!r}")
        if self.lower.shape != (k,) or self.upper.shape != (k,):
            raise DimensionMismatchError("bound arrays must match the column count")


def make_lp(c, a, b, senses, lower=None, upper=None) -> LinearProgram:
    """Assemble a LinearProgram with default bounds x >= 0."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2:
        raise DimensionMismatchError("constraint matrix must be 2-D")
    c = np.asarray(c, dtype=float)
    b = np.asarray(b, dtype=float)
    k = a.shape[1]
    lower = np.zeros(k) if lower is None else np.asarray(lower, dtype=float)
    upper = np.full(k, np.inf) if upper is None else np.asarray(upper, dtype=float)
    return LinearProgram(c=c, a=a, b=b, senses=tuple(senses), lower=lower, upper=upper)


@dataclass(frozen=True)
class LpSolution:
    status: LpStatus
    x: np.ndarray | None
    objective: float | None
    duals: np.ndarray | None
    residuals: dict = field(default_factory=dict)
    iterations: int = 0


@dataclass
class _StandardForm:
    """Equality-form translation: min c.x', A x' = b, x' >= 0, b >= 0."""

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    offset: float
    # per original variable: ("shift", col, const) | ("flip", col, const)
    #                        | ("split", col_pos, col_neg)
    var_map: list
    row_sign: np.ndarray  # +1/-1 applied to each internal row
    row_origin: np.ndarray  # original row index, or -1 for bound rows
    n_true_cols: int


def _standardize(lp: LinearProgram) -> _StandardForm | None:
    """Translate bounds and senses away. None means a trivially empty box."""
    m, k = lp.a.shape
    cols = []  # columns of the internal matrix, built per original variable
    c_int = []
    var_map = []
    offset = 0.0
    consts = np.zeros(k)

    def add_col(coeff_col, cost):
        cols.append(coeff_col)
        c_int.append(cost)
        return len(cols) - 1

    for j in range(k):
        lo, hi = lp.lower[j], lp.upper[j]
        if lo > hi:
            return None
        col = lp.a[:, j]
        if np.isneginf(lo) and np.isposinf(hi):
            p = add_col(col, lp.c[j])
            q = add_col(-col, -lp.c[j])
            var_map.append(("split", p, q))
        elif np.isneginf(lo):
            p = add_col(-col, -lp.c[j])
            var_map.append(("flip", p, hi))
            consts[j] = hi
            offset += lp.c[j] * hi
        else:
            p = add_col(col, lp.c[j])
            var_map.append(("shift", p, lo))
            consts[j] = lo
            offset += lp.c[j] * lo

    a_int = np.column_stack(cols) if cols else np.zeros((m, 0))
    b_int = lp.b - lp.a @ consts
    senses = list(lp.senses)
    row_origin = list(range(m))

    # finite two-sided boxes become an extra upper-bound row on the shifted var
    extra_rows = []
    for j in range(k):
        lo, hi = lp.lower[j], lp.upper[j]
        if np.isfinite(lo) and np.isfinite(hi):
            kind, p, _ = var_map[j]
            row = np.zeros(a_int.shape[1])
            row[p] = 1.0
            extra_rows.append((row, hi - lo))
    for row, rhs in extra_rows:
        a_int = np.vstack([a_int, row])
        b_int = np.append(b_int, rhs)
        senses.append(LE)
        row_origin.append(-1)

    # slack/surplus columns turn every row into an equality
    n_rows = a_int.shape[0]
    slack_cols = np.zeros((n_rows, 0))
    for i, s in enumerate(senses):
        if s == EQ:
            continue
        col = np.zeros((n_rows, 1))
        col[i, 0] = 1.0 if s == LE else -1.0
        slack_cols = np.hstack([slack_cols, col])
        c_int.append(0.0)
    n_true = a_int.shape[1]
    a_int = np.hstack([a_int, slack_cols])

    row_sign = np.ones(n_rows)
    for i in range(n_rows):
        if b_int[i] < 0:
            a_int[i] *= -1.0
            b_int[i] *= -1.0
            row_sign[i] = -1.0

    return _StandardForm(
        a=a_int, b=b_int, c=np.asarray(c_int), offset=offset,
        var_map=var_map, row_sign=row_sign,
        row_origin=np.asarray(row_origin), n_true_cols=n_true,
    )


def _simplex_core(a, b, c, basis, allowed, cap):
    """Primal simplex from a feasible basis. Returns (basis, status, iters).

    Bland's rule on both the entering and leaving choices; the basic
    solution and duals are recomputed from scratch each pivot, trading
    speed for drift-free arithmetic at desk scale.
    """
    m = a.shape[0]
    iters = 0
    while True:
        if iters > cap:
            raise SolverStalledError(f"simplex exceeded {cap} pivots")
        iters += 1
        bmat = a[:, basis]
        try:
            x_b = np.linalg.solve(bmat, b)
            y = np.linalg.solve(bmat.T, c[basis])
        except np.linalg.LinAlgError as exc:
            raise SolverStalledError(f"basis matrix became singular: {exc}") from exc

        entering = -1
        for j in allowed:
            if j in basis:
                continue
            reduced = c[j] - y @ a[:, j]
            if reduced < -PIVOT_TOL:
                entering = j
                break
        if entering < 0:
            return basis, LpStatus.OPTIMAL, iters

        direction = np.linalg.solve(bmat, a[:, entering])
        leave_pos = -1
        best_ratio = np.inf
        for i in range(m):
            if direction[i] > PIVOT_TOL:
                ratio = max(x_b[i], 0.0) / direction[i]
                if ratio < best_ratio - PIVOT_TOL or (
                    abs(ratio - best_ratio) <= PIVOT_TOL
                    and (leave_pos < 0 or basis[i] < basis[leave_pos])
                ):
                    best_ratio = ratio
                    leave_pos = i
        if leave_pos < 0:
            return basis, LpStatus.UNBOUNDED, iters
        basis[leave_pos] = entering


def solve_lp(lp: LinearProgram, pivot_cap: int = DEFAULT_PIVOT_CAP) -> LpSolution:
    """Solve an LP, returning primal optimum, row duals, and residuals.

    Two-phase method: artificial variables establish feasibility, then the
    true objective is minimized from the surviving basis. Row duals are
    read off the final basis (B^T y = c_B) and mapped back through any
    internal sign flips, so a <= row in a minimization gets y <= 0.
    """
    sf = _standardize(lp)
    if sf is None:
        return LpSolution(status=LpStatus.INFEASIBLE, x=None, objective=None, duals=None)

    a, b, c = sf.a, sf.b, sf.c
    n_rows, n_cols = a.shape

    # phase 1: one artificial per row lacking a usable +1 slack column
    basis = []
    art_cols = []
    for i in range(n_rows):
        slack_j = -1
        for j in range(sf.n_true_cols, n_cols):
            if a[i, j] == 1.0 and np.count_nonzero(a[:, j]) == 1:
                slack_j = j
                break
        if slack_j >= 0:
            basis.append(slack_j)
        else:
            col = np.zeros((n_rows, 1))
            col[i, 0] = 1.0
            a = np.hstack([a, col])
            art_cols.append(a.shape[1] - 1)
            basis.append(a.shape[1] - 1)
    c_phase1 = np.zeros(a.shape[1])
    c_phase1[art_cols] = 1.0

    total_iters = 0
    if art_cols:
        allowed = list(range(a.shape[1]))
        basis, status, iters = _simplex_core(a, b, c_phase1, basis, allowed, pivot_cap)
        total_iters += iters
        x_b = np.linalg.solve(a[:, basis], b)
        phase1_val = float(c_phase1[basis] @ x_b)
        if phase1_val > FEAS_TOL * max(1.0, float(np.max(np.abs(b), initial=1.0))):
            return LpSolution(status=LpStatus.INFEASIBLE, x=None, objective=None,
                              duals=None, iterations=total_iters)
        # drive leftover artificials out of the basis; drop dependent rows
        art_set = set(art_cols)
        keep_rows = np.ones(n_rows, dtype=bool)
        for pos in range(n_rows):
            if basis[pos] not in art_set:
                continue
            bmat = a[:, basis]
            pivot_j = -1
            for j in range(n_cols):
                if j in basis:
                    continue
                dirn = np.linalg.solve(bmat, a[:, j])
                if abs(dirn[pos]) > PIVOT_TOL:
                    pivot_j = j
                    break
            if pivot_j >= 0:
                basis[pos] = pivot_j
            else:
                keep_rows[pos] = False
        if not np.all(keep_rows):
            a = a[keep_rows]
            b = b[keep_rows]
            basis = [basis[i] for i in range(n_rows) if keep_rows[i]]
            n_rows = a.shape[0]
    else:
        keep_rows = np.ones(n_rows, dtype=bool)

    c_full = np.concatenate([c, np.zeros(a.shape[1] - n_cols)])
    allowed = list(range(n_cols))  # artificials may not re-enter
    basis, status, iters = _simplex_core(a, b, c_full, basis, allowed, pivot_cap)
    total_iters += iters
    if status is LpStatus.UNBOUNDED:
        return LpSolution(status=status, x=None, objective=None, duals=None,
                          iterations=total_iters)

    bmat = a[:, basis]
    x_b = np.linalg.solve(bmat, b)
    y_int = np.linalg.solve(bmat.T, c_full[basis])
    x_int = np.zeros(a.shape[1])
    x_int[basis] = x_b

    # residual certificates on the equality form
    reduced = c_full[:n_cols] - (y_int @ a[:, :n_cols])
    scale = max(1.0, float(np.max(np.abs(b), initial=0.0)),
                float(np.max(np.abs(x_b), initial=0.0)))
    residuals = {
        "primal_feasibility": float(
            max(np.max(np.abs(a @ x_int - b), initial=0.0),
                max(0.0, -float(np.min(x_int, initial=0.0))))
        ),
        "dual_feasibility": float(max(0.0, -float(np.min(reduced, initial=0.0)))),
        "complementary_slackness": float(
            np.max(np.abs(x_int[:n_cols] * reduced), initial=0.0)
        ),
        "duality_gap": float(abs(c_full @ x_int - y_int @ b)),
        "scale": scale,
    }

    # map the primal back through shifts/flips/splits
    x_orig = np.zeros(lp.a.shape[1])
    for j, entry in enumerate(sf.var_map):
        kind = entry[0]
        if kind == "shift":
            x_orig[j] = entry[2] + x_int[entry[1]]
        elif kind == "flip":
            x_orig[j] = entry[2] - x_int[entry[1]]
        else:
            x_orig[j] = x_int[entry[1]] - x_int[entry[2]]

    # map duals back to original rows (deleted rows keep multiplier 0)
    m_orig = lp.a.shape[0]
    duals = np.zeros(m_orig)
    surviving = np.flatnonzero(keep_rows)
    for pos, full_row in enumerate(surviving):
        orig = sf.row_origin[full_row]
        if orig >= 0:
            duals[orig] = sf.row_sign[full_row] * y_int[pos]

    objective = float(lp.c @ x_orig)
    return LpSolution(status=LpStatus.OPTIMAL, x=x_orig, objective=objective,
                      duals=duals, residuals=residuals, iterations=total_iters)
