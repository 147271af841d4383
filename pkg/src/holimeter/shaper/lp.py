"""Sparse LP container and a HiGHS-backed solver."""

from __future__ import annotations

from dataclasses import dataclass, field

import highspy
import numpy as np
from scipy import sparse

from ..errors import Infeasible, IterationLimit, SolverError, Unbounded

LE, EQ, GE = "<=", "=", ">="


@dataclass
class LinearProgram:
    """``min c @ x`` subject to triplet rows ``A x (<=|=|>=) rhs`` and bounds.

    ``columns`` maps a block key (e.g. ``("meter", "electricity")``) to the
    slice of variables it occupies; ``row_blocks`` does the same for rows.
    """

    c: np.ndarray
    rows: np.ndarray
    cols: np.ndarray
    vals: np.ndarray
    senses: np.ndarray
    rhs: np.ndarray
    lb: np.ndarray
    ub: np.ndarray
    columns: dict = field(default_factory=dict)
    row_blocks: dict = field(default_factory=dict)

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float)
        self.rows = np.asarray(self.rows, dtype=np.int64)
        self.cols = np.asarray(self.cols, dtype=np.int64)
        self.vals = np.asarray(self.vals, dtype=float)
        self.senses = np.asarray(self.senses, dtype=object)
        self.rhs = np.asarray(self.rhs, dtype=float)
        self.lb = np.asarray(self.lb, dtype=float)
        self.ub = np.asarray(self.ub, dtype=float)
        n, m = self.c.size, self.rhs.size
        if not (self.rows.size == self.cols.size == self.vals.size):
            raise ValueError("triplet arrays differ in length")
        if self.lb.size != n or self.ub.size != n:
            raise ValueError("bounds do not match the number of variables")
        if self.senses.size != m:
            raise ValueError("row senses do not match the number of rows")
        if self.rows.size and (self.rows.min() < 0 or self.rows.max() >= m):
            raise ValueError("row index out of range")
        if self.cols.size and (self.cols.min() < 0 or self.cols.max() >= n):
            raise ValueError("column index out of range")
        if not set(self.senses.tolist()) <= {LE, EQ, GE}:
            raise ValueError("row senses must be '<=', '=' or '>='")
        for name, arr in (("c", self.c), ("vals", self.vals), ("rhs", self.rhs)):
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"non-finite entries in {name}")
        if np.any(np.isnan(self.lb)) or np.any(np.isnan(self.ub)) or np.any(self.lb > self.ub):
            raise ValueError("invalid variable bounds")

    @property
    def num_vars(self) -> int:
        return self.c.size

    @property
    def num_rows(self) -> int:
        return self.rhs.size

    def matrix(self) -> sparse.csc_matrix:
        return sparse.csc_matrix((self.vals, (self.rows, self.cols)),
                                 shape=(self.num_rows, self.num_vars))

    def row_bounds(self) -> tuple[np.ndarray, np.ndarray]:
        lo = np.where(self.senses == LE, -np.inf, self.rhs).astype(float)
        hi = np.where(self.senses == GE, np.inf, self.rhs).astype(float)
        return lo, hi

    def var(self, x: np.ndarray, key) -> np.ndarray:
        return x[self.columns[key]]


@dataclass(frozen=True)
class LPResult:
    x: np.ndarray
    objective: float
    iterations: int


def _to_highs(lp: LinearProgram) -> highspy.HighsLp:
    inf = highspy.kHighsInf
    A = lp.matrix()
    lo, hi = lp.row_bounds()
    model = highspy.HighsLp()
    model.num_col_ = lp.num_vars
    model.num_row_ = lp.num_rows
    model.col_cost_ = lp.c
    model.col_lower_ = np.where(np.isinf(lp.lb), -inf, lp.lb)
    model.col_upper_ = np.where(np.isinf(lp.ub), inf, lp.ub)
    model.row_lower_ = np.where(np.isinf(lo), -inf, lo)
    model.row_upper_ = np.where(np.isinf(hi), inf, hi)
    model.a_matrix_.format_ = highspy.MatrixFormat.kColwise
    model.a_matrix_.start_ = A.indptr
    model.a_matrix_.index_ = A.indices
    model.a_matrix_.value_ = A.data
    return model


def new_highs(tol: float, max_iterations: int | None = None) -> highspy.Highs:
    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    h.setOptionValue("threads", 1)
    h.setOptionValue("random_seed", 0)
    ftol = float(min(max(tol, 1e-10), 1e-6))
    h.setOptionValue("primal_feasibility_tolerance", ftol)
    h.setOptionValue("dual_feasibility_tolerance", ftol)
    if max_iterations is not None:
        h.setOptionValue("simplex_iteration_limit", int(max_iterations))
    return h


def check_status(h: highspy.Highs) -> None:
    status = h.getModelStatus()
    S = highspy.HighsModelStatus
    if status == S.kOptimal:
        return
    if status == S.kInfeasible:
        raise Infeasible("LP is infeasible")
    if status in (S.kUnbounded, S.kUnboundedOrInfeasible):
        raise Unbounded("LP is unbounded")
    if status in (S.kIterationLimit, S.kTimeLimit):
        raise IterationLimit(f"LP solver stopped early: {h.modelStatusToString(status)}")
    raise SolverError(f"LP solver failed: {h.modelStatusToString(status)}")


def solve_lp(lp: LinearProgram, tol: float = 1e-7,
             max_iterations: int | None = None) -> LPResult:
    """Solve ``lp`` to optimality with the HiGHS simplex.

    Raises :class:`Infeasible`, :class:`Unbounded` or :class:`IterationLimit`.
    """
    h = new_highs(tol, max_iterations)
    h.setOptionValue("solver", "simplex")
    h.passModel(_to_highs(lp))
    h.run()
    check_status(h)
    x = np.array(h.getSolution().col_value, dtype=float)
    info = h.getInfo()
    return LPResult(x=x, objective=float(lp.c @ x), iterations=int(info.simplex_iteration_count))


def solve_lexicographic(lp: LinearProgram, secondary: np.ndarray, tol: float = 1e-7,
                        max_iterations: int | None = None) -> LPResult:
    """Minimise ``lp.c @ x``, then ``secondary @ x`` over part of the optimal face.

    The second stage caps every column with a positive primary cost at its
    first-stage value, so ``c @ x`` cannot grow; it warm-starts from the
    first stage. Requires ``c >= 0``.
    """
    secondary = np.asarray(secondary, dtype=float)
    if secondary.shape != lp.c.shape:
        raise ValueError("secondary cost must have one entry per variable")
    if np.any(lp.c < 0):
        raise ValueError("lexicographic solve needs a non-negative primary cost")
    h = new_highs(tol, max_iterations)
    h.setOptionValue("solver", "simplex")
    h.passModel(_to_highs(lp))
    h.run()
    check_status(h)
    iters = int(h.getInfo().simplex_iteration_count)
    x = np.array(h.getSolution().col_value, dtype=float)
    if np.any(secondary):
        nz = np.flatnonzero(lp.c).astype(np.int32)
        cap = np.maximum(x[nz], lp.lb[nz])
        h.changeColsBounds(nz.size, nz, lp.lb[nz], cap)
        idx = np.arange(lp.num_vars, dtype=np.int32)
        h.changeColsCost(idx.size, idx, secondary)
        h.run()
        check_status(h)
        iters += int(h.getInfo().simplex_iteration_count)
        x = np.array(h.getSolution().col_value, dtype=float)
    return LPResult(x=x, objective=float(lp.c @ x), iterations=iters)


__all__ = ["LinearProgram", "LPResult", "solve_lp", "solve_lexicographic", "LE", "EQ", "GE"]
