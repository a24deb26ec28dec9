"""Selection-matrix linear systems and their dimension/rank case analysis.

A Boolean selection matrix A (one row per target probability) together
with a normalization row is extended with slack variables:

    A' = [[A, O],      b' = (b_1 .. b_{m-1}, 1, 1 .. 1)
          [I, I]]

where row m of the top block is all ones over the first n columns (the
u-part must sum to 1) and the bottom block enforces u_i + w_i = 1. The
solver picks a method from the shape and rank of A': direct inverse when
square, left inverse when tall, right inverse (minimum-norm particular
solution) when wide; rank-deficient systems are classified only and left
to the LP path.
"""

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import DomainError, ShapeError
from .lp import LpProblem, LpResult, solve_lp

#: Absolute tolerance for probability/feasibility checks.
FEAS_TOL = 1e-9
#: Pivot tolerance for rank decisions (stricter than feasibility).
RANK_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class LinearSystem:
    """Extended system A' x = b' built from selection rows and targets."""

    a_bool: np.ndarray  # (m-1, n) selection rows
    a_ext: np.ndarray   # (m+n, 2n)
    b_ext: np.ndarray   # (m+n,)

    @property
    def n(self) -> int:
        """Number of exogenous values (columns of the selection matrix)."""
        return self.a_bool.shape[1]

    @property
    def m(self) -> int:
        """Number of top-block rows: targets plus the normalization row."""
        return self.a_bool.shape[0] + 1

    @property
    def b(self) -> np.ndarray:
        """Top-block right-hand side (targets..., 1)."""
        return self.b_ext[: self.m]


@dataclass(frozen=True, eq=False)
class SolveOutcome:
    """Result of the algebraic case analysis on one extended system."""

    x: np.ndarray | None
    method: str | None
    classification: str
    feasible: bool
    residual: float | None = None

    @property
    def u(self) -> np.ndarray | None:
        return None if self.x is None else self.x[: self.x.size // 2]

    @property
    def w(self) -> np.ndarray | None:
        return None if self.x is None else self.x[self.x.size // 2 :]


def build_b(cpt_row_targets) -> np.ndarray:
    """Append the normalization entry: (targets..., 1).

    Entries within FEAS_TOL of [0, 1] are clipped into range (CPT
    validation is tolerance-based, so conforming rows may carry that
    much rounding); anything further out is rejected.
    """
    targets = np.asarray(cpt_row_targets, dtype=np.float64).reshape(-1)
    if targets.size and (targets.min() < -FEAS_TOL
                         or targets.max() > 1.0 + FEAS_TOL):
        bad = targets[(targets < -FEAS_TOL) | (targets > 1.0 + FEAS_TOL)][0]
        raise DomainError(f"target probability {bad} outside [0, 1]")
    return np.concatenate([np.clip(targets, 0.0, 1.0), [1.0]])


def assemble_extended(a_bool, b) -> LinearSystem:
    """Build the extended system from selection rows and (targets..., 1)."""
    a = np.array(a_bool, dtype=np.float64)
    if a.ndim != 2:
        raise ShapeError(f"selection matrix must be 2-D, got ndim={a.ndim}")
    bv = np.asarray(b, dtype=np.float64).reshape(-1)
    rows, n = a.shape
    if n < 1:
        raise ShapeError("selection matrix needs at least one column")
    if bv.size != rows + 1:
        raise ShapeError(
            f"b has {bv.size} entries but the matrix has {rows} rows; "
            "expected one target per row plus the trailing normalization 1"
        )
    if abs(bv[-1] - 1.0) > FEAS_TOL:
        raise ShapeError(f"last entry of b must be 1, got {bv[-1]}")
    m = rows + 1
    a_ext = np.zeros((m + n, 2 * n))
    a_ext[:rows, :n] = a
    a_ext[rows, :n] = 1.0  # normalization row: u sums to 1
    a_ext[m:, :n] = np.eye(n)
    a_ext[m:, n:] = np.eye(n)  # slack rows: u_i + w_i = 1
    b_ext = np.concatenate([bv, np.ones(n)])
    a.flags.writeable = False
    a_ext.flags.writeable = False
    b_ext.flags.writeable = False
    return LinearSystem(a_bool=a, a_ext=a_ext, b_ext=b_ext)


def rank(matrix, tol: float = RANK_TOL) -> int:
    """Numerical rank via row reduction with the given pivot tolerance."""
    a = np.ascontiguousarray(np.asarray(matrix, dtype=np.float64))
    if a.ndim != 2:
        raise ShapeError(f"rank needs a 2-D matrix, got ndim={a.ndim}")
    if 0 in a.shape:
        return 0
    return int(_kernels.rank_rowreduce(a, tol))


def left_inverse(matrix) -> np.ndarray:
    """(A.T A)^-1 A.T for a tall matrix with full column rank."""
    a = np.asarray(matrix, dtype=np.float64)
    return np.linalg.inv(a.T @ a) @ a.T


def right_inverse(matrix) -> np.ndarray:
    """A.T (A A.T)^-1 for a wide matrix with full row rank."""
    a = np.asarray(matrix, dtype=np.float64)
    return a.T @ np.linalg.inv(a @ a.T)


def is_probability_vector(u, tol: float = FEAS_TOL) -> bool:
    """True iff all entries >= -tol and the sum is 1 within tol."""
    v = np.asarray(u, dtype=np.float64).reshape(-1)
    if v.size == 0:
        return False
    return bool(v.min() >= -tol and abs(v.sum() - 1.0) <= tol)


def _feasible(x: np.ndarray, tol: float) -> bool:
    n = x.size // 2
    u, w = x[:n], x[n:]
    return (
        is_probability_vector(u, tol)
        and w.min() >= -tol
        and np.abs(u + w - 1.0).max() <= tol
    )


def classify(sys: LinearSystem) -> str:
    """Shape/rank classification of the extended system (no solving)."""
    nrows, ncols = sys.a_ext.shape
    r = rank(sys.a_ext)
    if nrows == ncols:
        return "square-invertible" if r == ncols else "square-singular"
    if nrows > ncols:
        return "tall-full-rank" if r == ncols else "tall-rank-deficient"
    return "wide-full-rank" if r == nrows else "wide-rank-deficient"


def classify_and_solve(sys: LinearSystem, tol: float = FEAS_TOL) -> SolveOutcome:
    """Shape/rank case analysis of the extended system.

    Square and nonsingular: x = A'^-1 b'. Tall with full column rank: the
    left-inverse product is a least-squares candidate, kept only when the
    residual confirms b' lies in the column space. Wide with full row
    rank: the right-inverse product is the minimum-norm particular
    solution. Rank-deficient systems report their classification with no
    algebraic solution (the LP path still applies).
    """
    a, b = sys.a_ext, sys.b_ext
    nrows, ncols = a.shape
    r = rank(a)

    if nrows == ncols:
        if r == ncols:
            x = np.linalg.solve(a, b)
            res = float(np.abs(a @ x - b).max())
            return SolveOutcome(x, "direct-inverse", "square-invertible",
                                _feasible(x, tol), res)
        return SolveOutcome(None, None, "square-singular", False)

    if nrows > ncols:
        if r == ncols:
            cand = left_inverse(a) @ b
            res = float(np.abs(a @ cand - b).max())
            if res > tol:
                # b' outside the column space: no exact solution exists.
                return SolveOutcome(None, "left-inverse", "tall-full-rank",
                                    False, res)
            return SolveOutcome(cand, "left-inverse", "tall-full-rank",
                                _feasible(cand, tol), res)
        return SolveOutcome(None, None, "tall-rank-deficient", False)

    if r == nrows:
        x = right_inverse(a) @ b
        res = float(np.abs(a @ x - b).max())
        return SolveOutcome(x, "right-inverse", "wide-full-rank",
                            _feasible(x, tol), res)
    return SolveOutcome(None, None, "wide-rank-deficient", False)


def solve_via_lp(sys: LinearSystem, c=None, tol: float = FEAS_TOL) -> tuple[SolveOutcome, LpResult]:
    """Solve the extended system as an LP and wrap the result.

    Returns the LP-backed SolveOutcome together with the raw LpResult.
    The classification still comes from the rank analysis.
    """
    lp = solve_lp(LpProblem(a_eq=sys.a_ext, b_eq=sys.b_ext, c=c))
    classification = classify(sys)
    if not lp.optimal:
        return SolveOutcome(None, "lp", classification, False), lp
    res = float(np.abs(sys.a_ext @ lp.x - sys.b_ext).max())
    return SolveOutcome(lp.x, "lp", classification, _feasible(lp.x, tol), res), lp


def u_as_distribution(u, tol: float = FEAS_TOL) -> np.ndarray:
    """Clamp rounding negatives within -tol to 0 and renormalize.

    Entries below -tol signal genuine infeasibility and raise instead of
    being masked.
    """
    v = np.asarray(u, dtype=np.float64).copy().reshape(-1)
    if v.min() < -tol:
        raise DomainError(f"entry {v.min()} below -{tol}: not a distribution")
    if abs(v.sum() - 1.0) > tol:
        raise DomainError(f"sum {v.sum()} not 1 within {tol}")
    v[v < 0.0] = 0.0
    return v / v.sum()
