"""Linear programming: min c.T x subject to A_eq x = b_eq, x >= 0.

Two-phase simplex with Bland's rule — deterministic pivoting, so repeated
solves of the same problem return the same vertex.
"""

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import ShapeError

#: Phase-1 feasibility tolerance (looser than the linear-algebra
#: tolerance because simplex accumulates more rounding).
PHASE1_TOL = 1e-8

_MAX_ITER = 200_000

_STATUS_NAMES = {
    _kernels.LP_STATUS_OPTIMAL: "optimal",
    _kernels.LP_STATUS_INFEASIBLE: "infeasible",
    _kernels.LP_STATUS_UNBOUNDED: "unbounded",
}


@dataclass(frozen=True, eq=False)
class LpProblem:
    """Equality-constrained LP with nonnegative variables."""

    a_eq: np.ndarray
    b_eq: np.ndarray
    c: np.ndarray | None = None

    def __post_init__(self):
        a = np.ascontiguousarray(np.asarray(self.a_eq, dtype=np.float64))
        b = np.ascontiguousarray(np.asarray(self.b_eq, dtype=np.float64))
        if a.ndim != 2:
            raise ShapeError(f"a_eq must be 2-D, got ndim={a.ndim}")
        if b.shape != (a.shape[0],):
            raise ShapeError(
                f"b_eq length {b.shape} does not match {a.shape[0]} rows"
            )
        if not np.isfinite(a).all() or not np.isfinite(b).all():
            raise ShapeError("a_eq and b_eq must be finite")
        c = self.c
        if c is None:
            c = np.ones(a.shape[1])
        c = np.ascontiguousarray(np.asarray(c, dtype=np.float64))
        if c.shape != (a.shape[1],):
            raise ShapeError(
                f"c length {c.shape} does not match {a.shape[1]} columns"
            )
        object.__setattr__(self, "a_eq", a)
        object.__setattr__(self, "b_eq", b)
        object.__setattr__(self, "c", c)


@dataclass(frozen=True, eq=False)
class LpResult:
    """Outcome of one solve: status, optimal point, objective value."""

    status: str
    x: np.ndarray | None = None
    objective_value: float | None = None

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


def solve_lp(p: LpProblem, tol: float = PHASE1_TOL) -> LpResult:
    """Solve the problem; status is one of optimal/infeasible/unbounded."""
    if p.a_eq.shape[0] == 0:
        raise ShapeError("problem needs at least one equality row")
    code, x = _kernels.simplex_two_phase(p.a_eq, p.b_eq, p.c, tol, _MAX_ITER)
    if code == _kernels.LP_STATUS_FAILED:  # pragma: no cover - defensive
        raise RuntimeError("simplex failed to terminate; problem ill-posed?")
    status = _STATUS_NAMES[code]
    if status != "optimal":
        return LpResult(status=status)
    return LpResult(status=status, x=x, objective_value=float(p.c @ x))
