"""Solver-facade tests: problem validation, statuses, determinism."""

import numpy as np
import pytest

from bn2pscm.errors import ShapeError
from bn2pscm.lp import LpProblem, LpResult, solve_lp


def test_problem_coercion_and_defaults():
    p = LpProblem(a_eq=[[1, 1]], b_eq=[1])
    assert p.a_eq.dtype == np.float64
    assert p.c.tolist() == [1.0, 1.0]  # default objective is all-ones


def test_problem_shape_checks():
    with pytest.raises(ShapeError):
        LpProblem(a_eq=[[1, 1]], b_eq=[1, 2])
    with pytest.raises(ShapeError):
        LpProblem(a_eq=[[1, 1]], b_eq=[1], c=[1, 2, 3])
    with pytest.raises(ShapeError):
        LpProblem(a_eq=[1, 1], b_eq=[1])
    with pytest.raises(ShapeError):
        LpProblem(a_eq=[[np.nan, 1]], b_eq=[1])
    with pytest.raises(ShapeError):
        solve_lp(LpProblem(a_eq=np.zeros((0, 2)), b_eq=np.zeros(0)))


def test_optimal_solution_and_objective():
    p = LpProblem(a_eq=[[1, 1, 0], [0, 1, 1]], b_eq=[0.6, 0.7], c=[1, 2, 3])
    r = solve_lp(p)
    assert r.optimal and r.status == "optimal"
    assert np.allclose(p.a_eq @ r.x, p.b_eq, atol=1e-9)
    assert r.objective_value == pytest.approx(float(p.c @ r.x))


def test_infeasible_and_unbounded():
    r = solve_lp(LpProblem(a_eq=[[1, 0], [1, 0]], b_eq=[0.2, 0.5]))
    assert r.status == "infeasible" and r.x is None and not r.optimal

    r = solve_lp(LpProblem(a_eq=[[1, -1]], b_eq=[1], c=[-1, -1]))
    assert r.status == "unbounded" and r.x is None


def test_bland_determinism():
    # repeated solves of a degenerate problem give identical vertices
    p = LpProblem(a_eq=[[1, 1, 1, 0], [1, 1, 0, 1]], b_eq=[0.5, 0.5],
                  c=[1, 1, 1, 1])
    xs = [solve_lp(p).x for _ in range(5)]
    for x in xs[1:]:
        assert np.array_equal(xs[0], x)


def test_minimization_picks_cheaper_vertex():
    # u1 + u2 = 1; cost (1, 3) -> everything on u1
    r = solve_lp(LpProblem(a_eq=[[1, 1]], b_eq=[1], c=[1, 3]))
    assert np.allclose(r.x, [1, 0])
    assert r.objective_value == pytest.approx(1.0)


def test_random_feasible_problems_roundtrip():
    rng = np.random.default_rng(23)
    for _ in range(50):
        m, n = rng.integers(1, 5), rng.integers(2, 8)
        a = rng.integers(0, 2, size=(m, n)).astype(float)
        x0 = rng.random(n)
        b = a @ x0
        c = rng.random(n)
        r = solve_lp(LpProblem(a_eq=a, b_eq=b, c=c))
        assert r.optimal
        assert np.allclose(a @ r.x, b, atol=1e-8)
        assert (r.x >= -1e-12).all()
        # the optimum can be no worse than the feasible point we started from
        assert r.objective_value <= float(c @ x0) + 1e-8
