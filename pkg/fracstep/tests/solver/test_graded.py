"""Test the graded-mesh L1 baseline.
Run this test with command: poetry run pytest fracstep/tests/solver/test_graded.py
"""
import numpy as np
import pytest

from fracstep.exceptions import DomainError
from fracstep.solver.graded import GradedL1Solver, graded_l1_solve, graded_mesh, l1_weights
from fracstep.solver.problems import case1, exact_case1, linear_diagonal, linear_growth
from fracstep.specfun import rgamma


def test_graded_mesh():
    mesh = graded_mesh(2.0, 4, T=2.0)
    np.testing.assert_allclose(mesh, [0.0, 0.125, 0.5, 1.125, 2.0])
    np.testing.assert_allclose(graded_mesh(1.0, 5), np.linspace(0.0, 1.0, 6))


@pytest.mark.parametrize("r, M, T", [(0.5, 4, 1.0), (2.0, 0, 1.0), (2.0, 4, 0.0)])
def test_graded_mesh_domain(r, M, T):
    with pytest.raises(DomainError):
        graded_mesh(r, M, T)


def test_l1_weights_on_uniform_mesh():
    alpha, tau = 0.5, 0.1
    t = tau * np.arange(4)
    a = l1_weights(alpha, t, 3)
    k = np.arange(1, 4)
    expected = ((3 - k + 1) ** (1 - alpha) - (3 - k) ** (1 - alpha)) * tau ** (-alpha) * rgamma(2 - alpha)
    np.testing.assert_allclose(a, expected, rtol=1e-13)


def test_l1_weights_order_one():
    t = np.array([0.0, 0.1, 0.3])
    np.testing.assert_allclose(l1_weights(1.0, t, 2), [0.0, 5.0])


@pytest.mark.parametrize("r", [1.0, 2.0, 3.0])
def test_linear_solution_is_exact(r):
    problem = linear_growth(0.5)
    trajectory = graded_l1_solve(problem, r, 20)
    assert trajectory.max_error(problem.exact) <= 1e-10


def test_case1_error_decreases():
    alpha = 0.5
    errors = []
    for M in (16, 64):
        trajectory = graded_l1_solve(case1(alpha), 3.0, M)
        exact = np.array([exact_case1(alpha, 1.0, t) for t in trajectory.t])
        errors.append(float(np.max(np.abs(trajectory.U[:, 0] - exact))))
    assert errors[1] < errors[0]
    assert errors[1] < 1e-2


def test_graded_system():
    problem = linear_diagonal([0.5, 0.9], [1.0, 2.0], [1.0, 1.0])
    trajectory = GradedL1Solver(problem, 2.0, 32, T=1.0).solve()
    assert trajectory.U.shape == (33, 2)
    assert trajectory.stats["steps"] == 32
    assert trajectory.max_error(problem.exact) < 5e-2
