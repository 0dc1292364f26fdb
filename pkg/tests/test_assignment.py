import numpy as np
import pytest

from trackfuse.assignment import assignment_cost, solve_assignment
from trackfuse.errors import EmptyCostMatrixError
from trackfuse.oracles import brute_force_assignment


def test_diagonal_optimum():
    pairs = solve_assignment(np.array([[0.0, 1.0], [1.0, 0.0]]))
    assert pairs == [(0, 0), (1, 1)]
    assert assignment_cost([[0.0, 1.0], [1.0, 0.0]], pairs) == 0.0


def test_three_by_three_total_cost():
    cost = np.array([[4.0, 1.0, 3.0], [2.0, 0.0, 5.0], [3.0, 2.0, 2.0]])
    pairs = solve_assignment(cost)
    assert assignment_cost(cost, pairs) == 5.0
    assert assignment_cost(cost, pairs) == brute_force_assignment(cost)


def test_single_cell():
    assert solve_assignment(np.array([[7.0]])) == [(0, 0)]


def test_empty_matrix_raises():
    with pytest.raises(EmptyCostMatrixError):
        solve_assignment(np.zeros((0, 3)))
    with pytest.raises(EmptyCostMatrixError):
        solve_assignment(np.zeros((3, 0)))


def test_non_finite_rejected():
    with pytest.raises(ValueError):
        solve_assignment(np.array([[1.0, np.inf], [0.0, 2.0]]))


def test_matches_brute_force_on_random_matrices():
    rng = np.random.default_rng(42)
    for _ in range(200):
        n, m = rng.integers(1, 8, size=2)
        cost = rng.uniform(-5.0, 5.0, size=(n, m))
        pairs = solve_assignment(cost)
        assert len(pairs) == min(n, m)
        rows = [i for i, _ in pairs]
        cols = [j for _, j in pairs]
        assert len(set(rows)) == len(rows) and len(set(cols)) == len(cols)
        assert assignment_cost(cost, pairs) == pytest.approx(brute_force_assignment(cost), abs=1e-9)
