import numpy as np
import pytest

from avekit.core import AveProblem


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running statistical suites")


@pytest.fixture
def fig1a():
    """Three isolated solutions (1,0), (-1,-4), (-1,4/3)."""
    return AveProblem([[0.0, 0.0], [-1.0, -0.5]], [-1.0, -1.0])


@pytest.fixture
def fig1b():
    """Point (-1,-2) plus the ray (3,0) + t(1,1)."""
    return AveProblem([[0.0, 1.0], [-2.0, 3.0]], [-3.0, -6.0])


@pytest.fixture
def ex1():
    """Unique solution (1,1); the successive-LP method stalls at (5/3,0)."""
    return AveProblem([[3.0, 1.0], [6.0, 5.0]], [3.0, 10.0])


@pytest.fixture
def not_regular_a():
    return np.array([[-1.0, 2.0], [-2.0, 1.0]])


@pytest.fixture
def not_regular_b():
    return np.array([[-1.0, 1.5], [-4.0, 3.5]])


@pytest.fixture
def infeasible_2():
    """0.3 I x - |x| = e has no solution."""
    return AveProblem(0.3 * np.eye(2), [1.0, 1.0])


def random_ave(rng: np.random.Generator, n: int, scale: float = 1.0) -> AveProblem:
    A = rng.standard_normal((n, n)) * scale
    x = rng.standard_normal(n)
    return AveProblem(A, A @ x - np.abs(x))


def points_set(points) -> np.ndarray:
    """Rows sorted lexicographically for order-free comparison."""
    P = np.array(points, dtype=float).reshape(len(points), -1)
    if P.size == 0:
        return P
    return P[np.lexsort(P.T[::-1])]
