import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import linprog

from avekit.lp import LinearProgram, LpStatus, adjacent_vertices, solve_lp


def test_min_x_ge_1():
    sol = solve_lp(LinearProgram([1.0], [[1.0]], [1.0]))
    assert sol.status is LpStatus.OPTIMAL
    assert sol.x[0] == pytest.approx(1.0)
    assert sol.objective == pytest.approx(1.0)


def test_unbounded_ray():
    sol = solve_lp(LinearProgram([-1.0], [[1.0]], [0.0]))
    assert sol.status is LpStatus.UNBOUNDED
    assert sol.ray[0] > 0


def test_infeasible():
    sol = solve_lp(LinearProgram([0.0], [[1.0], [-1.0]], [1.0, 0.0]))
    assert sol.status is LpStatus.INFEASIBLE


def test_equality_rows():
    # min x + y s.t. x + y = 2, x >= 0.5, y >= 0.25
    lp = LinearProgram([1.0, 1.0], [[1.0, 1.0], [1.0, 0.0], [0.0, 1.0]], [2.0, 0.5, 0.25],
                       eq=[True, False, False])
    sol = solve_lp(lp)
    assert sol.optimal and sol.objective == pytest.approx(2.0)
    assert lp.is_feasible(sol.x)


def test_unsolvability_certificate_lp():
    # -y <= A^T y <= y, b^T y >= 1 for A = 0.3 I, b = e
    A = 0.3 * np.eye(2)
    b = np.ones(2)
    I = np.eye(2)
    G = np.vstack([I - A.T, I + A.T, b[None, :]])
    h = np.concatenate([np.zeros(4), [1.0]])
    sol = solve_lp(LinearProgram(np.zeros(2), G, h))
    assert sol.optimal
    y = sol.x
    assert np.all(np.abs(A.T @ y) <= y + 1e-12) and b @ y >= 1 - 1e-12


def test_dantzig_agrees_with_bland():
    rng = np.random.default_rng(3)
    G = rng.standard_normal((12, 4))
    x = rng.standard_normal(4)
    h = G @ x - rng.uniform(0, 1, 12)
    c = G.T @ rng.uniform(0, 1, 12)
    a = solve_lp(LinearProgram(c, G, h), rule="bland")
    b = solve_lp(LinearProgram(c, G, h), rule="dantzig")
    assert a.optimal and b.optimal
    assert a.objective == pytest.approx(b.objective, abs=1e-8)


def test_adjacent_vertices_of_square():
    # unit square, optimum at the origin, neighbours (1,0) and (0,1)
    G = np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]])
    h = np.array([0.0, 0.0, -1.0, -1.0])
    sol = solve_lp(LinearProgram([1.0, 1.0], G, h))
    nb = sorted(tuple(np.round(v, 12)) for v in adjacent_vertices(sol))
    assert nb == [(0.0, 1.0), (1.0, 0.0)]


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 5), st.integers(1, 10))
def test_matches_scipy_on_feasible_lps(seed, n, extra):
    rng = np.random.default_rng(seed)
    m = n + extra
    G = rng.standard_normal((m, n))
    x_feas = rng.standard_normal(n)
    h = G @ x_feas - rng.uniform(0, 1, m)
    c = rng.standard_normal(n)
    sol = solve_lp(LinearProgram(c, G, h))
    # a known feasible point exists, so Infeasible is never an answer
    assert sol.status in (LpStatus.OPTIMAL, LpStatus.UNBOUNDED)
    ref = linprog(c, A_ub=-G, b_ub=-h, bounds=[(None, None)] * n, method="highs")
    if sol.status is LpStatus.OPTIMAL:
        assert ref.status == 0
        assert sol.objective == pytest.approx(ref.fun, rel=1e-7, abs=1e-7)
        assert np.all(G @ sol.x >= h - 1e-8)
    else:
        assert ref.status == 3
        d = sol.ray
        assert c @ d < 0 and np.all(G @ d >= -1e-9)
