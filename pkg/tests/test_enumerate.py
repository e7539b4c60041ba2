import itertools

import numpy as np
import pytest

from avekit.core import AveProblem, CapExceeded, GaveProblem
from avekit.solvers import enumerate_solutions
from avekit.solvers.enumerate import solution_residuals
from conftest import points_set


def test_fig1a_three_points(fig1a):
    sol = enumerate_solutions(fig1a)
    assert sol.is_finite and len(sol) == 3
    np.testing.assert_allclose(points_set(sol.points), points_set([(1, 0), (-1, -4), (-1, 4 / 3)]),
                               atol=1e-12)
    assert sol.summary() == "3 points"


def test_fig1b_point_and_ray(fig1b):
    sol = enumerate_solutions(fig1b)
    assert sol.summary() == "1 point, 1 ray"
    np.testing.assert_allclose(sol.points[0], [-1.0, -2.0], atol=1e-12)
    ray = sol.affine_pieces[0]
    np.testing.assert_allclose(ray.x0, [3.0, 0.0], atol=1e-12)
    np.testing.assert_allclose(ray.direction, np.array([1.0, 1.0]) / np.sqrt(2), atol=1e-12)
    assert np.isinf(ray.length)
    assert sol.contains([13.0, 10.0])
    # the (-,+) candidate (0,-3) violates its signs
    assert not sol.contains([0.0, -3.0])


def test_sign_cube():
    sol = enumerate_solutions(AveProblem(np.zeros((3, 3)), -np.ones(3)))
    assert len(sol.points) == 8
    expected = points_set(list(itertools.product([-1.0, 1.0], repeat=3)))
    np.testing.assert_allclose(points_set(sol.points), expected)


def test_empty_set(infeasible_2):
    sol = enumerate_solutions(infeasible_2)
    assert sol.is_empty and sol.summary() == "no solution"


def test_segment_piece():
    # the first row forces x1 >= 0; the second gives x2 = (x1 - 4)/3 for x1 < 4
    # and x2 = x1 - 4 beyond, so a segment from (0, -4/3) meets a ray at (4, 0)
    A = np.array([[1.0, 0.0], [-1.0, 2.0]])
    b = np.array([0.0, -4.0])
    sol = enumerate_solutions(AveProblem(A, b))
    kinds = sorted(p.kind for p in sol.pieces)
    assert kinds == ["ray", "segment"]
    seg = next(p for p in sol.pieces if p.kind == "segment")
    ends = points_set([seg.x0, seg.x0 + seg.length * seg.direction])
    np.testing.assert_allclose(ends, [[0.0, -4 / 3], [4.0, 0.0]], atol=1e-12)
    ray = next(p for p in sol.pieces if p.kind == "ray")
    np.testing.assert_allclose(ray.x0, [4.0, 0.0], atol=1e-12)
    np.testing.assert_allclose(ray.direction, np.ones(2) / np.sqrt(2), atol=1e-12)
    for t in (0.0, 0.3, 1.0):
        x = seg.x0 + t * seg.length * seg.direction
        assert np.max(np.abs(A @ x - np.abs(x) - b)) < 1e-12


def test_gave_enumeration():
    g = GaveProblem(np.array([[3.0, 1.0], [6.0, 5.0]]), 0.5 * np.eye(2), [3.0, 10.0])
    sol = enumerate_solutions(g)
    assert len(sol.points) >= 1
    assert np.max(solution_residuals(g, sol)) < 1e-10


def test_prune_keeps_solutions():
    rng = np.random.default_rng(5)
    for _ in range(20):
        n = int(rng.integers(2, 7))
        A = rng.uniform(-1, 1, (n, n)) * (0.5 / n)
        b = -rng.uniform(0.1, 1.0, n)
        p = AveProblem(A, b)
        full = enumerate_solutions(p)
        pruned = enumerate_solutions(p, prune=True)
        np.testing.assert_allclose(points_set(full.points), points_set(pruned.points), atol=1e-10)


def test_enum_cap():
    with pytest.raises(CapExceeded):
        enumerate_solutions(AveProblem(np.eye(5), np.ones(5)), enum_cap=4)


def test_piece_to_dict(fig1b):
    d = enumerate_solutions(fig1b).to_dict()
    kinds = sorted(p["kind"] for p in d["pieces"])
    assert kinds == ["point", "ray"]
    ray = next(p for p in d["pieces"] if p["kind"] == "ray")
    assert ray["length"] is None
