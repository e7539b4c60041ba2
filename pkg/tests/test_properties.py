"""Randomized invariants across modules."""

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from avekit.analysis import (
    check_exponential_solutions,
    check_unique_all_rhs,
    check_unsolvable,
    condition_numbers,
    solution_bounds,
)
from avekit.cli.bundle import ProblemBundle, dumps_bundle, loads_bundle
from avekit.cli.generators import gen_instance
from avekit.core import (
    AveProblem,
    GaveProblem,
    SolverConfig,
    gray_sign_vectors,
    residual_inf,
)
from avekit.correction import correct_both, correct_rhs
from avekit.solvers import (
    SplittingSpec,
    enumerate_solutions,
    solve_concave_zh,
    solve_newton,
    solve_newton_relaxed,
    solve_picard,
    solve_sign_accord,
)
from avekit.transforms import export_milp, parse_mps

SETTINGS = settings(max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])

seeds = st.integers(0, 2 ** 32 - 1)
sizes = st.integers(1, 5)


def _instance(seed, n, scale=1.0):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((n, n)) * scale
    return AveProblem(A, rng.standard_normal(n) * 2)


# ------------------------------------------------------------ core


@given(st.integers(1, 10))
def test_gray_code(n):
    S = gray_sign_vectors(n)
    assert np.all(S[0] == 1)
    assert len({tuple(r) for r in S}) == 2 ** n
    assert np.all(np.sum(S[1:] != S[:-1], axis=1) == 1)


# ------------------------------------------------------------ solvers


@SETTINGS
@given(seeds, sizes, st.floats(0.5, 3.0))
def test_converged_outcomes_meet_the_stopping_rule(seed, n, scale):
    p = _instance(seed, n, scale)
    cfg = SolverConfig(max_iters=200)
    sol = enumerate_solutions(p)
    for solver in (solve_newton, solve_picard, solve_sign_accord, solve_concave_zh):
        out = solver(p, cfg)
        assert out.iterations <= cfg.max_iters
        if out.converged:
            assert residual_inf(p, out.x) <= cfg.tol * (1 + np.abs(p.b).max())
            assert sol.contains(out.x)


@SETTINGS
@given(seeds, sizes)
def test_relaxed_unit_step_is_newton(seed, n):
    p = _instance(seed, n, 2.0)
    a = solve_newton(p, SolverConfig(trace=True, max_iters=30))
    b = solve_newton_relaxed(p, 1.0, SolverConfig(trace=True, max_iters=30))
    assert a.status == b.status
    assert [t["x"].tolist() for t in a.trace] == [t["x"].tolist() for t in b.trace]


@SETTINGS
@given(seeds, sizes)
def test_newton_fixed_point_soundness(seed, n):
    p = _instance(seed, n, 2.0)
    out = solve_newton(p, SolverConfig(trace=True, max_iters=50))
    xs = [t["x"] for t in out.trace]
    for u, v in zip(xs, xs[1:]):
        if np.array_equal(u, v):
            assert residual_inf(p, v) <= 1e-10 * (1 + np.abs(p.b).max())


@SETTINGS
@given(seeds, sizes, st.sampled_from(["jacobi", "gauss_seidel"]))
def test_splitting_reconstructs_a(seed, n, scheme):
    A = np.random.default_rng(seed).standard_normal((n, n)) + 4 * np.eye(n)
    M, N = SplittingSpec(scheme).matrices(A)
    np.testing.assert_allclose(M - N, A, atol=1e-14)


# ------------------------------------------------------------ enumeration


@SETTINGS
@given(seeds, sizes, st.floats(0.3, 2.0))
def test_enumerated_pieces_solve_and_accord(seed, n, scale):
    p = _instance(seed, n, scale)
    sol = enumerate_solutions(p)
    tol = 1e-9 * (1 + np.abs(p.b).max())
    for piece in sol.pieces:
        for t in (None, np.full(piece.dim, 0.5)) if piece.dim else (None,):
            x = piece.sample(t)
            assert residual_inf(p, x) <= tol
            assert np.all(piece.s * x >= -1e-9)
    P = np.array(sol.points).reshape(-1, n)
    for i in range(len(P)):
        for j in range(i):
            assert np.abs(P[i] - P[j]).max() >= 1e-8


@SETTINGS
@given(seeds, st.integers(1, 4))
def test_gave_pieces_solve(seed, n):
    rng = np.random.default_rng(seed)
    g = GaveProblem(rng.standard_normal((n, n)), rng.standard_normal((n, n)), rng.standard_normal(n))
    for x in enumerate_solutions(g).points:
        assert residual_inf(g, x) <= 1e-9 * (1 + np.abs(g.b).max())


# ------------------------------------------------------------ analysis


@SETTINGS
@given(seeds, sizes, st.floats(0.3, 3.0))
def test_uniqueness_verdicts(seed, n, scale):
    p = _instance(seed, n, scale)
    rep = check_unique_all_rhs(p.A)
    if rep.unique_for_all_b == "Yes":
        assert any(v.holds for v in rep.verdicts.values())
        rng = np.random.default_rng(seed)
        for _ in range(5):
            sol = enumerate_solutions(AveProblem(p.A, rng.standard_normal(n) * 3))
            assert sol.is_finite and len(sol.points) == 1
    sigma = rep["sigma_min_gt_1"]
    if sigma.holds:
        assert np.linalg.svd(p.A, compute_uv=False)[-1] > 1
    # finite condition number exactly when the interval [A - I, A + I] is regular
    cond = condition_numbers(p.A)
    assert cond.finite == rep["exact_regularity"].holds
    if rep["exact_regularity"].fails:
        M = rep["exact_regularity"].certificate["member"]
        assert np.all(np.abs(M - p.A) <= 1 + 1e-9)
        assert np.linalg.svd(M, compute_uv=False)[-1] <= 1e-9 * (1 + np.abs(M).max())


@SETTINGS
@given(seeds, sizes, st.floats(0.05, 0.9))
def test_bounds_box_contains_solutions(seed, n, rho):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((n, n))
    A *= rho / max(np.abs(np.linalg.eigvals(np.abs(A))).max(), 1e-12)
    p = AveProblem(A, rng.standard_normal(n) * 2)
    bnd = solution_bounds(p)
    sol = enumerate_solutions(p)
    if not bnd.empty:
        assert np.all(bnd.u >= -1e-12)
    else:
        assert sol.is_empty
    for x in sol.points:
        assert np.all(np.abs(x) <= bnd.u + 1e-9)


@SETTINGS
@given(seeds, sizes)
def test_unsolvable_certificates_are_sound(seed, n):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((n, n)) * rng.uniform(0.1, 1.5)
    p = AveProblem(A, rng.standard_normal(n) + rng.uniform(0, 2))
    rep = check_unsolvable(p)
    if rep["lp_dual"].holds:
        y = rep["lp_dual"].certificate["y"]
        assert np.all(np.abs(A.T @ y) <= y + 1e-9) and p.b @ y > 0
    if rep.any_holds():
        assert enumerate_solutions(p).is_empty


@SETTINGS
@given(seeds, st.integers(1, 6))
def test_exponential_count(seed, n):
    rng = np.random.default_rng(seed)
    A = rng.uniform(-1, 1, (n, n)) * rng.uniform(0, 0.3) / n
    p = AveProblem(A, -rng.uniform(0.5, 2, n))
    if check_exponential_solutions(p).holds:
        assert len(enumerate_solutions(p).points) == 2 ** n


# ------------------------------------------------------------ serialization


@SETTINGS
@given(seeds, st.integers(1, 6))
def test_bundle_round_trip_bit_exact(seed, n):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((n, n)) * 10.0 ** rng.integers(-200, 200)
    b = rng.standard_normal(n)
    back = loads_bundle(dumps_bundle(ProblemBundle(A, b, metadata={"seed": seed})))
    assert np.array_equal(back.A, A) and np.array_equal(back.b, b)
    assert back.metadata == {"seed": seed}


@SETTINGS
@given(seeds, st.integers(1, 4), st.sampled_from(["prokopyev", "bounded"]))
def test_mps_round_trip(seed, n, variant):
    p = _instance(seed, n)
    if variant == "bounded":
        model = export_milp(p, variant, -3 * np.ones(n), 5 * np.ones(n))
    else:
        model = export_milp(p, variant)
    assert parse_mps(model.to_mps()).same_as(model)


# ------------------------------------------------------------ correction


@settings(max_examples=10, deadline=None)
@given(seeds, st.integers(1, 3))
def test_correction_identities(seed, n):
    p = gen_instance("infeasible", n, seed % 1000).problem()
    both = correct_both(p)
    frob = np.linalg.norm(both.R) ** 2 + both.r @ both.r
    assert frob == pytest.approx(both.objective, rel=1e-8, abs=1e-14)
    assert both.corrected_residual() <= 1e-8 * (1 + np.abs(both.corrected_b).max())
    rhs = correct_rhs(p)
    base = np.sum(p.b ** 2)
    assert rhs.objective <= base + 1e-9
    assert rhs.objective == pytest.approx(float(rhs.r @ rhs.r), rel=1e-9, abs=1e-14)
