import itertools

import numpy as np
import pytest

from avekit.analysis import (
    State,
    analyze,
    certify_error,
    check_exponential_solutions,
    check_nonneg_solvability,
    check_structure,
    check_unique_all_rhs,
    check_unique_all_rhs_gave,
    check_unsolvable,
    condition_numbers,
    regularity_enumeration,
    solution_bounds,
)
from avekit.core import AveProblem, NotApplicableError
from avekit.solvers import enumerate_solutions


def _is_singular(M):
    return abs(np.linalg.det(M)) < 1e-12


# ------------------------------------------------------------ uniqueness


def test_not_regular_first_matrix(not_regular_a):
    rep = check_unique_all_rhs(not_regular_a)
    assert rep.unique_for_all_b == "No"
    cert = rep["exact_regularity"].certificate
    np.testing.assert_allclose(cert["member"], [[-2.0, 2.0], [-2.0, 2.0]], atol=1e-12)
    np.testing.assert_array_equal(cert["s"], [-1.0, 1.0])
    assert _is_singular(cert["member"])
    # the member lies in [A - I, A + I]
    assert np.all(np.abs(cert["member"] - not_regular_a) <= 1 + 1e-12)


def test_not_regular_second_matrix(not_regular_b):
    rep = check_unique_all_rhs(not_regular_b)
    assert rep.unique_for_all_b == "No"
    member = rep["exact_regularity"].certificate["member"]
    assert _is_singular(member)
    assert np.all(np.abs(member - not_regular_b) <= 1 + 1e-12)


def test_regular_by_sigma():
    rep = check_unique_all_rhs(3 * np.eye(2))
    assert rep.unique_for_all_b == "Yes"
    assert rep["sigma_min_gt_1"].holds
    assert rep["sigma_min_gt_1"].certificate["sigma_min"] == pytest.approx(3.0)


def test_regular_by_exact_test(ex1):
    rep = check_unique_all_rhs(ex1.A)
    assert rep.unique_for_all_b == "Yes"
    assert rep["exact_regularity"].holds
    dets = sorted(np.linalg.det(ex1.A + np.diag(s)) for s in itertools.product([-1, 1], repeat=2))
    np.testing.assert_allclose(dets, [2.0, 6.0, 10.0, 18.0])


def test_unknown_above_cap():
    rep = check_unique_all_rhs(0.5 * np.eye(3), enum_cap=2)
    assert rep["exact_regularity"].state is State.UNKNOWN
    assert "enum_cap" in rep["exact_regularity"].reason


def test_gave_uniqueness():
    A = np.array([[3.0, 1.0], [6.0, 5.0]])
    assert check_unique_all_rhs_gave(A, np.zeros((2, 2))).unique_for_all_b == "Yes"
    assert check_unique_all_rhs_gave(A, np.eye(2)).unique_for_all_b == "Yes"
    rep = check_unique_all_rhs_gave(np.eye(2), np.eye(2))
    assert rep.unique_for_all_b == "No"
    assert _is_singular(rep["exact_regularity"].certificate["member"])


def test_regularity_certificate_random():
    rng = np.random.default_rng(11)
    for _ in range(30):
        A = rng.standard_normal((3, 3)) * 1.5
        v = regularity_enumeration(A)
        dets = [np.linalg.det(A - np.diag(s)) for s in itertools.product([-1, 1], repeat=3)]
        one_sign = all(d > 0 for d in dets) or all(d < 0 for d in dets)
        assert v.holds == one_sign
        if v.fails:
            M = v.certificate["member"]
            assert np.all(np.abs(M - A) <= 1 + 1e-9)
            z = v.certificate["null_vector"]
            assert np.linalg.norm(M @ z) < 1e-8 * np.linalg.norm(z) * (1 + np.abs(M).max())


# ------------------------------------------------------------ bounds and existence


def test_bounds_fig1a(fig1a):
    bnd = solution_bounds(fig1a)
    np.testing.assert_allclose(bnd.u, [1.0, 4.0])
    for x in enumerate_solutions(fig1a).points:
        assert bnd.contains(x)
    assert np.abs([-1.0, -4.0]) == pytest.approx(bnd.u)


def test_bounds_trivial_and_empty(infeasible_2):
    np.testing.assert_allclose(solution_bounds(AveProblem(np.zeros((2, 2)), [-1.0, -1.0])).u, [1, 1])
    bnd = solution_bounds(infeasible_2)
    np.testing.assert_allclose(bnd.u, -np.ones(2) / 0.7)
    assert bnd.empty


def test_bounds_need_contraction():
    with pytest.raises(NotApplicableError):
        solution_bounds(AveProblem(2 * np.eye(2), np.ones(2)))


def test_unsolvable_fires(infeasible_2):
    rep = check_unsolvable(infeasible_2)
    assert rep["norm_lt_1_b_nonneg"].holds
    assert rep["lp_dual"].holds
    y = rep["lp_dual"].certificate["y"]
    A, b = infeasible_2.A, infeasible_2.b
    assert np.all(np.abs(A.T @ y) <= y + 1e-12) and b @ y > 0
    assert rep.solvable_hint == "unsolvable"


def test_unsolvable_quiet_on_solvable(ex1):
    assert not check_unsolvable(ex1).any_holds()


def test_bound_not_nonneg():
    rep = check_unsolvable(AveProblem(np.zeros((2, 2)), [1.0, -1.0]))
    assert rep["bound_not_nonneg"].holds
    np.testing.assert_allclose(rep["bound_not_nonneg"].certificate["u"], [-1.0, 1.0])


def test_exponential_solutions(fig1a):
    assert check_exponential_solutions(AveProblem(np.zeros((2, 2)), -np.ones(2))).holds
    v = check_exponential_solutions(AveProblem([[0, 0.6], [0.6, 0]], -np.ones(2)))
    assert "ii" not in v.certificate.get("fired", [])
    assert not check_exponential_solutions(fig1a).holds


def test_nonneg_solvability():
    rep = check_nonneg_solvability(3 * np.eye(2))
    assert rep["nonneg_for_all_b"].holds and rep["interval_inverse_nonneg"].holds
    # the b <= 0 criterion needs ||A|| < 1, which 3 I violates
    assert rep["nonneg_when_b_nonpos"].fails
    assert check_nonneg_solvability(0.4 * np.eye(2))["nonneg_when_b_nonpos"].holds
    x = np.linalg.solve(3 * np.eye(2) - np.eye(2), np.ones(2))
    np.testing.assert_allclose(x, 0.5 * np.ones(2))
    assert check_nonneg_solvability(0.5 * np.eye(2))["nonneg_for_all_b"].fails
    rep = check_nonneg_solvability([[3.0, -1.0], [-1.0, 3.0]])
    assert rep["interval_inverse_nonneg"].holds
    np.testing.assert_allclose(rep["interval_inverse_nonneg"].certificate["inverse_A_plus_I"],
                               np.array([[4.0, 1.0], [1.0, 4.0]]) / 15, atol=1e-14)


# ------------------------------------------------------------ structure


def test_structure(ex1, fig1a):
    assert check_structure(ex1.A)["finite_for_all_b"].holds
    rep = check_structure([[0.0, 1.0], [-2.0, 3.0]])
    assert rep["finite_for_all_b"].fails
    assert _is_singular(rep["finite_for_all_b"].certificate["member"])
    assert check_structure(fig1a.A, fig1a.b)["convex"].fails


def test_unbounded_witness():
    rep = check_structure([[0.0, 1.0], [-2.0, 3.0]])
    v = rep["bounded_for_all_b"]
    assert v.fails
    x = v.certificate["x"]
    np.testing.assert_allclose(np.array([[0.0, 1.0], [-2.0, 3.0]]) @ x - np.abs(x), 0, atol=1e-10)


# ------------------------------------------------------------ conditioning


def test_condition_numbers(not_regular_a, ex1):
    assert condition_numbers(3 * np.eye(2)).c == pytest.approx(0.5)
    assert not condition_numbers(not_regular_a).finite
    c_inf = condition_numbers(ex1.A, np.inf).c
    ref = max(np.abs(np.linalg.inv(ex1.A - np.diag(s))).sum(axis=1).max()
              for s in itertools.product([-1, 1], repeat=2))
    assert c_inf == pytest.approx(ref)


def test_certify_error(ex1):
    cond = condition_numbers(ex1.A, 2)
    assert certify_error(ex1.A, ex1.b, [1.0, 1.0], cond)["absolute"] == 0.0
    x = np.array([1.01, 1.0])
    bound = certify_error(ex1.A, ex1.b, x, cond)["absolute"]
    assert bound >= np.linalg.norm(x - 1.0)


def test_analyze_combined(ex1):
    rep = analyze(ex1)
    assert rep.unique_for_all_b == "Yes"
    assert rep.solvable_hint == "unique"
