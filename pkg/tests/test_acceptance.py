"""Acceptance suite: one PASS/FAIL line per criterion.

Run alone with ``pytest tests/test_acceptance.py -v``; the verdict lines are
printed even when output capture is on.
"""

import subprocess
import sys
import time

import numpy as np
import pytest

from avekit.analysis import (
    certify_error,
    check_unique_all_rhs,
    check_unsolvable,
    condition_numbers,
    solution_bounds,
)
from avekit.cli.generators import gen_instance
from avekit.cli.methods import METHODS, run_method
from avekit.core import (
    AveProblem,
    GaveProblem,
    SolverConfig,
    Status,
    residual_inf,
    spectral_radius,
)
from avekit.correction import Attainment, correct_both
from avekit.solvers import (
    enumerate_solutions,
    solve_concave_hybrid,
    solve_concave_sla,
    solve_concave_zh,
    solve_sign_accord,
)
from avekit.transforms import ave_to_lcp, gave_to_ave, lcp_to_ave, milp_solutions
from conftest import points_set

FIG1A = AveProblem([[0.0, 0.0], [-1.0, -0.5]], [-1.0, -1.0])
FIG1B = AveProblem([[0.0, 1.0], [-2.0, 3.0]], [-3.0, -6.0])
EX1 = AveProblem([[3.0, 1.0], [6.0, 5.0]], [3.0, 10.0])


@pytest.fixture
def report(capsys):
    def emit(num: int, title: str, ok: bool, detail: str = "") -> None:
        with capsys.disabled():
            print(f"\n[criterion {num:2d}] {'PASS' if ok else 'FAIL'}  {title}  ({detail})")
        assert ok, detail

    return emit


def _median_ms(fn, repeats: int = 50) -> float:
    fn()
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return 1000.0 * float(np.median(times))


def _same_point_sets(a, b, tol: float = 1e-7) -> bool:
    A, B = points_set(a), points_set(b)
    if A.shape != B.shape:
        return False
    return A.size == 0 or float(np.abs(A - B).max()) <= tol


# ------------------------------------------------------------ 1, 2: figure reproductions


def test_c01_fig1a(report):
    sol = enumerate_solutions(FIG1A)
    expected = [[1.0, 0.0], [-1.0, -4.0], [-1.0, 4.0 / 3.0]]
    res = max(residual_inf(FIG1A, x) for x in sol.points)
    ms = _median_ms(lambda: enumerate_solutions(FIG1A))
    ok = (sol.is_finite and len(sol.points) == 3 and _same_point_sets(sol.points, expected, 1e-12)
          and res <= 1e-10 and ms < 1.0)
    report(1, "Fig. 1a: three isolated solutions", ok,
           f"{len(sol.points)} points, max residual {res:.1e}, median {ms:.3f} ms")


def test_c02_fig1b(report):
    sol = enumerate_solutions(FIG1B)
    rays = [p for p in sol.pieces if p.kind == "ray"]
    ok = len(sol.pieces) == 2 and len(sol.points) == 1 and len(rays) == 1
    if ok:
        ok = (np.allclose(sol.points[0], [-1.0, -2.0], atol=1e-10)
              and np.allclose(rays[0].x0, [3.0, 0.0], atol=1e-10)
              and np.allclose(rays[0].direction, np.array([1.0, 1.0]) / np.sqrt(2), atol=1e-10))
    ms = _median_ms(lambda: enumerate_solutions(FIG1B))
    ok = ok and ms < 1.0
    report(2, "Fig. 1b: one point and one ray", ok,
           f"{sol.summary()}, median {ms:.3f} ms")


# ------------------------------------------------------------ 3, 4: worked examples


def test_c03_example1_sla_and_zh(report):
    sla = solve_concave_sla(EX1)
    zh = solve_concave_zh(EX1)
    ok = (sla.status is Status.STALLED and np.allclose(sla.x, [5 / 3, 0.0], rtol=0, atol=1e-8)
          and residual_inf(EX1, sla.x) > 1e-6
          and zh.converged and np.allclose(zh.x, [1.0, 1.0], rtol=0, atol=1e-9))
    report(3, "Example 1: SLA stalls, ZH escapes", ok,
           f"SLA {sla.status} at {np.round(sla.x, 10)}, ZH {zh.status} at {np.round(zh.x, 10)}")


def test_c04_not_regular_counterexamples(report):
    cases = [
        (np.array([[-1.0, 2.0], [-2.0, 1.0]]), np.array([[-2.0, 2.0], [-2.0, 2.0]])),
        (np.array([[-1.0, 1.5], [-4.0, 3.5]]), np.array([[-1.5, 1.5], [-4.0, 4.0]])),
    ]
    ok = True
    for A, member in cases:
        rep = check_unique_all_rhs(A)
        got = rep["exact_regularity"].certificate.get("member")
        ok &= rep.unique_for_all_b == "No" and got is not None
        ok &= bool(np.allclose(got, member, rtol=0, atol=1e-12))
    rho = spectral_radius(np.linalg.inv(cases[0][0]))
    eig = np.linalg.eigvals(cases[1][0])
    ok &= abs(rho - 1 / np.sqrt(3)) <= 1e-9
    # the second matrix has eigenvalues 1.25 +- 0.9682i, so A - I is positive stable
    ok &= bool(np.allclose(sorted(eig.imag), [-0.9682, 0.9682], atol=1e-4) and np.allclose(eig.real, 1.25))
    report(4, "not-regular counterexamples and their singular members", ok,
           f"rho(A^-1) = {rho:.12f}, eig = {np.round(eig, 4)}")


# ------------------------------------------------------------ 5: oracle equivalence


def _oracle_instance(k: int):
    rng = np.random.default_rng(5000 + k)
    n = int(rng.integers(2, 9))
    kind = ("planted", "sigma_gt1", "diag_dom", "rho_inv_lt1", "exp2n", "uniform")[k % 6]
    if kind == "planted":
        A = rng.standard_normal((n, n)) * rng.uniform(0.3, 3.0)
        x = rng.standard_normal(n)
        return AveProblem(A, A @ x - np.abs(x))
    return gen_instance(kind, n, k).problem()


@pytest.mark.slow
def test_c05_oracle_equivalence(report):
    t0 = time.perf_counter()
    violations, converged = [], 0
    cfg = SolverConfig(max_iters=300)
    for k in range(500):
        p = _oracle_instance(k)
        sol = enumerate_solutions(p)
        for name in METHODS:
            out = run_method(name, p, cfg, {})
            if out.status is not Status.CONVERGED:
                continue
            converged += 1
            if not sol.contains(out.x, tol=1e-7):
                violations.append((k, name))
    secs = time.perf_counter() - t0
    report(5, "every Converged output lies in the enumerated set", not violations and secs < 60,
           f"{converged} converged runs over {len(METHODS)} methods, {len(violations)} violations "
           f"{violations[:5]}, {secs:.1f} s")


# ------------------------------------------------------------ 6: bounds and soundness


@pytest.mark.slow
def test_c06_bounds_and_soundness(report):
    rng = np.random.default_rng(6)
    box_bad, unsolv_bad, unique_bad = 0, 0, 0
    n_unsolvable, n_unique = 0, 0
    for _ in range(200):
        n = int(rng.integers(1, 11))
        A = rng.standard_normal((n, n))
        A *= rng.uniform(0.05, 0.95) / spectral_radius(np.abs(A))
        if rng.random() < 0.5:
            x = rng.standard_normal(n)
            b = A @ x - np.abs(x)
        else:
            b = rng.standard_normal(n) + rng.uniform(-1, 1)
        p = AveProblem(A, b)
        sol = enumerate_solutions(p)
        u = solution_bounds(p).u
        box_bad += sum(bool(np.any(np.abs(x) > u + 1e-9)) for x in sol.points)
        if check_unsolvable(p).any_holds():
            n_unsolvable += 1
            unsolv_bad += not sol.is_empty
        if check_unique_all_rhs(A).unique_for_all_b == "Yes":
            n_unique += 1
            for _ in range(20):
                s = enumerate_solutions(AveProblem(A, rng.standard_normal(n) * 3))
                unique_bad += not (s.is_finite and len(s.points) == 1)
    ok = box_bad == 0 and unsolv_bad == 0 and unique_bad == 0
    report(6, "solution box, unsolvability and uniqueness are sound", ok,
           f"box violations {box_bad}, unsolvable {n_unsolvable} (bad {unsolv_bad}), "
           f"unique {n_unique} (bad {unique_bad})")


# ------------------------------------------------------------ 7, 8: large-scale solver claims


@pytest.mark.slow
def test_c07_hybrid_success_rate(report):
    t0 = time.perf_counter()
    hits, total = 0, 0
    for k in range(100):
        n = (50, 100, 200)[k % 3]
        p = gen_instance("sigma_gt1", n, k).problem()
        out = solve_concave_hybrid(p)
        total += 1
        hits += residual_inf(p, out.x) <= 1e-8 * (1 + np.abs(p.b).max())
    secs = time.perf_counter() - t0
    rate = hits / total
    report(7, "hybrid reaches 1e-8 on sigma_min > 1 instances", rate >= 0.95 and secs < 300,
           f"success {hits}/{total}, {secs:.1f} s")


@pytest.mark.slow
def test_c08_sign_accord_flips(report):
    n = 100
    flips, bad = [], 0
    for seed in range(50):
        p = gen_instance("uniform_regular", n, seed).problem()
        out = solve_sign_accord(p)
        flips.append(out.info["flips"])
        bad += not (out.converged and residual_inf(p, out.x) <= 1e-9)
    mean = float(np.mean(flips))
    report(8, "sign accord flip count on regular n=100 instances", mean <= 0.5 * n and bad == 0,
           f"mean flips {mean:.2f} ({mean / n:.3f} n), failures {bad}")


# ------------------------------------------------------------ 9: transform round trips


@pytest.mark.slow
def test_c09_transform_round_trips(report):
    rng = np.random.default_rng(9)
    lcp_bad, block_bad = 0, 0
    for _ in range(100):
        n = int(rng.integers(1, 7))
        A = rng.standard_normal((n, n)) * rng.uniform(0.5, 2.5)
        x = rng.standard_normal(n)
        p = AveProblem(A, A @ x - np.abs(x))
        direct = enumerate_solutions(p)
        to_lcp = ave_to_lcp(p)
        back = lcp_to_ave(to_lcp.problem)
        again = enumerate_solutions(back.problem)
        mapped = [to_lcp.back(back.back(y)) for y in again.points]
        lcp_bad += not (direct.is_finite and again.is_finite
                        and _same_point_sets(direct.points, mapped))

        m = int(rng.integers(1, 7))
        G = GaveProblem(rng.standard_normal((m, m)), rng.standard_normal((m, m)), np.zeros(m))
        xg = rng.standard_normal(m)
        g = GaveProblem(G.A, G.B, G.A @ xg - G.B @ np.abs(xg))
        ref = enumerate_solutions(g)
        red = gave_to_ave(g, "block3n")
        lifted = enumerate_solutions(red.problem)
        block_bad += not (ref.is_finite and lifted.is_finite
                          and _same_point_sets(ref.points, [red.back(w) for w in lifted.points]))

    milp_bad = []
    for name, p in (("fig1a", FIG1A), ("fig1b", FIG1B), ("ex1", EX1)):
        box = 10.0 * np.ones(2)
        pieces = milp_solutions(p, -box, box)
        sol = enumerate_solutions(p)
        pts = [q.x0 for q in pieces if q.is_point]
        segs = [q for q in pieces if not q.is_point]
        good = _same_point_sets(pts, sol.points, 1e-9)
        # unbounded pieces of the solution set appear clipped to the box
        for q in segs:
            good &= all(sol.contains(v, 1e-9) for v in q.vertices)
        good &= len(segs) == len(sol.affine_pieces)
        if not good:
            milp_bad.append(name)
    ok = lcp_bad == 0 and block_bad == 0 and not milp_bad
    report(9, "transform round trips preserve solution sets", ok,
           f"LCP mismatches {lcp_bad}, block3n mismatches {block_bad}, MILP mismatches {milp_bad}")


# ------------------------------------------------------------ 10: correction identities


@pytest.mark.slow
def test_c10_correction_identities(report):
    bad = 0
    for seed in range(50):
        n = 1 + seed % 6
        p = gen_instance("infeasible", n, seed).problem()
        res = correct_both(p)
        frob = np.linalg.norm(res.R) ** 2 + res.r @ res.r
        bad += not abs(frob - res.objective) <= 1e-8 * max(res.objective, 1e-300)
        bad += not res.corrected_residual() <= 1e-8
    zero = correct_both(AveProblem([[0.0]], [1.0]))
    third = correct_both(AveProblem([[0.3]], [1.0]))
    analytic = (zero.attained is Attainment.YES and f"{zero.objective:.3g}" == "1"
                and abs(zero.x_star[0]) < 1e-9
                and third.attained is Attainment.SUSPECTED_NOT_ATTAINED
                and f"{third.info['infimum']:.3g}" == "0.49")
    report(10, "correction identity and feasibility", bad == 0 and analytic,
           f"identity/feasibility failures {bad}; n=1: {zero.objective:.4g} ({zero.attained}), "
           f"{third.info.get('infimum', float('nan')):.4g} ({third.attained})")


# ------------------------------------------------------------ 11: condition-number bound


def _residual_rounding(A, b, x, x_star) -> float:
    u = np.finfo(float).eps
    n = len(x)
    terms = (np.abs(A) @ np.abs(x) + np.abs(x) + np.abs(A) @ np.abs(x_star) + np.abs(x_star)
             + np.abs(b))
    return 2 * (n + 2) * u * float(np.linalg.norm(terms))


@pytest.mark.slow
def test_c11_condition_bound(report):
    rng = np.random.default_rng(11)
    violations, instances = 0, 0
    while instances < 100:
        n = int(rng.integers(1, 9))
        A = rng.standard_normal((n, n)) * rng.uniform(0.5, 3.0)
        cond = condition_numbers(A)
        if not cond.finite:
            continue
        instances += 1
        x_star = rng.standard_normal(n)
        b = A @ x_star - np.abs(x_star)
        for _ in range(100):
            x = x_star + rng.standard_normal(n) * 10.0 ** rng.uniform(-8, 1)
            bound = certify_error(A, b, x, cond)["absolute"]
            # rounding in b and in the residual evaluation, scaled by c
            slack = cond.c * _residual_rounding(A, b, x, x_star)
            violations += bound + slack < np.linalg.norm(x - x_star)
    report(11, "c(A) ||residual|| bounds the true error", violations == 0,
           f"{instances} instances x 100 perturbations, {violations} violations")


# ------------------------------------------------------------ 12: benchmark determinism


@pytest.mark.slow
def test_c12_bench_determinism(report, tmp_path):
    suite = tmp_path / "suite.json"
    suite.write_text('{"generators": ["sigma_gt1", "uniform", "diag_dom"], "sizes": [4, 8], '
                     '"seeds": {"start": 0, "count": 3}, '
                     '"solvers": ["newton", "picard", "sign-accord", "zh"]}')
    tables = []
    for k in range(2):
        out = tmp_path / f"run{k}.csv"
        subprocess.run([sys.executable, "-m", "avekit.cli", "bench", "--suite", str(suite),
                        "--out", str(out)], check=True, capture_output=True)
        rows = out.read_text().splitlines()
        tables.append([r.rsplit(",", 1)[0] for r in rows])
    ok = tables[0] == tables[1] and len(tables[0]) == 1 + 3 * 2 * 3 * 4
    report(12, "bench CSVs identical apart from timing", ok, f"{len(tables[0]) - 1} rows compared")
