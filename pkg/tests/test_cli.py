import json

import numpy as np
import pytest

from avekit.analysis import check_unsolvable
from avekit.cli import main
from avekit.cli.bench import COLUMNS, load_suite, run_bench, run_suite
from avekit.cli.bundle import (
    BundleParseError,
    ProblemBundle,
    dumps_bundle,
    loads_bundle,
    matrix_from_text,
    matrix_to_text,
    read_problem,
    write_bundle,
    write_matrix,
)
from avekit.cli.generators import GenerationFailed, bvp_system, gen_instance, make_rng
from avekit.core import extreme_singular_values
from avekit.solvers import solve_newton


@pytest.fixture
def fig1a_file(tmp_path, fig1a):
    path = tmp_path / "fig1a.json"
    write_bundle(ProblemBundle.from_problem(fig1a), path)
    return path


# ------------------------------------------------------------ generators


def test_generator_determinism():
    a = gen_instance("sigma_gt1", 4, 7)
    b = gen_instance("sigma-gt1", 4, 7)
    assert dumps_bundle(a) == dumps_bundle(b)
    assert dumps_bundle(a) != dumps_bundle(gen_instance("sigma_gt1", 4, 8))


def test_generator_properties():
    assert extreme_singular_values(gen_instance("sigma_gt1", 6, 1).A)[0] > 1
    assert extreme_singular_values(gen_instance("uniform_regular", 6, 1).A)[0] > 1
    assert check_unsolvable(gen_instance("infeasible", 3, 1).problem())["norm_lt_1_b_nonneg"].holds
    bundle = gen_instance("exp2n", 4, 0)
    from avekit.solvers import enumerate_solutions

    assert len(enumerate_solutions(bundle.problem()).points) == 16
    d = gen_instance("diag_dom", 5, 2).A
    assert np.all(np.abs(np.diag(d)) > 1 + np.abs(d).sum(axis=1) - np.abs(np.diag(d)))


def test_generator_metadata_and_errors(monkeypatch):
    meta = gen_instance("rho_inv_lt1", 3, 5).metadata
    assert meta["kind"] == "rho_inv_lt1" and meta["seed"] == 5
    with pytest.raises(ValueError):
        gen_instance("nope", 3, 0)
    with pytest.raises(ValueError):
        make_rng(-1)
    from avekit.cli import generators

    # a generator that never meets its property gives up after the retry budget
    monkeypatch.setitem(generators.KINDS, "uniform",
                        lambda rng, n, params: (np.full((n, n), np.nan), np.zeros(n)))
    with pytest.raises(GenerationFailed):
        gen_instance("uniform", 2, 0)


def test_bvp_discretization_converges():
    # compare against a fine grid: the error shrinks with h
    def solve(n):
        p, t = bvp_system(n, 1.0)
        out = solve_newton(p)
        assert out.converged
        return t, out.x

    t_ref, u_ref = solve(1023)
    errs = []
    for n in (15, 31, 63):
        t, u = solve(n)
        errs.append(np.max(np.abs(u - np.interp(t, t_ref, u_ref))))
    assert errs[1] < 0.5 * errs[0] and errs[2] < 0.5 * errs[1]
    p, _ = bvp_system(10, 1.0)
    h = 1 / 11
    np.testing.assert_allclose(np.diag(p.A), -2 / h ** 2)


# ------------------------------------------------------------ bundles


def test_bundle_round_trip(fig1a):
    b = ProblemBundle.from_problem(fig1a, {"name": "fig1a"})
    back = loads_bundle(dumps_bundle(b))
    np.testing.assert_array_equal(back.A, b.A)
    np.testing.assert_array_equal(back.b, b.b)
    assert back.metadata == {"name": "fig1a"}


def test_bundle_bit_exact():
    rng = np.random.default_rng(0)
    A = rng.standard_normal((3, 3)) * 1e-7
    b = np.array([0.1, 1 / 3, np.pi])
    back = loads_bundle(dumps_bundle(ProblemBundle(A, b)))
    assert np.array_equal(back.A, A) and np.array_equal(back.b, b)


def test_bundle_errors():
    with pytest.raises(BundleParseError, match="line"):
        loads_bundle("{\n  bad")
    with pytest.raises(BundleParseError, match="'A'"):
        loads_bundle('{"schema_version": 1, "n": 2, "A": [1, 2, 3], "b": [1, 2]}')
    with pytest.raises(BundleParseError, match="'n'"):
        loads_bundle('{"schema_version": 1, "n": 0, "A": [], "b": []}')


def test_matrix_market(tmp_path):
    A = np.array([[1.0, 1 / 3], [-2.5, 1e-300]])
    np.testing.assert_array_equal(matrix_from_text(matrix_to_text(A)), A)
    bad = "%%MatrixMarket matrix array real general\n2 2\n1\n2\n3\n"
    with pytest.raises(BundleParseError):
        matrix_from_text(bad)
    write_matrix(A, str(tmp_path / "A.mtx"))
    write_matrix(np.array([1.0, 2.0]), str(tmp_path / "b.mtx"))
    bundle = read_problem(tmp_path / "A.mtx", tmp_path / "b.mtx")
    np.testing.assert_array_equal(bundle.A, A)
    with pytest.raises(BundleParseError):
        read_problem(tmp_path / "A.mtx")


# ------------------------------------------------------------ commands


def test_cli_solve_newton(fig1a_file, tmp_path, capsys):
    out = tmp_path / "sol.json"
    code = main(["solve", "--input", str(fig1a_file), "--method", "newton", "--x0", "ones",
                 "--out", str(out)])
    assert code == 0
    doc = json.loads(out.read_text())
    assert doc["status"] == "Converged" and doc["residual_inf"] == 0.0
    assert "Converged" in capsys.readouterr().out


def test_cli_solve_exit_codes(tmp_path, ex1, infeasible_2):
    f = tmp_path / "ex1.json"
    write_bundle(ProblemBundle.from_problem(ex1), f)
    assert main(["solve", "--input", str(f), "--method", "sla"]) == 3
    g = tmp_path / "inf.json"
    write_bundle(ProblemBundle.from_problem(infeasible_2), g)
    assert main(["solve", "--input", str(g), "--method", "sla"]) == 2
    assert main(["solve", "--input", str(tmp_path / "missing.json"), "--method", "newton"]) == 1


def test_cli_analyze_not_regular(tmp_path, not_regular_a, capsys):
    f = tmp_path / "nr.json"
    write_bundle(ProblemBundle(not_regular_a, np.ones(2)), f)
    assert main(["analyze", "--input", str(f)]) == 0
    text = capsys.readouterr().out
    assert "not regular" in text
    assert "[-2, 2]" in text


def test_cli_enum(tmp_path, fig1b, capsys):
    f = tmp_path / "fig1b.json"
    write_bundle(ProblemBundle.from_problem(fig1b), f)
    assert main(["enum", "--input", str(f)]) == 0
    assert capsys.readouterr().out.splitlines()[0] == "1 point, 1 ray"


def test_cli_correct(tmp_path, infeasible_2):
    f = tmp_path / "inf.json"
    write_bundle(ProblemBundle.from_problem(infeasible_2), f)
    out = tmp_path / "c.json"
    assert main(["correct", "--input", str(f), "--mode", "rhs", "--out", str(out)]) == 0
    assert json.loads(out.read_text())["objective"] == pytest.approx(2.0)
    assert main(["correct", "--input", str(f), "--mode", "both"]) == 0
    assert main(["correct", "--input", str(f), "--mode", "chebyshev"]) == 0


def test_cli_transform(fig1a_file, tmp_path):
    lcp = tmp_path / "lcp.json"
    assert main(["transform", "--input", str(fig1a_file), "--to", "lcp", "--out", str(lcp)]) == 0
    back = tmp_path / "back.json"
    assert main(["transform", "--input", str(lcp), "--to", "ave", "--out", str(back)]) == 0
    mps = tmp_path / "m.mps"
    assert main(["transform", "--input", str(fig1a_file), "--to", "milp-mps", "--variant", "bounded",
                 "--out", str(mps)]) == 0
    assert mps.read_text().startswith("NAME")
    g3 = tmp_path / "g3.json"
    assert main(["transform", "--input", str(fig1a_file), "--to", "gave3n", "--out", str(g3)]) == 0
    assert json.loads(g3.read_text())["n"] == 6


def test_cli_gen(tmp_path):
    out = tmp_path / "g.json"
    assert main(["gen", "--kind", "sigma-gt1", "--n", "4", "--seed", "7", "--out", str(out)]) == 0
    assert loads_bundle(out.read_text()).n == 4


# ------------------------------------------------------------ bench


def _suite():
    return {"generators": ["sigma_gt1"], "sizes": [5], "seeds": {"start": 0, "count": 4},
            "solvers": ["newton", {"id": "pic", "method": "picard", "max_iters": 50}]}


def test_bench_records_and_order():
    recs = run_suite(load_suite(_suite()))
    assert len(recs) == 8
    assert [r.solver_id for r in recs[:2]] == ["newton", "pic"]
    assert all(r.status == "Converged" for r in recs if r.solver_id == "newton")


def test_bench_parallel_matches_serial():
    serial = [r.row()[:-1] for r in run_suite(load_suite(_suite()), jobs=1)]
    parallel = [r.row()[:-1] for r in run_suite(load_suite(_suite()), jobs=2)]
    assert serial == parallel


def test_bench_outputs(tmp_path):
    csv_path = tmp_path / "b.csv"
    summary = run_bench(_suite(), csv_path)
    header = csv_path.read_text().splitlines()[0].split(",")
    assert header == COLUMNS
    assert summary["newton"]["success_rate"] == 1.0
    assert (tmp_path / "b.summary.json").exists()


def test_bench_suite_validation():
    with pytest.raises(ValueError):
        load_suite({"generators": ["uniform"], "sizes": [2], "seeds": 1})
    with pytest.raises(ValueError):
        load_suite({"generators": ["uniform"], "sizes": [2], "seeds": 1, "solvers": ["newton", "newton"]})
