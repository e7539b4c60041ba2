"""Command-line interface.

Exit codes: 0 on success (a converged solve or a delivered verdict), 2 when
the method does not apply or the instance is unsolvable (a certificate is
printed), 3 when a solver ran but did not converge, 1 on any other error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from ..core import (
    DEFAULT_ENUM_CAP,
    AvekitError,
    AveProblem,
    GaveProblem,
    SolverConfig,
    Status,
    UnsolvableInstance,
    lu_solve,
)
from .bundle import ProblemBundle, read_matrix, read_problem, write_bundle
from .generators import KINDS, gen_instance
from .methods import METHODS, run_method

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NOT_APPLICABLE = 2
EXIT_NOT_CONVERGED = 3


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, float) and not np.isfinite(obj):
        return str(obj)
    if hasattr(obj, "value") and isinstance(getattr(obj, "value"), str):
        return obj.value
    if isinstance(obj, (str, int, float, bool)) or obj is None:
        return obj
    return str(obj)


def _write_json(doc: dict, path: Optional[str]) -> None:
    if path:
        Path(path).write_text(json.dumps(_jsonable(doc), indent=2, sort_keys=True) + "\n")


def _parse_params(items: Sequence[str]) -> dict:
    out = {}
    for item in items or []:
        if "=" not in item:
            raise ValueError(f"--param expects k=v, got {item!r}")
        k, v = item.split("=", 1)
        try:
            out[k] = float(v)
        except ValueError:
            out[k] = v
    return out


def _vec(x) -> str:
    return "[" + ", ".join(f"{v:.10g}" for v in np.asarray(x, dtype=float).ravel()) + "]"


def _load(args) -> ProblemBundle:
    return read_problem(args.input, getattr(args, "rhs", None))


def _ave_of(bundle: ProblemBundle) -> AveProblem:
    p = bundle.problem()
    if isinstance(p, GaveProblem):
        if np.array_equal(p.B, np.eye(p.n)):
            return AveProblem(p.A, p.b)
        raise ValueError("this command needs an AVE bundle (no B)")
    return p


# ------------------------------------------------------------ commands


def cmd_gen(args) -> int:
    bundle = gen_instance(args.kind, args.n, args.seed, _parse_params(args.param))
    write_bundle(bundle, args.out)
    print(f"wrote {args.kind} instance n={args.n} seed={args.seed} to {args.out}")
    return EXIT_OK


def _start(args, p) -> Optional[np.ndarray]:
    if args.x0 is None:
        return None
    if args.x0 == "zero":
        return np.zeros(p.n)
    if args.x0 == "ones":
        return np.ones(p.n)
    if args.x0 == "picard":
        return lu_solve(p.A, p.b)
    if not args.x0_file:
        raise ValueError("--x0 file needs --x0-file")
    path = Path(args.x0_file)
    if path.suffix == ".mtx":
        return read_matrix(str(path)).reshape(-1)
    return np.asarray(json.loads(path.read_text()), dtype=float).reshape(-1)


def cmd_solve(args) -> int:
    bundle = _load(args)
    p = bundle.problem()
    params = _parse_params(args.param)
    cfg = SolverConfig(tol=args.tol, max_iters=args.max_iters, params=params, x0=_start(args, p),
                       trace=args.trace)
    out = run_method(args.method, p, cfg, params)
    print(f"method      {out.method or args.method}")
    print(f"status      {out.status}")
    print(f"iterations  {out.iterations}")
    print(f"solves      {out.linear_solves}")
    print(f"residual    {out.residual_inf:.3e}")
    print(f"x           {_vec(out.x)}")
    if "reason" in out.info:
        print(f"reason      {out.info['reason']}")
    _write_json({"status": out.status, "x": out.x, "residual_inf": out.residual_inf,
                 "iterations": out.iterations, "linear_solves": out.linear_solves,
                 "method": out.method, "info": out.info, "trace": out.trace}, args.out)
    if out.status is Status.CONVERGED:
        return EXIT_OK
    if out.status in (Status.NOT_APPLICABLE, Status.NOT_REGULAR):
        return EXIT_NOT_APPLICABLE
    return EXIT_NOT_CONVERGED


def cmd_analyze(args) -> int:
    from ..analysis import analyze, check_unique_all_rhs_gave

    bundle = _load(args)
    p = bundle.problem()
    if isinstance(p, GaveProblem) and not np.array_equal(p.B, np.eye(p.n)):
        rep = check_unique_all_rhs_gave(p.A, p.B, args.enum_cap)
    else:
        rep = analyze(AveProblem(p.A, p.b), args.enum_cap)
    print(f"unique for all b: {rep.unique_for_all_b}")
    print(f"solvability:      {rep.solvable_hint}")
    for name, v in rep.verdicts.items():
        line = f"  {name:<28} {v.state}"
        if v.reason:
            line += f"  ({v.reason})"
        print(line)
    exact = rep.verdicts.get("exact_regularity")
    if exact is not None and exact.fails:
        cert = exact.certificate
        print("not regular: singular member")
        for row in np.atleast_2d(cert["member"]):
            print("  " + _vec(row))
        print(f"  s = {_vec(cert['s'])}, t = {cert['t']:.10g}")
    if rep.bounds is not None:
        print(f"solution bound |x| <= {_vec(rep.bounds.u)}")
    _write_json({"unique_for_all_b": rep.unique_for_all_b, "solvable_hint": rep.solvable_hint,
                 "verdicts": {k: {"state": v.state, "certificate": v.certificate, "reason": v.reason}
                              for k, v in rep.verdicts.items()},
                 "bounds": None if rep.bounds is None else rep.bounds.u}, args.out)
    return EXIT_OK


def cmd_enum(args) -> int:
    from ..solvers import enumerate_solutions

    bundle = _load(args)
    sol = enumerate_solutions(bundle.problem(), prune=args.prune, enum_cap=args.enum_cap)
    print(sol.summary())
    for piece in sol.pieces:
        line = f"  {piece.kind:<8} x0={_vec(piece.x0)}"
        if piece.dim == 1:
            line += f" direction={_vec(piece.direction)}"
            if np.isfinite(piece.length):
                line += f" length={piece.length:.10g}"
        print(line)
    _write_json(sol.to_dict(), args.out)
    return EXIT_OK if not sol.is_empty else EXIT_NOT_APPLICABLE


def cmd_correct(args) -> int:
    from ..correction import correct_both, correct_chebyshev, correct_rhs

    p = _ave_of(_load(args))
    if args.mode == "rhs":
        res = correct_rhs(p)
    elif args.mode == "both":
        res = correct_both(p)
    else:
        res = correct_chebyshev(p, args.enum_cap)
    print(f"mode        {args.mode}")
    print(f"objective   {res.objective:.10g}")
    print(f"attained    {res.attained}")
    print(f"x*          {_vec(res.x_star)}")
    print(f"r           {_vec(res.r)}")
    if args.mode != "rhs":
        print(f"||R||_F     {np.linalg.norm(res.R):.10g}")
    if "infimum" in res.info:
        print(f"infimum     {res.info['infimum']:.10g}")
    _write_json(res.to_dict(), args.out)
    return EXIT_OK


def cmd_transform(args) -> int:
    from .. import transforms as T

    src = Path(args.input)
    out = Path(args.out)
    if args.to == "ave" and src.suffix == ".json" and "Q" in json.loads(src.read_text()):
        doc = json.loads(src.read_text())
        n = int(doc["n"])
        lcp = T.Lcp(np.array(doc["Q"], dtype=float).reshape(n, n), doc["q"])
        red = T.lcp_to_ave(lcp)
        write_bundle(ProblemBundle.from_problem(red.problem, {"from": "lcp"}), out)
        print(f"wrote AVE of size {red.problem.n} to {out}")
        return EXIT_OK
    bundle = _load(args)
    p = bundle.problem()
    if args.to == "lcp":
        red = T.ave_to_lcp(_ave_of(bundle))
        n = red.problem.n
        out.write_text(json.dumps({"n": n, "Q": red.problem.Q.ravel().tolist(),
                                   "q": red.problem.q.tolist()}, indent=2) + "\n")
        print(f"wrote LCP of size {n} to {out}")
    elif args.to in ("ave", "gave3n"):
        g = p if isinstance(p, GaveProblem) else p.to_gave()
        red = T.gave_to_ave(g, "block3n" if args.to == "gave3n" else "inverse_b")
        write_bundle(ProblemBundle.from_problem(red.problem, {"from": "gave", "mode": red.notes["mode"]}), out)
        print(f"wrote AVE of size {red.problem.n} to {out}")
    elif args.to == "milp-mps":
        ave = _ave_of(bundle)
        if args.variant == "bounded":
            from ..analysis import solution_bounds

            u = np.full(ave.n, args.box) if args.box else solution_bounds(ave).u
            with open(out, "w") as fh:
                T.export_milp(ave, "bounded", -u, u, sink=fh)
        else:
            with open(out, "w") as fh:
                T.export_milp(ave, "prokopyev", sink=fh)
        print(f"wrote {args.variant} 0-1 model to {out}")
    elif args.to == "hull":
        n = bundle.n
        Ar = np.full((n, n), args.a_radius)
        br = np.full(n, args.b_radius)
        V = T.interval_hull_vertices(T.IntervalMatrix(bundle.A, Ar), T.IntervalVector(bundle.b, br),
                                     args.enum_cap)
        out.write_text(json.dumps({"vertices": V.tolist()}, indent=2) + "\n")
        print(f"wrote {V.shape[0]} hull vertices to {out}")
    return EXIT_OK


def cmd_bench(args) -> int:
    from .bench import run_bench

    summary = run_bench(args.suite, args.out, args.jobs, args.summary)
    print(f"{'solver':<20} {'runs':>6} {'success':>8} {'median it':>10}")
    for sid, s in summary.items():
        med = "-" if s["median_iterations"] is None else f"{s['median_iterations']:g}"
        print(f"{sid:<20} {s['runs']:>6} {s['success_rate']:>8.1%} {med:>10}")
    return EXIT_OK


# ------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="avekit", description="Absolute value equation toolkit.")
    sub = ap.add_subparsers(dest="command", required=True)

    def io_args(sp, out_help="write a JSON report here"):
        sp.add_argument("--input", required=True, help="JSON bundle or Matrix Market matrix")
        sp.add_argument("--rhs", help="Matrix Market right-hand side (with a .mtx input)")
        sp.add_argument("--out", help=out_help)

    sp = sub.add_parser("gen", help="generate an instance")
    sp.add_argument("--kind", required=True, choices=sorted(KINDS) + sorted(k.replace("_", "-") for k in KINDS))
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--param", action="append", default=[], metavar="K=V")
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_gen)

    sp = sub.add_parser("solve", help="run one solver")
    io_args(sp)
    sp.add_argument("--method", required=True, choices=sorted(METHODS))
    sp.add_argument("--tol", type=float, default=1e-10)
    sp.add_argument("--max-iters", type=int, default=500)
    sp.add_argument("--x0", choices=["zero", "picard", "ones", "file"])
    sp.add_argument("--x0-file")
    sp.add_argument("--param", action="append", default=[], metavar="K=V")
    sp.add_argument("--trace", action="store_true")
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("analyze", help="solvability and uniqueness verdicts")
    io_args(sp)
    sp.add_argument("--enum-cap", type=int, default=DEFAULT_ENUM_CAP)
    sp.set_defaults(func=cmd_analyze)

    sp = sub.add_parser("enum", help="enumerate the solution set")
    io_args(sp)
    sp.add_argument("--prune", action="store_true")
    sp.add_argument("--enum-cap", type=int, default=DEFAULT_ENUM_CAP)
    sp.set_defaults(func=cmd_enum)

    sp = sub.add_parser("correct", help="optimal correction of an infeasible system")
    io_args(sp)
    sp.add_argument("--mode", required=True, choices=["rhs", "both", "chebyshev"])
    sp.add_argument("--enum-cap", type=int, default=DEFAULT_ENUM_CAP)
    sp.set_defaults(func=cmd_correct)

    sp = sub.add_parser("transform", help="write an equivalent problem")
    sp.add_argument("--input", required=True)
    sp.add_argument("--rhs")
    sp.add_argument("--to", required=True, choices=["lcp", "ave", "milp-mps", "gave3n", "hull"])
    sp.add_argument("--out", required=True)
    sp.add_argument("--variant", choices=["prokopyev", "bounded"], default="prokopyev")
    sp.add_argument("--box", type=float, help="half-width of the box for the bounded model")
    sp.add_argument("--a-radius", type=float, default=0.0)
    sp.add_argument("--b-radius", type=float, default=0.0)
    sp.add_argument("--enum-cap", type=int, default=DEFAULT_ENUM_CAP)
    sp.set_defaults(func=cmd_transform)

    sp = sub.add_parser("bench", help="run a benchmark suite")
    sp.add_argument("--suite", required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("--jobs", type=int, default=1)
    sp.add_argument("--summary", help="summary JSON path (default: next to the CSV)")
    sp.set_defaults(func=cmd_bench)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UnsolvableInstance as exc:
        print(f"unsolvable: {exc}", file=sys.stderr)
        return EXIT_NOT_APPLICABLE
    except (AvekitError, ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


__all__ = ["build_parser", "main"]
