"""Benchmark harness: generators x sizes x seeds x solver configurations.

Every (instance, solver) cell yields one record. Cells run in a process
pool when ``jobs > 1``; records are always written in suite order, so the
CSV is identical across runs apart from ``wall_time_ms``.
"""

from __future__ import annotations

import csv
import json
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional

import numpy as np

from ..core import SolverConfig, Status, residual_inf
from .generators import gen_instance
from .methods import run_method

COLUMNS = ["instance_id", "generator", "n", "seed", "solver_id", "params", "status", "iterations",
           "linear_solves", "residual_inf", "wall_time_ms"]


@dataclass
class BenchmarkRecord:
    instance_id: str
    generator: str
    n: int
    seed: int
    solver_id: str
    params: str
    status: str
    iterations: int
    linear_solves: int
    residual_inf: float
    wall_time_ms: float

    def row(self) -> list:
        return [self.instance_id, self.generator, self.n, self.seed, self.solver_id, self.params,
                self.status, self.iterations, self.linear_solves, format(self.residual_inf, ".17g"),
                f"{self.wall_time_ms:.3f}"]


@dataclass(frozen=True)
class SolverEntry:
    id: str
    method: str
    params: tuple = ()
    tol: float = 1e-10
    max_iters: int = 500

    def param_dict(self) -> dict:
        return dict(self.params)

    def param_text(self) -> str:
        return json.dumps({"tol": self.tol, "max_iters": self.max_iters, **self.param_dict()},
                          sort_keys=True)


@dataclass(frozen=True)
class GeneratorEntry:
    kind: str
    params: tuple = ()


@dataclass
class Suite:
    generators: list
    sizes: list
    seeds: list
    solvers: list

    def cells(self):
        for g in self.generators:
            for n in self.sizes:
                for seed in self.seeds:
                    for s in self.solvers:
                        yield g, n, seed, s


def _seeds(spec: Any) -> list:
    if isinstance(spec, dict):
        start = int(spec.get("start", 0))
        return list(range(start, start + int(spec["count"])))
    if isinstance(spec, int):
        return list(range(spec))
    return [int(s) for s in spec]


def load_suite(source: dict | str | Path) -> Suite:
    """Suite from a dict or a JSON file.

    ``{"generators": ["sigma_gt1" | {"kind": .., "params": {..}}],
    "sizes": [..], "seeds": [..] | {"start": s, "count": k} | k,
    "solvers": ["newton" | {"id": .., "method": .., "params": {..}, "tol": .., "max_iters": ..}]}``
    """
    doc = source if isinstance(source, dict) else json.loads(Path(source).read_text())
    for key in ("generators", "sizes", "seeds", "solvers"):
        if key not in doc:
            raise ValueError(f"suite field {key!r} is missing")
    gens = []
    for g in doc["generators"]:
        if isinstance(g, str):
            g = {"kind": g}
        gens.append(GeneratorEntry(g["kind"], tuple(sorted(g.get("params", {}).items()))))
    solvers = []
    for s in doc["solvers"]:
        if isinstance(s, str):
            s = {"method": s}
        method = s["method"]
        solvers.append(SolverEntry(s.get("id", method), method,
                                   tuple(sorted(s.get("params", {}).items())),
                                   float(s.get("tol", 1e-10)), int(s.get("max_iters", 500))))
    ids = [s.id for s in solvers]
    if len(set(ids)) != len(ids):
        raise ValueError("solver ids must be unique")
    return Suite(gens, [int(n) for n in doc["sizes"]], _seeds(doc["seeds"]), solvers)


def run_cell(g: GeneratorEntry, n: int, seed: int, s: SolverEntry) -> BenchmarkRecord:
    instance_id = f"{g.kind}-n{n}-s{seed}"
    bundle = gen_instance(g.kind, n, seed, dict(g.params))
    p = bundle.problem()
    cfg = SolverConfig(tol=s.tol, max_iters=s.max_iters, params=s.param_dict())
    t0 = time.perf_counter()
    try:
        out = run_method(s.method, p, cfg, s.param_dict())
        status, iters, solves = str(out.status), out.iterations, out.linear_solves
        res = residual_inf(p, out.x) if np.all(np.isfinite(out.x)) else float("inf")
        if out.status is Status.CONVERGED and not res <= s.tol * (1.0 + np.abs(p.b).max()):
            status = str(Status.STALLED)
    except Exception as exc:  # a failing solver is recorded, never fatal
        status, iters, solves, res = f"Error:{type(exc).__name__}", 0, 0, float("inf")
    ms = 1000.0 * (time.perf_counter() - t0)
    return BenchmarkRecord(instance_id, g.kind, n, seed, s.id, s.param_text(), status, iters, solves,
                           float(res), ms)


def _run_packed(cell):
    return run_cell(*cell)


def run_suite(suite: Suite, jobs: int = 1) -> list[BenchmarkRecord]:
    cells = list(suite.cells())
    if jobs <= 1:
        return [run_cell(*c) for c in cells]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        # map preserves input order whatever the completion order
        return list(pool.map(_run_packed, cells, chunksize=max(1, len(cells) // (4 * jobs))))


def write_csv(records: list[BenchmarkRecord], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(COLUMNS)
        for r in records:
            w.writerow(r.row())


def summarize(records: list[BenchmarkRecord]) -> dict:
    """Per-solver success rate, median iterations and status counts."""
    out: dict[str, dict] = {}
    for sid in dict.fromkeys(r.solver_id for r in records):
        rows = [r for r in records if r.solver_id == sid]
        ok = [r for r in rows if r.status == str(Status.CONVERGED)]
        counts: dict[str, int] = {}
        for r in rows:
            counts[r.status] = counts.get(r.status, 0) + 1
        out[sid] = {
            "runs": len(rows),
            "success_rate": len(ok) / len(rows) if rows else 0.0,
            "median_iterations": statistics.median(r.iterations for r in ok) if ok else None,
            "mean_iterations": statistics.fmean(r.iterations for r in ok) if ok else None,
            "statuses": dict(sorted(counts.items())),
        }
    return out


def run_bench(suite_source, out_csv: str | Path, jobs: int = 1,
              summary_path: Optional[str | Path] = None) -> dict:
    suite = load_suite(suite_source)
    records = run_suite(suite, jobs)
    write_csv(records, out_csv)
    summary = summarize(records)
    target = Path(summary_path) if summary_path else Path(out_csv).with_suffix(".summary.json")
    target.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return summary


__all__ = ["BenchmarkRecord", "COLUMNS", "Suite", "load_suite", "run_bench", "run_cell", "run_suite",
           "summarize", "write_csv"]
