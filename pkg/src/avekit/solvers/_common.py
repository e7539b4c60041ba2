"""Bookkeeping shared by the iterative solvers."""

from __future__ import annotations

from typing import Optional

import numpy as np

from ..core import (
    AveProblem,
    GaveProblem,
    SolveOutcome,
    SolverConfig,
    Status,
    residual_inf,
    tolerance_scale,
)

DIVERGENCE_FACTOR = 1e12


class Run:
    """Counters, trace and stopping tests for one solver invocation."""

    def __init__(self, p: AveProblem | GaveProblem, cfg: Optional[SolverConfig], method: str):
        self.p = p
        self.cfg = cfg if cfg is not None else SolverConfig()
        self.method = method
        self.threshold = tolerance_scale(p, self.cfg.tol)
        self.blowup = DIVERGENCE_FACTOR * (1.0 + float(np.max(np.abs(p.b), initial=0.0)))
        self.iterations = 0
        self.linear_solves = 0
        self.trace: Optional[list] = [] if self.cfg.trace else None

    def record(self, x: np.ndarray, **extra) -> float:
        """Residual of x; appended to the trace when tracing is on."""
        r = residual_inf(self.p, x) if np.all(np.isfinite(x)) else np.inf
        if self.trace is not None:
            self.trace.append({"iteration": self.iterations, "x": np.array(x, dtype=float),
                               "residual": r, **extra})
        return r

    def solved(self, r: float) -> bool:
        return r <= self.threshold

    def diverged(self, r: float) -> bool:
        return not np.isfinite(r) or r > self.blowup

    def outcome(self, status: Status, x: np.ndarray, r: Optional[float] = None, **info) -> SolveOutcome:
        x = np.asarray(x, dtype=float) + 0.0
        if r is None:
            r = residual_inf(self.p, x) if np.all(np.isfinite(x)) else np.inf
        return SolveOutcome(status=status, x=x, residual_inf=float(r), iterations=self.iterations,
                            linear_solves=self.linear_solves, trace=self.trace,
                            method=self.method, info=info)


def not_applicable(p: AveProblem | GaveProblem, method: str, reason: str,
                   x: Optional[np.ndarray] = None, **info) -> SolveOutcome:
    n = p.A.shape[1]
    x = np.full(n, np.nan) if x is None else np.asarray(x, dtype=float)
    r = residual_inf(p, x) if np.all(np.isfinite(x)) else np.inf
    return SolveOutcome(Status.NOT_APPLICABLE, x, r, 0, 0, None, method,
                        {"reason": reason, **info})
