"""Generalized Newton iteration and its modified, relaxed and inexact variants."""

from __future__ import annotations

from typing import Optional

import numpy as np
import scipy.linalg as sla

from ..core import (
    AveProblem,
    GaveProblem,
    SingularMatrixError,
    SolveOutcome,
    SolverConfig,
    Status,
    lu_solve,
    sign_diag,
)
from ._common import Run


def _jacobian(p: AveProblem | GaveProblem, s: np.ndarray, theta: float = 1.0) -> np.ndarray:
    if isinstance(p, GaveProblem):
        return p.A - p.B * (theta * s)[None, :]
    return p.A - np.diag(theta * s)


def _abs_term(p: AveProblem | GaveProblem, x: np.ndarray) -> np.ndarray:
    if isinstance(p, GaveProblem):
        return p.B @ np.abs(x)
    return np.abs(x)


def _sign_key(s: np.ndarray) -> bytes:
    return (s > 0).tobytes()


def solve_newton(p: AveProblem | GaveProblem, cfg: Optional[SolverConfig] = None) -> SolveOutcome:
    """Generalized Newton: ``x <- (A - D(x))^{-1} b``.

    Starts from ``cfg.x0`` (default 0). A repeated sign pattern without
    convergence means the iteration cycles and is reported as Stalled.
    """
    return _newton_core(p, cfg, theta=1.0, method="newton")


def solve_newton_relaxed(p: AveProblem | GaveProblem, theta: float,
                         cfg: Optional[SolverConfig] = None) -> SolveOutcome:
    """Relaxed Newton: ``x <- (A - theta D(x))^{-1} (b + (1 - theta)|x|)``.

    ``theta = 1`` is the Newton iteration and ``theta = 0`` the Picard one.
    """
    if theta < 0:
        raise ValueError("theta must be nonnegative")
    return _newton_core(p, cfg, theta=float(theta), method="newton_relaxed")


def _newton_core(p, cfg, theta: float, method: str) -> SolveOutcome:
    run = Run(p, cfg, method)
    x = run.cfg.start(p.n)
    run.record(x)
    seen: dict = {}
    r = np.inf
    for _ in range(run.cfg.max_iters):
        s = sign_diag(x)
        key = _sign_key(s)
        try:
            if theta == 1.0:
                x_new = lu_solve(_jacobian(p, s), p.b)
            else:
                x_new = lu_solve(_jacobian(p, s, theta), p.b + (1.0 - theta) * _abs_term(p, x))
        except SingularMatrixError as exc:
            return run.outcome(Status.SINGULAR_STEP, x, sign=s, reason=str(exc))
        run.linear_solves += 1
        run.iterations += 1
        r = run.record(x_new)
        if run.solved(r):
            return run.outcome(Status.CONVERGED, x_new, r)
        if run.diverged(r):
            return run.outcome(Status.DIVERGED, x_new, r)
        # the next matrix depends only on the sign of x_new for theta = 1
        if theta == 1.0:
            seen[key] = True
            if _sign_key(sign_diag(x_new)) in seen:
                return run.outcome(Status.STALLED, x_new, r, cycle_sign=sign_diag(x_new))
        elif np.array_equal(x_new, x):
            return run.outcome(Status.STALLED, x_new, r)
        x = x_new
    return run.outcome(Status.MAX_ITERS, x, r)


def solve_newton_modified(p: AveProblem | GaveProblem,
                          cfg: Optional[SolverConfig] = None) -> SolveOutcome:
    """Modified Newton: ``x <- (A + I - D(x))^{-1} (x + b)``."""
    run = Run(p, cfg, "newton_modified")
    n = p.n
    x = run.cfg.start(n)
    run.record(x)
    r = np.inf
    for _ in range(run.cfg.max_iters):
        s = sign_diag(x)
        try:
            x_new = lu_solve(_jacobian(p, s) + np.eye(n), x + p.b)
        except SingularMatrixError as exc:
            return run.outcome(Status.SINGULAR_STEP, x, sign=s, reason=str(exc))
        run.linear_solves += 1
        run.iterations += 1
        r = run.record(x_new)
        if run.solved(r):
            return run.outcome(Status.CONVERGED, x_new, r)
        if run.diverged(r):
            return run.outcome(Status.DIVERGED, x_new, r)
        if np.array_equal(x_new, x):
            return run.outcome(Status.STALLED, x_new, r)
        x = x_new
    return run.outcome(Status.MAX_ITERS, x, r)


def _gauss_seidel(M: np.ndarray, rhs: np.ndarray, x: np.ndarray, target: float,
                  max_sweeps: int) -> tuple[Optional[np.ndarray], int]:
    """Gauss-Seidel sweeps until ``||M x - rhs||_inf <= target``; None on failure."""
    d = np.diag(M)
    if np.any(d == 0):
        return None, 0
    L = np.tril(M)
    U = np.triu(M, 1)
    start = np.max(np.abs(M @ x - rhs))
    for sweep in range(1, max_sweeps + 1):
        x = sla.solve_triangular(L, rhs - U @ x, lower=True, check_finite=False)
        res = np.max(np.abs(M @ x - rhs))
        if res <= target:
            return x, sweep
        # the sweep is not contracting; leave the step to the direct solve
        if not np.isfinite(res) or res > 1e3 * (start + target):
            return None, sweep
    return None, max_sweeps


def solve_newton_inexact(p: AveProblem | GaveProblem, theta_res: float,
                         cfg: Optional[SolverConfig] = None) -> SolveOutcome:
    """Inexact Newton with Gauss-Seidel inner solves.

    Each outer step runs sweeps on ``(A - D(x^k)) x = b`` from ``x^k`` until
    the inner residual is at most ``theta_res`` times the outer residual.
    After ``50 n`` sweeps, or at once when ``theta_res = 0``, the step
    falls back to a direct solve.
    """
    if not 0.0 <= theta_res < 1.0:
        raise ValueError("theta_res must lie in [0, 1)")
    run = Run(p, cfg, "newton_inexact")
    n = p.n
    x = run.cfg.start(n)
    r = run.record(x)
    sweeps_total = 0
    fallbacks = 0
    seen: dict = {}
    for _ in range(run.cfg.max_iters):
        s = sign_diag(x)
        M = _jacobian(p, s)
        x_new = None
        if theta_res > 0.0:
            x_new, sweeps = _gauss_seidel(M, p.b, x.copy(), theta_res * r, 50 * n)
            sweeps_total += sweeps
        if x_new is None:
            fallbacks += 1
            try:
                x_new = lu_solve(M, p.b)
            except SingularMatrixError as exc:
                return run.outcome(Status.SINGULAR_STEP, x, sign=s, reason=str(exc),
                                   inner_sweeps=sweeps_total, direct_fallbacks=fallbacks)
            run.linear_solves += 1
            # exact steps repeat once a sign pattern recurs
            seen[_sign_key(s)] = True
        run.iterations += 1
        r = run.record(x_new)
        info = {"inner_sweeps": sweeps_total, "direct_fallbacks": fallbacks}
        if run.solved(r):
            return run.outcome(Status.CONVERGED, x_new, r, **info)
        if run.diverged(r):
            return run.outcome(Status.DIVERGED, x_new, r, **info)
        if theta_res == 0.0 and _sign_key(sign_diag(x_new)) in seen:
            return run.outcome(Status.STALLED, x_new, r, **info)
        x = x_new
    return run.outcome(Status.MAX_ITERS, x, r, inner_sweeps=sweeps_total, direct_fallbacks=fallbacks)
