"""Concave-minimization methods driven by linear programs.

All three work on the polyhedron ``S = {x : (A+I)x >= b, (A-I)x >= b}``
(or its lifted relaxation for the hybrid method) and call the simplex in
``avekit.lp`` with Dantzig pricing.
"""

from __future__ import annotations

from typing import Optional

import numpy as np

from ..analysis import farkas_certificate
from ..core import (
    AveProblem,
    SingularMatrixError,
    SolveOutcome,
    SolverConfig,
    Status,
    lu_solve,
    sign_diag,
)
from ..lp import LinearProgram, LpStatus, adjacent_vertices, solve_lp
from ._common import Run

LP_RULE = "dantzig"
STATIONARY_TOL = 1e-9


def feasible_set(p: AveProblem) -> tuple[np.ndarray, np.ndarray]:
    """``(G, h)`` with ``S = {x : G x >= h}``."""
    I = np.eye(p.n)
    return np.vstack([p.A + I, p.A - I]), np.concatenate([p.b, p.b])


def concave_objective(p: AveProblem, x: np.ndarray) -> float:
    """``g(x) = e^T (A x - |x| - b)``, nonnegative on S and zero exactly at solutions."""
    return float(np.sum(p.A @ x - np.abs(x) - p.b))


def _stationary(c: np.ndarray, x_new: np.ndarray, x_old: np.ndarray) -> bool:
    scale = 1.0 + np.abs(c).sum() * max(np.abs(x_new).max(initial=0.0), np.abs(x_old).max(initial=0.0))
    return abs(float(c @ (x_new - x_old))) <= STATIONARY_TOL * scale


def _lp_failure(run: Run, sol, G, h, x) -> SolveOutcome:
    if sol.status is LpStatus.INFEASIBLE:
        return run.outcome(Status.NOT_APPLICABLE, np.full(run.p.n, np.nan), np.inf,
                           reason="feasible set is empty, so the equation has no solution",
                           farkas=farkas_certificate(G, h))
    if sol.status is LpStatus.UNBOUNDED:
        return run.outcome(Status.STALLED, x, ray=sol.ray, reason="linear program is unbounded")
    return run.outcome(Status.STALLED, x, reason=f"linear program stopped: {sol.status}")


def solve_concave_sla(p: AveProblem, cfg: Optional[SolverConfig] = None) -> SolveOutcome:
    """Successive linearization over S.

    Each step takes a vertex minimizing ``(e^T A - sgn(x^k)^T) x`` on S and
    stops at a stationary vertex. That vertex is a solution only when its
    residual passes; otherwise the outcome is Stalled at it.
    """
    run = Run(p, cfg, "sla")
    G, h = feasible_set(p)
    eA = p.A.sum(axis=0)
    x = run.cfg.start(p.n)
    run.record(x)
    for _ in range(run.cfg.max_iters):
        c = eA - sign_diag(x)
        sol = solve_lp(LinearProgram(c, G, h), rule=LP_RULE)
        run.linear_solves += 1
        if sol.status is not LpStatus.OPTIMAL:
            return _lp_failure(run, sol, G, h, x)
        x_new = sol.x
        run.iterations += 1
        r = run.record(x_new, objective=concave_objective(p, x_new))
        if run.solved(r):
            return run.outcome(Status.CONVERGED, x_new, r)
        if _stationary(c, x_new, x):
            return run.outcome(Status.STALLED, x_new, r, reason="stationary vertex is not a solution",
                               objective=concave_objective(p, x_new))
        x = x_new
    return run.outcome(Status.MAX_ITERS, x)


def solve_concave_hybrid(p: AveProblem, cfg: Optional[SolverConfig] = None,
                         itmax: int = 10) -> SolveOutcome:
    """Alternate a sign-linearized solve with an LP over the lifted relaxation.

    Step k solves ``(A - D(x^k)) z = b`` and then minimizes
    ``-(e^T A + sgn(z^k)^T) x + 2 e^T y`` over
    ``{(x, y) : y >= x >= -y, y >= A x - b}``. The run succeeds as soon as
    z^k or x^{k+1} passes the residual test; at most ``itmax + 1`` rounds.
    """
    run = Run(p, cfg, "hybrid")
    n = p.n
    I = np.eye(n)
    G = np.vstack([np.hstack([-I, I]), np.hstack([I, I]), np.hstack([-p.A, I])])
    h = np.concatenate([np.zeros(2 * n), -p.b])
    eA = p.A.sum(axis=0)
    x = run.cfg.start(n)
    r = run.record(x)
    rounds = min(int(itmax) + 1, run.cfg.max_iters)
    for _ in range(rounds):
        s = sign_diag(x)
        try:
            z = lu_solve(p.A - np.diag(s), p.b)
        except SingularMatrixError as exc:
            return run.outcome(Status.SINGULAR_STEP, x, sign=s, reason=str(exc))
        run.linear_solves += 1
        run.iterations += 1
        rz = run.record(z, stage="linear")
        if run.solved(rz):
            return run.outcome(Status.CONVERGED, z, rz)
        c = np.concatenate([-(eA + sign_diag(z)), 2.0 * np.ones(n)])
        sol = solve_lp(LinearProgram(c, G, h), rule=LP_RULE)
        if sol.status is not LpStatus.OPTIMAL:
            return _lp_failure(run, sol, G, h, z)
        x_new = sol.x[:n]
        r = run.record(x_new, stage="lp")
        if run.solved(r):
            return run.outcome(Status.CONVERGED, x_new, r)
        x = x_new
    return run.outcome(Status.MAX_ITERS, x, r)


def solve_concave_zh(p: AveProblem, cfg: Optional[SolverConfig] = None) -> SolveOutcome:
    """Successive linearization with an escape through adjacent vertices.

    At a stationary vertex that is not a solution the method moves to the
    adjacent vertex of S with the smallest ``g(x) = e^T(Ax - |x| - b)`` and
    stops when no neighbour improves on the current value.
    """
    run = Run(p, cfg, "zh")
    G, h = feasible_set(p)
    eA = p.A.sum(axis=0)
    x = run.cfg.start(p.n)
    r = run.record(x)
    escapes = 0
    for _ in range(run.cfg.max_iters):
        c = eA - sign_diag(x)
        sol = solve_lp(LinearProgram(c, G, h), rule=LP_RULE)
        run.linear_solves += 1
        if sol.status is not LpStatus.OPTIMAL:
            return _lp_failure(run, sol, G, h, x)
        x_new = sol.x
        run.iterations += 1
        r = run.record(x_new, objective=concave_objective(p, x_new))
        if run.solved(r):
            return run.outcome(Status.CONVERGED, x_new, r, escapes=escapes)
        if not _stationary(c, x_new, x):
            x = x_new
            continue
        g_bar = concave_objective(p, x_new)
        neighbours = adjacent_vertices(sol)
        if not neighbours:
            return run.outcome(Status.STALLED, x_new, r, escapes=escapes, objective=g_bar)
        values = [concave_objective(p, v) for v in neighbours]
        k = int(np.argmin(values))
        if values[k] >= g_bar - STATIONARY_TOL * (1.0 + abs(g_bar)):
            return run.outcome(Status.STALLED, x_new, r, escapes=escapes, objective=g_bar,
                               reason="no adjacent vertex improves the objective")
        escapes += 1
        x = neighbours[k]
        r = run.record(x, objective=values[k], stage="adjacent")
        if run.solved(r):
            return run.outcome(Status.CONVERGED, x, r, escapes=escapes)
    return run.outcome(Status.MAX_ITERS, x, escapes=escapes)
