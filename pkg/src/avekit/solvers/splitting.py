"""Picard-type fixed-point schemes, matrix splittings and Gauss-Seidel sweeps."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..core import (
    AveProblem,
    GaveProblem,
    LUFactor,
    NonConvergence,
    SingularMatrixError,
    SolveOutcome,
    SolverConfig,
    Status,
    spectral_radius_bounds,
)
from ._common import Run, not_applicable


def _abs_term(p: AveProblem | GaveProblem, x: np.ndarray) -> np.ndarray:
    if isinstance(p, GaveProblem):
        return p.B @ np.abs(x)
    return np.abs(x)


def _fixed_point(run: Run, step, x: np.ndarray) -> SolveOutcome:
    """Iterate ``x <- step(x)`` under the uniform stopping rule."""
    r = run.record(x)
    for _ in range(run.cfg.max_iters):
        x = step(x)
        run.linear_solves += 1
        run.iterations += 1
        r = run.record(x)
        if run.solved(r):
            return run.outcome(Status.CONVERGED, x, r)
        if run.diverged(r):
            return run.outcome(Status.DIVERGED, x, r)
    return run.outcome(Status.MAX_ITERS, x, r)


def solve_picard(p: AveProblem | GaveProblem, cfg: Optional[SolverConfig] = None) -> SolveOutcome:
    """Picard iteration ``x <- A^{-1}(|x| + b)``.

    A is factored once. The default start is ``A^{-1} b``.
    """
    run = Run(p, cfg, "picard")
    try:
        lu = LUFactor(p.A)
    except SingularMatrixError as exc:
        return run.outcome(Status.SINGULAR_STEP, np.full(p.n, np.nan), np.inf, reason=str(exc))
    x0 = run.cfg.start(p.n, lu.solve(p.b) if run.cfg.x0 is None else None)
    return _fixed_point(run, lambda x: lu.solve(_abs_term(p, x) + p.b), x0)


def solve_picard_omega(p: AveProblem | GaveProblem, omega: Optional[np.ndarray] = None,
                       cfg: Optional[SolverConfig] = None) -> SolveOutcome:
    """Shifted Picard ``x <- (A + W)^{-1}(W x + |x| + b)``.

    W defaults to ``cfg.omega_matrix`` and then to zero; the default start
    is ``(A + W)^{-1} b``.
    """
    run = Run(p, cfg, "picard_omega")
    n = p.n
    if omega is None:
        omega = run.cfg.omega_matrix
    W = np.zeros((n, n)) if omega is None else np.asarray(omega, dtype=float)
    try:
        lu = LUFactor(p.A + W)
    except SingularMatrixError as exc:
        return run.outcome(Status.SINGULAR_STEP, np.full(n, np.nan), np.inf, reason=str(exc))
    x0 = run.cfg.start(n, lu.solve(p.b) if run.cfg.x0 is None else None)
    return _fixed_point(run, lambda x: lu.solve(W @ x + _abs_term(p, x) + p.b), x0)


def _positive_definite(A: np.ndarray, floor: float = 1e-12) -> bool:
    H = 0.5 * (A + A.T)
    return bool(np.linalg.eigvalsh(H).min() > floor)


def solve_picard_hss(p: AveProblem, alpha: float, inner: Optional[int] = None,
                     cfg: Optional[SolverConfig] = None) -> SolveOutcome:
    """Picard iteration with inner Hermitian/skew-Hermitian splitting sweeps.

    Each outer step keeps ``|x^(k)|`` fixed and performs ``l_k`` double
    half-steps with ``H = (A + A^T)/2`` and ``S = (A - A^T)/2``. The inner
    counts come from ``inner``, else ``cfg.inner_iters`` (last entry repeats),
    else 10.
    """
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    run = Run(p, cfg, "picard_hss")
    n = p.n
    if not _positive_definite(p.A):
        return not_applicable(p, run.method, "A is not positive definite")
    if inner is not None:
        counts = [int(inner)]
    elif run.cfg.inner_iters:
        counts = [int(c) for c in run.cfg.inner_iters]
    else:
        counts = [10]
    if min(counts) < 1:
        raise ValueError("inner iteration counts must be positive")
    H = 0.5 * (p.A + p.A.T)
    S = 0.5 * (p.A - p.A.T)
    I = np.eye(n)
    luH = LUFactor(alpha * I + H)
    luS = LUFactor(alpha * I + S)
    aI_S = alpha * I - S
    aI_H = alpha * I - H
    x = run.cfg.start(n)
    r = run.record(x)
    for k in range(run.cfg.max_iters):
        rhs = np.abs(x) + p.b
        inner_x = x
        for _ in range(counts[min(k, len(counts) - 1)]):
            half = luH.solve(aI_S @ inner_x + rhs)
            inner_x = luS.solve(aI_H @ half + rhs)
            run.linear_solves += 2
        x = inner_x
        run.iterations += 1
        r = run.record(x)
        if run.solved(r):
            return run.outcome(Status.CONVERGED, x, r, alpha=alpha)
        if run.diverged(r):
            return run.outcome(Status.DIVERGED, x, r, alpha=alpha)
    return run.outcome(Status.MAX_ITERS, x, r, alpha=alpha)


def solve_sor_like(p: AveProblem, omega: float = 1.0, cfg: Optional[SolverConfig] = None,
                   y0: Optional[np.ndarray] = None,
                   reference: Optional[np.ndarray] = None) -> SolveOutcome:
    """SOR-like iteration on the pair ``(x, y)`` with ``y = |x|``.

    ``x <- (1-w) x + w A^{-1}(y + b)`` then ``y <- (1-w) y + w|x|``. The
    default start is ``x = cfg.x0`` (or 0) and ``y = |x|``. With a
    ``reference`` solution the error norm
    ``sqrt(||e_x||^2 + w^-2 ||e_y||^2)`` of every iterate is returned in
    ``info["error_norms"]``.
    """
    if not omega > 0:
        raise ValueError("omega must be positive")
    run = Run(p, cfg, "sor_like")
    n = p.n
    try:
        lu = LUFactor(p.A)
    except SingularMatrixError as exc:
        return run.outcome(Status.SINGULAR_STEP, np.full(n, np.nan), np.inf, reason=str(exc))
    x = run.cfg.start(n)
    y = np.abs(x) if y0 is None else np.asarray(y0, dtype=float).copy()
    errors: list = []

    def err(x, y):
        if reference is not None:
            ref = np.asarray(reference, dtype=float)
            ex = np.linalg.norm(ref - x)
            ey = np.linalg.norm(np.abs(ref) - y)
            errors.append(float(np.sqrt(ex ** 2 + ey ** 2 / omega ** 2)))

    err(x, y)
    r = run.record(x)
    status = Status.MAX_ITERS
    for _ in range(run.cfg.max_iters):
        x = (1.0 - omega) * x + omega * lu.solve(y + p.b)
        y = (1.0 - omega) * y + omega * np.abs(x)
        run.linear_solves += 1
        run.iterations += 1
        err(x, y)
        r = run.record(x)
        if run.solved(r):
            status = Status.CONVERGED
            break
        if run.diverged(r):
            status = Status.DIVERGED
            break
    info = {"omega": omega, "y": y}
    if reference is not None:
        info["error_norms"] = errors
    return run.outcome(status, x, r, **info)


# ------------------------------------------------------------ matrix splittings


@dataclass(frozen=True)
class SplittingSpec:
    """A splitting ``A = M - N`` plus the shift matrix Omega.

    ``scheme`` is one of ``explicit`` (M and N given), ``jacobi``,
    ``gauss_seidel`` or ``sor`` (relaxation ``relax``).
    """

    scheme: str = "explicit"
    M: Optional[np.ndarray] = None
    N: Optional[np.ndarray] = None
    relax: float = 1.0
    omega_matrix: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        if self.scheme not in ("explicit", "jacobi", "gauss_seidel", "sor"):
            raise ValueError(f"unknown splitting scheme {self.scheme!r}")
        if self.scheme == "explicit" and (self.M is None or self.N is None):
            raise ValueError("explicit splitting needs M and N")
        if self.scheme == "sor" and not self.relax > 0:
            raise ValueError("relaxation parameter must be positive")

    @classmethod
    def explicit(cls, M, N, omega_matrix=None) -> "SplittingSpec":
        return cls("explicit", np.asarray(M, dtype=float), np.asarray(N, dtype=float),
                   omega_matrix=omega_matrix)

    def matrices(self, A: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Return ``(M, N)`` for A; raises ValueError if the split is inconsistent."""
        d = np.diag(A)
        if self.scheme == "explicit":
            M, N = np.asarray(self.M, dtype=float), np.asarray(self.N, dtype=float)
        else:
            if np.any(d == 0):
                raise ValueError("preset splittings need a nonzero diagonal")
            if self.scheme == "jacobi":
                M = np.diag(d)
            elif self.scheme == "gauss_seidel":
                M = np.tril(A)
            else:
                M = np.diag(d) / self.relax + np.tril(A, -1)
            N = M - A
        scale = max(1.0, float(np.abs(A).max(initial=0.0)))
        if M.shape != A.shape or np.max(np.abs(A - (M - N)), initial=0.0) > 1e-12 * scale:
            raise ValueError("A is not equal to M - N")
        return M, N

    def omega(self, n: int, cfg: SolverConfig) -> np.ndarray:
        W = self.omega_matrix if self.omega_matrix is not None else cfg.omega_matrix
        return np.zeros((n, n)) if W is None else np.asarray(W, dtype=float)


def solve_newton_splitting(p: AveProblem | GaveProblem, split: SplittingSpec,
                           cfg: Optional[SolverConfig] = None) -> SolveOutcome:
    """``x <- (M + W)^{-1}((N + W) x + B|x| + b)`` for a splitting ``A = M - N``.

    The default start is ``(M + W)^{-1} b``. ``info["radius"]`` holds
    ``rho(|(M+W)^{-1}(N+W)| + |(M+W)^{-1} B|)``; below one the iteration
    is known to converge.
    """
    run = Run(p, cfg, f"splitting_{split.scheme}")
    n = p.A.shape[1]
    try:
        M, N = split.matrices(p.A)
    except ValueError as exc:
        return not_applicable(p, run.method, str(exc))
    W = split.omega(n, run.cfg)
    try:
        lu = LUFactor(M + W)
    except SingularMatrixError as exc:
        return run.outcome(Status.SINGULAR_STEP, np.full(n, np.nan), np.inf, reason=str(exc))
    NW = N + W
    Bmat = p.B if isinstance(p, GaveProblem) else np.eye(n)
    T = np.abs(lu.solve(NW)) + np.abs(lu.solve(Bmat))
    try:
        lo, hi = spectral_radius_bounds(T)
    except NonConvergence as exc:
        lo, hi = exc.lower, exc.upper
    radius = 0.5 * (lo + hi)
    x0 = run.cfg.start(n, lu.solve(p.b) if run.cfg.x0 is None else None)
    out = _fixed_point(run, lambda x: lu.solve(NW @ x + _abs_term(p, x) + p.b), x0)
    out.info["radius"] = radius
    return out


# ------------------------------------------------------------ Gauss-Seidel


def _triangular_abs_solve(T: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Forward substitution for ``T x - |x| = c`` with T lower triangular, diag > 1."""
    n = c.shape[0]
    x = np.zeros(n)
    for i in range(n):
        s = c[i] - T[i, :i] @ x[:i]
        x[i] = s / (T[i, i] - 1.0) if s >= 0 else s / (T[i, i] + 1.0)
    return x


def _sweep_loop(run: Run, sweep, x: np.ndarray) -> SolveOutcome:
    r = run.record(x)
    for _ in range(run.cfg.max_iters):
        x = sweep(x)
        run.iterations += 1
        r = run.record(x)
        if run.solved(r):
            return run.outcome(Status.CONVERGED, x, r)
        if run.diverged(r):
            return run.outcome(Status.DIVERGED, x, r)
    return run.outcome(Status.MAX_ITERS, x, r)


def solve_ggs(p: AveProblem, cfg: Optional[SolverConfig] = None) -> SolveOutcome:
    """Generalized Gauss-Seidel: ``(D - E) x^{k+1} - |x^{k+1}| = F x^k + b``.

    Needs every diagonal entry of A above one. One iteration is one sweep.
    """
    run = Run(p, cfg, "ggs")
    A = p.A
    if np.any(np.diag(A) <= 1.0):
        return not_applicable(p, run.method, "some diagonal entry of A is not greater than one")
    L = np.tril(A)
    U = np.triu(A, 1)
    return _sweep_loop(run, lambda x: _triangular_abs_solve(L, p.b - U @ x), run.cfg.start(p.n))


def solve_pggs(p: AveProblem, beta: float = 0.5, cfg: Optional[SolverConfig] = None) -> SolveOutcome:
    """Gauss-Seidel sweeps on the system preconditioned by ``P = D + beta F``.

    With ``A = D - E - F`` and ``P A = D~ - E~ - F~`` each sweep solves
    ``D^{-1}(D~ - E~) x - |x| = beta D^{-1} F |x^k| + D^{-1} F~ x^k + D^{-1} P b``
    by forward substitution. The scheme targets Z-matrices; other matrices
    only trigger a warning.
    """
    run = Run(p, cfg, "pggs")
    A = p.A
    d = np.diag(A)
    if np.any(d <= 1.0):
        return not_applicable(p, run.method, "some diagonal entry of A is not greater than one")
    off = A - np.diag(d)
    if np.any(off > 0):
        warnings.warn("preconditioned Gauss-Seidel is intended for Z-matrices", stacklevel=2)
    F = -np.triu(A, 1)
    P = np.diag(d) + beta * F
    PA = P @ A
    Dinv = 1.0 / d
    T = Dinv[:, None] * np.tril(PA)
    if np.any(np.diag(T) <= 1.0):
        return not_applicable(p, run.method, "preconditioned diagonal is not greater than one",
                              beta=beta)
    Ft = -np.triu(PA, 1)
    G1 = beta * Dinv[:, None] * F
    G2 = Dinv[:, None] * Ft
    c0 = Dinv * (P @ p.b)
    return _sweep_loop(run, lambda x: _triangular_abs_solve(T, G1 @ np.abs(x) + G2 @ x + c0),
                       run.cfg.start(p.n))
