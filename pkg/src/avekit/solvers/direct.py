"""Finite methods: sign accord, signed Gaussian elimination and a closed form."""

from __future__ import annotations

import math
from typing import Optional

import numpy as np
from scipy.sparse.csgraph import connected_components

from ..core import (
    AveProblem,
    GaveProblem,
    LUFactor,
    NonConvergence,
    SingularMatrixError,
    SolveOutcome,
    SolverConfig,
    Status,
    lu_solve,
    sign_diag,
    spectral_radius_bounds,
)
from ._common import Run, not_applicable


def _as_gave(p: AveProblem | GaveProblem) -> GaveProblem:
    return p if isinstance(p, GaveProblem) else p.to_gave()


def solve_sign_accord(p: AveProblem | GaveProblem, cfg: Optional[SolverConfig] = None) -> SolveOutcome:
    """Sign accord for ``A x - B|x| = b``.

    Starts from ``s = sgn(A^{-1} b)`` and flips the first entry with
    ``s_k x_k < 0`` until signs and solution agree. A singular step or the
    abort test ``log2(p_k) > n - k`` (k one-based) returns NotRegular: the
    interval matrix ``[A - |B|, A + |B|]`` is then not regular.
    ``iterations`` counts the sign flips.
    """
    g = _as_gave(p)
    run = Run(g, cfg, "sign_accord")
    n = g.n
    if not g.is_square:
        raise ValueError("sign accord needs a square system")
    try:
        x = lu_solve(g.A, g.b)
    except SingularMatrixError as exc:
        return run.outcome(Status.NOT_REGULAR, np.full(n, np.nan), np.inf,
                           reason=f"A is singular: {exc}", sign=None)
    run.linear_solves += 1
    s = sign_diag(x)
    if not np.any(g.B):
        # linear system: the first solve is already the answer
        r = run.record(x)
        status = Status.CONVERGED if run.solved(r) else Status.STALLED
        return run.outcome(status, x, r, sign=s, flips=0)
    counts = np.zeros(n, dtype=np.int64)
    while True:
        try:
            x = lu_solve(g.A - g.B * s[None, :], g.b)
        except SingularMatrixError as exc:
            return run.outcome(Status.NOT_REGULAR, np.full(n, np.nan), np.inf,
                               reason=f"singular member: {exc}", sign=s.copy(),
                               flip_counts=counts)
        run.linear_solves += 1
        run.record(x)
        bad = np.flatnonzero(s * x < 0)
        if bad.size == 0:
            break
        k = int(bad[0])
        counts[k] += 1
        if math.log2(counts[k]) > n - (k + 1):
            return run.outcome(Status.NOT_REGULAR, x, sign=s.copy(), flip_counts=counts,
                               reason="flip count exceeded the regularity bound")
        s[k] = -s[k]
        run.iterations += 1
    r = run.record(x)
    status = Status.CONVERGED if run.solved(r) else Status.STALLED
    return run.outcome(status, x, r, sign=s, flips=run.iterations)


# ------------------------------------------------------------ signed elimination


def _irreducible(B: np.ndarray) -> bool:
    n = B.shape[0]
    if n == 1:
        return True
    k, _ = connected_components(B != 0, directed=True, connection="strong")
    return k == 1


def signed_ge_class(B: np.ndarray) -> Optional[int]:
    """First of the four classes (1 to 4) that admits B, or None."""
    B = np.asarray(B, dtype=float)
    n = B.shape[0]
    nrm = float(np.abs(B).sum(axis=1).max(initial=0.0))
    if nrm < 0.5:
        return 1
    if nrm <= 0.5 and _irreducible(B):
        return 2
    d = np.abs(np.diag(B))
    if np.all(d > np.abs(B).sum(axis=1) - d) and nrm <= 2.0 / 3.0:
        return 3
    absB = np.abs(B)
    tri = np.all(np.triu(absB, 2) == 0) and np.all(np.tril(absB, -2) == 0)
    if n >= 2 and tri and np.array_equal(absB, absB.T) and nrm < 1.0:
        return 4
    return None


def solve_signed_ge(B: np.ndarray, b: np.ndarray, cfg: Optional[SolverConfig] = None,
                    force: bool = False) -> SolveOutcome:
    """Signed Gaussian elimination for ``x - B|x| = b``.

    The entry of largest ``|b_i|`` (smallest index on ties) takes the sign
    of ``b_i``; its column becomes linear and one elimination step reduces
    the system by one. Applicability is checked unless ``force`` is set,
    in which case the result is verified by its residual only.
    """
    B = np.asarray(B, dtype=float)
    b = np.asarray(b, dtype=float)
    n = b.shape[0]
    p = GaveProblem(np.eye(n), B, b)
    run = Run(p, cfg, "signed_ge")
    cls = signed_ge_class(B)
    if cls is None and not force:
        return not_applicable(p, run.method, "B is outside the four admissible classes")
    Bw = B.copy()
    bw = b.copy()
    idx = list(range(n))
    steps = []
    for _ in range(n):
        i = int(np.argmax(np.abs(bw)))
        s_i = 1.0 if bw[i] > 0 else -1.0
        piv = 1.0 - Bw[i, i] * s_i
        if piv == 0.0:
            return run.outcome(Status.SINGULAR_STEP, np.full(n, np.nan), np.inf, step=len(steps))
        keep = [j for j in range(len(idx)) if j != i]
        row = Bw[i, keep].copy()
        c = Bw[keep, i] * s_i / piv
        steps.append((idx[i], [idx[j] for j in keep], row, bw[i], piv))
        Bw = Bw[np.ix_(keep, keep)] + np.outer(c, row)
        bw = bw[keep] + c * bw[i]
        idx = [idx[j] for j in keep]
        run.iterations += 1
    x = np.zeros(n)
    for var, rest, row, bi, piv in reversed(steps):
        x[var] = (bi + row @ np.abs(x[rest])) / piv
    r = run.record(x)
    status = Status.CONVERGED if run.solved(r) else Status.STALLED
    return run.outcome(status, x, r, admissible_class=cls)


def solve_special_closed_form(B: np.ndarray, b: np.ndarray) -> SolveOutcome:
    """Closed form for ``x - B|x| = b`` with ``B >= 0``, ``rho(B) < 1``.

    With ``M = (I - B)^{-1}`` and an index k such that ``b_i >= 0`` for
    ``i != k``: ``x = max(M b, M b - 2 (Mb)_k / (2 M_kk - 1) (M - I) e_k)``.
    """
    B = np.asarray(B, dtype=float)
    b = np.asarray(b, dtype=float)
    n = b.shape[0]
    p = GaveProblem(np.eye(n), B, b)
    run = Run(p, None, "closed_form")
    if np.any(B < 0):
        return not_applicable(p, run.method, "B has a negative entry")
    try:
        lo, hi = spectral_radius_bounds(B)
    except NonConvergence as exc:
        lo, hi = exc.lower, exc.upper
    if not hi < 1.0:
        return not_applicable(p, run.method, f"rho(B) is not below one (bracket [{lo:.6g}, {hi:.6g}])")
    neg = np.flatnonzero(b < 0)
    if neg.size > 1:
        return not_applicable(p, run.method, "b has more than one negative entry")
    k = int(neg[0]) if neg.size else int(np.argmin(b))
    M = LUFactor(np.eye(n) - B).solve(np.eye(n))
    run.linear_solves += 1
    Mb = M @ b
    col = M[:, k].copy()
    col[k] -= 1.0
    x = np.maximum(Mb, Mb - (2.0 * Mb[k] / (2.0 * M[k, k] - 1.0)) * col)
    run.iterations = 1
    r = run.record(x)
    status = Status.CONVERGED if r <= 1e-10 * (1.0 + np.abs(b).max(initial=0.0)) else Status.STALLED
    return run.outcome(status, x, r, k=k)
