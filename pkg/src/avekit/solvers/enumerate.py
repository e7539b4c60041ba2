"""Exhaustive orthant enumeration of the solution set.

On the orthant ``diag(s) x >= 0`` the equation ``A x - |x| = b`` is the
linear system ``(A - diag(s)) x = b``. Solving all 2^n of them and keeping
the sign-consistent solutions gives the whole solution set.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..core import (
    DEFAULT_ENUM_CAP,
    AveProblem,
    GaveProblem,
    NonConvergence,
    batched_lu_solve,
    check_enum_size,
    iter_gray_chunks,
    lu_solve,
    orthant_matrices,
    rank_revealing_solve,
    residual,
    spectral_radius_bounds,
    SingularMatrixError,
)
from ..lp import LinearProgram, LpStatus, solve_lp

SIGN_TOL = 1e-9
DEDUP_TOL = 1e-8


@dataclass
class OrthantPiece:
    """Solutions inside one orthant.

    A point piece has an empty ``basis``. An affine piece is the set
    ``{x0 + basis @ t : diag(s) (x0 + basis @ t) >= 0}`` with orthonormal
    basis columns. One-dimensional pieces are stored canonically: ``x0`` is
    the finite endpoint, the single direction points into the piece, and
    ``length`` is the extent along it (``inf`` for a ray).
    """

    s: np.ndarray
    x0: np.ndarray
    basis: np.ndarray
    length: float = 0.0

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @property
    def is_point(self) -> bool:
        return self.dim == 0

    @property
    def kind(self) -> str:
        if self.dim == 0:
            return "point"
        if self.dim == 1:
            return "ray" if np.isinf(self.length) else "segment"
        return f"affine{self.dim}"

    @property
    def direction(self) -> Optional[np.ndarray]:
        return self.basis[:, 0] if self.dim == 1 else None

    def distance(self, x: np.ndarray) -> float:
        """Infinity-norm distance proxy used for membership tests."""
        x = np.asarray(x, dtype=float)
        if self.is_point:
            return float(np.max(np.abs(x - self.x0)))
        d = x - self.x0
        off = d - self.basis @ (self.basis.T @ d)
        viol = np.maximum(-(self.s * x), 0.0)
        if self.dim == 1 and np.isfinite(self.length):
            t = float(self.basis[:, 0] @ d)
            viol = np.append(viol, max(t - self.length, 0.0))
        return float(max(np.max(np.abs(off)), np.max(viol)))

    def contains(self, x: np.ndarray, tol: float = 1e-7) -> bool:
        return self.distance(x) <= tol * (1.0 + float(np.max(np.abs(x))))

    def sample(self, t: Optional[np.ndarray] = None) -> np.ndarray:
        if self.is_point:
            return self.x0.copy()
        t = np.zeros(self.dim) if t is None else np.asarray(t, dtype=float)
        return self.x0 + self.basis @ t

    def to_dict(self) -> dict:
        out = {"s": self.s.tolist(), "kind": self.kind, "x0": self.x0.tolist()}
        if self.dim:
            out["basis"] = self.basis.T.tolist()
            if self.dim == 1:
                out["length"] = None if np.isinf(self.length) else self.length
        return out


@dataclass
class SolutionSet:
    n: int
    pieces: list = field(default_factory=list)
    complete: bool = True
    orthants_pruned: int = 0

    @property
    def points(self) -> list:
        return [p.x0 for p in self.pieces if p.is_point]

    @property
    def affine_pieces(self) -> list:
        return [p for p in self.pieces if not p.is_point]

    @property
    def is_empty(self) -> bool:
        return not self.pieces

    @property
    def is_finite(self) -> bool:
        return all(p.is_point for p in self.pieces)

    def __len__(self) -> int:
        return len(self.pieces)

    def contains(self, x, tol: float = 1e-7) -> bool:
        return any(p.contains(x, tol) for p in self.pieces)

    def summary(self) -> str:
        counts: dict[str, int] = {}
        for p in self.pieces:
            counts[p.kind] = counts.get(p.kind, 0) + 1
        if not counts:
            return "no solution"
        parts = []
        for kind in sorted(counts, key=lambda k: ("point", "segment", "ray").index(k)
                           if k in ("point", "segment", "ray") else 9):
            c = counts[kind]
            parts.append(f"{c} {kind}" + ("s" if c != 1 else ""))
        return ", ".join(parts)

    def to_dict(self) -> dict:
        return {"n": self.n, "complete": self.complete,
                "orthants_pruned": self.orthants_pruned,
                "summary": self.summary(),
                "pieces": [p.to_dict() for p in self.pieces]}


def _split(p):
    if isinstance(p, GaveProblem):
        if not p.is_square:
            raise ValueError("enumeration needs a square GAVE")
        return p.A, p.B, p.b
    return p.A, None, p.b


def _one_dim_piece(s, x0, d, tol):
    """Clip the line x0 + t d to the orthant; None when empty."""
    sd = s * d
    sx = s * x0
    lo, hi = -np.inf, np.inf
    for a, c in zip(sd, sx):
        # a t + c >= 0
        if abs(a) <= 1e-14:
            if c < -tol:
                return None
            continue
        bound = -c / a
        if a > 0:
            lo = max(lo, bound)
        else:
            hi = min(hi, bound)
    if lo > hi + tol:
        return None
    if np.isinf(lo) and np.isinf(hi):
        return None  # a full line cannot sit in an orthant unless d = 0
    if not np.isinf(lo) and not np.isinf(hi) and hi - lo <= tol:
        return OrthantPiece(s, x0 + 0.5 * (lo + hi) * d, np.zeros((x0.size, 0)))
    if np.isinf(lo):
        base, direction, length = x0 + hi * d, -d, np.inf
    else:
        base, direction, length = x0 + lo * d, d, hi - lo
    return OrthantPiece(s, base, direction[:, None], float(length))


def _affine_piece(s, x0, N, tol):
    k = N.shape[1]
    if k == 1:
        return _one_dim_piece(s, x0, N[:, 0], tol)
    G = s[:, None] * N
    h = -(s * x0)
    sol = solve_lp(LinearProgram(np.zeros(k), G, h))
    if sol.status is not LpStatus.OPTIMAL:
        return None
    base = x0 + N @ sol.x
    # collapse to a point when the piece has no extent in any direction
    extent = 0.0
    for j in range(k):
        for sign in (1.0, -1.0):
            c = np.zeros(k)
            c[j] = -sign
            r = solve_lp(LinearProgram(c, G, h))
            if r.status is LpStatus.UNBOUNDED:
                extent = np.inf
                break
            if r.status is LpStatus.OPTIMAL:
                extent = max(extent, abs(r.x[j] - sol.x[j]))
        if np.isinf(extent):
            break
    if extent <= tol:
        return OrthantPiece(s, base, np.zeros((x0.size, 0)))
    return OrthantPiece(s, base, N, np.inf)


def _same_affine(p: OrthantPiece, q: OrthantPiece, tol: float) -> bool:
    if p.dim != q.dim:
        return False
    if p.dim == 1:
        same_dir = np.max(np.abs(p.basis - q.basis)) <= tol
        same_len = (np.isinf(p.length) and np.isinf(q.length)) or abs(p.length - q.length) <= tol
        return bool(same_dir and same_len and np.max(np.abs(p.x0 - q.x0)) <= tol)
    # same hull, and the sign constraints agree on coordinates that move
    if np.max(np.abs(q.basis - p.basis @ (p.basis.T @ q.basis))) > tol:
        return False
    if p.distance(q.x0) > tol:
        return False
    moving = (np.abs(p.basis).max(axis=1) > tol) | (np.abs(p.x0) > tol)
    return bool(np.all(p.s[moving] == q.s[moving]))


def prune_ranges(p: AveProblem):
    """Per-coordinate sign admissibility from the polyhedral solution bounds.

    Returns None when the bounds do not apply (rho(|A|) >= 1). Otherwise a
    pair of boolean vectors ``(pos_ok, neg_ok)``; an all-False pair
    certifies that no solution exists.
    """
    A, b = p.A, p.b
    n = p.n
    none = (np.zeros(n, dtype=bool), np.zeros(n, dtype=bool))
    absA = np.abs(A)
    try:
        _, hi = spectral_radius_bounds(absA)
    except NonConvergence as exc:
        hi = exc.upper
    if not hi < 1.0 - 1e-12:
        return None
    try:
        u = -lu_solve(np.eye(n) - absA, b)
    except SingularMatrixError:
        return None
    if np.any(u < -1e-12):
        return none
    u = np.maximum(u, 0.0)
    I = np.eye(n)
    G = np.vstack([A + I, A - I, I, -I])
    h = np.concatenate([b, b, -u, -u])
    lo = np.empty(n)
    up = np.empty(n)
    for i in range(n):
        c = np.zeros(n)
        c[i] = 1.0
        r = solve_lp(LinearProgram(c, G, h))
        if r.status is LpStatus.INFEASIBLE:
            return none
        lo[i] = r.x[i] if r.status is LpStatus.OPTIMAL else -u[i]
        r = solve_lp(LinearProgram(-c, G, h))
        up[i] = r.x[i] if r.status is LpStatus.OPTIMAL else u[i]
    slack = 1e-9 * (1.0 + np.max(u))
    return up >= -slack, lo <= slack


def enumerate_solutions(p: AveProblem | GaveProblem, prune: bool = False,
                        enum_cap: int = DEFAULT_ENUM_CAP) -> SolutionSet:
    """All solutions of an AVE (or square GAVE), orthant by orthant.

    Parameters
    ----------
    p : AveProblem or GaveProblem
    prune : bool
        Skip orthants that miss the polyhedral bounds (AVE with rho(|A|) < 1).
    enum_cap : int
        Largest n accepted; 22 is a hard limit.

    Returns
    -------
    SolutionSet
        Isolated points and affine pieces, with boundary duplicates merged.
    """
    A, B, b = _split(p)
    n = A.shape[0]
    check_enum_size(n, enum_cap)
    scale = 1.0 + float(np.max(np.abs(b), initial=0.0))
    res_tol = 1e-9 * scale
    out = SolutionSet(n=n)

    points: list[OrthantPiece] = []
    boundary: list[OrthantPiece] = []
    affine: list[OrthantPiece] = []
    ranges = prune_ranges(p) if prune and B is None else None
    for S in iter_gray_chunks(n):
        if ranges is not None:
            pos_ok, neg_ok = ranges
            mask = np.all(np.where(S > 0, pos_ok[None, :], neg_ok[None, :]), axis=1)
            out.orthants_pruned += int(np.count_nonzero(~mask))
            S = S[mask]
        if S.shape[0] == 0:
            continue
        M = orthant_matrices(A, B, S)
        X, singular, _ = batched_lu_solve(M, b)
        ok = ~singular
        X_ok = X[ok]
        S_ok = S[ok]
        M_ok = M[ok]
        xs = np.max(np.abs(X_ok), axis=1, initial=0.0) if X_ok.size else np.zeros(0)
        feasible = np.all(S_ok * X_ok >= -SIGN_TOL * (1.0 + xs[:, None]), axis=1)
        for k in np.flatnonzero(feasible):
            x = X_ok[k]
            s = S_ok[k]
            r = M_ok[k] @ x - b
            if np.max(np.abs(r)) > res_tol:
                try:
                    x = x - lu_solve(M_ok[k], r)
                except SingularMatrixError:
                    pass
                if np.any(s * x < -SIGN_TOL * (1.0 + np.max(np.abs(x)))):
                    continue
            piece = OrthantPiece(s.copy(), x + 0.0, np.zeros((n, 0)))
            if np.min(np.abs(x)) <= DEDUP_TOL * (1.0 + np.max(np.abs(x))):
                boundary.append(piece)
            else:
                points.append(piece)
        for k in np.flatnonzero(singular):
            s = S[k]
            x0, N, rank = rank_revealing_solve(M[k], b)
            if x0 is None:
                continue
            if N.shape[1] == 0:
                if np.all(s * x0 >= -SIGN_TOL * (1.0 + np.max(np.abs(x0)))):
                    piece = OrthantPiece(s.copy(), x0, np.zeros((n, 0)))
                    boundary.append(piece) if np.min(np.abs(x0)) <= DEDUP_TOL else points.append(piece)
                continue
            piece = _affine_piece(s.copy(), x0, N, SIGN_TOL * (1.0 + np.max(np.abs(x0))))
            if piece is None:
                continue
            if piece.is_point:
                boundary.append(piece)
            else:
                affine.append(piece)

    merged_affine: list[OrthantPiece] = []
    for piece in affine:
        if not any(_same_affine(q, piece, DEDUP_TOL * (1.0 + np.max(np.abs(piece.x0))))
                   for q in merged_affine):
            merged_affine.append(piece)
    kept_boundary: list[OrthantPiece] = []
    for piece in boundary:
        x = piece.x0
        tol = DEDUP_TOL * (1.0 + np.max(np.abs(x)))
        if any(np.max(np.abs(q.x0 - x)) < tol for q in kept_boundary):
            continue
        if any(q.distance(x) <= tol for q in merged_affine):
            continue
        kept_boundary.append(piece)
    out.pieces = points + kept_boundary + merged_affine
    out.pieces.sort(key=lambda q: (q.dim, tuple(q.s)))
    return out


def solution_residuals(p, sol: SolutionSet) -> np.ndarray:
    """Infinity-norm residual at each piece's anchor point."""
    return np.array([np.max(np.abs(residual(p, q.x0))) for q in sol.pieces])
