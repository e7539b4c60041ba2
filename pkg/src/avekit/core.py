"""Problem types and dense linear-algebra kernels.

Everything here is a pure function of its inputs. Arrays stored on the
problem types are copied and marked read-only at construction.
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass, field
from typing import Any, Mapping, Optional, Sequence

import numpy as np
import scipy.linalg as sla
from scipy.sparse.csgraph import connected_components

PIVOT_TOL = 1e-13
MAX_ENUM_N = 22
DEFAULT_ENUM_CAP = 20
DEFAULT_TOL = 1e-10


class AvekitError(Exception):
    """Base class for all toolkit errors."""


class DimensionError(AvekitError, ValueError):
    pass


class SingularMatrixError(AvekitError):
    """A pivot fell below ``pivot_tol * ||A||_inf``."""

    def __init__(self, message: str = "matrix is singular", pivot: float = 0.0,
                 index: int = -1):
        super().__init__(message)
        self.pivot = pivot
        self.index = index


class NonConvergence(AvekitError):
    """An inner iteration hit its cap; ``lower``/``upper`` bracket the value."""

    def __init__(self, message: str, estimate: float, lower: float, upper: float):
        super().__init__(message)
        self.estimate = estimate
        self.lower = lower
        self.upper = upper


class CapExceeded(AvekitError):
    """A 2^n enumeration was requested above the cap."""


class NotApplicableError(AvekitError, ValueError):
    """Preconditions of a method are not satisfied."""


class UnsolvableInstance(AvekitError):
    """The instance has no solution."""


def _as_matrix(M: Any, name: str) -> np.ndarray:
    arr = np.array(M, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    if arr.ndim != 2:
        raise DimensionError(f"{name} must be a matrix, got ndim={arr.ndim}")
    if not np.all(np.isfinite(arr)):
        raise DimensionError(f"{name} has non-finite entries")
    arr.setflags(write=False)
    return arr


def _as_vector(v: Any, name: str) -> np.ndarray:
    arr = np.array(v, dtype=float).reshape(-1)
    if not np.all(np.isfinite(arr)):
        raise DimensionError(f"{name} has non-finite entries")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class AveProblem:
    """The system ``A x - |x| = b``."""

    A: np.ndarray
    b: np.ndarray

    def __post_init__(self) -> None:
        A = _as_matrix(self.A, "A")
        b = _as_vector(self.b, "b")
        if A.shape[0] != A.shape[1]:
            raise DimensionError(f"A must be square, got {A.shape}")
        if A.shape[0] < 1:
            raise DimensionError("n must be at least 1")
        if b.shape[0] != A.shape[0]:
            raise DimensionError(f"b has length {b.shape[0]}, expected {A.shape[0]}")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def B(self) -> np.ndarray:
        return np.eye(self.n)

    def to_gave(self) -> "GaveProblem":
        return GaveProblem(self.A, np.eye(self.n), self.b)


@dataclass(frozen=True)
class GaveProblem:
    """The system ``A x - B |x| = b``."""

    A: np.ndarray
    B: np.ndarray
    b: np.ndarray

    def __post_init__(self) -> None:
        A = _as_matrix(self.A, "A")
        B = _as_matrix(self.B, "B")
        b = _as_vector(self.b, "b")
        if A.shape != B.shape:
            raise DimensionError(f"A {A.shape} and B {B.shape} differ in shape")
        if b.shape[0] != A.shape[0]:
            raise DimensionError(f"b has length {b.shape[0]}, expected {A.shape[0]}")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "b", b)

    @property
    def m(self) -> int:
        return self.A.shape[0]

    @property
    def n(self) -> int:
        return self.A.shape[1]

    @property
    def is_square(self) -> bool:
        return self.m == self.n


class Status(str, enum.Enum):
    CONVERGED = "Converged"
    MAX_ITERS = "MaxIters"
    SINGULAR_STEP = "SingularStep"
    STALLED = "Stalled"
    DIVERGED = "Diverged"
    NOT_APPLICABLE = "NotApplicable"
    NOT_REGULAR = "NotRegular"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class SolverConfig:
    """Shared solver settings.

    Parameters
    ----------
    tol : float
        Relative tolerance of the stopping rule
        ``||Ax - |x| - b||_inf <= tol * (1 + ||b||_inf)``.
    max_iters : int
        Iteration cap.
    params : mapping
        Named scalars such as ``omega``, ``alpha``, ``theta``, ``beta``.
    omega_matrix : array, optional
        The matrix Omega of the shifted Picard and splitting schemes.
    inner_iters : sequence of int, optional
        Inner sweep counts for Picard-HSS; the last entry repeats.
    trace : bool
        Record the residual after every iteration.
    x0 : array, optional
        Starting point; each solver documents its default.
    """

    tol: float = DEFAULT_TOL
    max_iters: int = 500
    params: Mapping[str, float] = field(default_factory=dict)
    omega_matrix: Optional[np.ndarray] = None
    inner_iters: Optional[Sequence[int]] = None
    trace: bool = False
    x0: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if int(self.max_iters) < 1:
            raise ValueError("max_iters must be at least 1")
        if self.omega_matrix is not None:
            om = _as_matrix(self.omega_matrix, "omega_matrix")
            if om.shape[0] != om.shape[1]:
                raise DimensionError("omega_matrix must be square")
            object.__setattr__(self, "omega_matrix", om)
        if self.x0 is not None:
            object.__setattr__(self, "x0", _as_vector(self.x0, "x0"))
        object.__setattr__(self, "params", dict(self.params))

    def param(self, name: str, default: float) -> float:
        return float(self.params.get(name, default))

    def start(self, n: int, default: Optional[np.ndarray] = None) -> np.ndarray:
        if self.x0 is not None:
            if self.x0.shape[0] != n:
                raise DimensionError(f"x0 has length {self.x0.shape[0]}, expected {n}")
            return np.array(self.x0, dtype=float)
        if default is None:
            return np.zeros(n)
        return np.array(default, dtype=float)


@dataclass
class SolveOutcome:
    status: Status
    x: np.ndarray
    residual_inf: float
    iterations: int
    linear_solves: int
    trace: Optional[list] = None
    method: str = ""
    info: dict = field(default_factory=dict)

    @property
    def converged(self) -> bool:
        return self.status is Status.CONVERGED


def residual(p: AveProblem | GaveProblem, x: Any) -> np.ndarray:
    """Return ``A x - |x| - b`` (or ``A x - B|x| - b`` for a GAVE)."""
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape[0] != p.A.shape[1]:
        raise DimensionError(f"x has length {x.shape[0]}, expected {p.A.shape[1]}")
    if isinstance(p, GaveProblem):
        return p.A @ x - p.B @ np.abs(x) - p.b
    return p.A @ x - np.abs(x) - p.b


def residual_inf(p: AveProblem | GaveProblem, x: Any) -> float:
    return float(np.max(np.abs(residual(p, x)))) if p.b.size else 0.0


def tolerance_scale(p: AveProblem | GaveProblem, tol: float = DEFAULT_TOL) -> float:
    """Absolute threshold of the uniform stopping rule."""
    return tol * (1.0 + float(np.max(np.abs(p.b), initial=0.0)))


def is_solution(p: AveProblem | GaveProblem, x: Any, tol: float = DEFAULT_TOL) -> bool:
    return residual_inf(p, x) <= tolerance_scale(p, tol)


def sign_diag(x: Any) -> np.ndarray:
    """Sign vector with ``sgn(0) = -1``, so that ``|x| = D(x) x``."""
    x = np.asarray(x, dtype=float)
    return np.where(x > 0, 1.0, -1.0)


def validate_sign_vector(s: Any, n: Optional[int] = None) -> np.ndarray:
    s = np.asarray(s, dtype=float).reshape(-1)
    if not np.all((s == 1.0) | (s == -1.0)):
        raise ValueError("sign vector entries must be exactly +1 or -1")
    if n is not None and s.shape[0] != n:
        raise DimensionError(f"sign vector has length {s.shape[0]}, expected {n}")
    return s


# ---------------------------------------------------------------- LU kernels


class LUFactor:
    """Partial-pivoting LU factors with a pivot-size singularity check."""

    def __init__(self, A: Any, pivot_tol: float = PIVOT_TOL):
        A = np.asarray(A, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise DimensionError(f"expected a square matrix, got shape {A.shape}")
        self.n = A.shape[0]
        scale = norm_inf(A)
        threshold = pivot_tol * scale
        if self.n == 0:
            self.lu, self.piv = A.copy(), np.zeros(0, dtype=np.int32)
            return
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", sla.LinAlgWarning)
            self.lu, self.piv = sla.lu_factor(A, check_finite=False)
        diag = np.abs(np.diag(self.lu))
        k = int(np.argmin(diag))
        if scale == 0.0 or diag[k] < threshold or diag[k] == 0.0:
            raise SingularMatrixError(
                f"pivot {diag[k]:.3e} below {threshold:.3e} at step {k}",
                pivot=float(diag[k]), index=k)

    def solve(self, b: Any, trans: int = 0) -> np.ndarray:
        b = np.asarray(b, dtype=float)
        return sla.lu_solve((self.lu, self.piv), b, trans=trans, check_finite=False)

    def det(self) -> float:
        swaps = np.count_nonzero(self.piv != np.arange(self.n))
        return float((-1.0) ** swaps * np.prod(np.diag(self.lu)))


def lu_solve(A: Any, b: Any, pivot_tol: float = PIVOT_TOL) -> np.ndarray:
    """Solve ``A x = b`` by LU with partial pivoting.

    Raises
    ------
    SingularMatrixError
        When a pivot magnitude falls below ``pivot_tol * ||A||_inf``.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or b.shape[0] != A.shape[0]:
        raise DimensionError(f"incompatible shapes {A.shape} and {b.shape}")
    return LUFactor(A, pivot_tol).solve(b)


def inverse(A: Any, pivot_tol: float = PIVOT_TOL) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    return LUFactor(A, pivot_tol).solve(np.eye(A.shape[0]))


def det(A: Any) -> float:
    """Determinant via LU; exactly 0.0 only when a pivot is exactly zero."""
    A = np.asarray(A, dtype=float)
    if A.shape[0] == 0:
        return 1.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", sla.LinAlgWarning)
        lu, piv = sla.lu_factor(A, check_finite=False)
    swaps = np.count_nonzero(piv != np.arange(A.shape[0]))
    return float((-1.0) ** swaps * np.prod(np.diag(lu)))


def batched_lu_solve(M: np.ndarray, rhs: np.ndarray, pivot_tol: float = PIVOT_TOL):
    """Solve a stack of systems ``M[k] x = rhs[k]`` with partial pivoting.

    Parameters
    ----------
    M : array, shape (K, n, n)
    rhs : array, shape (K, n) or (n,)

    Returns
    -------
    x : array, shape (K, n)
        Meaningless where ``singular`` is set.
    singular : bool array, shape (K,)
        Pivot below ``pivot_tol * ||M[k]||_inf``.
    dets : array, shape (K,)
        Determinants from the LU factors.
    """
    M = np.asarray(M, dtype=float)
    K, n, _ = M.shape
    U = np.empty((K, n, n + 1))
    U[:, :, :n] = M
    U[:, :, n] = np.broadcast_to(rhs, (K, n))
    threshold = pivot_tol * np.abs(M).sum(axis=2).max(axis=1)
    singular = threshold == 0.0
    sign = np.ones(K)
    rows = np.arange(K)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        for k in range(n):
            col = np.abs(U[:, k:, k])
            p = np.argmax(col, axis=1) + k
            piv = col[rows, p - k]
            singular |= ~(piv >= threshold) | (piv == 0.0)
            swap = p != k
            if np.any(swap):
                r = rows[swap]
                tmp = U[r, k, :].copy()
                U[r, k, :] = U[r, p[swap], :]
                U[r, p[swap], :] = tmp
                sign[swap] = -sign[swap]
            if k + 1 < n:
                pivots = U[:, k, k]
                safe = np.where(pivots == 0.0, 1.0, pivots)
                L = U[:, k + 1:, k] / safe[:, None]
                U[:, k + 1:, k + 1:] -= L[:, :, None] * U[:, k, None, k + 1:]
                U[:, k + 1:, k] = 0.0
        diag = np.diagonal(U[:, :, :n], axis1=1, axis2=2)
        dets = sign * np.prod(diag, axis=1)
        safe_diag = np.where(diag == 0.0, 1.0, diag)
        x = np.empty((K, n))
        for k in range(n - 1, -1, -1):
            acc = U[:, k, n] - np.einsum("kj,kj->k", U[:, k, k + 1:n], x[:, k + 1:])
            x[:, k] = acc / safe_diag[:, k]
    return x, singular, dets


def rank_revealing_solve(M: Any, b: Any, rel_tol: float = 1e-11):
    """Particular solution and nullspace of ``M x = b`` by complete pivoting.

    Returns
    -------
    x0 : array or None
        A particular solution, or None when the system is inconsistent.
    N : array, shape (n, n - rank)
        Orthonormal basis of the nullspace.
    rank : int
    """
    M = np.array(M, dtype=float)
    b = np.array(b, dtype=float).reshape(-1)
    m, n = M.shape
    threshold = rel_tol * max(norm_inf(M), np.finfo(float).tiny)
    U = np.concatenate([M, b[:, None]], axis=1)
    cols = np.arange(n)
    rank = 0
    for k in range(min(m, n)):
        sub = np.abs(U[k:, k:n])
        i, j = np.unravel_index(int(np.argmax(sub)), sub.shape)
        if sub[i, j] <= threshold:
            break
        i += k
        j += k
        U[[k, i]] = U[[i, k]]
        U[:, [k, j]] = U[:, [j, k]]
        cols[[k, j]] = cols[[j, k]]
        U[k] /= U[k, k]
        others = np.arange(m) != k
        U[others] -= np.outer(U[others, k], U[k])
        rank += 1
    x0 = np.zeros(n)
    x0[cols[:rank]] = U[:rank, n]
    N = np.zeros((n, n - rank))
    for t in range(n - rank):
        v = np.zeros(n)
        v[cols[rank + t]] = 1.0
        v[cols[:rank]] = -U[:rank, rank + t]
        N[:, t] = v
    if n - rank > 0:
        N, _ = np.linalg.qr(N)
    scale = 1.0 + float(np.max(np.abs(b), initial=0.0))
    if np.max(np.abs(M @ x0 - b), initial=0.0) > 1e-9 * scale * max(1.0, norm_inf(M)):
        return None, N, rank
    return x0, N, rank


# ---------------------------------------------------------------- norms


def norm_inf(M: Any) -> float:
    M = np.asarray(M, dtype=float)
    if M.ndim == 1:
        return float(np.max(np.abs(M), initial=0.0))
    if M.size == 0:
        return 0.0
    return float(np.max(np.abs(M).sum(axis=1)))


def norm(M: Any, p: int | float | str = 2) -> float:
    """Induced matrix norm for ``p`` in {1, 2, inf}, or vector norm."""
    M = np.asarray(M, dtype=float)
    if p in ("inf", "Inf"):
        p = np.inf
    if M.ndim == 1:
        return float(np.linalg.norm(M, p))
    if p == 1:
        return float(np.max(np.abs(M).sum(axis=0), initial=0.0))
    if p == np.inf:
        return norm_inf(M)
    if p == 2:
        return float(np.linalg.norm(M, 2)) if M.size else 0.0
    raise ValueError(f"unsupported norm p={p}")


def symmetric_eigenvalues(S: Any, tol: float = 1e-14, max_sweeps: int = 100) -> np.ndarray:
    """Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.

    Disjoint index pairs of a round-robin schedule are rotated together,
    so one sweep costs n - 1 vectorized passes. A pair is rotated while
    ``|a_pq| > tol * sqrt(|a_pp a_qq|)``; the sweeps stop once no pair
    qualifies. Returns ascending values.
    """
    A = np.array(S, dtype=float)
    A = 0.5 * (A + A.T)
    n = A.shape[0]
    if n <= 1:
        return np.diag(A).copy()
    m = n + (n % 2)
    if m != n:
        A = np.pad(A, ((0, 1), (0, 1)))
    total = np.linalg.norm(A)
    if total == 0.0:
        return np.zeros(n)
    players = list(range(m))
    schedule = []
    for _ in range(m - 1):
        P = np.array([players[i] for i in range(m // 2)])
        Q = np.array([players[m - 1 - i] for i in range(m // 2)])
        schedule.append((np.minimum(P, Q), np.maximum(P, Q)))
        players = [players[0]] + [players[-1]] + players[1:-1]
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        for _ in range(max_sweeps):
            rotated = False
            for P, Q in schedule:
                apq = A[P, Q]
                app = A[P, P]
                aqq = A[Q, Q]
                active = np.abs(apq) > tol * np.sqrt(np.abs(app * aqq))
                active &= np.abs(apq) > 1e-300 * total
                if not np.any(active):
                    continue
                rotated = True
                P, Q = P[active], Q[active]
                apq, app, aqq = apq[active], app[active], aqq[active]
                tau = (aqq - app) / (2.0 * apq)
                t = np.where(tau >= 0.0, 1.0, -1.0) / (np.abs(tau) + np.sqrt(1.0 + tau * tau))
                t = np.where(np.isfinite(tau), t, 0.0)
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                rp = A[P, :]
                rq = A[Q, :]
                A[P, :] = c[:, None] * rp - s[:, None] * rq
                A[Q, :] = s[:, None] * rp + c[:, None] * rq
                cp = A[:, P]
                cq = A[:, Q]
                A[:, P] = cp * c - cq * s
                A[:, Q] = cp * s + cq * c
            if not rotated:
                break
    # the padded index never couples, so its zero is simply dropped
    return np.sort(np.diag(A)[:n])


def extreme_singular_values(A: Any) -> tuple[float, float]:
    """(sigma_min, sigma_max) from the Jacobi eigenvalues of ``A^T A``."""
    A = np.asarray(A, dtype=float)
    ev = symmetric_eigenvalues(A.T @ A)
    ev = np.sqrt(np.clip(ev, 0.0, None))
    return float(ev[0]), float(ev[-1])


def spectral_radius_bounds(M: Any, tol: float = 1e-12, max_iters: int = 10_000):
    """Collatz-Wielandt bracket ``(lower, upper)`` of rho(M) for M >= 0.

    The radius is the maximum over the irreducible diagonal blocks, so the
    matrix is split into strongly connected components first. Each block is
    iterated with the shift ``M + I``, which makes it primitive.

    Raises
    ------
    NonConvergence
        When a block does not reach ``upper - lower <= tol * max(1, upper)``.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionError("spectral radius needs a square matrix")
    if np.any(M < 0):
        raise ValueError("spectral_radius_nonneg requires an entrywise nonnegative matrix")
    n = M.shape[0]
    if n == 0:
        return 0.0, 0.0
    ncomp, labels = connected_components(M != 0, directed=True, connection="strong")
    lo_all, hi_all = 0.0, 0.0
    failed = None
    for c in range(ncomp):
        idx = np.flatnonzero(labels == c)
        block = M[np.ix_(idx, idx)]
        if idx.size == 1:
            v = float(block[0, 0])
            lo_all, hi_all = max(lo_all, v), max(hi_all, v)
            continue
        x = np.ones(idx.size)
        lo, hi = 0.0, np.inf
        converged = False
        for _ in range(max_iters):
            y = block @ x
            ratio = y / x
            lo, hi = float(ratio.min()), float(ratio.max())
            if hi - lo <= tol * max(1.0, hi):
                converged = True
                break
            x = x + y
            x /= x.max()
        lo_all, hi_all = max(lo_all, lo), max(hi_all, hi)
        if not converged:
            failed = (lo, hi)
    if failed is not None:
        raise NonConvergence("power iteration cap reached",
                             0.5 * (lo_all + hi_all), lo_all, hi_all)
    return lo_all, hi_all


def spectral_radius_nonneg(M: Any, tol: float = 1e-12, max_iters: int = 10_000) -> float:
    lo, hi = spectral_radius_bounds(M, tol, max_iters)
    return 0.5 * (lo + hi)


def spectral_radius(M: Any) -> float:
    """Spectral radius of a general real matrix (eigenvalue moduli)."""
    M = np.asarray(M, dtype=float)
    if M.size == 0:
        return 0.0
    return float(np.max(np.abs(np.linalg.eigvals(M))))


# ---------------------------------------------------------------- sign vectors


def check_enum_size(n: int, enum_cap: int = DEFAULT_ENUM_CAP) -> None:
    if n > MAX_ENUM_N:
        raise CapExceeded(f"n={n} exceeds the hard enumeration limit {MAX_ENUM_N}")
    if n > enum_cap:
        raise CapExceeded(f"n={n} exceeds enum_cap={enum_cap}")


def gray_sign_vectors(n: int, start: int = 0, stop: Optional[int] = None) -> np.ndarray:
    """Sign vectors in reflected Gray-code order, beginning at all +1.

    Row k has ``s_i = -1`` exactly when bit i of ``k ^ (k >> 1)`` is set.
    """
    if n > MAX_ENUM_N:
        raise CapExceeded(f"n={n} exceeds the hard enumeration limit {MAX_ENUM_N}")
    total = 1 << n
    stop = total if stop is None else min(stop, total)
    k = np.arange(start, stop, dtype=np.int64)
    g = k ^ (k >> 1)
    bits = (g[:, None] >> np.arange(n, dtype=np.int64)[None, :]) & 1
    return np.where(bits == 1, -1.0, 1.0)


def iter_gray_chunks(n: int, chunk: int = 8192):
    total = 1 << n
    for start in range(0, total, chunk):
        yield gray_sign_vectors(n, start, start + chunk)


def orthant_matrices(A: np.ndarray, B: Optional[np.ndarray], S: np.ndarray) -> np.ndarray:
    """Stack of ``A - B diag(s)`` for each row s of S (B=None means I)."""
    if B is None:
        M = np.repeat(A[None, :, :], S.shape[0], axis=0)
        idx = np.arange(A.shape[0])
        M[:, idx, idx] -= S
        return M
    return A[None, :, :] - B[None, :, :] * S[:, None, :]
