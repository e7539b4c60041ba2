"""Seeded instance generators.

Streams come from numpy's Philox counter-based generator keyed by
``seed + (attempt << 64)``, so a (kind, n, seed) triple gives the same
instance on every platform. Each kind checks its defining property after
generation and retries with the next attempt key, at most 100 times.
"""

from __future__ import annotations

from typing import Callable, Optional

import numpy as np

from ..core import AvekitError, AveProblem, extreme_singular_values, inverse, spectral_radius_bounds
from .bundle import ProblemBundle

MAX_ATTEMPTS = 100
SEED_LIMIT = 1 << 64


class GenerationFailed(AvekitError):
    pass


def make_rng(seed: int, attempt: int = 0) -> np.random.Generator:
    """Philox generator for one (seed, attempt) pair."""
    seed = int(seed)
    if not 0 <= seed < SEED_LIMIT:
        raise ValueError(f"seed must be a 64-bit unsigned value, got {seed}")
    return np.random.Generator(np.random.Philox(key=seed | (int(attempt) << 64)))


def _rho_upper(M: np.ndarray) -> float:
    return spectral_radius_bounds(M)[1]


def _planted_rhs(rng, A):
    x = rng.standard_normal(A.shape[0])
    return A @ x - np.abs(x)


def _scale_to_sigma(A: np.ndarray, target: float) -> np.ndarray:
    smin, _ = extreme_singular_values(A)
    return A * (target / smin)


def _sigma_gt1(rng, n, params):
    margin = float(params.get("margin", 0.5))
    A = _scale_to_sigma(rng.standard_normal((n, n)), 1.0 + margin)
    return A, _planted_rhs(rng, A)


def _uniform_regular(rng, n, params):
    margin = float(params.get("margin", 0.1))
    A = _scale_to_sigma(rng.uniform(-1.0, 1.0, (n, n)), 1.0 + margin)
    return A, rng.uniform(-1.0, 1.0, n) * n


def _rho_inv_lt1(rng, n, params):
    off = float(params.get("offdiag", 0.5))
    d = rng.choice([-1.0, 1.0], n) * rng.uniform(2.0, 4.0, n)
    A = np.diag(d) + rng.uniform(-off, off, (n, n)) / max(n - 1, 1) * (1 - np.eye(n))
    return A, _planted_rhs(rng, A)


def _diag_dom(rng, n, params):
    A = rng.uniform(-1.0, 1.0, (n, n))
    np.fill_diagonal(A, 0.0)
    extra = rng.uniform(0.1, 1.0, n)
    np.fill_diagonal(A, rng.choice([-1.0, 1.0], n) * (1.0 + np.abs(A).sum(axis=1) + extra))
    return A, _planted_rhs(rng, A)


def bvp_system(n: int, f: Callable[[np.ndarray], np.ndarray] | float = 1.0, alpha: float = 0.0,
               beta: float = 0.0, a: float = 0.0, b: float = 1.0):
    """Central differences for ``u'' - |u| = f`` on ``[a, b]`` with ``u(a)=alpha``, ``u(b)=beta``.

    Returns the AVE on the n interior nodes and the node coordinates.
    """
    h = (b - a) / (n + 1)
    t = a + h * np.arange(1, n + 1)
    A = (np.diag(np.full(n, -2.0)) + np.diag(np.ones(n - 1), 1) + np.diag(np.ones(n - 1), -1)) / h ** 2
    rhs = f(t) if callable(f) else np.full(n, float(f))
    rhs = np.array(rhs, dtype=float)
    rhs[0] -= alpha / h ** 2
    rhs[-1] -= beta / h ** 2
    return AveProblem(A, rhs), t


def _bvp(rng, n, params):
    p, _ = bvp_system(n, float(params.get("f", 1.0)), float(params.get("alpha", 0.0)),
                      float(params.get("beta", 0.0)), float(params.get("a", 0.0)),
                      float(params.get("b", 1.0)))
    return p.A, p.b


def _exp2n(rng, n, params):
    A = rng.uniform(-1.0, 1.0, (n, n)) * (float(params.get("scale", 0.3)) / n)
    b = -rng.uniform(0.5, 1.5, n)
    return A, b


def _infeasible(rng, n, params):
    G = rng.standard_normal((n, n))
    target = rng.uniform(0.3, 0.9)
    A = G * (target / np.linalg.norm(G, 2))
    b = rng.uniform(0.0, 1.0, n)
    return A, b


def _uniform(rng, n, params):
    return rng.uniform(-1.0, 1.0, (n, n)), rng.uniform(-1.0, 1.0, n)


def _check(kind: str, A: np.ndarray, b: np.ndarray) -> bool:
    from ..analysis import check_exponential_solutions, check_unsolvable

    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
        return False
    if kind in ("sigma_gt1", "uniform_regular"):
        return extreme_singular_values(A)[0] > 1.0
    if kind == "rho_inv_lt1":
        return _rho_upper(np.abs(inverse(A))) < 1.0
    if kind == "diag_dom":
        d = np.abs(np.diag(A))
        return bool(np.all(d > 1.0 + np.abs(A).sum(axis=1) - d))
    if kind == "exp2n":
        return check_exponential_solutions(AveProblem(A, b)).holds
    if kind == "infeasible":
        return check_unsolvable(AveProblem(A, b))["norm_lt_1_b_nonneg"].holds
    return True


KINDS = {
    "sigma_gt1": _sigma_gt1,
    "rho_inv_lt1": _rho_inv_lt1,
    "diag_dom": _diag_dom,
    "bvp": _bvp,
    "exp2n": _exp2n,
    "infeasible": _infeasible,
    "uniform": _uniform,
    "uniform_regular": _uniform_regular,
}


def gen_instance(kind: str, n: int, seed: int, params: Optional[dict] = None) -> ProblemBundle:
    """Deterministic instance of the given kind.

    Raises
    ------
    GenerationFailed
        When 100 attempts fail the kind's defining property.
    """
    kind = kind.replace("-", "_")
    if kind not in KINDS:
        raise ValueError(f"unknown generator kind {kind!r}; choose from {sorted(KINDS)}")
    n = int(n)
    if n < 1:
        raise ValueError("n must be at least 1")
    if kind == "bvp" and n < 2:
        raise ValueError("bvp needs n >= 2")
    params = dict(params or {})
    for attempt in range(MAX_ATTEMPTS):
        rng = make_rng(seed, attempt)
        A, b = KINDS[kind](rng, n, params)
        if _check(kind, A, b):
            meta = {"kind": kind, "seed": int(seed), "attempt": attempt}
            if params:
                meta["params"] = params
            return ProblemBundle(A, b, metadata=meta)
    raise GenerationFailed(f"{kind} with n={n}, seed={seed}: property not met in {MAX_ATTEMPTS} attempts")
