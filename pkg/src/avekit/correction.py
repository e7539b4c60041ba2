"""Solution selection and optimal correction of infeasible systems.

``min_norm_solution`` and ``sparse_solution`` pick one member of the
enumerated solution set. The ``correct_*`` functions find the smallest
change of the data that makes the equation solvable.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import minimize, nnls

from .core import (
    DEFAULT_ENUM_CAP,
    AveProblem,
    SolverConfig,
    UnsolvableInstance,
    check_enum_size,
    gray_sign_vectors,
    rank_revealing_solve,
)
from .lp import LinearProgram, LpStatus, solve_lp
from .solvers.enumerate import OrthantPiece, SolutionSet, enumerate_solutions

ZERO_TOL = 1e-9
TIE_TOL = 1e-12
EXHAUSTIVE_RHS_N = 12
EXHAUSTIVE_BOTH_N = 8
RANDOM_STARTS = 50
FAR = 1e8
# distance along a ray at which a non-attained infimum is reported
REPORT_RADIUS = 1e6


class Attainment(str, enum.Enum):
    YES = "Yes"
    SUSPECTED_NOT_ATTAINED = "SuspectedNotAttained"

    def __str__(self) -> str:
        return self.value


@dataclass
class CorrectionResult:
    """Correction ``(A + R) x - |x| = b + r`` made solvable at ``x_star``."""

    x_star: np.ndarray
    objective: float
    attained: Attainment
    R: np.ndarray
    r: np.ndarray
    corrected_b: np.ndarray
    corrected_A: np.ndarray
    info: dict = field(default_factory=dict)

    def corrected_residual(self) -> float:
        x = self.x_star
        res = self.corrected_A @ x - np.abs(x) - self.corrected_b
        return float(np.max(np.abs(res), initial=0.0))

    def to_dict(self) -> dict:
        out = {
            "x_star": self.x_star.tolist(),
            "objective": self.objective,
            "attained": str(self.attained),
            "R": self.R.tolist(),
            "r": self.r.tolist(),
            "corrected_b": self.corrected_b.tolist(),
            "corrected_A": self.corrected_A.tolist(),
        }
        for k, v in self.info.items():
            out[k] = v.tolist() if isinstance(v, np.ndarray) else v
        return out


# ------------------------------------------------------------ selection


def _piece_constraints(piece: OrthantPiece) -> tuple[np.ndarray, np.ndarray]:
    """``(G, h)`` with the piece equal to ``{x0 + N t : G t >= h}``."""
    N = piece.basis
    G = piece.s[:, None] * N
    h = -(piece.s * piece.x0)
    if piece.dim == 1:
        G = np.vstack([G, [[1.0]]])
        h = np.append(h, 0.0)
        if np.isfinite(piece.length):
            G = np.vstack([G, [[-1.0]]])
            h = np.append(h, -piece.length)
    return G, h


def _closest_on_piece(piece: OrthantPiece, norm: str) -> np.ndarray:
    if piece.is_point:
        return piece.x0.copy()
    N, x0 = piece.basis, piece.x0
    k = piece.dim
    if k == 1:
        d = N[:, 0]
        if norm == "euclid":
            hi = piece.length if np.isfinite(piece.length) else np.inf
            t = float(np.clip(-(d @ x0), 0.0, hi))
            return x0 + t * d
    G, h = _piece_constraints(piece)
    if norm == "maxnorm":
        n = x0.size
        # min eta with -eta <= x0 + N t <= eta
        Gm = np.vstack([np.hstack([G, np.zeros((G.shape[0], 1))]),
                        np.hstack([-N, np.ones((n, 1))]),
                        np.hstack([N, np.ones((n, 1))])])
        hm = np.concatenate([h, x0, -x0])
        c = np.zeros(k + 1)
        c[-1] = 1.0
        sol = solve_lp(LinearProgram(c, Gm, hm))
        return x0 + N @ sol.x[:k] if sol.status is LpStatus.OPTIMAL else x0.copy()
    res = minimize(lambda t: float(np.sum((x0 + N @ t) ** 2)), np.zeros(k),
                   jac=lambda t: 2.0 * N.T @ (x0 + N @ t), method="SLSQP",
                   constraints=[{"type": "ineq", "fun": lambda t: G @ t - h, "jac": lambda t: G}],
                   options={"ftol": 1e-15, "maxiter": 500})
    t = res.x if np.all(G @ res.x - h >= -1e-9) else np.zeros(k)
    return x0 + N @ t


def _norm(x: np.ndarray, norm: str) -> float:
    return float(np.max(np.abs(x), initial=0.0)) if norm == "maxnorm" else float(np.linalg.norm(x))


def _solution_set(p: AveProblem, enum_cap: int) -> SolutionSet:
    sol = enumerate_solutions(p, enum_cap=enum_cap)
    if sol.is_empty:
        raise UnsolvableInstance("the equation has no solution")
    return sol


def _better(key: tuple, best: Optional[tuple]) -> bool:
    """Compare (score, ..., sign tuple) keys with a relative tie band on the score."""
    if best is None:
        return True
    a, b = key[0], best[0]
    if a < b - TIE_TOL * (1.0 + abs(b)):
        return True
    if a > b + TIE_TOL * (1.0 + abs(b)):
        return False
    return key[1:] < best[1:]


def min_norm_solution(p: AveProblem, norm: str = "euclid",
                      enum_cap: int = DEFAULT_ENUM_CAP) -> np.ndarray:
    """Solution of smallest Euclidean (``euclid``) or maximum (``maxnorm``) norm.

    Every piece of the enumerated solution set is minimized exactly: points
    directly, rays and segments by clamping, larger pieces by a small
    convex program. Ties go to the lexicographically smallest sign vector.

    Raises
    ------
    UnsolvableInstance
        When the solution set is empty.
    """
    if norm not in ("euclid", "maxnorm"):
        raise ValueError(f"unknown norm {norm!r}")
    sol = _solution_set(p, enum_cap)
    best, best_x = None, None
    for piece in sol.pieces:
        x = _closest_on_piece(piece, norm)
        key = (_norm(x, norm), tuple(piece.s.tolist()))
        if _better(key, best):
            best, best_x = key, x
    return best_x + 0.0


def _zero_candidates(piece: OrthantPiece) -> list:
    """Points of the piece with up to two extra coordinates forced to zero."""
    if piece.is_point:
        return [piece.x0.copy()]
    N, x0 = piece.basis, piece.x0
    n, k = N.shape
    G, h = _piece_constraints(piece)
    out = [x0.copy()]
    if piece.dim == 1 and np.isfinite(piece.length):
        out.append(x0 + piece.length * N[:, 0])
    depth = min(2, k)
    for size in range(1, depth + 1):
        for Z in itertools.combinations(range(n), size):
            Z = list(Z)
            t0, T, _ = rank_revealing_solve(N[Z], -x0[Z])
            if t0 is None:
                continue
            if T.shape[1] == 0:
                if np.all(G @ t0 - h >= -1e-9):
                    out.append(x0 + N @ t0)
                continue
            sol = solve_lp(LinearProgram(np.zeros(T.shape[1]), G @ T, h - G @ t0))
            if sol.status is LpStatus.OPTIMAL:
                out.append(x0 + N @ (t0 + T @ sol.x))
    return out


def sparse_solution(p: AveProblem, enum_cap: int = DEFAULT_ENUM_CAP) -> np.ndarray:
    """Solution with the fewest entries above ``1e-9`` in magnitude.

    Affine pieces contribute their endpoints and every point obtained by
    zeroing one or two coordinates. Ties go to the smaller Euclidean norm.
    """
    sol = _solution_set(p, enum_cap)
    best, best_x = None, None
    for piece in sol.pieces:
        for x in _zero_candidates(piece):
            x = np.where(np.abs(x) <= ZERO_TOL, 0.0, x)
            key = (float(np.count_nonzero(x)), float(np.linalg.norm(x)), tuple(piece.s.tolist()))
            if best is None or key < best:
                best, best_x = key, x
    return best_x + 0.0


# ------------------------------------------------------------ corrections


def _rho(p: AveProblem, x: np.ndarray) -> np.ndarray:
    return p.A @ x - np.abs(x) - p.b


def _rhs_in_orthant(p: AveProblem, s: np.ndarray) -> tuple[float, np.ndarray]:
    """Minimize ``||(A - diag s) x - b||^2`` over ``diag(s) x >= 0`` by NNLS."""
    M = (p.A - np.diag(s)) * s[None, :]
    u, rnorm = nnls(M, p.b, maxiter=50 * max(p.n, 1))
    return rnorm ** 2, s * u


def _rhs_local(p: AveProblem, x: np.ndarray, max_rounds: int = 200) -> tuple[float, np.ndarray]:
    """Active-set descent: solve in an orthant, flip a zero coordinate with a descent slope."""
    s = np.where(x > 0, 1.0, -1.0)
    val, x = _rhs_in_orthant(p, s)
    for _ in range(max_rounds):
        rho = _rho(p, x)
        flipped = False
        for i in np.flatnonzero(np.abs(x) <= ZERO_TOL):
            t = -s[i]
            slope = 2.0 * rho @ (p.A[:, i] * t - np.eye(p.n)[:, i])
            if slope < -1e-12:
                s2 = s.copy()
                s2[i] = t
                v2, x2 = _rhs_in_orthant(p, s2)
                if v2 < val - 1e-14 * (1 + val):
                    s, val, x = s2, v2, x2
                    flipped = True
                    break
        if not flipped:
            break
    return val, x


def _starts(p: AveProblem, cfg: SolverConfig) -> list:
    from .solvers import solve_newton

    rng = np.random.default_rng(int(cfg.params.get("seed", 0)))
    scale = 1.0 + np.abs(p.b).max(initial=0.0)
    starts = [np.zeros(p.n)]
    out = solve_newton(p, SolverConfig(tol=cfg.tol, max_iters=min(cfg.max_iters, 100)))
    if np.all(np.isfinite(out.x)):
        starts.append(out.x)
    starts.extend(scale * rng.standard_normal((RANDOM_STARTS, p.n)))
    return starts


def correct_rhs(p: AveProblem, cfg: Optional[SolverConfig] = None) -> CorrectionResult:
    """Smallest change of b: minimize ``||A x - |x| - b||^2``.

    For ``n <= 12`` every orthant is solved exactly by nonnegative least
    squares; larger problems use an active-set descent from the Newton
    iterate and 50 random starts. The corrected right-hand side is
    ``A x* - |x*|`` and ``R = 0``.
    """
    cfg = cfg if cfg is not None else SolverConfig()
    n = p.n
    best_val, best_x = np.inf, np.zeros(n)
    if n <= EXHAUSTIVE_RHS_N:
        for s in gray_sign_vectors(n):
            val, x = _rhs_in_orthant(p, s)
            if not np.isfinite(best_val) or val < best_val - TIE_TOL * (1 + best_val):
                best_val, best_x = val, x
        mode = "exhaustive"
    else:
        for x0 in _starts(p, cfg):
            val, x = _rhs_local(p, x0)
            if not np.isfinite(best_val) or val < best_val - TIE_TOL * (1 + best_val):
                best_val, best_x = val, x
        mode = "multistart"
    x = best_x + 0.0
    rho = _rho(p, x)
    return CorrectionResult(x, float(rho @ rho), Attainment.YES, np.zeros((n, n)), rho.copy(),
                            p.b + rho, p.A.copy(), {"mode": mode})


def _both_from_x(p: AveProblem, x: np.ndarray, attained: Attainment, **info) -> CorrectionResult:
    rho = _rho(p, x)
    denom = 1.0 + float(x @ x)
    R = -np.outer(rho, x) / denom
    r = rho / denom
    return CorrectionResult(x, float(rho @ rho) / denom, attained, R, r, p.b + r, p.A + R, info)


def _face_candidates(p: AveProblem):
    """KKT points of the homogenized ratio on every face of every orthant.

    With ``w = (y, t)`` and ``x = y / t`` the objective is the Rayleigh
    quotient of ``K = C^T C``, ``C = [A - diag s, -b]``, over a polyhedral
    cone. Its minimum over the closed cone is an eigenpair of a principal
    submatrix with a nonnegative eigenvector. Faces with ``t = 0`` give the
    limits along rays.
    """
    n = p.n
    for mask in range(1 << n):
        J = [i for i in range(n) if (mask >> i) & 1]
        for signs in itertools.product((1.0, -1.0), repeat=len(J)):
            s = np.array(signs)
            M = p.A[:, J] - np.eye(n)[:, J] * s[None, :]
            C = np.hstack([M * s[None, :], -p.b[:, None]])
            for with_t in (True, False):
                if not with_t and not J:
                    continue
                Cf = C if with_t else C[:, :-1]
                vals, vecs = np.linalg.eigh(Cf.T @ Cf)
                for lam, v in zip(vals, vecs.T):
                    v = v if v.sum() >= 0 else -v
                    if np.any(v < -1e-10) or np.any(np.abs(v) <= 1e-12):
                        continue
                    x = np.zeros(n)
                    if with_t:
                        x[J] = s * v[:-1] / v[-1]
                    else:
                        x[J] = s * v
                    yield max(float(lam), 0.0), with_t, x


def correct_both(p: AveProblem, cfg: Optional[SolverConfig] = None) -> CorrectionResult:
    """Smallest Frobenius change of ``(A, b)``.

    Minimizes ``||A x - |x| - b||^2 / (1 + ||x||^2)`` and sets
    ``R = -rho x*^T / (1 + ||x*||^2)`` and ``r = rho / (1 + ||x*||^2)`` with
    ``rho = A x* - |x*| - b``, so ``(A + R) x* - |x*| = b + r`` and
    ``||(R | r)||_F^2`` equals the objective.

    For ``n <= 8`` the minimum is found exactly over all faces of all
    orthants. When the infimum is only approached along a ray the result is
    flagged SuspectedNotAttained, ``x_star`` lies at distance 1e6 along the
    ray and ``info["infimum"]`` holds the limit.
    """
    cfg = cfg if cfg is not None else SolverConfig()
    n = p.n
    if n <= EXHAUSTIVE_BOTH_N:
        best_att, best_lim = None, None
        for lam, attained, x in _face_candidates(p):
            if attained:
                val = float(_rho(p, x) @ _rho(p, x)) / (1.0 + x @ x)
                if best_att is None or val < best_att[0] - TIE_TOL * (1 + best_att[0]):
                    best_att = (val, x)
            elif best_lim is None or lam < best_lim[0]:
                best_lim = (lam, x)
        if best_att is not None and (best_lim is None
                                     or best_att[0] <= best_lim[0] + 1e-10 * (1 + best_lim[0])):
            x = _polish(p, best_att[1])
            return _both_from_x(p, x + 0.0, Attainment.YES, mode="exhaustive")
        lim, d = best_lim
        x = REPORT_RADIUS * d / np.linalg.norm(d)
        return _both_from_x(p, x, Attainment.SUSPECTED_NOT_ATTAINED, mode="exhaustive",
                            infimum=lim, direction=d / np.linalg.norm(d))
    return _both_multistart(p, cfg)


def _polish(p: AveProblem, x: np.ndarray) -> np.ndarray:
    """Snap an almost-solution onto the exact orthant solution."""
    rho = _rho(p, x)
    if np.max(np.abs(rho)) > 1e-8 * (1 + np.abs(p.b).max(initial=0.0)):
        return x
    s = np.where(x > 0, 1.0, -1.0)
    try:
        y = np.linalg.solve(p.A - np.diag(s), p.b)
    except np.linalg.LinAlgError:
        return x
    if np.all(s * y >= -ZERO_TOL) and np.max(np.abs(_rho(p, y))) <= np.max(np.abs(rho)):
        return y
    return x


def _ratio(p: AveProblem, x: np.ndarray) -> float:
    rho = _rho(p, x)
    return float(rho @ rho) / (1.0 + float(x @ x))


def _both_multistart(p: AveProblem, cfg: SolverConfig) -> CorrectionResult:
    n = p.n
    best = (np.inf, np.zeros(n))
    runaway = None
    for x0 in _starts(p, cfg) + [correct_rhs(p, cfg).x_star]:
        s = np.where(x0 > 0, 1.0, -1.0)
        M = (p.A - np.diag(s)) * s[None, :]

        def f(u, M=M):
            res = M @ u - p.b
            d = 1.0 + u @ u
            val = res @ res / d
            return val, (2.0 * M.T @ res - 2.0 * val * u) / d

        out = minimize(f, np.abs(x0), jac=True, method="L-BFGS-B",
                       bounds=[(0.0, 10 * FAR)] * n, options={"maxiter": 2000, "ftol": 1e-15})
        x = s * out.x
        val = _ratio(p, x)
        if np.linalg.norm(x) > FAR:
            if runaway is None or val < runaway[0]:
                runaway = (val, x)
            continue
        if val < best[0]:
            best = (val, x)
    if runaway is not None and runaway[0] < best[0] - 1e-10 * (1 + best[0]):
        x = REPORT_RADIUS * runaway[1] / np.linalg.norm(runaway[1])
        return _both_from_x(p, x, Attainment.SUSPECTED_NOT_ATTAINED, mode="multistart",
                            infimum=runaway[0])
    return _both_from_x(p, _polish(p, best[1]) + 0.0, Attainment.YES, mode="multistart")


def correct_chebyshev(p: AveProblem, enum_cap: int = DEFAULT_ENUM_CAP) -> CorrectionResult:
    """Minimize ``||A x - |x| - b||_inf / (1 + ||x||_1)`` exactly.

    In orthant s the substitution ``t = 1 / (1 + s^T x)``, ``y = t x`` turns
    the ratio into one linear program in ``(y, t, eta)``. A second program
    maximizes t among the optimal points, so finite minimizers are
    preferred; ``t = 0`` at the optimum means the value is a limit along a
    ray. Row i of the correction is ``R_i = -rho_i sgn(x)^T / (1 + ||x||_1)``,
    ``r_i = rho_i / (1 + ||x||_1)``.
    """
    n = p.n
    check_enum_size(n, enum_cap)
    best = None
    for s in gray_sign_vectors(n):
        M = p.A - np.diag(s)
        # variables (y, t, eta); rows G v >= h
        G = np.vstack([
            np.hstack([-M, p.b[:, None], np.ones((n, 1))]),
            np.hstack([M, -p.b[:, None], np.ones((n, 1))]),
            np.hstack([np.diag(s), np.zeros((n, 2))]),
            np.hstack([np.zeros((1, n)), [[1.0, 0.0]]]),
            np.hstack([s[None, :], [[1.0, 0.0]]]),
        ])
        h = np.concatenate([np.zeros(2 * n), np.zeros(n), [0.0], [1.0]])
        eq = np.zeros(G.shape[0], dtype=bool)
        eq[-1] = True
        c = np.zeros(n + 2)
        c[-1] = 1.0
        sol = solve_lp(LinearProgram(c, G, h, eq))
        if sol.status is not LpStatus.OPTIMAL:
            continue
        eta = float(sol.x[-1])
        cap = np.zeros(n + 2)
        cap[-1] = -1.0
        G2 = np.vstack([G, cap])
        h2 = np.append(h, -(eta + 1e-12 * (1 + eta)))
        c2 = np.zeros(n + 2)
        c2[n] = -1.0
        sol2 = solve_lp(LinearProgram(c2, G2, h2, np.append(eq, False)))
        v = sol2.x if sol2.status is LpStatus.OPTIMAL else sol.x
        y, t = v[:n], float(v[n])
        key = (eta, -t, tuple(s.tolist()))
        if best is None or _better(key, best[0]):
            best = (key, y, t)
    (eta, _, _), y, t = best
    if t > 1.0 / FAR:
        x = y / t + 0.0
        attained = Attainment.YES
        extra = {}
    else:
        d = y / max(np.abs(y).sum(), np.finfo(float).tiny)
        x = REPORT_RADIUS * d
        attained = Attainment.SUSPECTED_NOT_ATTAINED
        extra = {"infimum": eta, "direction": d}
    rho = _rho(p, x)
    denom = 1.0 + float(np.abs(x).sum())
    R = -np.outer(rho, np.sign(x)) / denom
    r = rho / denom
    obj = float(np.max(np.abs(rho), initial=0.0)) / denom
    return CorrectionResult(x, obj, attained, R, r, p.b + r, p.A + R, {"mode": "exhaustive", **extra})


__all__ = [
    "Attainment", "CorrectionResult", "correct_both", "correct_chebyshev", "correct_rhs",
    "min_norm_solution", "sparse_solution",
]
