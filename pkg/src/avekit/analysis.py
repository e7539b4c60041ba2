"""Solvability, uniqueness and structure tests with checkable certificates.

Each test returns a :class:`Verdict`. ``Holds`` and ``Fails`` carry the
evidence that decided them; ``Unknown`` carries a reason.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np

from .core import (
    DEFAULT_ENUM_CAP,
    AveProblem,
    LUFactor,
    CapExceeded,
    NonConvergence,
    NotApplicableError,
    SingularMatrixError,
    batched_lu_solve,
    check_enum_size,
    extreme_singular_values,
    inverse,
    iter_gray_chunks,
    lu_solve,
    norm,
    orthant_matrices,
    rank_revealing_solve,
    residual,
    spectral_radius_bounds,
)
from .lp import LinearProgram, LpStatus, solve_lp

STRICT_SLACK = 1e-12
NONNEG_FLOOR = -1e-12


class State(str, enum.Enum):
    HOLDS = "Holds"
    FAILS = "Fails"
    UNKNOWN = "Unknown"

    def __str__(self) -> str:
        return self.value


@dataclass
class Verdict:
    name: str
    state: State
    certificate: dict = field(default_factory=dict)
    reason: str = ""

    @property
    def holds(self) -> bool:
        return self.state is State.HOLDS

    @property
    def fails(self) -> bool:
        return self.state is State.FAILS


@dataclass
class SolutionBounds:
    """``|x| <= u`` for every solution, plus the polyhedral outer set."""

    u: np.ndarray
    empty: bool
    A: np.ndarray
    b: np.ndarray

    def polyhedron(self) -> tuple[np.ndarray, np.ndarray]:
        """``(G, h)`` with ``G x >= h`` describing the outer approximation."""
        n = self.u.size
        I = np.eye(n)
        u = np.maximum(self.u, 0.0)
        G = np.vstack([self.A + I, self.A - I, I, -I])
        h = np.concatenate([self.b, self.b, -u, -u])
        return G, h

    def contains(self, x: np.ndarray, tol: float = 1e-9) -> bool:
        return bool(np.all(np.abs(x) <= self.u + tol))


@dataclass
class AnalysisReport:
    verdicts: dict = field(default_factory=dict)
    unique_for_all_b: str = "Unknown"
    solvable_hint: str = "unknown"
    bounds: Optional[SolutionBounds] = None

    def add(self, v: Verdict) -> Verdict:
        self.verdicts[v.name] = v
        return v

    def __getitem__(self, name: str) -> Verdict:
        return self.verdicts[name]

    def any_holds(self) -> bool:
        return any(v.holds for v in self.verdicts.values())


@dataclass
class ConditionNumbers:
    c: float
    c_rel: float
    p: Any
    s_inverse: Optional[np.ndarray]
    s_matrix: Optional[np.ndarray]

    @property
    def finite(self) -> bool:
        return bool(np.isfinite(self.c))


# ------------------------------------------------------------ helpers


def _rho_below_one(M: np.ndarray) -> tuple[State, dict]:
    """Decide rho(M) < 1 for M >= 0 from a Collatz-Wielandt bracket."""
    try:
        lo, hi = spectral_radius_bounds(M)
    except NonConvergence as exc:
        lo, hi = exc.lower, exc.upper
    cert = {"rho_lower": lo, "rho_upper": hi}
    if hi < 1.0 - STRICT_SLACK:
        return State.HOLDS, cert
    if lo >= 1.0 - STRICT_SLACK:
        return State.FAILS, cert
    return State.UNKNOWN, cert


def farkas_certificate(G: np.ndarray, h: np.ndarray) -> Optional[np.ndarray]:
    """``lam >= 0`` with ``G^T lam = 0`` and ``h^T lam >= 1`` if one exists.

    Such a vector proves that ``G y >= h`` has no solution.
    """
    m, n = G.shape
    rows = np.vstack([np.eye(m), G.T, h[None, :]])
    rhs = np.concatenate([np.zeros(m), np.zeros(n), [1.0]])
    eq = np.concatenate([np.zeros(m, bool), np.ones(n, bool), [False]])
    sol = solve_lp(LinearProgram(np.zeros(m), rows, rhs, eq))
    return sol.x if sol.status is LpStatus.OPTIMAL else None


def singular_member(A: np.ndarray, B: Optional[np.ndarray], s: np.ndarray):
    """First singular matrix on the segment ``A + t B diag(s)``, t in [0, 1].

    The determinant ``det(A) det(I + t A^{-1} B diag(s))`` vanishes where
    ``-1/t`` is a real eigenvalue of ``A^{-1} B diag(s)``; the smallest such t
    is returned with the member and a unit null vector.
    """
    n = A.shape[0]
    Bs = (np.eye(n) if B is None else B) * s[None, :]
    try:
        Ainv = inverse(A)
    except SingularMatrixError:
        t = 0.0
    else:
        mu = np.linalg.eigvals(Ainv @ Bs)
        real = np.abs(mu.imag) <= 1e-9 * np.maximum(1.0, np.abs(mu))
        cand = mu.real[real & (mu.real <= -1.0 + 1e-9)]
        if cand.size == 0:
            return None
        t = float(min(1.0, -1.0 / cand.min()))
    member = A + t * Bs
    member = np.where(np.abs(member) <= 1e-14 * max(1.0, np.abs(member).max()), 0.0, member)
    _, _, vt = np.linalg.svd(member)
    v = vt[-1]
    v = v * (1.0 if v[np.argmax(np.abs(v))] > 0 else -1.0)
    return {"s": s.copy(), "t": t, "member": member, "null_vector": v}


def regularity_enumeration(A: np.ndarray, B: Optional[np.ndarray] = None,
                           enum_cap: int = DEFAULT_ENUM_CAP) -> Verdict:
    """Exact test: ``det(A + B diag(s))`` has one strict sign over all s.

    Fails carries the first offending s in Gray-code order and a singular
    member of the family ``{A + B D : |D| <= I}``.
    """
    n = A.shape[0]
    check_enum_size(n, enum_cap)
    try:
        ref_sign = 1.0 if LUFactor(A).det() > 0 else -1.0
    except SingularMatrixError:
        _, _, vt = np.linalg.svd(A)
        return Verdict("exact_regularity", State.FAILS,
                       {"s": np.ones(n), "t": 0.0, "member": A.copy(), "null_vector": vt[-1],
                        "vertex_det": 0.0, "vertex_singular": True})
    Bneg = None if B is None else -B
    first_bad = None
    count = 0
    for S in iter_gray_chunks(n):
        # orthant_matrices forms A - B diag(s); pass -B to get A + B diag(s)
        if B is None:
            M = orthant_matrices(A, None, -S)
        else:
            M = orthant_matrices(A, Bneg, S)
        _, singular, dets = batched_lu_solve(M, np.zeros(n))
        bad = singular | (np.sign(dets) != ref_sign)
        if np.any(bad):
            k = int(np.flatnonzero(bad)[0])
            first_bad = (S[k], bool(singular[k]), float(dets[k]))
            break
        count += S.shape[0]
    if first_bad is None:
        return Verdict("exact_regularity", State.HOLDS,
                       {"det_sign": ref_sign, "checked": count})
    s, is_singular, d = first_bad
    # det changes sign between A and this vertex, so the segment holds a singular matrix
    cert = singular_member(A, B, s)
    if cert is None:
        Bs = (np.eye(n) if B is None else B) * s[None, :]
        member = A + Bs
        _, _, vt = np.linalg.svd(member)
        cert = {"s": s, "t": 1.0, "member": member, "null_vector": vt[-1]}
    cert["vertex_det"] = d
    cert["vertex_singular"] = is_singular
    return Verdict("exact_regularity", State.FAILS, cert)


# ------------------------------------------------------------ uniqueness


def check_unique_all_rhs(A: Any, enum_cap: int = DEFAULT_ENUM_CAP) -> AnalysisReport:
    """Is ``A x - |x| = b`` uniquely solvable for every b?

    Runs sigma_min(A) > 1, rho(|A^{-1}|) < 1, strict diagonal dominance
    ``|a_ii| > 1 + sum_j |a_ij|``, the H-matrix test on A - I, and, when
    ``n <= enum_cap``, the exact determinant-sign test.
    """
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    rep = AnalysisReport()

    smin, smax = extreme_singular_values(A)
    rep.add(Verdict("sigma_min_gt_1",
                    State.HOLDS if smin > 1.0 + STRICT_SLACK else State.FAILS,
                    {"sigma_min": smin, "sigma_max": smax}))

    try:
        Ainv = inverse(A)
    except SingularMatrixError as exc:
        rep.add(Verdict("rho_abs_inv_lt_1", State.FAILS, {"singular_A": True},
                        reason=str(exc)))
    else:
        state, cert = _rho_below_one(np.abs(Ainv))
        rep.add(Verdict("rho_abs_inv_lt_1", state, cert))

    off = np.abs(A).sum(axis=1) - np.abs(np.diag(A))
    margin = np.abs(np.diag(A)) - 1.0 - off
    rep.add(Verdict("diag_dominant",
                    State.HOLDS if np.all(margin > STRICT_SLACK) else State.FAILS,
                    {"margin": margin, "worst_row": int(np.argmin(margin))}))

    rep.add(_h_matrix_verdict(A - np.eye(n)))

    if n <= enum_cap:
        rep.add(regularity_enumeration(A, None, enum_cap))
    else:
        rep.add(Verdict("exact_regularity", State.UNKNOWN,
                        reason=f"n={n} exceeds enum_cap={enum_cap}"))
    _settle_uniqueness(rep)
    return rep


def _h_matrix_verdict(M: np.ndarray) -> Verdict:
    d = np.diag(M)
    if np.any(d <= 0):
        return Verdict("h_matrix", State.FAILS, {"nonpositive_diagonal": np.flatnonzero(d <= 0)})
    comp = -np.abs(M)
    np.fill_diagonal(comp, np.abs(d))
    try:
        inv = inverse(comp)
    except SingularMatrixError:
        return Verdict("h_matrix", State.FAILS, {"comparison_singular": True})
    ok = bool(np.all(inv >= NONNEG_FLOOR))
    return Verdict("h_matrix", State.HOLDS if ok else State.FAILS,
                   {"comparison_inverse_min": float(inv.min())})


def _settle_uniqueness(rep: AnalysisReport) -> None:
    exact = rep.verdicts.get("exact_regularity")
    if any(v.holds for v in rep.verdicts.values()):
        rep.unique_for_all_b = "Yes"
    elif exact is not None and exact.fails:
        rep.unique_for_all_b = "No"
    else:
        rep.unique_for_all_b = "Unknown"


def check_unique_all_rhs_gave(A: Any, B: Any, enum_cap: int = DEFAULT_ENUM_CAP) -> AnalysisReport:
    """Is ``A x - B|x| = b`` uniquely solvable for every b?"""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    if A.shape != B.shape or A.shape[0] != A.shape[1]:
        raise ValueError("A and B must be square of the same size")
    n = A.shape[0]
    rep = AnalysisReport()
    try:
        Ainv = inverse(A)
    except SingularMatrixError:
        Ainv = None
    if Ainv is not None:
        AB = Ainv @ B
        state, cert = _rho_below_one(np.abs(AB))
        rep.add(Verdict("rho_abs_AinvB_lt_1", state, cert))
        nrm = norm(AB, 2)
        rep.add(Verdict("norm_AinvB_lt_1",
                        State.HOLDS if nrm < 1.0 - STRICT_SLACK else State.FAILS,
                        {"norm2": nrm}))
    else:
        rep.add(Verdict("rho_abs_AinvB_lt_1", State.UNKNOWN, reason="A is singular"))
        rep.add(Verdict("norm_AinvB_lt_1", State.UNKNOWN, reason="A is singular"))
    smin_a, _ = extreme_singular_values(A)
    _, smax_b = extreme_singular_values(B)
    rep.add(Verdict("sigma_max_B_lt_sigma_min_A",
                    State.HOLDS if smax_b < smin_a - STRICT_SLACK else State.FAILS,
                    {"sigma_max_B": smax_b, "sigma_min_A": smin_a}))
    if n <= enum_cap:
        rep.add(regularity_enumeration(A, B, enum_cap))
    else:
        rep.add(Verdict("exact_regularity", State.UNKNOWN,
                        reason=f"n={n} exceeds enum_cap={enum_cap}"))
    _settle_uniqueness(rep)
    return rep


# ------------------------------------------------------------ bounds, existence


def solution_bounds(p: AveProblem) -> SolutionBounds:
    """``|x| <= u = -(I - |A|)^{-1} b`` for every solution.

    Raises
    ------
    NotApplicableError
        When rho(|A|) < 1 cannot be confirmed.
    """
    absA = np.abs(p.A)
    state, cert = _rho_below_one(absA)
    if state is not State.HOLDS:
        raise NotApplicableError(
            f"bounds need rho(|A|) < 1 (bracket [{cert['rho_lower']:.6g}, {cert['rho_upper']:.6g}])")
    u = -lu_solve(np.eye(p.n) - absA, p.b)
    return SolutionBounds(u=u, empty=bool(np.any(u < NONNEG_FLOOR)), A=p.A, b=p.b)


def check_unsolvable(p: AveProblem) -> AnalysisReport:
    """Four sufficient conditions for the AVE to have no solution."""
    A, b, n = p.A, p.b, p.n
    rep = AnalysisReport()
    I = np.eye(n)

    # -y <= A^T y <= y and b^T y >= 1
    G = np.vstack([I - A.T, I + A.T, b[None, :]])
    h = np.concatenate([np.zeros(2 * n), [1.0]])
    sol = solve_lp(LinearProgram(np.zeros(n), G, h))
    if sol.status is LpStatus.OPTIMAL:
        rep.add(Verdict("lp_dual", State.HOLDS, {"y": sol.x, "bTy": float(b @ sol.x)}))
    elif sol.status is LpStatus.INFEASIBLE:
        rep.add(Verdict("lp_dual", State.FAILS, {"farkas": farkas_certificate(G, h)}))
    else:
        rep.add(Verdict("lp_dual", State.UNKNOWN, reason=f"LP status {sol.status}"))

    nrm = norm(A, 2)
    nonneg = bool(np.all(b >= 0) and np.any(b != 0))
    rep.add(Verdict("norm_lt_1_b_nonneg",
                    State.HOLDS if (nrm < 1.0 - STRICT_SLACK and nonneg) else State.FAILS,
                    {"norm2": nrm, "b_nonneg_nonzero": nonneg}))

    absA = np.abs(A)
    state, cert = _rho_below_one(absA)
    if state is State.HOLDS:
        K = inverse(I - absA)
        u = -K @ b
        neg = np.flatnonzero(u < NONNEG_FLOOR)
        rep.add(Verdict("bound_not_nonneg", State.HOLDS if neg.size else State.FAILS,
                        {**cert, "u": u, "index": int(neg[0]) if neg.size else None}))
        diag = np.diag(K)
        assert np.all(diag >= 1.0 - 1e-12), "(I-|A|)^{-1} >= I when rho(|A|) < 1"
        lhs = 2.0 * b
        rhs = (K @ np.abs(b)) / diag
        hit = np.flatnonzero(lhs > rhs + STRICT_SLACK * (1.0 + np.abs(rhs)))
        rep.add(Verdict("componentwise_test", State.HOLDS if hit.size else State.FAILS,
                        {**cert, "lhs": lhs, "rhs": rhs,
                         "index": int(hit[0]) if hit.size else None}))
    else:
        for name in ("bound_not_nonneg", "componentwise_test"):
            rep.add(Verdict(name, State.FAILS if state is State.FAILS else State.UNKNOWN,
                            cert, reason="needs rho(|A|) < 1"))
    rep.solvable_hint = "unsolvable" if rep.any_holds() else "unknown"
    return rep


def check_exponential_solutions(p: AveProblem) -> Verdict:
    """Sufficient condition for exactly 2^n solutions (b < 0, rho(|A|) < 1)."""
    A, b, n = p.A, p.b, p.n
    absA = np.abs(A)
    state, cert = _rho_below_one(absA)
    if state is not State.HOLDS:
        return Verdict("exponential_solutions", State.FAILS if state is State.FAILS else State.UNKNOWN,
                       cert, reason="needs rho(|A|) < 1")
    if not np.all(b < 0):
        return Verdict("exponential_solutions", State.FAILS, {**cert, "b_negative": False})
    K = inverse(np.eye(n) - absA)
    diag = np.diag(K)
    assert np.all(diag > 0), "(I-|A|)^{-1} has a positive diagonal when rho(|A|) < 1"
    ab = np.abs(b)
    cond_i = bool(np.all(2.0 * ab > (K @ ab) / diag + STRICT_SLACK))
    cond_ii = bool(np.all(ab > 2.0 * absA @ ab + STRICT_SLACK))
    fired = [name for name, ok in (("i", cond_i), ("ii", cond_ii)) if ok]
    return Verdict("exponential_solutions", State.HOLDS if fired else State.FAILS,
                   {**cert, "fired": fired, "lhs_i": 2.0 * ab, "rhs_i": (K @ ab) / diag,
                    "rhs_ii": 2.0 * absA @ ab})


def check_nonneg_solvability(A: Any) -> AnalysisReport:
    """Inverse-nonnegativity tests for nonnegative solutions."""
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    I = np.eye(n)
    rep = AnalysisReport()
    inv_minus = inv_plus = None
    try:
        inv_minus = inverse(A - I)
    except SingularMatrixError:
        pass
    try:
        inv_plus = inverse(A + I)
    except SingularMatrixError:
        pass
    if inv_minus is None:
        rep.add(Verdict("nonneg_for_all_b", State.FAILS, {"singular": "A - I"}))
    else:
        ok = bool(np.all(inv_minus >= NONNEG_FLOOR))
        rep.add(Verdict("nonneg_for_all_b", State.HOLDS if ok else State.FAILS,
                        {"inverse_A_minus_I": inv_minus}))
    if inv_minus is None or inv_plus is None:
        rep.add(Verdict("interval_inverse_nonneg", State.FAILS,
                        {"singular": "A - I" if inv_minus is None else "A + I"}))
    else:
        ok = bool(np.all(inv_minus >= NONNEG_FLOOR) and np.all(inv_plus >= NONNEG_FLOOR))
        rep.add(Verdict("interval_inverse_nonneg", State.HOLDS if ok else State.FAILS,
                        {"inverse_A_minus_I": inv_minus, "inverse_A_plus_I": inv_plus}))
    nrm = norm(A, 2)
    ok = bool(np.all(A >= 0) and nrm < 1.0 - STRICT_SLACK)
    rep.add(Verdict("nonneg_when_b_nonpos", State.HOLDS if ok else State.FAILS,
                    {"A_nonneg": bool(np.all(A >= 0)), "norm2": nrm},
                    reason="applies to right-hand sides b <= 0"))
    return rep


# ------------------------------------------------------------ structure


def check_structure(A: Any, b: Any = None, enum_cap: int = DEFAULT_ENUM_CAP,
                    solution_set=None) -> AnalysisReport:
    """Finiteness, boundedness and convexity of the solution set.

    Finiteness and boundedness are properties of A (for every b). Convexity
    is decided on the enumerated solution set of the given b.
    """
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    rep = AnalysisReport()
    if n > enum_cap:
        for name in ("finite_for_all_b", "bounded_for_all_b", "convex"):
            rep.add(Verdict(name, State.UNKNOWN, reason=f"n={n} exceeds enum_cap={enum_cap}"))
        return rep
    check_enum_size(n, enum_cap)
    singular_s = []
    for S in iter_gray_chunks(n):
        M = orthant_matrices(A, None, S)
        _, singular, _ = batched_lu_solve(M, np.zeros(n))
        singular_s.extend(S[singular])
    if singular_s:
        rep.add(Verdict("finite_for_all_b", State.FAILS,
                        {"s": singular_s[0], "member": A - np.diag(singular_s[0])}))
    else:
        rep.add(Verdict("finite_for_all_b", State.HOLDS, {"orthants": 1 << n}))

    witness = None
    # a nonzero x with A x = |x| is a recession direction of every solution set
    for s in singular_s:
        M = A - np.diag(s)
        _, N, _ = rank_revealing_solve(M, np.zeros(n))
        k = N.shape[1]
        G = np.vstack([s[:, None] * N, (s @ N)[None, :]])
        h = np.concatenate([np.zeros(n), [1.0]])
        eq = np.concatenate([np.zeros(n, bool), [True]])
        sol = solve_lp(LinearProgram(np.zeros(k), G, h, eq))
        if sol.status is LpStatus.OPTIMAL:
            witness = (s, N @ sol.x)
            break
    if witness is None:
        rep.add(Verdict("bounded_for_all_b", State.HOLDS,
                        {"singular_orthants_checked": len(singular_s)}))
    else:
        s, x = witness
        rep.add(Verdict("bounded_for_all_b", State.FAILS,
                        {"s": s, "x": x, "residual": A @ x - np.abs(x)}))

    if solution_set is None and b is not None:
        from .solvers.enumerate import enumerate_solutions
        solution_set = enumerate_solutions(AveProblem(A, b), enum_cap=enum_cap)
    if solution_set is None:
        rep.add(Verdict("convex", State.UNKNOWN, reason="needs a right-hand side"))
    else:
        rep.add(_convexity(solution_set))
    return rep


def _convexity(sol) -> Verdict:
    """One orthant holds all pieces iff no coordinate needs both signs."""
    n = sol.n
    need_pos = np.zeros(n, dtype=bool)
    need_neg = np.zeros(n, dtype=bool)
    for piece in sol.pieces:
        scale = 1e-9 * (1.0 + np.max(np.abs(piece.x0)))
        moving = np.abs(piece.x0) > scale
        if piece.dim:
            moving |= np.abs(piece.basis).max(axis=1) > 1e-12
        need_pos |= moving & (piece.s > 0)
        need_neg |= moving & (piece.s < 0)
    clash = np.flatnonzero(need_pos & need_neg)
    if clash.size:
        return Verdict("convex", State.FAILS, {"coordinate": int(clash[0]),
                                               "pieces": len(sol.pieces)})
    common = np.where(need_neg, -1.0, 1.0)
    return Verdict("convex", State.HOLDS, {"common_sign": common, "pieces": len(sol.pieces)})


# ------------------------------------------------------------ conditioning


def condition_numbers(A: Any, p_norm: Any = 2, enum_cap: int = DEFAULT_ENUM_CAP) -> ConditionNumbers:
    """``c(A) = max_s ||(A - diag s)^{-1}||_p`` and the relative variant.

    The maximum over ``|D| <= I`` is attained at a vertex only when the
    interval ``[A - I, A + I]`` is regular; otherwise c is infinite.
    """
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    check_enum_size(n, enum_cap)
    c_best, s_c = -1.0, None
    m_best, s_m = -1.0, None
    ref_sign = 0.0
    for S in iter_gray_chunks(n):
        M = orthant_matrices(A, None, S)
        _, singular, dets = batched_lu_solve(M, np.zeros(n))
        if ref_sign == 0.0 and not singular[0]:
            ref_sign = float(np.sign(dets[0]))
        # a vertex determinant of the other sign puts a singular matrix inside [A - I, A + I]
        bad = singular | (np.sign(dets) != ref_sign)
        if np.any(bad):
            k = int(np.flatnonzero(bad)[0])
            return ConditionNumbers(np.inf, np.inf, p_norm, S[k], None)
        inv = np.linalg.inv(M)
        ci = _batched_norm(inv, p_norm)
        mi = _batched_norm(M, p_norm)
        k = int(np.argmax(ci))
        if ci[k] > c_best:
            c_best, s_c = float(ci[k]), S[k]
        k = int(np.argmax(mi))
        if mi[k] > m_best:
            m_best, s_m = float(mi[k]), S[k]
    return ConditionNumbers(c_best, c_best * m_best, p_norm, s_c, s_m)


def _batched_norm(M: np.ndarray, p: Any) -> np.ndarray:
    if p == 1:
        return np.abs(M).sum(axis=1).max(axis=1)
    if p in (np.inf, "inf"):
        return np.abs(M).sum(axis=2).max(axis=1)
    if p == 2:
        return np.linalg.norm(M, ord=2, axis=(1, 2))
    raise ValueError(f"unsupported norm p={p}")


def _vec_norm(x: np.ndarray, p: Any) -> float:
    return float(np.linalg.norm(x, np.inf if p in (np.inf, "inf") else p))


def certify_error(A: Any, b: Any, x: Any, cond: ConditionNumbers) -> dict:
    """Error bounds for an approximate solution x.

    Returns the absolute bound ``c ||Ax - |x| - b||`` on ``||x - x*||`` and,
    for ``b != 0``, the relative sandwich for ``||x - x*|| / ||x*||``.
    """
    if not cond.finite:
        raise NotApplicableError("condition number is infinite")
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    r = residual(AveProblem(A, b), x)
    rn = _vec_norm(r, cond.p)
    out = {"absolute": cond.c * rn, "residual_norm": rn}
    bn = _vec_norm(b, cond.p)
    if bn > 0:
        out["relative_lower"] = rn / (cond.c_rel * bn)
        out["relative_upper"] = cond.c_rel * rn / bn
    return out


def analyze(p: AveProblem, enum_cap: int = DEFAULT_ENUM_CAP) -> AnalysisReport:
    """Run every applicable test on one instance and merge the verdicts."""
    rep = check_unique_all_rhs(p.A, enum_cap)
    uns = check_unsolvable(p)
    for v in uns.verdicts.values():
        rep.add(v)
    rep.solvable_hint = uns.solvable_hint
    rep.add(check_exponential_solutions(p))
    for v in check_nonneg_solvability(p.A).verdicts.values():
        rep.add(v)
    if p.n <= enum_cap:
        for v in check_structure(p.A, p.b, enum_cap).verdicts.values():
            rep.add(v)
    try:
        rep.bounds = solution_bounds(p)
    except NotApplicableError:
        rep.bounds = None
    if rep.unique_for_all_b == "Yes" and rep.solvable_hint == "unknown":
        rep.solvable_hint = "unique"
    return rep


__all__ = [
    "AnalysisReport", "ConditionNumbers", "SolutionBounds", "State", "Verdict",
    "analyze", "certify_error", "check_exponential_solutions", "check_nonneg_solvability",
    "check_structure", "check_unique_all_rhs", "check_unique_all_rhs_gave",
    "check_unsolvable", "condition_numbers", "farkas_certificate",
    "regularity_enumeration", "singular_member", "solution_bounds", "CapExceeded",
]
