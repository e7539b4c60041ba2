"""Method names accepted by ``solve`` and ``bench`` mapped to solver calls."""

from __future__ import annotations

from typing import Callable

import numpy as np

from .. import solvers as S
from ..core import AveProblem, GaveProblem, LUFactor, SolveOutcome, SolverConfig, Status


def _ave(p) -> AveProblem:
    if isinstance(p, GaveProblem):
        if np.array_equal(p.B, np.eye(p.n)):
            return AveProblem(p.A, p.b)
        raise ValueError("this method needs an AVE (B = I)")
    return p


def _unit_form(p) -> tuple[np.ndarray, np.ndarray]:
    """``x - B|x| = b`` equivalent of the problem (multiplies by A^{-1} if needed)."""
    B = p.B if isinstance(p, GaveProblem) else np.eye(p.n)
    if np.array_equal(p.A, np.eye(p.n)):
        return B, p.b
    lu = LUFactor(p.A)
    return lu.solve(B), lu.solve(p.b)


def _omega(p, prm):
    w = prm.get("omega")
    return None if w is None else float(w) * np.eye(p.n)


def _splitting(p, cfg, prm):
    spec = S.SplittingSpec(str(prm.get("scheme", "gauss_seidel")), relax=float(prm.get("relax", 1.0)),
                           omega_matrix=_omega(p, prm))
    return S.solve_newton_splitting(p, spec, cfg)


METHODS: dict[str, Callable[..., SolveOutcome]] = {
    "newton": lambda p, cfg, prm: S.solve_newton(p, cfg),
    "newton-mod": lambda p, cfg, prm: S.solve_newton_modified(p, cfg),
    "newton-relaxed": lambda p, cfg, prm: S.solve_newton_relaxed(p, float(prm.get("theta", 0.5)), cfg),
    "newton-inexact": lambda p, cfg, prm: S.solve_newton_inexact(p, float(prm.get("theta", 0.1)), cfg),
    "picard": lambda p, cfg, prm: S.solve_picard(p, cfg),
    "picard-omega": lambda p, cfg, prm: S.solve_picard_omega(p, _omega(p, prm), cfg),
    "picard-hss": lambda p, cfg, prm: S.solve_picard_hss(
        _ave(p), float(prm.get("alpha", 1.0)),
        int(prm["inner"]) if "inner" in prm else None, cfg),
    "sor": lambda p, cfg, prm: S.solve_sor_like(_ave(p), float(prm.get("omega", 1.0)), cfg),
    "splitting": _splitting,
    "ggs": lambda p, cfg, prm: S.solve_ggs(_ave(p), cfg),
    "pggs": lambda p, cfg, prm: S.solve_pggs(_ave(p), float(prm.get("beta", 0.5)), cfg),
    "sla": lambda p, cfg, prm: S.solve_concave_sla(_ave(p), cfg),
    "hybrid": lambda p, cfg, prm: S.solve_concave_hybrid(_ave(p), cfg, int(prm.get("itmax", 10))),
    "zh": lambda p, cfg, prm: S.solve_concave_zh(_ave(p), cfg),
    "sign-accord": lambda p, cfg, prm: S.solve_sign_accord(p, cfg),
    "signed-ge": lambda p, cfg, prm: S.solve_signed_ge(*_unit_form(p), cfg, bool(prm.get("force", 0))),
    "closed-form": lambda p, cfg, prm: S.solve_special_closed_form(*_unit_form(p)),
    "auto": lambda p, cfg, prm: S.solve_auto(_ave(p), cfg),
}


def run_method(name: str, p, cfg: SolverConfig, params: dict) -> SolveOutcome:
    """Run a named method; a precondition ValueError becomes a NotApplicable outcome."""
    key = name.replace("_", "-")
    if key not in METHODS:
        raise KeyError(f"unknown method {name!r}; choose from {sorted(METHODS)}")
    try:
        return METHODS[key](p, cfg, params)
    except ValueError as exc:
        n = p.n
        return SolveOutcome(Status.NOT_APPLICABLE, np.full(n, np.nan), np.inf, 0, 0, None, key,
                            {"reason": str(exc)})
