"""Method selection from cheap sufficient conditions."""

from __future__ import annotations

from typing import Optional

import numpy as np

from ..core import (
    DEFAULT_ENUM_CAP,
    AveProblem,
    NonConvergence,
    SingularMatrixError,
    SolveOutcome,
    SolverConfig,
    Status,
    extreme_singular_values,
    inverse,
    residual_inf,
    spectral_radius_bounds,
)
from .enumerate import enumerate_solutions
from .newton import solve_newton
from .splitting import solve_picard


def _rho_abs_inverse(A: np.ndarray) -> float:
    try:
        Ainv = inverse(A)
    except SingularMatrixError:
        return np.inf
    try:
        _, hi = spectral_radius_bounds(np.abs(Ainv))
    except NonConvergence as exc:
        hi = exc.upper
    return hi


def solve_auto(p: AveProblem, cfg: Optional[SolverConfig] = None,
               enum_cap: int = DEFAULT_ENUM_CAP) -> SolveOutcome:
    """Pick a method: Newton when sigma_min(A) > 1, Picard when
    rho(|A^{-1}|) < 1, exhaustive enumeration for small n, Newton otherwise.

    ``info["dispatch"]`` names the choice and ``info["hints"]`` the numbers
    behind it. An empty enumeration returns NotApplicable together with the
    nonexistence verdicts of the analysis module.
    """
    cfg = cfg if cfg is not None else SolverConfig()
    smin, _ = extreme_singular_values(p.A)
    hints = {"sigma_min": smin}
    if smin > 1.0:
        out = solve_newton(p, cfg)
        choice = "newton"
    else:
        rho = _rho_abs_inverse(p.A)
        hints["rho_abs_inv"] = rho
        if rho < 1.0:
            out = solve_picard(p, cfg)
            choice = "picard"
        elif p.n <= min(enum_cap, 12):
            out = _from_enumeration(p, cfg, enum_cap)
            choice = "enumerate"
        else:
            out = solve_newton(p, cfg)
            choice = "newton"
    out.info["dispatch"] = choice
    out.info["hints"] = hints
    return out


def _from_enumeration(p: AveProblem, cfg: SolverConfig, enum_cap: int) -> SolveOutcome:
    from ..analysis import check_unsolvable

    sol = enumerate_solutions(p, enum_cap=enum_cap)
    n = p.n
    if sol.is_empty:
        report = check_unsolvable(p)
        cert = {name: v.certificate for name, v in report.verdicts.items() if v.holds}
        return SolveOutcome(Status.NOT_APPLICABLE, np.full(n, np.nan), np.inf, 1 << n, 1 << n,
                            None, "enumerate",
                            {"reason": "no solution exists (complete orthant enumeration)",
                             "certificates": cert, "orthants": 1 << n})
    x = sol.pieces[0].x0.copy()
    r = residual_inf(p, x)
    return SolveOutcome(Status.CONVERGED, x, r, 1 << n, 1 << n, None, "enumerate",
                        {"solution_count": sol.summary()})
