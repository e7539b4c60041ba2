"""Solution algorithms and the exhaustive orthant oracle.

Every iterative solver takes a problem and a :class:`avekit.core.SolverConfig`
and returns a :class:`avekit.core.SolveOutcome`; failures to converge are
statuses, not exceptions.
"""

from .auto import solve_auto
from .concave import solve_concave_hybrid, solve_concave_sla, solve_concave_zh
from .direct import signed_ge_class, solve_sign_accord, solve_signed_ge, solve_special_closed_form
from .enumerate import OrthantPiece, SolutionSet, enumerate_solutions
from .newton import solve_newton, solve_newton_inexact, solve_newton_modified, solve_newton_relaxed
from .splitting import (
    SplittingSpec,
    solve_ggs,
    solve_newton_splitting,
    solve_picard,
    solve_picard_hss,
    solve_picard_omega,
    solve_pggs,
    solve_sor_like,
)

__all__ = [
    "OrthantPiece", "SolutionSet", "SplittingSpec", "enumerate_solutions", "signed_ge_class",
    "solve_auto", "solve_concave_hybrid", "solve_concave_sla", "solve_concave_zh", "solve_ggs",
    "solve_newton", "solve_newton_inexact", "solve_newton_modified", "solve_newton_relaxed",
    "solve_newton_splitting", "solve_pggs", "solve_picard", "solve_picard_hss",
    "solve_picard_omega", "solve_sign_accord", "solve_signed_ge", "solve_special_closed_form",
    "solve_sor_like",
]
