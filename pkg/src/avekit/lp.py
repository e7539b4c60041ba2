"""Dense two-phase primal simplex with Bland's rule.

Problems are stated over free variables::

    min c^T x   s.t.   G x >= h   (rows flagged in ``eq`` hold with equality)

Rows ``G_i x - s_i = h_i`` get a slack ``s_i >= 0``. Free variables are
pivoted into the basis after phase 1 and never leave it, so when ``G`` has
full column rank every basic solution is a vertex of the feasible set.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional

import numpy as np


class LpStatus(str, enum.Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"
    MAX_PIVOTS = "MaxPivots"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class LinearProgram:
    c: np.ndarray
    G: np.ndarray
    h: np.ndarray
    eq: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        c = np.asarray(self.c, dtype=float).reshape(-1)
        G = np.asarray(self.G, dtype=float)
        if G.ndim == 1:
            G = G.reshape(-1, c.shape[0]) if c.shape[0] else G.reshape(-1, 0)
        h = np.asarray(self.h, dtype=float).reshape(-1)
        if G.shape != (h.shape[0], c.shape[0]):
            raise ValueError(f"G has shape {G.shape}, expected ({h.shape[0]}, {c.shape[0]})")
        eq = np.zeros(h.shape[0], dtype=bool) if self.eq is None else np.asarray(self.eq, dtype=bool)
        if eq.shape != h.shape:
            raise ValueError("eq mask must match the number of rows")
        if not (np.all(np.isfinite(c)) and np.all(np.isfinite(G)) and np.all(np.isfinite(h))):
            raise ValueError("LP data must be finite")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "G", G)
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "eq", eq)

    @property
    def n(self) -> int:
        return self.c.shape[0]

    @property
    def m(self) -> int:
        return self.h.shape[0]

    def is_feasible(self, x: np.ndarray, tol: float = 1e-9) -> bool:
        r = self.G @ x - self.h
        scale = tol * (1.0 + np.abs(self.h))
        ok = r >= -scale
        ok &= ~self.eq | (np.abs(r) <= scale)
        return bool(np.all(ok))


@dataclass
class LpSolution:
    status: LpStatus
    x: Optional[np.ndarray] = None
    objective: float = float("nan")
    basis: Optional[np.ndarray] = None
    ray: Optional[np.ndarray] = None
    pivots: int = 0
    _tableau: Optional["_Tableau"] = field(default=None, repr=False)

    @property
    def optimal(self) -> bool:
        return self.status is LpStatus.OPTIMAL


class _Tableau:
    """Row-reduced system ``T[:, :-1] v = T[:, -1]`` plus an objective row.

    In full mode columns 0..nx-1 are the (possibly negated) free variables
    and the rest are nonnegative slacks and artificials; ``flip[j] = -1``
    records a negated free column. Once every free variable is basic their
    rows and columns are dropped (reduced mode); x is then recovered from
    the constraints whose slacks are nonbasic.
    """

    def __init__(self, T, basis, nx, free, flip, eps):
        self.T = np.asfortranarray(T)
        self.basis = basis
        self.nx = nx
        self.free = free
        self.flip = flip
        self.eps = eps
        self.reduced = None

    def copy(self) -> "_Tableau":
        tab = _Tableau(self.T.copy(order="F"), self.basis.copy(), self.nx,
                       self.free.copy(), self.flip.copy(), self.eps)
        tab.reduced = self.reduced
        return tab

    def pivot(self, r: int, j: int) -> None:
        T = self.T
        T[r, :] /= T[r, j]
        col = T[:, j].copy()
        col[r] = 0.0
        _rank1_update(T, col, T[r, :].copy())
        T[:, j] = 0.0
        T[r, j] = 1.0
        self.basis[r] = j

    def negate(self, j: int) -> None:
        self.T[:, j] = -self.T[:, j]
        self.flip[j] = -self.flip[j]

    def ratio_row(self, j: int) -> Optional[int]:
        """Leaving row for entering column j; ties go to the smallest basic index."""
        m = self.T.shape[0] - 1
        a = self.T[:m, j]
        bounded = ~self.free[self.basis]
        cand = np.flatnonzero(bounded & (a > self.eps))
        if cand.size == 0:
            return None
        ratios = self.T[cand, -1] / a[cand]
        best = ratios.min()
        tie = cand[ratios <= best + 1e-12 * max(1.0, abs(best))]
        return int(tie[np.argmin(self.basis[tie])])

    def reduce(self, G: np.ndarray, h: np.ndarray, eq_rows: np.ndarray,
               slack_rows: np.ndarray) -> None:
        """Drop the free rows and columns; all free variables must be basic."""
        m = self.T.shape[0] - 1
        keep = np.flatnonzero(self.basis >= self.nx)
        rows = np.concatenate([keep, [m]])
        cols = np.concatenate([np.arange(self.nx, self.T.shape[1] - 1), [self.T.shape[1] - 1]])
        self.T = np.asfortranarray(self.T[np.ix_(rows, cols)])
        self.basis = self.basis[keep] - self.nx
        self.free = self.free[self.nx:]
        self.flip = self.flip[self.nx:]
        self.reduced = (G, h, eq_rows, slack_rows)

    def _active_solve(self, extra: Optional[int] = None) -> np.ndarray:
        G, h, eq_rows, slack_rows = self.reduced
        nonbasic = np.ones(self.T.shape[1] - 1, dtype=bool)
        nonbasic[self.basis] = False
        act = np.concatenate([eq_rows, slack_rows[np.flatnonzero(nonbasic)]])
        Ga = G[act]
        if extra is None:
            rhs = h[act]
        else:
            rhs = np.zeros(act.size)
            rhs[act == slack_rows[extra]] = 1.0
        if Ga.shape[0] == Ga.shape[1]:
            try:
                return np.linalg.solve(Ga, rhs)
            except np.linalg.LinAlgError:
                pass
        return np.linalg.lstsq(Ga, rhs, rcond=None)[0]

    def x(self) -> np.ndarray:
        if self.reduced is not None:
            x = self._active_solve()
        else:
            m = self.T.shape[0] - 1
            v = np.zeros(self.T.shape[1] - 1)
            v[self.basis] = self.T[:m, -1]
            x = v[: self.nx] * self.flip[: self.nx]
        # round-off on a vertex coordinate that is exactly zero would flip sgn
        x[np.abs(x) <= 1e-12 * max(1.0, float(np.max(np.abs(x), initial=0.0)))] = 0.0
        return x

    def ray(self, j: int) -> np.ndarray:
        if self.reduced is not None:
            return self._active_solve(extra=j)
        m = self.T.shape[0] - 1
        v = np.zeros(self.T.shape[1] - 1)
        v[j] = 1.0
        v[self.basis] = -self.T[:m, j]
        return v[: self.nx] * self.flip[: self.nx]


try:
    from scipy.linalg.blas import dger as _dger
except ImportError:  # pragma: no cover
    _dger = None


def _rank1_update(T: np.ndarray, col: np.ndarray, row: np.ndarray) -> None:
    """In place ``T -= outer(col, row)``."""
    if _dger is not None and T.flags.f_contiguous and T.dtype == np.float64:
        _dger(-1.0, col, row, a=T, overwrite_x=0, overwrite_y=0, overwrite_a=1)
    else:
        T -= np.outer(col, row)


def _entering(tab: _Tableau, d: np.ndarray, active_cols: int, eps_d: float,
              bland: bool) -> Optional[int]:
    nonbasic = np.ones(active_cols, dtype=bool)
    nonbasic[tab.basis[tab.basis < active_cols]] = False
    dd = d[:active_cols]
    cand = nonbasic & ((dd < -eps_d) | (tab.free[:active_cols] & (dd > eps_d)))
    idx = np.flatnonzero(cand)
    if idx.size == 0:
        return None
    j = int(idx[0]) if bland else int(idx[np.argmax(np.abs(dd[idx]))])
    if dd[j] > 0:
        tab.negate(j)
    return j


def _run_simplex(tab: _Tableau, active_cols: int, eps_d: float, max_pivots: int,
                 rule: str = "bland"):
    """Primal simplex on objective row ``T[-1]`` (reduced costs, -value in last slot).

    ``rule="dantzig"`` prices by the most negative reduced cost and falls
    back to Bland's rule for good after a run of degenerate pivots, which
    keeps the anti-cycling guarantee.
    """
    bland = rule == "bland"
    degenerate_run = 0
    pivots = 0
    while True:
        d = tab.T[-1, :-1]
        j = _entering(tab, d, active_cols, eps_d, bland)
        if j is None:
            return "optimal", None, pivots
        r = tab.ratio_row(j)
        if r is None:
            return "unbounded", j, pivots
        if not bland:
            degenerate_run = degenerate_run + 1 if tab.T[r, -1] <= 1e-12 else 0
            if degenerate_run > 50:
                bland = True
        tab.pivot(r, j)
        pivots += 1
        if pivots >= max_pivots:
            return "maxpivots", None, pivots


def solve_lp(lp: LinearProgram, max_pivots: Optional[int] = None,
             eps: float = 1e-10, rule: str = "bland") -> LpSolution:
    """Solve ``min c^T x  s.t.  G x >= h`` with x free.

    Parameters
    ----------
    rule : {"bland", "dantzig"}
        Pricing rule. Bland's smallest-index rule is the default; the
        Dantzig option needs far fewer pivots on large dense problems.

    Returns
    -------
    LpSolution
        ``Optimal`` carries a vertex and its basis, ``Unbounded`` carries a
        ray ``d`` with ``G d >= 0`` and ``c^T d < 0``.
    """
    m, nx = lp.m, lp.n
    if max_pivots is None:
        max_pivots = 50_000 * max(m, 1)
    if m == 0:
        if np.any(lp.c != 0):
            j = int(np.flatnonzero(lp.c)[0])
            ray = np.zeros(nx)
            ray[j] = -np.sign(lp.c[j])
            return LpSolution(LpStatus.UNBOUNDED, ray=ray)
        return LpSolution(LpStatus.OPTIMAL, x=np.zeros(nx), objective=0.0,
                          basis=np.zeros(0, dtype=int))

    G = lp.G.copy()
    h = lp.h.copy()
    ineq = ~lp.eq
    ns = int(ineq.sum())
    S = np.zeros((m, ns))
    S[np.flatnonzero(ineq), np.arange(ns)] = -1.0
    neg = h < 0
    G[neg] *= -1.0
    S[neg] *= -1.0
    h[neg] *= -1.0
    # a slack with coefficient +1 can start in the basis
    basis = np.full(m, -1, dtype=int)
    slack_rows = np.flatnonzero(ineq)
    for k, i in enumerate(slack_rows):
        if S[i, k] > 0:
            basis[i] = nx + k
    art_rows = np.flatnonzero(basis < 0)
    na = art_rows.size
    ncols = nx + ns + na
    T = np.zeros((m + 1, ncols + 1))
    T[:m, :nx] = G
    T[:m, nx:nx + ns] = S
    T[art_rows, nx + ns + np.arange(na)] = 1.0
    basis[art_rows] = nx + ns + np.arange(na)
    T[:m, -1] = h
    free = np.zeros(ncols, dtype=bool)
    free[:nx] = True
    flip = np.ones(ncols)
    scale = max(1.0, float(np.max(np.abs(h), initial=0.0)))
    if na:
        # phase 1 objective: the sum of artificials, in reduced form
        T[-1, nx + ns:ncols] = 1.0
        T[-1] -= T[art_rows].sum(axis=0)
    tab = _Tableau(T, basis, nx, free, flip, eps)

    total_pivots = 0
    if na:
        state, _, piv = _run_simplex(tab, ncols, 1e-11, max_pivots, rule)
        total_pivots += piv
        if state == "maxpivots":
            return LpSolution(LpStatus.MAX_PIVOTS, pivots=total_pivots)
        if -tab.T[-1, -1] > 1e-9 * scale:
            return LpSolution(LpStatus.INFEASIBLE, pivots=total_pivots)
        # drive artificials out of the basis, dropping redundant rows
        keep = np.ones(m, dtype=bool)
        for r in range(m):
            if tab.basis[r] >= nx + ns:
                row = tab.T[r, :nx + ns]
                nz = np.flatnonzero(np.abs(row) > 1e-9)
                if nz.size:
                    tab.pivot(r, int(nz[0]))
                    total_pivots += 1
                else:
                    keep[r] = False
        rows = np.concatenate([np.flatnonzero(keep), [m]])
        tab.T = np.asfortranarray(np.concatenate(
            [tab.T[rows, :nx + ns], tab.T[rows, -1:]], axis=1))
        tab.basis = tab.basis[keep]
        m = int(keep.sum())
        tab.free = tab.free[:nx + ns]
        tab.flip = tab.flip[:nx + ns]
    ncols = nx + ns
    # bring every free variable into the basis without losing feasibility
    for j in range(nx):
        if j in set(tab.basis.tolist()):
            continue
        r = tab.ratio_row(j)
        if r is None:
            tab.negate(j)
            r = tab.ratio_row(j)
            if r is None:
                # x_j does not move any bounded basic; it stays nonbasic
                tab.negate(j)
                continue
        tab.pivot(r, j)
        total_pivots += 1

    # phase 2 objective in reduced form
    tab.T[-1, :] = 0.0
    tab.T[-1, :nx] = lp.c * tab.flip[:nx]
    for r in range(m):
        j = tab.basis[r]
        if tab.T[-1, j] != 0.0:
            tab.T[-1, :] -= tab.T[-1, j] * tab.T[r, :]
    if np.count_nonzero(tab.basis < nx) == nx:
        slack_rows = np.flatnonzero(ineq)
        tab.reduce(lp.G, lp.h, np.flatnonzero(lp.eq), slack_rows)
        ncols = ns
    eps_d = 1e-9 * max(1.0, float(np.max(np.abs(lp.c), initial=0.0)))
    state, j, piv = _run_simplex(tab, ncols, eps_d, max_pivots - total_pivots, rule)
    total_pivots += piv
    if state == "maxpivots":
        return LpSolution(LpStatus.MAX_PIVOTS, pivots=total_pivots)
    if state == "unbounded":
        return LpSolution(LpStatus.UNBOUNDED, ray=tab.ray(j), basis=tab.basis.copy(),
                          pivots=total_pivots, x=tab.x())
    x = tab.x()
    return LpSolution(LpStatus.OPTIMAL, x=x, objective=float(lp.c @ x),
                      basis=tab.basis.copy(), pivots=total_pivots, _tableau=tab)


def adjacent_vertices(sol: LpSolution, tol: float = 1e-9) -> list[np.ndarray]:
    """Vertices reachable from an optimal basis by one simplex pivot.

    Each nonbasic column is entered with the ratio test. A degenerate pivot
    (step length zero) is followed by one further round of pivots from the
    new basis, so neighbours hidden behind degeneracy are still found.
    """
    if sol._tableau is None or sol.x is None:
        return []
    base = sol._tableau
    x_bar = sol.x
    found: list[np.ndarray] = []

    def add(x):
        if np.max(np.abs(x - x_bar), initial=0.0) <= tol * (1.0 + np.max(np.abs(x_bar))):
            return
        for y in found:
            if np.max(np.abs(x - y)) <= tol * (1.0 + np.max(np.abs(y))):
                return
        found.append(x)

    def explore(tab: _Tableau, depth: int) -> None:
        in_basis = set(tab.basis.tolist())
        for j in range(tab.T.shape[1] - 1):
            if j in in_basis or tab.free[j]:
                continue
            r = tab.ratio_row(j)
            if r is None:
                continue
            nxt = tab.copy()
            nxt.pivot(r, j)
            step = tab.T[r, -1] / tab.T[r, j]
            if step > tol:
                add(nxt.x())
            elif depth == 0:
                explore(nxt, 1)

    explore(base, 0)
    return found
