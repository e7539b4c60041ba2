"""Exact reductions between AVE, LCP, GAVE, matrix equations, 0-1 programs
and interval linear systems.

Each reduction returns a :class:`Reduction` holding the new problem and
maps that carry solutions in both directions.
"""

from __future__ import annotations

import io
import itertools
from dataclasses import dataclass, field
from typing import Any, Callable, Optional, TextIO

import numpy as np

from .analysis import State, Verdict, regularity_enumeration, singular_member
from .core import (
    DEFAULT_ENUM_CAP,
    AveProblem,
    AvekitError,
    GaveProblem,
    LUFactor,
    SingularMatrixError,
    check_enum_size,
    rank_revealing_solve,
)
from .lp import LinearProgram, LpStatus, solve_lp


@dataclass(frozen=True)
class Lcp:
    """``w = Q z + q``, ``w, z >= 0``, ``w^T z = 0``."""

    Q: np.ndarray
    q: np.ndarray

    def __post_init__(self) -> None:
        Q = np.array(self.Q, dtype=float)
        q = np.array(self.q, dtype=float).reshape(-1)
        if Q.ndim != 2 or Q.shape != (q.size, q.size):
            raise ValueError(f"Q must be {q.size}x{q.size}, got {Q.shape}")
        if not (np.all(np.isfinite(Q)) and np.all(np.isfinite(q))):
            raise ValueError("LCP data must be finite")
        Q.setflags(write=False)
        q.setflags(write=False)
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "q", q)

    @property
    def n(self) -> int:
        return self.q.size

    def is_solution(self, z: np.ndarray, tol: float = 1e-9) -> bool:
        z = np.asarray(z, dtype=float)
        w = self.Q @ z + self.q
        scale = tol * (1.0 + np.abs(self.q).max(initial=0.0) + np.abs(z).max(initial=0.0))
        return bool(np.all(z >= -scale) and np.all(w >= -scale) and abs(w @ z) <= scale * (1 + np.abs(z).sum()))


@dataclass
class Reduction:
    """A transformed problem and the two solution maps.

    ``back`` takes a solution of ``problem`` to one of the source;
    ``forward`` takes a source solution to one of ``problem``.
    """

    problem: Any
    back: Callable[[np.ndarray], Any]
    forward: Callable[[np.ndarray], Any]
    notes: dict = field(default_factory=dict)


# ------------------------------------------------------------ AVE and LCP


def ave_to_lcp(p: AveProblem) -> Reduction:
    """``Q = (A+I)^{-1}(A-I)``, ``q = -(A+I)^{-1} b`` with ``z = x+``, ``w = x-``.

    The forward map returns the pair ``(w, z)``; the back map takes z and
    returns ``x = z - (Q z + q)``.

    Raises
    ------
    SingularMatrixError
        When A + I is singular.
    """
    n = p.n
    lu = LUFactor(p.A + np.eye(n))
    Q = lu.solve(p.A - np.eye(n))
    q = -lu.solve(p.b)
    lcp = Lcp(Q, q)

    def back(z):
        z = np.asarray(z, dtype=float)
        return z - (Q @ z + q)

    def forward(x):
        x = np.asarray(x, dtype=float)
        return np.maximum(-x, 0.0), np.maximum(x, 0.0)

    return Reduction(lcp, back, forward)


def lcp_to_ave(lcp: Lcp) -> Reduction:
    """``(I-Q)^{-1}(I+Q) x - |x| = (Q-I)^{-1} q`` via ``w = |x|-x``, ``z = |x|+x``.

    The back map returns ``z = |x| + x`` (the LCP variable); ``w`` follows
    from ``Q z + q``. The forward map takes z and returns ``x = (z - w)/2``.

    Raises
    ------
    SingularMatrixError
        When I - Q is singular.
    """
    n = lcp.n
    I = np.eye(n)
    lu = LUFactor(I - lcp.Q)
    A = lu.solve(I + lcp.Q)
    b = -lu.solve(lcp.q)
    ave = AveProblem(A, b)

    def back(x):
        x = np.asarray(x, dtype=float)
        return np.abs(x) + x

    def forward(z):
        z = np.asarray(z, dtype=float)
        w = lcp.Q @ z + lcp.q
        return 0.5 * (z - w)

    return Reduction(ave, back, forward)


def enumerate_lcp(lcp: Lcp, tol: float = 1e-9) -> list[np.ndarray]:
    """All solutions z of a nondegenerate LCP by complementary bases.

    Each subset J takes ``w_J = 0`` and ``z`` zero off J. Singular principal
    blocks are skipped, so degenerate problems may report a subset only.
    """
    n = lcp.n
    check_enum_size(n)
    out: list[np.ndarray] = []
    scale = tol * (1.0 + np.abs(lcp.q).max(initial=0.0))
    for mask in range(1 << n):
        J = np.array([(mask >> i) & 1 for i in range(n)], dtype=bool)
        z = np.zeros(n)
        if J.any():
            try:
                z[J] = LUFactor(lcp.Q[np.ix_(J, J)]).solve(-lcp.q[J])
            except SingularMatrixError:
                continue
        w = lcp.Q @ z + lcp.q
        if np.all(z >= -scale) and np.all(w >= -scale):
            z = np.maximum(z, 0.0)
            if not any(np.max(np.abs(z - o)) <= 1e-8 * (1 + np.abs(z).max()) for o in out):
                out.append(z)
    return out


# ------------------------------------------------------------ GAVE and friends


def gave_to_ave(g: GaveProblem, mode: str = "block3n") -> Reduction:
    """Turn ``A x - B|x| = b`` into an AVE.

    ``inverse_b`` gives ``B^{-1} A x - |x| = B^{-1} b``. ``block3n`` lifts to
    ``w = (x, y, z)`` with rows ``y - |x| = 0``, ``y - z - |y| = 0`` and
    ``A x - B y - |z| = b``; they force ``y = |x|`` and ``z = 0``. The back
    map keeps the first n coordinates.
    """
    if not g.is_square:
        raise ValueError("the reduction needs a square GAVE")
    n = g.n
    if mode == "inverse_b":
        lu = LUFactor(g.B)
        ave = AveProblem(lu.solve(g.A), lu.solve(g.b))
        return Reduction(ave, lambda x: np.asarray(x, dtype=float),
                         lambda x: np.asarray(x, dtype=float), {"mode": mode})
    if mode != "block3n":
        raise ValueError(f"unknown mode {mode!r}")
    I = np.eye(n)
    O = np.zeros((n, n))
    M = np.block([[O, I, O], [O, I, -I], [g.A, -g.B, O]])
    rhs = np.concatenate([np.zeros(2 * n), g.b])
    ave = AveProblem(M, rhs)

    def back(w):
        return np.asarray(w, dtype=float)[:n].copy()

    def forward(x):
        x = np.asarray(x, dtype=float)
        return np.concatenate([x, np.abs(x), np.zeros(n)])

    return Reduction(ave, back, forward, {"mode": mode})


def ngave_to_gave(A: Any, B: Any, b: Any) -> Reduction:
    """``A x + |B x| = b`` as a 2n GAVE in ``w = (x, y)`` with ``y = B x``.

    ``A' = [[A, 0], [B, -I]]``, ``B' = [[0, -I], [0, 0]]``, ``b' = (b, 0)``.
    """
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    b = np.asarray(b, dtype=float).reshape(-1)
    n = b.size
    if A.shape != (n, n) or B.shape != (n, n):
        raise ValueError("A and B must be square and match b")
    I = np.eye(n)
    O = np.zeros((n, n))
    g = GaveProblem(np.block([[A, O], [B, -I]]), np.block([[O, -I], [O, O]]),
                    np.concatenate([b, np.zeros(n)]))
    return Reduction(g, lambda w: np.asarray(w, dtype=float)[:n].copy(),
                     lambda x: np.concatenate([np.asarray(x, dtype=float), B @ np.asarray(x, dtype=float)]))


def ngave_residual(A: Any, B: Any, b: Any, x: Any) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    x = np.asarray(x, dtype=float)
    return A @ x + np.abs(B @ x) - np.asarray(b, dtype=float)


def sylvester_to_gave(A: Any, B: Any, C: Any, D: Any, E: Any) -> Reduction:
    """``A X B + C|X| D = E`` as ``(B^T kron A) x - (-(D^T kron C)) |x| = vec(E)``.

    ``vec`` stacks columns. X has shape ``(A.shape[1], B.shape[0])``; the
    back map reshapes a GAVE solution into X.
    """
    A, B, C, D, E = (np.atleast_2d(np.asarray(M, dtype=float)) for M in (A, B, C, D, E))
    m, n = A.shape
    p, q = B.shape
    if C.shape != (m, n) or D.shape != (p, q) or E.shape != (m, q):
        raise ValueError(f"shape mismatch: A{A.shape} B{B.shape} C{C.shape} D{D.shape} E{E.shape}")
    G = GaveProblem(np.kron(B.T, A), -np.kron(D.T, C), E.reshape(-1, order="F"))

    def back(x):
        return np.asarray(x, dtype=float).reshape((n, p), order="F")

    def forward(X):
        return np.asarray(X, dtype=float).reshape(-1, order="F")

    return Reduction(G, back, forward, {"shape": (n, p)})


def cayley(A: Any) -> np.ndarray:
    """``C(A) = (I + A)^{-1}(I - A)``."""
    A = np.asarray(A, dtype=float)
    I = np.eye(A.shape[0])
    return LUFactor(I + A).solve(I - A)


def transform_al(A: Any) -> np.ndarray:
    """``AL(A) = (A + I)^{-1}(A - I)``, the matrix of the AVE to LCP map."""
    A = np.asarray(A, dtype=float)
    I = np.eye(A.shape[0])
    return LUFactor(A + I).solve(A - I)


def transform_la(Q: Any) -> np.ndarray:
    """``LA(Q) = (I - Q)^{-1}(I + Q)``, the matrix of the LCP to AVE map."""
    Q = np.asarray(Q, dtype=float)
    I = np.eye(Q.shape[0])
    return LUFactor(I - Q).solve(I + Q)


# ------------------------------------------------------------ mixed 0-1 models


@dataclass
class MixedIntegerModel:
    """``min c^T v`` subject to ``row_lo <= K v <= row_hi`` style rows.

    Rows carry a sense ``E``, ``L`` or ``G`` and a right-hand side; each
    variable has a kind (``C`` continuous, ``B`` binary) and bounds.
    """

    name: str
    var_names: list
    var_kind: list
    lower: np.ndarray
    upper: np.ndarray
    objective: np.ndarray
    row_names: list
    senses: list
    K: np.ndarray
    rhs: np.ndarray
    meta: dict = field(default_factory=dict)

    @property
    def binaries(self) -> np.ndarray:
        return np.array([k == "B" for k in self.var_kind], dtype=bool)

    def index(self, name: str) -> int:
        return self.var_names.index(name)

    def to_mps(self) -> str:
        buf = io.StringIO()
        write_mps(self, buf)
        return buf.getvalue()

    def same_as(self, other: "MixedIntegerModel") -> bool:
        return (self.name == other.name and self.var_names == other.var_names
                and self.var_kind == other.var_kind and self.row_names == other.row_names
                and self.senses == other.senses
                and np.array_equal(self.lower, other.lower) and np.array_equal(self.upper, other.upper)
                and np.array_equal(self.objective, other.objective)
                and np.array_equal(self.K, other.K) and np.array_equal(self.rhs, other.rhs))


def _num(v: float) -> str:
    v = float(v)
    if v == int(v) and abs(v) < 1e15:
        return str(int(v))
    return repr(v)


def write_mps(model: MixedIntegerModel, sink: TextIO) -> None:
    """Write MPS: ROWS, COLUMNS, RHS and BOUNDS, binaries as ``BV`` bounds.

    Numbers use the shortest decimal that round-trips, so parsing restores
    every coefficient exactly.
    """
    w = sink.write
    w(f"NAME          {model.name}\n")
    w("ROWS\n")
    w(" N  obj\n")
    for r, s in zip(model.row_names, model.senses):
        w(f" {s}  {r}\n")
    w("COLUMNS\n")
    for j, v in enumerate(model.var_names):
        if model.objective[j] != 0:
            w(f"    {v:<10} {'obj':<10} {_num(model.objective[j])}\n")
        for i in np.flatnonzero(model.K[:, j]):
            w(f"    {v:<10} {model.row_names[i]:<10} {_num(model.K[i, j])}\n")
    w("RHS\n")
    for i in np.flatnonzero(model.rhs):
        w(f"    {'rhs':<10} {model.row_names[i]:<10} {_num(model.rhs[i])}\n")
    w("BOUNDS\n")
    for j, v in enumerate(model.var_names):
        lo, hi = model.lower[j], model.upper[j]
        if model.var_kind[j] == "B":
            w(f" BV bnd       {v}\n")
        elif lo == -np.inf and hi == np.inf:
            w(f" FR bnd       {v}\n")
        else:
            if lo == -np.inf:
                w(f" MI bnd       {v}\n")
            elif lo != 0:
                w(f" LO bnd       {v:<10} {_num(lo)}\n")
            if hi != np.inf:
                w(f" UP bnd       {v:<10} {_num(hi)}\n")
    w("ENDATA\n")


class MpsParseError(AvekitError, ValueError):
    pass


def parse_mps(text: str) -> MixedIntegerModel:
    """Read the subset of MPS produced by :func:`write_mps`."""
    name = ""
    rows: list = []
    senses: list = []
    cols: list = []
    entries: dict = {}
    obj: dict = {}
    rhs: dict = {}
    bounds: dict = {}
    section = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        if not raw.strip() or raw.startswith("*"):
            continue
        tok = raw.split()
        if not raw[0].isspace():
            section = tok[0]
            if section == "NAME":
                name = tok[1] if len(tok) > 1 else ""
            elif section == "ENDATA":
                break
            elif section not in ("ROWS", "COLUMNS", "RHS", "BOUNDS"):
                raise MpsParseError(f"line {lineno}: unknown section {section!r}")
            continue
        try:
            if section == "ROWS":
                if tok[0] == "N":
                    continue
                if tok[0] not in ("E", "L", "G"):
                    raise MpsParseError(f"line {lineno}: bad row type {tok[0]!r}")
                rows.append(tok[1])
                senses.append(tok[0])
            elif section == "COLUMNS":
                col = tok[0]
                if col not in entries:
                    cols.append(col)
                    entries[col] = {}
                for r, v in zip(tok[1::2], tok[2::2]):
                    if r == "obj":
                        obj[col] = float(v)
                    else:
                        entries[col][r] = float(v)
            elif section == "RHS":
                for r, v in zip(tok[1::2], tok[2::2]):
                    rhs[r] = float(v)
            elif section == "BOUNDS":
                kind, col = tok[0], tok[2]
                bounds.setdefault(col, []).append((kind, float(tok[3]) if len(tok) > 3 else None))
            else:
                raise MpsParseError(f"line {lineno}: data outside a section")
        except (IndexError, ValueError) as exc:
            if isinstance(exc, MpsParseError):
                raise
            raise MpsParseError(f"line {lineno}: {exc}") from exc
    rindex = {r: i for i, r in enumerate(rows)}
    n = len(cols)
    K = np.zeros((len(rows), n))
    lower = np.zeros(n)
    upper = np.full(n, np.inf)
    kind = ["C"] * n
    c = np.zeros(n)
    for j, col in enumerate(cols):
        for r, v in entries[col].items():
            if r not in rindex:
                raise MpsParseError(f"column {col} refers to unknown row {r}")
            K[rindex[r], j] = v
        c[j] = obj.get(col, 0.0)
        for bk, val in bounds.get(col, []):
            if bk == "BV":
                kind[j] = "B"
                lower[j], upper[j] = 0.0, 1.0
            elif bk == "FR":
                lower[j], upper[j] = -np.inf, np.inf
            elif bk == "MI":
                lower[j] = -np.inf
            elif bk == "LO":
                lower[j] = val
            elif bk == "UP":
                upper[j] = val
            else:
                raise MpsParseError(f"unsupported bound type {bk}")
    b = np.array([rhs.get(r, 0.0) for r in rows])
    return MixedIntegerModel(name, cols, kind, lower, upper, c, rows, senses, K, b)


def export_milp(p: AveProblem, variant: str = "prokopyev", lower: Any = None, upper: Any = None,
                sink: Optional[TextIO] = None) -> MixedIntegerModel:
    """Mixed 0-1 model of the AVE, optionally written as MPS to ``sink``.

    ``prokopyev``: maximize alpha (stored as minimizing ``-alpha``) subject to
    ``A x - y = alpha b``, ``0 <= y + x <= e - z``, ``0 <= y - x <= z``,
    ``alpha >= 0``. ``bounded``: with a box ``lower <= x <= upper``,
    ``(A-I)x >= b``, ``(A-I)x + 2 diag(lower) z <= b``, ``(A+I)x >= b``,
    ``(A+I)x + 2 diag(upper) z <= b + 2 upper``; ``z_i = 1`` marks ``x_i <= 0``.
    """
    A, b, n = p.A, p.b, p.n
    I = np.eye(n)
    O = np.zeros((n, n))
    xs = [f"x{i + 1}" for i in range(n)]
    zs = [f"z{i + 1}" for i in range(n)]
    if variant == "prokopyev":
        if not np.any(b != 0):
            raise ValueError("the 0-1 model needs b != 0")
        ys = [f"y{i + 1}" for i in range(n)]
        names = xs + ys + zs + ["alpha"]
        col_b = -b[:, None]
        e0 = np.zeros((n, 1))
        K = np.vstack([
            np.hstack([A, -I, O, col_b]),
            np.hstack([I, I, O, e0]),
            np.hstack([I, I, I, e0]),
            np.hstack([-I, I, O, e0]),
            np.hstack([-I, I, -I, e0]),
        ])
        senses = ["E"] * n + ["G"] * n + ["L"] * n + ["G"] * n + ["L"] * n
        rhs = np.concatenate([np.zeros(n), np.zeros(n), np.ones(n), np.zeros(n), np.zeros(n)])
        rnames = ([f"eq{i + 1}" for i in range(n)] + [f"plo{i + 1}" for i in range(n)]
                  + [f"phi{i + 1}" for i in range(n)] + [f"mlo{i + 1}" for i in range(n)]
                  + [f"mhi{i + 1}" for i in range(n)])
        lo = np.concatenate([np.full(2 * n, -np.inf), np.zeros(n), [0.0]])
        hi = np.concatenate([np.full(2 * n, np.inf), np.ones(n), [np.inf]])
        kind = ["C"] * (2 * n) + ["B"] * n + ["C"]
        c = np.zeros(3 * n + 1)
        c[-1] = -1.0
        model = MixedIntegerModel("AVE01", names, kind, lo, hi, c, rnames, senses, K, rhs,
                                  {"variant": variant, "n": n})
    elif variant == "bounded":
        if lower is None or upper is None:
            raise ValueError("the bounded model needs lower and upper bounds")
        xl = np.asarray(lower, dtype=float).reshape(-1)
        xu = np.asarray(upper, dtype=float).reshape(-1)
        if xl.shape != (n,) or xu.shape != (n,) or np.any(xl > xu):
            raise ValueError("empty or malformed box")
        if np.any(xl > 0) or np.any(xu < 0):
            raise ValueError("the box must contain 0 in every coordinate")
        names = xs + zs
        K = np.vstack([
            np.hstack([A - I, O]),
            np.hstack([A - I, 2.0 * np.diag(xl)]),
            np.hstack([A + I, O]),
            np.hstack([A + I, 2.0 * np.diag(xu)]),
        ])
        senses = ["G"] * n + ["L"] * n + ["G"] * n + ["L"] * n
        rhs = np.concatenate([b, b, b, b + 2.0 * xu])
        rnames = ([f"mlo{i + 1}" for i in range(n)] + [f"mhi{i + 1}" for i in range(n)]
                  + [f"plo{i + 1}" for i in range(n)] + [f"phi{i + 1}" for i in range(n)])
        lo = np.concatenate([xl, np.zeros(n)])
        hi = np.concatenate([xu, np.ones(n)])
        kind = ["C"] * n + ["B"] * n
        model = MixedIntegerModel("AVEBOX", names, kind, lo, hi, np.zeros(2 * n), rnames,
                                  senses, K, rhs, {"variant": variant, "n": n})
    else:
        raise ValueError(f"unknown variant {variant!r}")
    if sink is not None:
        write_mps(model, sink)
    return model


@dataclass
class MilpPiece:
    """Feasible continuous set for one binary assignment."""

    z: np.ndarray
    x0: np.ndarray
    basis: np.ndarray
    vertices: list
    objective: float = float("nan")

    @property
    def is_point(self) -> bool:
        return self.basis.shape[1] == 0


def _restriction(model: MixedIntegerModel, z: np.ndarray):
    """LP data over the continuous variables with binaries fixed to z."""
    B = model.binaries
    Kc = model.K[:, ~B]
    rhs = model.rhs - model.K[:, B] @ z
    G_rows, h_rows, eq = [], [], []
    for i, s in enumerate(model.senses):
        if s == "L":
            G_rows.append(-Kc[i]); h_rows.append(-rhs[i]); eq.append(False)
        else:
            G_rows.append(Kc[i]); h_rows.append(rhs[i]); eq.append(s == "E")
    lo, hi = model.lower[~B], model.upper[~B]
    m = Kc.shape[1]
    for j in range(m):
        if np.isfinite(lo[j]):
            row = np.zeros(m); row[j] = 1.0
            G_rows.append(row); h_rows.append(lo[j]); eq.append(False)
        if np.isfinite(hi[j]):
            row = np.zeros(m); row[j] = -1.0
            G_rows.append(row); h_rows.append(-hi[j]); eq.append(False)
    return np.array(G_rows), np.array(h_rows), np.array(eq, dtype=bool)


def brute_force_milp(model: MixedIntegerModel, enum_cap: int = DEFAULT_ENUM_CAP) -> list[MilpPiece]:
    """Solve the model by enumerating every binary assignment.

    For each feasible assignment the continuous part is described by its
    affine hull (from the inequality pairs that pin a row to one value) and
    the LP extremes along each hull direction. For a model with an
    objective the piece also records the optimal value.
    """
    B = model.binaries
    nb = int(B.sum())
    check_enum_size(nb, enum_cap)
    m = int((~B).sum())
    pieces: list[MilpPiece] = []
    for bits in itertools.product((0.0, 1.0), repeat=nb):
        z = np.array(bits)
        G, h, eq = _restriction(model, z)
        c = model.objective[~B]
        sol = solve_lp(LinearProgram(c, G, h, eq))
        if sol.status is LpStatus.INFEASIBLE:
            continue
        if sol.status is not LpStatus.OPTIMAL:
            pieces.append(MilpPiece(z, sol.x if sol.x is not None else np.full(m, np.nan),
                                    np.zeros((m, 0)), [], -np.inf))
            continue
        x0, N = _affine_hull(G, h, eq)
        verts = [sol.x]
        if N.shape[1]:
            Gt = G @ N
            ht = h - G @ x0
            for k in range(N.shape[1]):
                for sign in (1.0, -1.0):
                    ck = np.zeros(N.shape[1]); ck[k] = sign
                    r = solve_lp(LinearProgram(ck, Gt, ht, eq))
                    if r.status is LpStatus.OPTIMAL:
                        v = x0 + N @ r.x
                        if not any(np.max(np.abs(v - w)) <= 1e-9 * (1 + np.abs(v).max()) for w in verts):
                            verts.append(v)
            x0 = verts[0]
        else:
            x0 = sol.x
        pieces.append(MilpPiece(z, x0, N, verts, float(c @ sol.x)))
    return pieces


def _affine_hull(G: np.ndarray, h: np.ndarray, eq: np.ndarray, tol: float = 1e-9):
    """Particular point and orthonormal directions of ``{G x >= h}``'s affine hull.

    A row is an implicit equality when minimizing it over the set reaches
    its right-hand side and maximizing does too.
    """
    m = G.shape[1]
    implicit = eq.copy()
    for i in np.flatnonzero(~eq):
        r = solve_lp(LinearProgram(G[i], G, h, eq))
        if r.status is LpStatus.OPTIMAL and r.objective <= h[i] + tol * (1 + abs(h[i])):
            r2 = solve_lp(LinearProgram(-G[i], G, h, eq))
            if r2.status is LpStatus.OPTIMAL and -r2.objective <= h[i] + tol * (1 + abs(h[i])):
                implicit[i] = True
    if not implicit.any():
        return np.zeros(m), np.eye(m)
    x0, N, _ = rank_revealing_solve(G[implicit], h[implicit])
    if x0 is None:
        x0 = np.linalg.lstsq(G[implicit], h[implicit], rcond=None)[0]
    return x0, N


def _on_segment(v: np.ndarray, piece: MilpPiece, tol: float = 1e-9) -> bool:
    if piece.basis.shape[1] != 1 or len(piece.vertices) != 2:
        return False
    a, b = piece.vertices
    d = b - a
    t = float(d @ (v - a) / (d @ d))
    return -tol <= t <= 1 + tol and np.max(np.abs(a + t * d - v)) <= tol * (1 + np.abs(v).max())


def milp_solutions(p: AveProblem, lower: Any, upper: Any,
                   enum_cap: int = DEFAULT_ENUM_CAP) -> list[MilpPiece]:
    """AVE solutions inside a box, read off the bounded 0-1 model by brute force.

    Assignments that differ only on coordinates where ``x_i = 0`` give the
    same set; duplicates and points lying on a reported segment are dropped.
    """
    model = export_milp(p, "bounded", lower, upper)
    pieces = sorted(brute_force_milp(model, enum_cap), key=lambda q: -q.basis.shape[1])
    kept: list[MilpPiece] = []
    for piece in pieces:
        if piece.is_point:
            v = piece.vertices[0]
            if any(np.max(np.abs(v - k.vertices[0])) <= 1e-9 * (1 + np.abs(v).max())
                   for k in kept if k.is_point):
                continue
            if any(_on_segment(v, k) for k in kept):
                continue
        else:
            key = sorted(tuple(np.round(v, 9)) for v in piece.vertices)
            if any(sorted(tuple(np.round(v, 9)) for v in k.vertices) == key for k in kept):
                continue
        kept.append(piece)
    return kept


def prokopyev_optimum(p: AveProblem) -> tuple[float, Optional[np.ndarray]]:
    """Brute-force optimum of the alpha model: ``(alpha*, x*/alpha*)`` or ``(0, None)``."""
    model = export_milp(p, "prokopyev")
    n = p.n
    best, arg = 0.0, None
    for piece in brute_force_milp(model):
        if not np.isfinite(piece.objective):
            return np.inf, None
        alpha = -piece.objective
        if alpha > best + 1e-12:
            v = piece.vertices[0]
            best, arg = alpha, v[:n] / alpha
    return best, arg


# ------------------------------------------------------------ interval systems


@dataclass(frozen=True)
class IntervalMatrix:
    center: np.ndarray
    radius: np.ndarray

    def __post_init__(self) -> None:
        c = np.array(self.center, dtype=float, ndmin=1)
        r = np.array(self.radius, dtype=float, ndmin=1)
        if c.shape != r.shape:
            raise ValueError("center and radius shapes differ")
        if np.any(r < 0):
            raise ValueError("radius must be nonnegative")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "radius", r)

    @property
    def lower(self) -> np.ndarray:
        return self.center - self.radius

    @property
    def upper(self) -> np.ndarray:
        return self.center + self.radius

    @classmethod
    def from_bounds(cls, lo, hi):
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        return cls(0.5 * (lo + hi), 0.5 * (hi - lo))

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        return self.center + self.radius * rng.uniform(-1.0, 1.0, self.center.shape)


IntervalVector = IntervalMatrix


class NotRegularError(AvekitError):
    def __init__(self, message: str, certificate: Optional[dict] = None):
        super().__init__(message)
        self.certificate = certificate or {}


def interval_hull_vertices(Ai: IntervalMatrix, bi: IntervalVector,
                           enum_cap: int = DEFAULT_ENUM_CAP) -> np.ndarray:
    """Points ``x_s`` whose convex hull is the hull of the interval solution set.

    ``x_s`` solves ``Ac x - diag(s) Ad |x| = bc + diag(s) bd``; rows of the
    result follow Gray-code order of s.

    Raises
    ------
    NotRegularError
        When ``[Ac - Ad, Ac + Ad]`` is not regular.
    """
    from .solvers.direct import solve_sign_accord
    from .core import Status, gray_sign_vectors

    Ac, Ad = Ai.center, Ai.radius
    bc, bd = bi.center, bi.radius
    n = bc.size
    check_enum_size(n, enum_cap)
    alt_i, _ = theorem_of_alternatives(Ac, Ad, enum_cap)
    if not alt_i.holds:
        raise NotRegularError("interval matrix is not regular", alt_i.certificate)
    out = np.empty((1 << n, n))
    for k, s in enumerate(gray_sign_vectors(n)):
        g = GaveProblem(Ac, s[:, None] * Ad, bc + s * bd)
        res = solve_sign_accord(g)
        if res.status is not Status.CONVERGED:
            raise NotRegularError(f"sign accord failed for s={s}", {"s": s, **res.info})
        out[k] = res.x
    return out


def weak_strong_membership(Ai: IntervalMatrix, bi: IntervalVector, x: Any,
                           tol: float = 1e-10) -> dict:
    """Is x a weak or a strong solution of ``[A] x <= [b]``?"""
    x = np.asarray(x, dtype=float)
    ax = np.abs(x)
    slack = tol * (1.0 + np.abs(bi.center).max(initial=0.0) + np.abs(bi.radius).max(initial=0.0))
    weak = Ai.center @ x - Ai.radius @ ax <= bi.upper + slack
    strong = Ai.center @ x + Ai.radius @ ax <= bi.lower + slack
    return {"weak": bool(np.all(weak)), "strong": bool(np.all(strong))}


def ave_membership(p: AveProblem, x: Any, tol: float = 1e-10) -> bool:
    """x solves the AVE iff it is weak for ``[A-I, A+I] x <= b`` and strong
    for ``-[A-I, A+I] x <= -b``."""
    n = p.n
    zero = np.zeros(n)
    I = np.eye(n)
    weak = weak_strong_membership(IntervalMatrix(p.A, I), IntervalVector(p.b, zero), x, tol)["weak"]
    strong = weak_strong_membership(IntervalMatrix(-p.A, I), IntervalVector(-p.b, zero), x, tol)["strong"]
    return weak and strong


def theorem_of_alternatives(A: Any, D: Any, enum_cap: int = DEFAULT_ENUM_CAP) -> tuple[Verdict, Verdict]:
    """Decide which alternative holds for ``A`` and ``D >= 0``.

    (i) ``A x - B|x| = b`` is uniquely solvable for every ``|B| <= D`` and
    every b, which is regularity of ``[A - D, A + D]``; (ii) ``|A x| <= D|x|``
    has a nontrivial solution. The vertices ``A - diag(y) D diag(z)`` are
    scanned with ``y_1 = +1``; for (ii) the witness is a null vector of the
    first singular member found.
    """
    A = np.asarray(A, dtype=float)
    D = np.asarray(D, dtype=float)
    n = A.shape[0]
    if np.any(D < 0):
        raise ValueError("D must be nonnegative")
    check_enum_size(n, enum_cap)
    from .core import gray_sign_vectors

    failing = None
    if np.array_equal(D, np.diag(np.diag(D))):
        # the vertices reduce to A - D diag(s)
        v = regularity_enumeration(A, np.diag(np.diag(D)), enum_cap)
        if v.fails:
            failing = v.certificate
    else:
        ys = gray_sign_vectors(n)
        ys = ys[ys[:, 0] > 0] if n > 0 else ys
        for y in ys:
            v = regularity_enumeration(A, -(y[:, None] * D), enum_cap)
            if v.fails:
                failing = dict(v.certificate)
                failing["y"] = y
                break
    if failing is None:
        return (Verdict("alternative_i", State.HOLDS, {"checked": "all vertices share the sign of det(A)"}),
                Verdict("alternative_ii", State.FAILS, {}))
    x = np.asarray(failing["null_vector"], dtype=float)
    x = x / np.abs(x).max()
    lhs, rhs = np.abs(A @ x), D @ np.abs(x)
    cert = {"witness": x, "lhs": lhs, "rhs": rhs, "member": failing["member"]}
    return (Verdict("alternative_i", State.FAILS, {"member": failing["member"]}),
            Verdict("alternative_ii", State.HOLDS, cert))


def set_partition_ave(a: Any) -> Reduction:
    """AVE of size n+2 that is solvable iff some ``x in {-1,1}^n`` has ``a^T x = 0``.

    Rows ``-|x_i| = -1`` fix ``|x_i| = 1``; the last two rows read
    ``-a^T x - |x_{n+1}| = 0`` and ``a^T x - |x_{n+2}| = 0``, which force
    ``a^T x = 0``.
    """
    a = np.asarray(a, dtype=float).reshape(-1)
    n = a.size
    A = np.zeros((n + 2, n + 2))
    A[n, :n] = -a
    A[n + 1, :n] = a
    b = np.concatenate([-np.ones(n), [0.0, 0.0]])
    return Reduction(AveProblem(A, b),
                     back=lambda x: np.asarray(x, dtype=float)[:n],
                     forward=lambda s: np.concatenate([np.asarray(s, dtype=float), [0.0, 0.0]]),
                     notes={"source": "set partitioning"})


__all__ = [
    "IntervalMatrix", "IntervalVector", "Lcp", "MilpPiece", "MixedIntegerModel", "MpsParseError",
    "NotRegularError", "Reduction", "ave_membership", "ave_to_lcp", "brute_force_milp", "cayley",
    "enumerate_lcp", "export_milp", "gave_to_ave", "interval_hull_vertices", "lcp_to_ave",
    "milp_solutions", "ngave_residual", "ngave_to_gave", "parse_mps", "prokopyev_optimum", "set_partition_ave",
    "singular_member", "sylvester_to_gave", "theorem_of_alternatives", "transform_al",
    "transform_la", "weak_strong_membership", "write_mps",
]
