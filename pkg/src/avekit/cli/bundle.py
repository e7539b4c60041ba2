"""Problem files: the JSON bundle and dense Matrix Market arrays."""

from __future__ import annotations

import io
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

import numpy as np
import scipy.io

from ..core import AvekitError, AveProblem, GaveProblem

SCHEMA_VERSION = 1


class BundleParseError(AvekitError, ValueError):
    pass


@dataclass
class ProblemBundle:
    """``A x - |x| = b`` (or ``A x - B|x| = b`` when B is present) plus metadata."""

    A: np.ndarray
    b: np.ndarray
    B: Optional[np.ndarray] = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.A = np.array(self.A, dtype=float)
        self.b = np.array(self.b, dtype=float).reshape(-1)
        if self.B is not None:
            self.B = np.array(self.B, dtype=float)

    @property
    def n(self) -> int:
        return self.b.size

    def problem(self) -> AveProblem | GaveProblem:
        if self.B is None:
            return AveProblem(self.A, self.b)
        return GaveProblem(self.A, self.B, self.b)

    @classmethod
    def from_problem(cls, p: AveProblem | GaveProblem, metadata: Optional[dict] = None) -> "ProblemBundle":
        B = p.B if isinstance(p, GaveProblem) else None
        return cls(p.A, p.b, B, dict(metadata or {}))


def _fmt(v: float) -> str:
    v = float(v)
    if not np.isfinite(v):
        raise ValueError("bundle entries must be finite")
    return format(v, ".17g")


def _fmt_list(values) -> str:
    return "[" + ", ".join(_fmt(v) for v in np.asarray(values, dtype=float).ravel()) + "]"


def dumps_bundle(bundle: ProblemBundle) -> str:
    """Serialize with 17 significant digits, which restores every double exactly."""
    parts = [f'  "schema_version": {SCHEMA_VERSION}', f'  "n": {bundle.n}',
             f'  "A": {_fmt_list(bundle.A)}']
    if bundle.B is not None:
        parts.append(f'  "B": {_fmt_list(bundle.B)}')
    parts.append(f'  "b": {_fmt_list(bundle.b)}')
    if bundle.metadata:
        parts.append(f'  "metadata": {json.dumps(bundle.metadata, sort_keys=True)}')
    return "{\n" + ",\n".join(parts) + "\n}\n"


def _field(doc: dict, name: str, size: int) -> np.ndarray:
    if name not in doc:
        raise BundleParseError(f"field {name!r}: missing")
    raw = doc[name]
    if not isinstance(raw, list) or not all(isinstance(v, (int, float)) and not isinstance(v, bool)
                                            for v in raw):
        raise BundleParseError(f"field {name!r}: expected a list of numbers")
    if len(raw) != size:
        raise BundleParseError(f"field {name!r}: expected {size} entries, got {len(raw)}")
    out = np.array(raw, dtype=float)
    if not np.all(np.isfinite(out)):
        raise BundleParseError(f"field {name!r}: non-finite entry")
    return out


def loads_bundle(text: str) -> ProblemBundle:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise BundleParseError(f"line {exc.lineno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise BundleParseError("top level must be an object")
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise BundleParseError(f"field 'schema_version': expected {SCHEMA_VERSION}, got {doc.get('schema_version')!r}")
    n = doc.get("n")
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise BundleParseError(f"field 'n': expected a positive integer, got {n!r}")
    A = _field(doc, "A", n * n).reshape(n, n)
    b = _field(doc, "b", n)
    B = _field(doc, "B", n * n).reshape(n, n) if "B" in doc else None
    meta = doc.get("metadata", {})
    if not isinstance(meta, dict):
        raise BundleParseError("field 'metadata': expected an object")
    return ProblemBundle(A, b, B, meta)


def write_bundle(bundle: ProblemBundle, path: str | Path) -> None:
    Path(path).write_text(dumps_bundle(bundle))


def read_bundle(path: str | Path) -> ProblemBundle:
    return loads_bundle(Path(path).read_text())


def write_matrix(M: Any, target) -> None:
    """Dense ``array real general`` Matrix Market file (column-major body)."""
    M = np.asarray(M, dtype=float)
    if M.ndim == 1:
        M = M[:, None]
    scipy.io.mmwrite(target, M, precision=17)


def read_matrix(source) -> np.ndarray:
    try:
        M = scipy.io.mmread(source)
    except ValueError as exc:
        raise BundleParseError(f"Matrix Market: {exc}") from exc
    if hasattr(M, "toarray"):
        M = M.toarray()
    return np.asarray(M, dtype=float)


def matrix_to_text(M: Any) -> str:
    buf = io.BytesIO()
    write_matrix(M, buf)
    return buf.getvalue().decode()


def matrix_from_text(text: str) -> np.ndarray:
    return read_matrix(io.BytesIO(text.encode()))


def read_problem(path: str | Path, rhs: Optional[str | Path] = None) -> ProblemBundle:
    """A JSON bundle, or a Matrix Market A together with a Matrix Market b."""
    path = Path(path)
    if path.suffix == ".mtx":
        if rhs is None:
            raise BundleParseError("a Matrix Market matrix needs --rhs")
        A = read_matrix(str(path))
        b = read_matrix(str(rhs)).reshape(-1)
        if A.shape != (b.size, b.size):
            raise BundleParseError(f"A is {A.shape} but b has {b.size} entries")
        return ProblemBundle(A, b)
    return read_bundle(path)
