"""Multivariate time series with missing samples.

A missing entry is a tagged state carried by a boolean mask, never an IEEE
NaN payload. Values stored under a missing tag are always ``0.0`` so that
masked arithmetic gives ``0 * MISSING = 0`` while ``1 * MISSING`` stays
missing (the mask propagates).
"""
from __future__ import annotations

import enum
import io
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionError, DomainError, ParseError

MISSING_LITERAL = "NaN"


@dataclass(frozen=True)
class Complexity:
    """Model class ``(m, p, n, ell)``: inputs, outputs, order and lag."""

    m: int
    p: int
    n: int
    ell: int

    def __post_init__(self):
        for name in ("m", "p", "n", "ell"):
            v = getattr(self, name)
            if int(v) != v or v < 0:
                raise DomainError(f"{name} must be a nonnegative integer, got {v!r}")
            object.__setattr__(self, name, int(v))
        if self.p < 1:
            raise DomainError("at least one output is required (p >= 1)")
        if self.ell >= 1 and not (self.ell <= self.n <= self.p * self.ell):
            raise DomainError(
                f"need ell <= n <= p*ell, got ell={self.ell}, n={self.n}, p={self.p}"
            )
        if self.ell == 0 and self.n != 0:
            raise DomainError("a system with lag 0 must have order 0")

    @property
    def q(self) -> int:
        return self.m + self.p

    def kernel_rows(self, d: int) -> int:
        """Dimension ``pd - n`` of the left kernel of a depth-``d`` Hankel matrix."""
        return self.p * d - self.n

    def behavior_dim(self, L: int) -> int:
        """Dimension ``mL + n`` of the restricted behavior of length ``L``."""
        return self.m * L + self.n


def _as_values_and_mask(values, mask=None) -> tuple[np.ndarray, np.ndarray]:
    arr = np.array(values, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise DimensionError(f"signal values must be 1-D or 2-D, got shape {arr.shape}")
    if mask is None:
        given = ~np.isnan(arr)
    else:
        given = np.array(mask, dtype=bool)
        if given.ndim == 1:
            given = given[:, None]
        if given.shape != arr.shape:
            raise DimensionError(f"mask shape {given.shape} != values shape {arr.shape}")
        given = given & ~np.isnan(arr)
    if np.isinf(arr[given]).any():
        raise DomainError("signal values must be finite or missing")
    arr = np.where(given, arr, 0.0)
    return arr, given


@dataclass(frozen=True, eq=False)
class IrregularSignal:
    """A ``T x q`` time series; the first ``m`` columns are inputs.

    Build from an array with ``np.nan`` marking missing entries via
    :meth:`from_array`, or pass ``values`` and an explicit ``given`` mask.
    """

    values: np.ndarray
    given: np.ndarray
    m: int = 0

    def __post_init__(self):
        vals, given = _as_values_and_mask(self.values, self.given)
        if vals.shape[0] < 1:
            raise DimensionError("a signal needs at least one sample")
        if vals.shape[1] < 1:
            raise DimensionError("a signal needs at least one variable")
        if not 0 <= self.m < vals.shape[1]:
            raise DimensionError(
                f"input count m={self.m} incompatible with q={vals.shape[1]} (need p >= 1)"
            )
        vals.flags.writeable = False
        given.flags.writeable = False
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "given", given)

    @classmethod
    def from_array(cls, arr, m: int = 0) -> "IrregularSignal":
        arr = np.array(arr, dtype=float)
        if arr.ndim == 1:
            arr = arr[:, None]
        return cls(arr, ~np.isnan(arr), m)

    @classmethod
    def from_io(cls, u, y) -> "IrregularSignal":
        """Stack inputs ``u`` (``T x m``) and outputs ``y`` (``T x p``)."""
        y = np.asarray(y, dtype=float)
        if y.ndim == 1:
            y = y[:, None]
        u = np.zeros((y.shape[0], 0)) if u is None else np.asarray(u, dtype=float)
        if u.ndim == 1:
            u = u[:, None]
        if u.shape[0] != y.shape[0]:
            raise DimensionError("u and y must have the same number of samples")
        return cls.from_array(np.hstack([u, y]), m=u.shape[1])

    @property
    def T(self) -> int:
        return self.values.shape[0]

    @property
    def q(self) -> int:
        return self.values.shape[1]

    @property
    def p(self) -> int:
        return self.q - self.m

    @property
    def u(self) -> np.ndarray:
        return self.values[:, : self.m]

    @property
    def y(self) -> np.ndarray:
        return self.values[:, self.m :]

    @property
    def n_missing(self) -> int:
        return int((~self.given).sum())

    def is_complete(self) -> bool:
        return bool(self.given.all())

    def to_array(self) -> np.ndarray:
        """Copy of the values with ``np.nan`` at missing entries."""
        return np.where(self.given, self.values, np.nan)

    def stacked(self) -> np.ndarray:
        """Time-major stacking ``(w(0), w(1), ...)`` as a vector of length ``qT``."""
        return self.values.reshape(-1).copy()

    def stacked_given(self) -> np.ndarray:
        return self.given.reshape(-1).copy()

    def head(self, T: int) -> "IrregularSignal":
        return IrregularSignal(self.values[:T], self.given[:T], self.m)

    def check_complexity(self, cx: Complexity) -> None:
        if cx.q != self.q or cx.m != self.m:
            raise DimensionError(
                f"signal has (m, q) = ({self.m}, {self.q}) but complexity expects ({cx.m}, {cx.q})"
            )

    def __eq__(self, other):
        if not isinstance(other, IrregularSignal):
            return NotImplemented
        return (
            self.m == other.m
            and self.values.shape == other.values.shape
            and np.array_equal(self.given, other.given)
            and np.array_equal(self.values, other.values)
        )

    def __repr__(self):
        return f"IrregularSignal(T={self.T}, q={self.q}, m={self.m}, missing={self.n_missing})"


class PatternKind(enum.Enum):
    NONE = "none"
    RANDOM = "random"
    PERIODIC_OUTPUT = "periodic_output"
    EXPLICIT = "explicit"


@dataclass(frozen=True)
class MissingPattern:
    """Which entries of a complete signal to hide.

    ``RANDOM`` removes exactly ``floor(fraction * N)`` of the ``N`` entries
    in ``columns`` (all columns when ``None``). ``EXPLICIT`` takes sample
    indices (whole sample removed) or ``(t, column)`` pairs.
    """

    kind: PatternKind
    fraction: float | None = None
    seed: int | None = None
    period: int | None = None
    indices: tuple = ()
    columns: tuple[int, ...] | None = None

    @classmethod
    def none(cls) -> "MissingPattern":
        return cls(PatternKind.NONE)

    @classmethod
    def random(cls, fraction: float, seed: int | None = None, columns=None) -> "MissingPattern":
        if not 0.0 < fraction < 1.0:
            raise DomainError(f"missing fraction must lie in (0, 1), got {fraction}")
        cols = None if columns is None else tuple(int(c) for c in columns)
        return cls(PatternKind.RANDOM, fraction=float(fraction), seed=seed, columns=cols)

    @classmethod
    def periodic_output(cls, period: int) -> "MissingPattern":
        if period < 2:
            raise DomainError(f"period must be >= 2, got {period}")
        return cls(PatternKind.PERIODIC_OUTPUT, period=int(period))

    @classmethod
    def explicit(cls, indices: Iterable) -> "MissingPattern":
        idx = []
        for i in indices:
            idx.append(tuple(int(v) for v in i) if isinstance(i, (tuple, list)) else int(i))
        return cls(PatternKind.EXPLICIT, indices=tuple(idx))


def apply_pattern(signal: IrregularSignal, pattern: MissingPattern) -> IrregularSignal:
    """Hide the entries selected by ``pattern`` in a complete signal."""
    if not signal.is_complete():
        raise DomainError("apply_pattern expects a complete signal")
    given = np.ones_like(signal.given)
    T, q = given.shape
    kind = pattern.kind
    if kind is PatternKind.NONE:
        pass
    elif kind is PatternKind.RANDOM:
        if pattern.fraction is None or not 0.0 < pattern.fraction < 1.0:
            raise DomainError(f"missing fraction must lie in (0, 1), got {pattern.fraction}")
        cols = list(range(q)) if pattern.columns is None else list(pattern.columns)
        if any(c < 0 or c >= q for c in cols):
            raise DimensionError(f"pattern columns {cols} out of range for q={q}")
        n_total = T * len(cols)
        n_miss = math.floor(pattern.fraction * n_total)
        rng = np.random.default_rng(pattern.seed)
        picked = rng.permutation(n_total)[:n_miss]
        sub = np.ones(n_total, dtype=bool)
        sub[picked] = False
        given[:, cols] = sub.reshape(T, len(cols))
    elif kind is PatternKind.PERIODIC_OUTPUT:
        k = pattern.period
        given[k - 1 :: k, signal.m :] = False
    elif kind is PatternKind.EXPLICIT:
        for idx in pattern.indices:
            if isinstance(idx, tuple):
                t, c = idx
                if not (0 <= t < T and 0 <= c < q):
                    raise DimensionError(f"entry {idx} out of range for a {T}x{q} signal")
                given[t, c] = False
            else:
                if not 0 <= idx < T:
                    raise DimensionError(f"sample {idx} out of range for T={T}")
                given[idx, :] = False
    else:  # pragma: no cover
        raise DomainError(f"unknown pattern kind {kind}")
    return IrregularSignal(signal.values, given, signal.m)


def format_number(x: float) -> str:
    """Shortest decimal that round-trips to the same double (at most 17 digits)."""
    x = float(x)
    if np.isnan(x):
        return MISSING_LITERAL
    s = repr(x)
    if s.endswith(".0"):
        s = s[:-2]
    if s == "-0":
        s = "0"
    return s


def _parse_token(tok: str, row: int) -> float:
    tok = tok.strip()
    if tok == MISSING_LITERAL:
        return math.nan
    try:
        v = float(tok)
    except ValueError:
        raise ParseError(f"row {row}: non-numeric token {tok!r}") from None
    if not math.isfinite(v):
        raise ParseError(f"row {row}: token {tok!r} is not a finite number or {MISSING_LITERAL}")
    return v


def _header_inputs(tokens: Sequence[str]) -> int | None:
    names = [t.strip() for t in tokens]
    if not names or not all(n[:1] in ("u", "y") and n[1:].isdigit() for n in names):
        return None
    m = sum(1 for n in names if n.startswith("u"))
    if names != [f"u{i + 1}" for i in range(m)] + [f"y{i + 1}" for i in range(len(names) - m)]:
        raise ParseError(f"header must read u1..um,y1..yp, got {','.join(names)}")
    return m


def parse_csv(text, m: int | None = None) -> IrregularSignal:
    """Read a time-major CSV; ``NaN`` marks a missing entry.

    The input/output split comes from a ``u1..um,y1..yp`` header when one is
    present, otherwise from ``m`` (default 0, all columns outputs).
    """
    if not isinstance(text, str):
        text = text.read()
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        raise ParseError("empty input")
    first = lines[0].split(",")
    m_header = _header_inputs(first)
    if m_header is not None:
        if m is not None and m != m_header:
            raise ParseError(f"header declares m={m_header} but m={m} was requested")
        m = m_header
        lines = lines[1:]
        if not lines:
            raise ParseError("header without data rows")
    m = 0 if m is None else m
    rows = []
    width = None
    for i, line in enumerate(lines):
        toks = line.split(",")
        if width is None:
            width = len(toks)
        elif len(toks) != width:
            raise ParseError(f"ragged row {i}: expected {width} fields, got {len(toks)}")
        rows.append([_parse_token(t, i) for t in toks])
    if not 0 <= m < width:
        raise ParseError(f"m={m} leaves no output columns among {width}")
    return IrregularSignal.from_array(np.array(rows, dtype=float), m=m)


def write_csv(signal: IrregularSignal, header: bool = False) -> str:
    """Serialize ``signal`` time-major; the inverse of :func:`parse_csv`."""
    out = io.StringIO()
    lines = []
    if header:
        lines.append(
            ",".join([f"u{i + 1}" for i in range(signal.m)] + [f"y{i + 1}" for i in range(signal.p)])
        )
    for t in range(signal.T):
        lines.append(
            ",".join(
                format_number(v) if g else MISSING_LITERAL
                for v, g in zip(signal.values[t], signal.given[t])
            )
        )
    out.write("\n".join(lines))
    return out.getvalue()
