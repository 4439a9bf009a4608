"""Hankel matrices of incomplete signals and their complete submatrices."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .errors import DimensionError
from .signals import IrregularSignal


@dataclass(frozen=True, eq=False)
class MaskedMatrix:
    """A Hankel matrix whose entries may be missing.

    Row ``i*q + v`` holds variable ``v`` at time offset ``i``; column ``j``
    is the window starting at sample ``j``.
    """

    values: np.ndarray
    given: np.ndarray
    depth: int
    q: int

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    @property
    def row_index_map(self) -> list[tuple[int, int]]:
        return [(r // self.q, r % self.q) for r in range(self.values.shape[0])]

    @property
    def col_index_map(self) -> list[int]:
        return list(range(self.values.shape[1]))

    def is_complete(self) -> bool:
        return bool(self.given.all())

    def to_array(self) -> np.ndarray:
        return np.where(self.given, self.values, np.nan)

    def top_left(self, depth: int, n_cols: int) -> "MaskedMatrix":
        rows = depth * self.q
        return MaskedMatrix(
            self.values[:rows, :n_cols].copy(), self.given[:rows, :n_cols].copy(), depth, self.q
        )


def _hankel_stack(x: np.ndarray, L: int) -> np.ndarray:
    """Rows ``i*q + v`` = ``x[i + j, v]`` for windows ``j = 0 .. T-L``."""
    T, q = x.shape
    win = np.lib.stride_tricks.sliding_window_view(x, L, axis=0)  # (T-L+1, q, L)
    return np.ascontiguousarray(win.transpose(2, 1, 0).reshape(L * q, T - L + 1))


def build_hankel(signal: IrregularSignal, L: int) -> MaskedMatrix:
    """Depth-``L`` Hankel matrix ``[w_[0,L-1] ... w_[T-L,T-1]]``."""
    if L < 1 or L > signal.T:
        raise DimensionError(f"depth L={L} must satisfy 1 <= L <= T={signal.T}")
    return MaskedMatrix(
        _hankel_stack(signal.values, L), _hankel_stack(signal.given, L), L, signal.q
    )


def hankel_matrix(w, L: int) -> np.ndarray:
    """Dense Hankel matrix of a complete ``T x q`` array (or a complete signal)."""
    if isinstance(w, IrregularSignal):
        if not w.is_complete():
            raise DimensionError("hankel_matrix needs a complete signal")
        w = w.values
    x = np.asarray(w, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if L < 1 or L > x.shape[0]:
        raise DimensionError(f"depth L={L} must satisfy 1 <= L <= T={x.shape[0]}")
    return _hankel_stack(x, L)


def build_extended_hankel(signal: IrregularSignal) -> MaskedMatrix:
    """``H_T`` of the signal padded with ``T`` missing samples: ``Tq x (T+1)``."""
    T, q = signal.T, signal.q
    vals = np.vstack([signal.values, np.zeros((T, q))])
    given = np.vstack([signal.given, np.zeros((T, q), dtype=bool)])
    return MaskedMatrix(_hankel_stack(vals, T), _hankel_stack(given, T), T, q)


@dataclass(frozen=True, eq=False)
class SubmatrixCandidate:
    """A complete submatrix ``H[kept_rows][:, columns]`` of a depth-``d`` Hankel matrix."""

    depth: int
    columns: tuple[int, ...]
    deleted_rows: tuple[int, ...]
    kept_rows: tuple[int, ...]
    matrix: np.ndarray
    n_classes: int = 1

    @property
    def n_rows(self) -> int:
        return len(self.kept_rows)

    @property
    def n_cols(self) -> int:
        return len(self.columns)


@dataclass
class _Classes:
    missing: np.ndarray  # (k, rows) bool, one row per distinct column pattern
    first_col: np.ndarray  # (k,) first column having the pattern


def _column_classes(miss: np.ndarray) -> _Classes:
    if miss.shape[1] == 0:
        return _Classes(np.zeros((0, miss.shape[0]), dtype=bool), np.zeros(0, dtype=int))
    patterns, first = np.unique(miss.T, axis=0, return_index=True)
    order = np.argsort(first, kind="stable")
    return _Classes(patterns[order], first[order])


def _closure(miss: np.ndarray, deleted: np.ndarray) -> np.ndarray:
    """Columns that are complete once the rows in ``deleted`` are removed."""
    return np.flatnonzero(~(miss & ~deleted[:, None]).any(axis=0))


def iter_submatrix_candidates(
    H: MaskedMatrix,
    budget: int = 3,
    min_rows: int = 0,
    min_cols: int = 1,
    max_unions: int | None = 2000,
) -> Iterator[SubmatrixCandidate]:
    """Lazily yield complete submatrices of ``H``.

    First one candidate per distinct missing-row pattern of the columns, then
    unions of up to ``budget`` patterns. A candidate deletes the union of its
    patterns' missing rows and keeps every column that is complete on the
    remaining rows. Only candidates with more than ``min_rows`` rows and at
    least ``min_cols`` columns are produced. Each group is ordered by
    descending column count, then ascending first column.
    """
    miss = ~H.given
    classes = _column_classes(miss)
    n_rows = miss.shape[0]
    seen: set[bytes] = set()

    def make(deleted: np.ndarray, n_classes: int) -> SubmatrixCandidate | None:
        key = np.packbits(deleted).tobytes()
        if key in seen:
            return None
        seen.add(key)
        kept = np.flatnonzero(~deleted)
        if kept.size <= min_rows or kept.size == 0:
            return None
        cols = _closure(miss, deleted)
        if cols.size < max(min_cols, 1):
            return None
        return SubmatrixCandidate(
            depth=H.depth,
            columns=tuple(int(c) for c in cols),
            deleted_rows=tuple(int(r) for r in np.flatnonzero(deleted)),
            kept_rows=tuple(int(r) for r in kept),
            matrix=H.values[np.ix_(kept, cols)],
            n_classes=n_classes,
        )

    def ordered(cands):
        return sorted(cands, key=lambda c: (-c.n_cols, c.columns[0]))

    singles = [make(classes.missing[i], 1) for i in range(len(classes.first_col))]
    yield from ordered(c for c in singles if c is not None)

    if budget < 2 or len(classes.first_col) < 2:
        return
    # unions only of patterns that leave enough rows on their own
    n_kept = n_rows - classes.missing.sum(axis=1)
    usable = np.flatnonzero(n_kept > min_rows)
    unions: list[SubmatrixCandidate] = []
    cap = max_unions if max_unions is not None else np.inf

    def extend(start: int, acc: np.ndarray, size: int):
        for pos in range(start, len(usable)):
            if len(unions) >= cap:
                return
            merged = acc | classes.missing[usable[pos]]
            if n_rows - merged.sum() <= min_rows:
                continue
            if size + 1 >= 2:
                cand = make(merged, size + 1)
                if cand is not None:
                    unions.append(cand)
            if size + 1 < budget:
                extend(pos + 1, merged, size + 1)

    for i in range(len(usable)):
        if len(unions) >= cap:
            break
        extend(i + 1, classes.missing[usable[i]], 1)
    yield from ordered(unions)


def complete_submatrix_candidates(
    H: MaskedMatrix,
    budget: int = 3,
    min_rows: int = 0,
    min_cols: int = 1,
    max_unions: int | None = 2000,
) -> list[SubmatrixCandidate]:
    """All candidates of :func:`iter_submatrix_candidates` as a list."""
    return list(iter_submatrix_candidates(H, budget, min_rows, min_cols, max_unions))
