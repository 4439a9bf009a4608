"""Kernel representations from irregular measurements.

:func:`identify_exact` searches complete submatrices of Hankel matrices of
increasing depth for rank ``md + n`` blocks, turns their left kernels into
annihilators by zero insertion, and stops once ``pd - n`` independent
annihilators are known. :func:`identify_noisy` replaces each block and the
collected annihilators by truncated SVD approximations.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import DimensionError, DomainError, NoDataError, RankError
from .hankel import build_extended_hankel, iter_submatrix_candidates
from .numerics import (
    DEFAULT_TOL,
    ToleranceConfig,
    left_nullspace_basis,
    numerical_rank,
    rank_from_singular_values,
    select_independent_rows,
    truncated_svd,
)
from .signals import Complexity, IrregularSignal


@dataclass(frozen=True, eq=False)
class KernelRep:
    """Coefficients ``R`` (``(pd - n) x qd``) of a kernel representation of depth ``d``."""

    R: np.ndarray
    depth: int
    complexity: Complexity
    exact: bool = True

    def __post_init__(self):
        R = np.atleast_2d(np.asarray(self.R, dtype=float))
        cx, d = self.complexity, self.depth
        if d < cx.ell + 1:
            raise DomainError(f"kernel depth {d} must be at least ell + 1 = {cx.ell + 1}")
        expected = (cx.kernel_rows(d), cx.q * d)
        if cx.kernel_rows(d) == 0:
            R = R.reshape(0, cx.q * d)
        if R.shape != expected:
            raise DimensionError(f"R has shape {R.shape}, expected {expected}")
        R.flags.writeable = False
        object.__setattr__(self, "R", R)

    def block(self, row: int, k: int) -> np.ndarray:
        """Coefficient ``r_{row,k}`` (a ``1 x q`` block)."""
        q = self.complexity.q
        return self.R[row, k * q : (k + 1) * q]


class Status(enum.Enum):
    SUCCESS = "success"
    PARTIAL = "partial"


@dataclass
class DepthDiagnostics:
    depth: int
    candidates: int = 0
    accepted: int = 0
    rank: int = 0
    target: int = 0


@dataclass
class IdentOutcome:
    status: Status
    kernel: KernelRep | None
    partial_annihilators: np.ndarray | None
    depth: int
    diagnostics: list[DepthDiagnostics] = field(default_factory=list)

    @property
    def success(self) -> bool:
        return self.status is Status.SUCCESS


def extend_kernel_rows(Zbar, deleted_rows, full_width: int) -> np.ndarray:
    """Insert zero columns at ``deleted_rows`` so that ``Z`` has ``full_width`` columns."""
    Zbar = np.atleast_2d(np.asarray(Zbar, dtype=float))
    deleted = [int(i) for i in deleted_rows]
    if len(set(deleted)) != len(deleted):
        raise IndexError(f"duplicate deleted row indices {deleted}")
    if any(i < 0 or i >= full_width for i in deleted):
        raise IndexError(f"deleted rows {deleted} out of range for width {full_width}")
    if Zbar.shape[1] + len(deleted) != full_width:
        raise IndexError(
            f"{Zbar.shape[1]} kept columns + {len(deleted)} deleted != width {full_width}"
        )
    keep = np.setdiff1d(np.arange(full_width), deleted)
    Z = np.zeros((Zbar.shape[0], full_width))
    Z[:, keep] = Zbar
    return Z


def canonical_kernel_rows(R: np.ndarray, cx: Complexity) -> np.ndarray:
    """Orthonormal basis of ``rowspace(R)`` ordered for shift-chain extension.

    The rows are rotated so that the first ``p`` rows carry the largest
    components in the last block of ``q`` coefficients; this keeps the
    shifted copies used to build deeper annihilator matrices independent.
    """
    R = np.atleast_2d(np.asarray(R, dtype=float))
    if R.shape[0] == 0:
        return R.copy()
    # R is assumed to have full row rank; no threshold so the row count is kept
    Q = np.linalg.svd(R, full_matrices=False)[2]
    last = Q[:, -cx.q :]
    U, _, _ = np.linalg.svd(last, full_matrices=True)
    return U.T @ Q


def _check_inputs(signal: IrregularSignal, cx: Complexity, d_max: int | None) -> int:
    signal.check_complexity(cx)
    if not signal.given.any():
        raise NoDataError("signal has no given entries")
    d_max = signal.T if d_max is None else int(d_max)
    if d_max < cx.ell + 1:
        raise DomainError(f"d_max={d_max} is below ell + 1 = {cx.ell + 1}")
    if d_max > signal.T:
        raise DomainError(f"d_max={d_max} exceeds T={signal.T}")
    return d_max


def _identify(
    signal: IrregularSignal,
    cx: Complexity,
    d_max: int | None,
    budget: int,
    cfg: ToleranceConfig,
    noisy: bool,
    max_unions: int | None,
) -> IdentOutcome:
    d_max = _check_inputs(signal, cx, d_max)
    T, q = signal.T, cx.q
    Hext = build_extended_hankel(signal)
    n_rows = 0
    weights: list[float] = []
    Z = np.zeros((0, 0))
    # triangular factor of Z: same singular values, cheap to update row by row
    tri = np.zeros((0, 0))
    rank = 0
    diags: list[DepthDiagnostics] = []
    d = cx.ell
    for d in range(cx.ell + 1, d_max + 1):
        width = q * d
        target = cx.kernel_rows(d)
        Z = np.hstack([Z, np.zeros((Z.shape[0], width - Z.shape[1]))])
        tri = np.hstack([tri, np.zeros((tri.shape[0], width - tri.shape[1]))])
        diag = DepthDiagnostics(depth=d, rank=rank, target=target)
        diags.append(diag)
        rank_needed = cx.behavior_dim(d)
        Hd = Hext.top_left(d, T - d + 1)
        blocks = []
        for cand in iter_submatrix_candidates(
            Hd, budget=budget, min_rows=rank_needed, min_cols=rank_needed, max_unions=max_unions
        ):
            diag.candidates += 1
            U, sv, _ = np.linalg.svd(cand.matrix, full_matrices=True)
            r = rank_from_singular_values(sv, cand.matrix.shape, cfg)
            if r < rank_needed or (not noisy and r != rank_needed):
                continue
            # noisy path: left kernel of the rank-(md+n) truncation, i.e. the trailing singular vectors
            Zbar = U[:, rank_needed:].T
            if Zbar.shape[0] == 0:
                continue
            diag.accepted += 1
            Zi = extend_kernel_rows(Zbar, cand.deleted_rows, width)
            blocks.append(Zi)
            # null vectors of a nearly rank-deficient block are less accurate
            weights.extend([sv[rank_needed - 1] / sv[0]] * Zi.shape[0])
            n_rows += Zi.shape[0]
            tri = scipy.linalg.qr(np.vstack([tri, Zi]), mode="r")[0][:width]
            s = np.linalg.svd(tri, compute_uv=False)
            rank = rank_from_singular_values(s, (n_rows, width), cfg)
            diag.rank = rank
            if rank >= target:
                break
        if blocks:
            Z = np.vstack([Z] + blocks)
        if rank >= target:
            break

    target = cx.kernel_rows(d)
    if rank < target or (not noisy and rank != target):
        return IdentOutcome(Status.PARTIAL, None, Z, d, diags)
    Zhat = Z
    if noisy and numerical_rank(Z, cfg) > target:
        Zhat = truncated_svd(Z, target)
    try:
        # pivoting on weighted rows prefers annihilators from well-conditioned blocks
        picked = Zhat[select_independent_rows(Zhat * np.asarray(weights)[:, None], target, cfg)]
    except RankError:
        # rank sits at the threshold; the dominant row space is the better conditioned choice
        picked = np.linalg.svd(Zhat, full_matrices=False)[2][:target]
    R = canonical_kernel_rows(picked, cx)
    return IdentOutcome(
        Status.SUCCESS, KernelRep(R, d, cx, exact=not noisy), None, d, diags
    )


def identify_exact(
    signal: IrregularSignal,
    cx: Complexity,
    d_max: int | None = None,
    budget: int = 3,
    cfg: ToleranceConfig = DEFAULT_TOL,
    max_unions: int | None = 2000,
) -> IdentOutcome:
    """Kernel representation from exact irregular data.

    Returns ``SUCCESS`` with ``R_d`` once ``pd - n`` independent annihilators
    are found at some depth ``d <= d_max``, otherwise ``PARTIAL`` carrying
    the annihilators collected so far.
    """
    return _identify(signal, cx, d_max, budget, cfg, noisy=False, max_unions=max_unions)


def identify_noisy(
    signal: IrregularSignal,
    cx: Complexity,
    d_max: int | None = None,
    budget: int = 3,
    cfg: ToleranceConfig = DEFAULT_TOL,
    max_unions: int | None = 2000,
) -> IdentOutcome:
    """Approximate kernel representation from noisy irregular data.

    Blocks of rank at least ``md + n`` are truncated to that rank before their
    left kernels are taken; if more than ``pd - n`` annihilators accumulate
    the collection is truncated to rank ``pd - n``. The kernel is flagged
    ``exact=False``.
    """
    return _identify(signal, cx, d_max, budget, cfg, noisy=True, max_unions=max_unions)
