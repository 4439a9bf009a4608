"""Rank-revealing dense linear algebra used by every identification step."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DimensionError, DomainError, MaskError, RankError


@dataclass(frozen=True)
class ToleranceConfig:
    """Thresholds for numerical rank, residual and subspace-equality tests."""

    rank_rel_tol: float = 1e-9
    residual_tol: float = 1e-8
    angle_tol: float = 1e-8

    def __post_init__(self):
        for name in ("rank_rel_tol", "residual_tol", "angle_tol"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be strictly positive")


DEFAULT_TOL = ToleranceConfig()


def _dense(M) -> np.ndarray:
    A = np.asarray(M, dtype=float)
    if A.ndim == 1:
        A = A[None, :]
    if A.ndim != 2:
        raise DimensionError(f"expected a matrix, got shape {A.shape}")
    if np.isnan(A).any():
        raise MaskError("matrix contains missing entries")
    return A


def rank_from_singular_values(s: np.ndarray, shape, cfg: ToleranceConfig = DEFAULT_TOL) -> int:
    """Apply the rank threshold to singular values ``s`` (descending) of a matrix of ``shape``."""
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > cfg.rank_rel_tol * s[0] * max(shape)))


def numerical_rank(M, cfg: ToleranceConfig = DEFAULT_TOL) -> int:
    """Number of singular values above ``rank_rel_tol * sigma_max * max(rows, cols)``."""
    A = _dense(M)
    if A.size == 0:
        return 0
    s = np.linalg.svd(A, compute_uv=False)
    return rank_from_singular_values(s, A.shape, cfg)


def left_nullspace_basis(M, cfg: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal rows ``Z`` with ``Z @ M = 0``; shape ``(rows - rank, rows)``."""
    A = _dense(M)
    rows = A.shape[0]
    if A.shape[1] == 0:
        return np.eye(rows)
    U, s, _ = np.linalg.svd(A, full_matrices=True)
    r = rank_from_singular_values(s, A.shape, cfg)
    return U[:, r:].T.copy()


def right_nullspace_basis(M, cfg: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal columns ``P`` with ``M @ P = 0``."""
    return left_nullspace_basis(_dense(M).T, cfg).T.copy()


def orthonormal_rows(M, cfg: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis of the row space of ``M``."""
    A = _dense(M)
    if A.size == 0:
        return np.zeros((0, A.shape[1]))
    _, s, Vt = np.linalg.svd(A, full_matrices=False)
    r = rank_from_singular_values(s, A.shape, cfg)
    return Vt[:r].copy()


def truncated_svd(M, target_rank: int) -> np.ndarray:
    """Best Frobenius approximation of ``M`` with rank at most ``target_rank``."""
    A = _dense(M)
    if target_rank < 0 or target_rank > min(A.shape):
        raise DimensionError(f"target rank {target_rank} outside [0, {min(A.shape)}]")
    if target_rank == 0:
        return np.zeros_like(A)
    U, s, Vt = np.linalg.svd(A, full_matrices=False)
    return (U[:, :target_rank] * s[:target_rank]) @ Vt[:target_rank]


def select_independent_rows(Z, k: int, cfg: ToleranceConfig = DEFAULT_TOL) -> list[int]:
    """Indices of ``k`` linearly independent rows, chosen by column-pivoted QR of ``Z.T``."""
    A = _dense(Z)
    if k == 0:
        return []
    if k > A.shape[0]:
        raise RankError(f"cannot pick {k} rows from a matrix with {A.shape[0]} rows")
    _, _, piv = scipy.linalg.qr(A.T, mode="economic", pivoting=True)
    chosen = sorted(int(i) for i in piv[:k])
    if numerical_rank(A[chosen], cfg) < k:
        raise RankError(f"matrix has fewer than {k} independent rows")
    return chosen


def principal_angles(A, B) -> np.ndarray:
    """Principal angles between ``im(A)`` and ``im(B)``, largest first."""
    A = _dense(A)
    B = _dense(B)
    if A.shape[0] != B.shape[0]:
        raise DimensionError(f"ambient dimensions differ: {A.shape[0]} vs {B.shape[0]}")
    if A.shape[1] == 0 or B.shape[1] == 0:
        return np.zeros(0)
    return scipy.linalg.subspace_angles(A, B)


def column_basis(M, cfg: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis of ``im(M)`` using the numerical rank of ``M``."""
    return orthonormal_rows(_dense(M).T, cfg).T.copy()


def max_angle(A, B, cfg: ToleranceConfig = DEFAULT_TOL) -> float:
    """Largest principal angle between ``im(A)`` and ``im(B)``.

    Bases are rank-reduced first; subspaces of different dimension are
    reported as ``pi/2`` apart.
    """
    Qa = column_basis(A, cfg)
    Qb = column_basis(B, cfg)
    if Qa.shape[0] != Qb.shape[0]:
        raise DimensionError(f"ambient dimensions differ: {Qa.shape[0]} vs {Qb.shape[0]}")
    if Qa.shape[1] != Qb.shape[1]:
        return float(np.pi / 2)
    ang = principal_angles(Qa, Qb)
    return float(ang[0]) if ang.size else 0.0


def row_space_angle(R1, R2, cfg: ToleranceConfig = DEFAULT_TOL) -> float:
    """Largest principal angle between the row spaces of ``R1`` and ``R2``."""
    return max_angle(_dense(R1).T, _dense(R2).T, cfg)
