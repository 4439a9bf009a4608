"""Finite-length behaviors from a kernel representation.

``Gamma`` stacks ``R_d`` (zero padded to length ``L``) with ``L - d`` shifted
copies of its first ``p`` rows; its right null space ``P`` spans the
length-``L`` trajectories of the system.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, RankError
from .kernel_ident import KernelRep
from .numerics import DEFAULT_TOL, ToleranceConfig, rank_from_singular_values
from .signals import Complexity


@dataclass(frozen=True, eq=False)
class GammaMatrix:
    G: np.ndarray
    depth: int
    L: int
    complexity: Complexity


@dataclass(frozen=True, eq=False)
class BehaviorBasis:
    """Orthonormal columns ``P`` (``qL x (mL + n)``) spanning the length-``L`` behavior."""

    P: np.ndarray
    L: int
    complexity: Complexity


@dataclass(frozen=True)
class Membership:
    is_member: bool
    beta: np.ndarray
    residual: float


def build_gamma(kernel: KernelRep, L: int) -> GammaMatrix:
    cx, d, R = kernel.complexity, kernel.depth, kernel.R
    q, p = cx.q, cx.p
    if L < d:
        raise DimensionError(f"L={L} must be at least the kernel depth d={d}")
    rows = cx.kernel_rows(L)
    G = np.zeros((rows, q * L))
    G[: R.shape[0], : q * d] = R
    head = R[:p]
    r = R.shape[0]
    for k in range(1, L - d + 1):
        G[r : r + p, k * q : k * q + q * d] = head
        r += p
    return GammaMatrix(G, d, L, cx)


def behavior_basis(gamma: GammaMatrix, cfg: ToleranceConfig = DEFAULT_TOL) -> BehaviorBasis:
    """Orthonormal basis of the right null space of ``Gamma``."""
    cx, L = gamma.complexity, gamma.L
    G = gamma.G
    _, s, Vt = np.linalg.svd(G, full_matrices=True)
    expected = cx.kernel_rows(L)
    rank = rank_from_singular_values(s, G.shape, cfg) if G.size else 0
    if rank != expected:
        raise RankError(f"Gamma has rank {rank}, expected pL - n = {expected}")
    P = Vt[expected:].T.copy()
    return BehaviorBasis(P, L, cx)


def behavior_from_kernel(kernel: KernelRep, L: int, cfg: ToleranceConfig = DEFAULT_TOL) -> BehaviorBasis:
    return behavior_basis(build_gamma(kernel, L), cfg)


def membership_test(basis: BehaviorBasis, w_bar, cfg: ToleranceConfig = DEFAULT_TOL) -> Membership:
    """Least-squares fit ``P beta = w_bar`` of a stacked length-``L`` trajectory."""
    w = np.asarray(w_bar, dtype=float).reshape(-1)
    P = basis.P
    if w.shape[0] != P.shape[0]:
        raise DimensionError(f"trajectory has {w.shape[0]} entries, expected qL = {P.shape[0]}")
    if np.isnan(w).any():
        raise DimensionError("trajectory must be complete")
    beta = P.T @ w  # P has orthonormal columns
    residual = float(np.linalg.norm(P @ beta - w) / max(1.0, np.linalg.norm(w)))
    return Membership(residual <= cfg.residual_tol, beta, residual)
