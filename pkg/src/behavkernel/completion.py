"""Filling missing samples.

``complete_exact`` projects the given entries onto the length-``T`` behavior
spanned by ``P = null(Gamma)``. ``complete_nuclear_norm`` is the convex
baseline: minimize the nuclear norm of a Hankel matrix that agrees with the
given entries.
"""
from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field

import numpy as np

from .behavior import behavior_from_kernel
from .errors import DimensionError, DomainError
from .hankel import hankel_matrix
from .kernel_ident import KernelRep
from .numerics import DEFAULT_TOL, ToleranceConfig, numerical_rank
from .signals import IrregularSignal

log = logging.getLogger(__name__)


class Method(enum.Enum):
    EXACT = "exact"
    NUCLEAR_NORM = "nuclear_norm"


@dataclass(eq=False)
class CompletionResult:
    completed: IrregularSignal
    unique: bool
    residual_given: float
    method: Method
    approximate: bool = False
    converged: bool = True
    iterations: int = 0
    history: list[tuple[float, float]] = field(default_factory=list)


def relative_error(w_true, w_hat) -> float:
    """``||w - w_hat||_2 / ||w||_2`` over all entries."""
    a = w_true.values if isinstance(w_true, IrregularSignal) else np.asarray(w_true, dtype=float)
    b = w_hat.values if isinstance(w_hat, IrregularSignal) else np.asarray(w_hat, dtype=float)
    return float(np.linalg.norm(a - b) / np.linalg.norm(a))


def complete_exact(
    signal: IrregularSignal, kernel: KernelRep, cfg: ToleranceConfig = DEFAULT_TOL
) -> CompletionResult:
    """Fill the missing entries with ``P_m beta`` where ``P_g beta = w_g``."""
    cx = kernel.complexity
    signal.check_complexity(cx)
    T = signal.T
    if kernel.depth > T:
        raise DimensionError(f"kernel depth {kernel.depth} exceeds T={T}")
    P = behavior_from_kernel(kernel, T, cfg).P
    w = signal.stacked()
    g = signal.stacked_given()
    Pg = P[g]
    wg = w[g]
    beta, *_ = np.linalg.lstsq(Pg, wg, rcond=None)
    fitted = P @ beta
    filled = np.where(g, w, fitted).reshape(T, signal.q)
    residual = float(np.linalg.norm(Pg @ beta - wg) / max(1.0, np.linalg.norm(wg)))
    unique = numerical_rank(Pg, cfg) == cx.behavior_dim(T) if Pg.size else cx.behavior_dim(T) == 0
    return CompletionResult(
        completed=IrregularSignal.from_array(filled, m=signal.m),
        unique=bool(unique),
        residual_given=residual,
        method=Method.EXACT,
        approximate=not kernel.exact,
    )


@dataclass(frozen=True)
class NuclearNormConfig:
    """Settings for the singular-value-thresholding loop.

    ``tau`` starts at ``tau_start * sigma_max`` of the initial Hankel matrix
    and is multiplied by ``tau_decay`` each stage down to ``tau_min`` times
    the same scale.
    """

    step: float = 1.0
    tol: float = 1e-8
    max_iters: int = 5000
    tau_start: float = 0.1
    tau_decay: float = 0.3
    tau_min: float = 1e-10
    stage_iters: int = 200

    def __post_init__(self):
        if not 0 < self.step <= 1.0:
            raise DomainError("step must lie in (0, 1]")
        if not 0 < self.tau_decay < 1:
            raise DomainError("tau_decay must lie in (0, 1)")


class _HankelOps:
    """Hankel embedding of a ``T x q`` signal and its adjoint averaging."""

    def __init__(self, T: int, q: int, L: int):
        self.T, self.q, self.L = T, q, L
        self.K = T - L + 1
        counts = np.zeros(T)
        for i in range(L):
            counts[i : i + self.K] += 1
        self.counts = counts

    def embed(self, w: np.ndarray) -> np.ndarray:
        return hankel_matrix(w, self.L)

    def average(self, H: np.ndarray) -> np.ndarray:
        """Least-squares signal for ``H``: mean over each anti-diagonal."""
        Hb = H.reshape(self.L, self.q, self.K)
        sums = np.zeros((self.T, self.q))
        for i in range(self.L):
            sums[i : i + self.K] += Hb[i].T
        return sums / self.counts[:, None]


def _svt(Y: np.ndarray, tau: float) -> tuple[np.ndarray, float]:
    U, s, Vt = np.linalg.svd(Y, full_matrices=False)
    s = np.maximum(s - tau, 0.0)
    k = int(np.count_nonzero(s))
    return (U[:, :k] * s[:k]) @ Vt[:k], float(s.sum())


def complete_nuclear_norm(
    signal: IrregularSignal,
    L: int | None = None,
    cfg: NuclearNormConfig = NuclearNormConfig(),
) -> CompletionResult:
    """Nuclear-norm completion of a Hankel matrix with the given entries fixed.

    Proximal-gradient iterations ``Y <- SVT_tau(Proj(Y))`` minimize
    ``tau * ||Y||_* + dist(Y, S)^2 / 2`` where ``S`` is the set of Hankel
    matrices agreeing with the given entries; ``tau`` is decreased in stages
    so the limit approaches the constrained minimizer. The returned signal is
    ``Proj(Y)`` de-Hankelized, so given entries are reproduced exactly.
    """
    T, q = signal.T, signal.q
    L = max(2, (T + 1) // 2) if L is None else int(L)
    if not 2 <= L <= T:
        raise DimensionError(f"depth L={L} must satisfy 2 <= L <= T={T}")
    given = signal.given
    wg = signal.values
    if given.all():
        return CompletionResult(signal, True, 0.0, Method.NUCLEAR_NORM)
    ops = _HankelOps(T, q, L)

    def project(Y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        w = np.where(given, wg, ops.average(Y))
        return ops.embed(w), w

    Y = ops.embed(np.where(given, wg, 0.0))
    scale = np.linalg.norm(Y, 2)
    if scale == 0.0:
        scale = 1.0
    tau = cfg.tau_start * scale
    tau_floor = cfg.tau_min * scale
    history: list[tuple[float, float]] = []
    converged = False
    stage_it = 0
    it = 0
    for it in range(1, cfg.max_iters + 1):
        PY, _ = project(Y)
        G = Y - cfg.step * (Y - PY)
        Y_new, nuc = _svt(G, cfg.step * tau)
        PYn, _ = project(Y_new)
        dist2 = float(np.sum((Y_new - PYn) ** 2))
        history.append((tau, nuc + dist2 / (2.0 * tau)))
        change = np.linalg.norm(Y_new - Y) / max(1.0, np.linalg.norm(Y))
        Y = Y_new
        stage_it += 1
        if change <= cfg.tol or stage_it >= cfg.stage_iters:
            if tau <= tau_floor:
                if change <= cfg.tol:
                    converged = True
                    break
            else:
                tau = max(tau * cfg.tau_decay, tau_floor)
                stage_it = 0
    if not converged:
        log.warning("nuclear-norm completion stopped after %d iterations without converging", it)
    _, w = project(Y)
    H = ops.embed(w)
    resid = float(np.linalg.norm(ops.average(H)[given] - wg[given]))
    return CompletionResult(
        completed=IrregularSignal.from_array(w, m=signal.m),
        unique=False,
        residual_given=resid,
        method=Method.NUCLEAR_NORM,
        approximate=True,
        converged=converged,
        iterations=it,
        history=history,
    )
