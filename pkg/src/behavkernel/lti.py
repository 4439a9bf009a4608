"""State-space simulation, random systems and complete-data oracles."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DimensionError, DomainError, GpeViolation
from .hankel import hankel_matrix
from .kernel_ident import KernelRep, canonical_kernel_rows
from .numerics import DEFAULT_TOL, ToleranceConfig, left_nullspace_basis, numerical_rank
from .signals import Complexity, IrregularSignal


@dataclass(frozen=True, eq=False)
class StateSpaceModel:
    """``x(t+1) = A x(t) + B u(t)``, ``y(t) = C x(t) + D u(t)``."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        C = np.atleast_2d(np.asarray(self.C, dtype=float))
        B = np.asarray(self.B, dtype=float)
        n = A.shape[0]
        p = C.shape[0]
        if B.ndim < 2:
            B = B.reshape(n, -1)
        m = B.shape[1]
        D = np.asarray(self.D, dtype=float).reshape(p, m)
        if A.shape != (n, n):
            raise DimensionError(f"A must be square, got {A.shape}")
        if C.shape[1] != n:
            raise DimensionError(f"C has {C.shape[1]} columns, expected n={n}")
        for name, val in (("A", A), ("B", B), ("C", C), ("D", D)):
            object.__setattr__(self, name, val)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def m(self) -> int:
        return self.B.shape[1]

    @property
    def p(self) -> int:
        return self.C.shape[0]

    def observability_matrix(self, k: int | None = None) -> np.ndarray:
        k = self.n if k is None else k
        blocks, CA = [], self.C
        for _ in range(k):
            blocks.append(CA)
            CA = CA @ self.A
        return np.vstack(blocks) if blocks else np.zeros((0, self.n))

    def controllability_matrix(self) -> np.ndarray:
        blocks, AB = [], self.B
        for _ in range(self.n):
            blocks.append(AB)
            AB = self.A @ AB
        return np.hstack(blocks) if blocks else np.zeros((self.n, 0))

    def lag(self, cfg: ToleranceConfig = DEFAULT_TOL) -> int | None:
        """Observability index: smallest ``k`` with ``rank O_k = n`` (None if unobservable)."""
        if self.n == 0:
            return 0
        for k in range(1, self.n + 1):
            if numerical_rank(self.observability_matrix(k), cfg) == self.n:
                return k
        return None

    def is_controllable(self, cfg: ToleranceConfig = DEFAULT_TOL) -> bool:
        return self.n == 0 or numerical_rank(self.controllability_matrix(), cfg) == self.n

    def complexity(self, cfg: ToleranceConfig = DEFAULT_TOL) -> Complexity:
        ell = self.lag(cfg)
        if ell is None:
            raise DomainError("model is not observable")
        return Complexity(self.m, self.p, self.n, ell)


def simulate(model: StateSpaceModel, x0, u=None, T: int | None = None) -> IrregularSignal:
    """Complete trajectory ``w(t) = (u(t), y(t))`` of ``model`` from ``x0``."""
    x = np.asarray(x0, dtype=float).reshape(-1)
    if x.shape[0] != model.n:
        raise DimensionError(f"x0 has length {x.shape[0]}, expected n={model.n}")
    if u is None:
        if T is None:
            raise DimensionError("give either an input sequence or a length T")
        u = np.zeros((T, model.m))
    u = np.asarray(u, dtype=float)
    if u.ndim == 1:
        u = u[:, None] if model.m == 1 else u.reshape(-1, model.m)
    if u.shape[1] != model.m:
        raise DimensionError(f"u has {u.shape[1]} columns, expected m={model.m}")
    if T is not None and u.shape[0] != T:
        raise DimensionError(f"u has {u.shape[0]} samples, expected T={T}")
    T = u.shape[0]
    y = np.empty((T, model.p))
    for t in range(T):
        y[t] = model.C @ x + model.D @ u[t]
        x = model.A @ x + model.B @ u[t]
    return IrregularSignal.from_array(np.hstack([u, y]), m=model.m)


def _random_eigenvalues(n: int, rng: np.random.Generator) -> np.ndarray:
    """Real Schur-like block diagonal matrix with eigenvalue moduli in [0.5, 0.99]."""
    A = np.zeros((n, n))
    i = 0
    while i < n:
        r = rng.uniform(0.5, 0.99)
        if i + 1 < n and rng.random() < 0.5:
            theta = rng.uniform(0.1, np.pi - 0.1)
            c, s = r * np.cos(theta), r * np.sin(theta)
            A[i : i + 2, i : i + 2] = [[c, -s], [s, c]]
            i += 2
        else:
            A[i, i] = r * rng.choice([-1.0, 1.0])
            i += 1
    return A


def random_system(cx: Complexity, seed=None, cfg: ToleranceConfig = DEFAULT_TOL) -> StateSpaceModel:
    """Random minimal model of complexity ``cx``; deterministic in ``seed``.

    Eigenvalues of ``A`` have modulus in [0.5, 0.99]. The draw is rejected
    until the pair ``(C, A)`` has lag exactly ``ell`` and, for ``m > 0``,
    ``(A, B)`` is controllable.
    """
    rng = np.random.default_rng(seed)
    n, m, p = cx.n, cx.m, cx.p
    for _ in range(100):
        J = _random_eigenvalues(n, rng)
        S = scipy.linalg.qr(rng.standard_normal((n, n)))[0] if n else np.zeros((0, 0))
        A = S @ J @ S.T
        B = rng.standard_normal((n, m))
        C = rng.standard_normal((p, n))
        D = rng.standard_normal((p, m))
        model = StateSpaceModel(A, B, C, D)
        if model.lag(cfg) != cx.ell:
            continue
        if m > 0 and not model.is_controllable(cfg):
            continue
        return model
    raise DomainError(f"no random model with complexity {cx} found in 100 attempts")


def oracle_kernel(
    w: IrregularSignal, cx: Complexity, d: int, cfg: ToleranceConfig = DEFAULT_TOL
) -> KernelRep:
    """Left kernel of ``H_d(w)`` for complete data satisfying ``rank H_d(w) = md + n``."""
    if not w.is_complete():
        raise DomainError("oracle_kernel needs complete data")
    w.check_complexity(cx)
    if d < cx.ell + 1:
        raise DomainError(f"depth {d} must be at least ell + 1 = {cx.ell + 1}")
    if d > w.T:
        raise GpeViolation(f"depth {d} exceeds T={w.T}")
    H = hankel_matrix(w.values, d)
    r = numerical_rank(H, cfg)
    if r != cx.behavior_dim(d):
        raise GpeViolation(f"rank(H_{d}(w)) = {r}, expected md + n = {cx.behavior_dim(d)}")
    R = left_nullspace_basis(H, cfg)
    return KernelRep(canonical_kernel_rows(R, cx), d, cx, exact=True)


def mosaic_input_matrix(u, cx: Complexity, n_c: int | None = None) -> np.ndarray:
    """Columns ``u_[j(ell+1), j(ell+1)+n+ell+2]`` for ``j = 0 .. n_c-1``."""
    u = np.asarray(u, dtype=float)
    if u.ndim == 1:
        u = u[:, None]
    ell, n, m = cx.ell, cx.n, cx.m
    span = n + ell + 3
    n_c = m * span if n_c is None else n_c
    available = (u.shape[0] - span) // (ell + 1) + 1 if u.shape[0] >= span else 0
    if n_c > available:
        raise DimensionError(f"{n_c} columns requested but only {available} windows fit in T={u.shape[0]}")
    cols = [u[j * (ell + 1) : j * (ell + 1) + span].reshape(-1) for j in range(n_c)]
    return np.array(cols).T if cols else np.zeros((m * span, 0))


def min_length_pe_mosaic(cx: Complexity) -> int:
    return cx.m * (cx.ell + cx.n + 3) * (cx.ell + 1) + cx.n + 2


def check_pe_mosaic(u, cx: Complexity, n_c: int | None = None, cfg: ToleranceConfig = DEFAULT_TOL) -> bool:
    """Persistency-of-excitation test on ``(ell+1)``-shifted input windows.

    True iff the ``m(n+ell+3) x n_c`` matrix of shifted input windows has full
    row rank. Returns False when the record is shorter than
    ``m(ell+n+3)(ell+1) + n + 2``.
    """
    if cx.m < 1:
        raise DomainError("the input excitation test needs m >= 1")
    u = np.asarray(u, dtype=float)
    if u.ndim == 1:
        u = u[:, None]
    if np.isnan(u).any():
        return False
    if u.shape[0] < min_length_pe_mosaic(cx):
        return False
    M = mosaic_input_matrix(u, cx, n_c)
    return numerical_rank(M, cfg) == cx.m * (cx.n + cx.ell + 3)


def sample_observability_matrix(model: StateSpaceModel, ell: int) -> np.ndarray:
    """``[C; CA; ...; CA^(ell-2); CA^(ell+1)]``."""
    blocks = [model.C @ np.linalg.matrix_power(model.A, k) for k in range(ell - 1)]
    blocks.append(model.C @ np.linalg.matrix_power(model.A, ell + 1))
    return np.vstack(blocks)


def check_sample_observability(
    model: StateSpaceModel, cfg: ToleranceConfig = DEFAULT_TOL, ell: int | None = None
) -> bool:
    """Full column rank of the observability matrix with the ``CA^(ell-1)`` block replaced by ``CA^(ell+1)``."""
    ell = model.lag(cfg) if ell is None else ell
    if ell is None or ell < 2:
        raise DomainError(f"sample observability needs ell >= 2, got {ell}")
    return numerical_rank(sample_observability_matrix(model, ell), cfg) == model.n
