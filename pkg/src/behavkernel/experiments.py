"""Numerical studies: identification success sweep, completion benchmark and
a noisy blood-volume case study.

Every table is a deterministic function of its configuration and seed.
Wall-clock times vary between runs, so they are kept in the table metadata
(and the JSON sidecar) rather than in the CSV columns.
"""
from __future__ import annotations

import hashlib
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
import scipy.linalg

from .completion import NuclearNormConfig, complete_exact, complete_nuclear_norm, relative_error
from .errors import DimensionError, DomainError, GpeViolation
from .kernel_ident import identify_exact, identify_noisy
from .lti import StateSpaceModel, oracle_kernel, random_system, simulate
from .numerics import DEFAULT_TOL, ToleranceConfig, row_space_angle
from .signals import Complexity, IrregularSignal, format_number


def _version() -> str:
    from . import __version__

    return __version__


@dataclass
class ResultTable:
    """Named real-valued columns of equal length plus free-form metadata."""

    columns: dict[str, np.ndarray]
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        cols = {k: np.asarray(v, dtype=float).reshape(-1) for k, v in self.columns.items()}
        lengths = {v.shape[0] for v in cols.values()}
        if len(lengths) > 1:
            raise DimensionError(f"columns have different lengths {sorted(lengths)}")
        self.columns = cols

    @property
    def names(self) -> list[str]:
        return list(self.columns)

    @property
    def n_rows(self) -> int:
        return next(iter(self.columns.values())).shape[0] if self.columns else 0

    def __getitem__(self, name: str) -> np.ndarray:
        return self.columns[name]

    def row(self, **match) -> dict[str, float]:
        """The unique row whose columns equal the given values."""
        sel = np.ones(self.n_rows, dtype=bool)
        for k, v in match.items():
            sel &= np.isclose(self.columns[k], v)
        idx = np.flatnonzero(sel)
        if idx.size != 1:
            raise KeyError(f"{idx.size} rows match {match}")
        return {k: float(c[idx[0]]) for k, c in self.columns.items()}

    def to_csv(self) -> str:
        lines = [",".join(self.names)]
        for i in range(self.n_rows):
            lines.append(",".join(format_number(self.columns[k][i]) for k in self.names))
        return "\n".join(lines) + "\n"

    def write(self, out_dir, stem: str) -> tuple[Path, Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        csv_path = out / f"{stem}.csv"
        meta_path = out / f"{stem}.json"
        csv_path.write_text(self.to_csv())
        meta_path.write_text(json.dumps(self.metadata, indent=2, sort_keys=True, default=_jsonable) + "\n")
        return csv_path, meta_path


def _jsonable(x):
    if isinstance(x, np.generic):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    raise TypeError(f"cannot serialize {type(x).__name__}")


def _config_hash(config: dict) -> str:
    blob = json.dumps(config, sort_keys=True, default=_jsonable).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def _metadata(name: str, config: dict, seed, timings: dict) -> dict:
    return {
        "experiment": name,
        "config": config,
        "config_hash": _config_hash(config),
        "seed": seed,
        "version": _version(),
        "wall_clock": timings,
    }


# identification success sweep


def _default_fractions() -> tuple[float, ...]:
    return tuple(round(0.1 * k, 1) for k in range(1, 11))


@dataclass(frozen=True)
class SweepConfig:
    """Grid of record lengths and given-sample fractions.

    ``d_max`` caps the identification depth (``None`` means ``T``); deeper
    searches on short, sparse records are expensive and rarely succeed.
    """

    n_systems: int = 100
    n_trials: int = 100
    T_grid: tuple[int, ...] = tuple(range(20, 201, 20))
    given_fraction_grid: tuple[float, ...] = field(default_factory=_default_fractions)
    complexity: tuple[int, int, int, int] = (0, 1, 2, 2)
    seed: int = 0
    d_max: int | None = 30
    budget: int = 3
    max_unions: int | None = 2000
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "T_grid", tuple(int(t) for t in self.T_grid))
        object.__setattr__(self, "given_fraction_grid", tuple(float(f) for f in self.given_fraction_grid))
        object.__setattr__(self, "complexity", tuple(int(c) for c in self.complexity))
        if not self.T_grid or not self.given_fraction_grid:
            raise DomainError("sweep grids must be nonempty")
        if any(not 0.0 < f <= 1.0 for f in self.given_fraction_grid):
            raise DomainError("given fractions must lie in (0, 1]")
        if min(self.n_systems, self.n_trials, self.workers) < 1:
            raise DomainError("n_systems, n_trials and workers must be positive")
        Complexity(*self.complexity)

    @property
    def cx(self) -> Complexity:
        return Complexity(*self.complexity)

    def to_dict(self) -> dict:
        return asdict(self)


def _random_input(rng: np.random.Generator, T: int, m: int) -> np.ndarray:
    return rng.standard_normal((T, m))


def _given_mask(rng: np.random.Generator, T: int, q: int, fraction: float) -> np.ndarray:
    """Exactly ``round(fraction * T * q)`` given entries at random positions."""
    N = T * q
    n_given = int(round(fraction * N))
    given = np.zeros(N, dtype=bool)
    given[rng.permutation(N)[:n_given]] = True
    return given.reshape(T, q)


def _sweep_system(args) -> tuple[np.ndarray, np.ndarray, np.ndarray, float]:
    """Success, validated and mismatch counts of one system over all cells and trials."""
    cfg, s = args
    cx = cfg.cx
    nT, nF = len(cfg.T_grid), len(cfg.given_fraction_grid)
    success = np.zeros((nT, nF))
    validated = np.zeros((nT, nF))
    mismatch = np.zeros((nT, nF))
    t0 = time.perf_counter()
    model = random_system(cx, seed=[cfg.seed, 0, s])
    T_max = max(cfg.T_grid)
    for trial in range(cfg.n_trials):
        rng = np.random.default_rng([cfg.seed, 1, s, trial])
        x0 = rng.uniform(0.0, 1.0, cx.n)
        w_full = simulate(model, x0, _random_input(rng, T_max, cx.m))
        oracles: dict[int, np.ndarray | None] = {}
        for i, T in enumerate(cfg.T_grid):
            for j, f in enumerate(cfg.given_fraction_grid):
                mrng = np.random.default_rng([cfg.seed, 2, s, trial, i, j])
                given = _given_mask(mrng, T, cx.q, f)
                if not given.any():
                    continue
                w = IrregularSignal(w_full.values[:T], given, cx.m)
                d_max = T if cfg.d_max is None else min(T, cfg.d_max)
                if d_max < cx.ell + 1:
                    continue
                out = identify_exact(w, cx, d_max=d_max, budget=cfg.budget, max_unions=cfg.max_unions)
                if not out.success:
                    continue
                success[i, j] += 1
                d = out.depth
                if d not in oracles:
                    try:
                        oracles[d] = oracle_kernel(w_full, cx, d).R
                    except GpeViolation:
                        oracles[d] = None
                ref = oracles[d]
                if ref is not None and row_space_angle(out.kernel.R, ref) <= DEFAULT_TOL.angle_tol:
                    validated[i, j] += 1
                else:
                    mismatch[i, j] += 1
    return success, validated, mismatch, time.perf_counter() - t0


def run_fig1_sweep(cfg: SweepConfig = SweepConfig()) -> ResultTable:
    """Success rate of exact identification on each (T, given fraction) cell.

    Each successful kernel is compared with the kernel computed from the
    complete record; ``mismatches`` counts successes that disagree with it.
    """
    jobs = [(cfg, s) for s in range(cfg.n_systems)]
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            parts = list(pool.map(_sweep_system, jobs))
    else:
        parts = [_sweep_system(job) for job in jobs]
    nT, nF = len(cfg.T_grid), len(cfg.given_fraction_grid)
    success = np.zeros((nT, nF))
    validated = np.zeros((nT, nF))
    mismatch = np.zeros((nT, nF))
    seconds = []
    for sc, va, mm, sec in parts:
        success += sc
        validated += va
        mismatch += mm
        seconds.append(sec)
    runs = cfg.n_systems * cfg.n_trials
    TT, FF = np.meshgrid(cfg.T_grid, cfg.given_fraction_grid, indexing="ij")
    cols = {
        "T": TT.ravel(),
        "given_fraction": FF.ravel(),
        "success_rate": (success / runs).ravel(),
        "validated_rate": (validated / runs).ravel(),
        "mismatches": mismatch.ravel(),
        "runs": np.full(nT * nF, runs),
    }
    timings = {"per_system_seconds": seconds, "total_seconds": float(sum(seconds))}
    return ResultTable(cols, _metadata("fig1", cfg.to_dict(), cfg.seed, timings))


def success_grid(table: ResultTable, column: str = "success_rate") -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Reshape a sweep table into ``(T values, fractions, grid[T, fraction])``."""
    Ts = np.unique(table["T"])
    Fs = np.unique(table["given_fraction"])
    grid = np.full((Ts.size, Fs.size), np.nan)
    for T, f, v in zip(table["T"], table["given_fraction"], table[column]):
        grid[np.searchsorted(Ts, T), np.searchsorted(Fs, f)] = v
    return Ts, Fs, grid


# completion benchmark

OSCILLATOR_MODULI = (0.999, 0.997, 0.995)
OSCILLATOR_ANGLES = (0.3, 0.6, 1.2)


def oscillator_system() -> StateSpaceModel:
    """Sixth-order autonomous system made of three lightly damped rotations."""
    blocks = []
    for r, th in zip(OSCILLATOR_MODULI, OSCILLATOR_ANGLES):
        c, s = r * np.cos(th), r * np.sin(th)
        blocks.append(np.array([[c, -s], [s, c]]))
    A = scipy.linalg.block_diag(*blocks)
    C = np.array([[1.0, 0.0, 1.0, 0.0, 1.0, 0.0]])
    return StateSpaceModel(A, np.zeros((6, 0)), C, np.zeros((1, 0)))


def benchmark_mask(T: int) -> np.ndarray:
    """Given-sample mask: every third sample lost before t = 200, then 7 of every 10.

    Over 500 samples this hides 276 samples.
    """
    t = np.arange(T)
    missing = np.where(t < 200, t % 3 == 2, t % 10 < 7)
    return ~missing[:, None]


def run_completion_benchmark(
    T_list=(200, 500),
    seed: int = 0,
    nn_max_T: int | None = None,
    nn_cfg: NuclearNormConfig = NuclearNormConfig(),
) -> ResultTable:
    """Exact (identify then complete) versus nuclear-norm completion error.

    The system and mask are fixed, so ``seed`` only labels the run.
    Nuclear-norm completion is skipped (NaN) for ``T > nn_max_T``.
    """
    model = oscillator_system()
    cx = model.complexity()
    T_max = max(T_list)
    w_full = simulate(model, np.ones(6), T=T_max)
    rows = {k: [] for k in ("T", "missing", "exact_error", "exact_depth", "nn_error", "nn_iterations")}
    timings = {}
    for T in T_list:
        w_true = w_full.head(T)
        w = IrregularSignal(w_true.values, benchmark_mask(T), 0)
        t0 = time.perf_counter()
        out = identify_exact(w, cx)
        exact_err = np.nan
        if out.success:
            exact_err = relative_error(w_true, complete_exact(w, out.kernel).completed)
        t_exact = time.perf_counter() - t0
        nn_err, nn_it, t_nn = np.nan, np.nan, np.nan
        if nn_max_T is None or T <= nn_max_T:
            t0 = time.perf_counter()
            nn = complete_nuclear_norm(w, cfg=nn_cfg)
            t_nn = time.perf_counter() - t0
            nn_err, nn_it = relative_error(w_true, nn.completed), nn.iterations
        for k, v in zip(rows, (T, w.n_missing, exact_err, out.depth, nn_err, nn_it)):
            rows[k].append(v)
        timings[str(T)] = {"exact_seconds": t_exact, "nn_seconds": t_nn}
    config = {"T_list": list(T_list), "nn_max_T": nn_max_T, "nn_cfg": asdict(nn_cfg)}
    return ResultTable(rows, _metadata("table1", config, seed, timings))


# noisy case study

# bolus infusions as (start minute, rate, duration in minutes)
BOLUSES = ((5, 20.0, 10), (40, 12.0, 15), (70, 25.0, 5), (100, 10.0, 20), (125, 18.0, 8))
DEFAULT_GAMMAS = (0.0, 2e-4, 4e-4, 6e-4, 8e-4, 1e-3)


def blood_volume_model(K: float = 0.5, alpha: float = 1.3, Ts: float = 1.0) -> StateSpaceModel:
    """Zero-order-hold discretization of the two-compartment fluid model."""
    Ac = np.array([[-K, K / (1.0 + alpha)], [0.0, 0.0]])
    Bc = np.array([[1.0], [1.0 / (1.0 + alpha)]])
    M = np.zeros((3, 3))
    M[:2, :2] = Ac
    M[:2, 2:] = Bc
    E = scipy.linalg.expm(M * Ts)
    return StateSpaceModel(E[:2, :2], E[:2, 2:], [[1.0, 0.0]], [[0.0]])


def bolus_input(T: int, boluses=BOLUSES) -> np.ndarray:
    u = np.zeros(T)
    for start, rate, length in boluses:
        u[start : start + length] = rate
    return u


def run_noisy_case_study(
    gamma_list=DEFAULT_GAMMAS,
    seed: int = 0,
    T: int = 150,
    missing_fraction: float = 0.4,
    rank_rel_tol: float = 1e-4,
    d_max: int | None = 40,
    nn_depth: int | None = None,
    nn_cfg: NuclearNormConfig = NuclearNormConfig(),
) -> ResultTable:
    """Subspace (identify_noisy + complete_exact) versus nuclear-norm completion.

    One missing-output pattern and one noise direction are drawn from
    ``seed``; each ``gamma`` rescales the same noise vector. ``rank_rel_tol``
    sets the rank threshold used by the noisy identification, which must sit
    above the noise floor for rank-deficient blocks to be rejected.
    """
    gammas = [float(g) for g in gamma_list]
    if any(g < 0 for g in gammas):
        raise DomainError("noise levels must be nonnegative")
    model = blood_volume_model()
    cx = model.complexity()
    u = bolus_input(T)
    w_true = simulate(model, np.zeros(2), u)
    y = w_true.y[:, 0]
    rng = np.random.default_rng(seed)
    n_miss = int(round(missing_fraction * T))
    given = np.ones((T, 2), dtype=bool)
    given[rng.permutation(T)[:n_miss], 1] = False
    eps = rng.standard_normal(T)
    tol = ToleranceConfig(rank_rel_tol=rank_rel_tol)
    rows = {k: [] for k in ("gamma", "ss_error", "ss_depth", "nn_error")}
    timings = {}
    for g in gammas:
        y_noisy = y + g * np.linalg.norm(y) / np.linalg.norm(eps) * eps
        w = IrregularSignal(np.column_stack([u, y_noisy]), given, 1)
        t0 = time.perf_counter()
        out = identify_noisy(w, cx, d_max=min(T, d_max) if d_max else None, cfg=tol)
        ss_err = np.nan
        if out.success:
            ss_err = relative_error(w_true, complete_exact(w, out.kernel).completed)
        t_ss = time.perf_counter() - t0
        t0 = time.perf_counter()
        nn = complete_nuclear_norm(w, L=nn_depth, cfg=nn_cfg)
        t_nn = time.perf_counter() - t0
        for k, v in zip(rows, (g, ss_err, out.depth, relative_error(w_true, nn.completed))):
            rows[k].append(v)
        timings[format_number(g)] = {"ss_seconds": t_ss, "nn_seconds": t_nn}
    config = {
        "gamma_list": gammas,
        "T": T,
        "missing_fraction": missing_fraction,
        "rank_rel_tol": rank_rel_tol,
        "d_max": d_max,
        "nn_depth": nn_depth,
        "boluses": [list(b) for b in BOLUSES],
        "nn_cfg": asdict(nn_cfg),
    }
    return ResultTable(rows, _metadata("table2", config, seed, timings))
