"""Experiment drivers behind the command line.

Each ``run_*`` function takes a config dataclass and returns a
``ResultTable``.  Configs validate themselves on construction; an invalid
config raises ``ConfigError``.
"""

from __future__ import annotations

import io
import json
import logging
import math
import warnings
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from . import __version__
from .covariance import trace_autocov
from .limit_field import gff_covariance, gff_covariance_series, gff_series_tail_bound, sample_ou_paths
from .rng import RngStream, derive_seed
from .sobolev import DiscreteField, SobolevIndex, expected_tensor_norm_exact, tensor_norm_sq, uniform_grid
from .stats import estimate
from .ubm import SchemeParams, default_dt, simulate_ensemble
from .wick import validate_sigma, wick_mc_estimate, wick_second_moment

log = logging.getLogger(__name__)

Z_LIMIT = 4.0
# absolute rounding allowance when comparing a double-precision partial sum
# with the double-precision closed form
GFF_FP_ALLOWANCE = 1e-14

FIELD_COLUMNS = ("t", "k", "re", "im", "replica")


class ConfigError(ValueError):
    pass


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise ConfigError(msg)


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


@dataclass
class ResultTable:
    columns: tuple
    rows: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)
    passed: bool = True

    def add(self, *values) -> None:
        if len(values) != len(self.columns):
            raise ValueError(f"row has {len(values)} values, schema has {len(self.columns)}")
        self.rows.append(tuple(values))

    def column(self, name: str) -> list:
        i = self.columns.index(name)
        return [r[i] for r in self.rows]

    def to_csv(self) -> str:
        buf = io.StringIO()
        for key, value in self.metadata.items():
            text = value if isinstance(value, str) else json.dumps(value, sort_keys=True)
            buf.write(f"# {key}: {text}\n")
        buf.write(",".join(self.columns) + "\n")
        for row in self.rows:
            buf.write(",".join(_fmt(v) for v in row) + "\n")
        return buf.getvalue()


def _metadata(command: str, config) -> dict:
    return {"command": command, "version": __version__, "config": asdict(config)}


# --- wick -----------------------------------------------------------------


@dataclass
class WickEvalConfig:
    sigma: tuple

    def __post_init__(self):
        try:
            self.sigma = validate_sigma(self.sigma)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from None


@dataclass
class WickVerifyConfig:
    sigma: tuple
    n: int
    seed: int
    reps: int = 200_000

    def __post_init__(self):
        try:
            self.sigma = validate_sigma(self.sigma)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from None
        _require(self.n >= 1, "n must be >= 1")
        _require(self.reps >= 2, "reps must be >= 2")


def run_wick_eval(cfg: WickEvalConfig) -> str:
    return str(wick_second_moment(cfg.sigma))


def run_wick_verify(cfg: WickVerifyConfig) -> ResultTable:
    poly = wick_second_moment(cfg.sigma)
    mean, se = wick_mc_estimate(cfg.sigma, cfg.n, cfg.reps, RngStream(cfg.seed))
    table = ResultTable(
        ("sigma", "n", "n_min", "below_threshold", "exact", "mc_mean", "stderr", "z", "pass"),
        metadata=_metadata("wick verify", cfg),
    )
    sigma_txt = " ".join(str(s) for s in cfg.sigma)
    if poly.is_exact_at(cfg.n):
        exact = poly(cfg.n)
        z = (mean - exact) / se if se > 0 else 0.0
        ok = abs(z) <= Z_LIMIT
        table.add(sigma_txt, cfg.n, poly.n_min, False, exact, mean, se, z, ok)
        table.passed = ok
    else:
        # no exact value is claimed below n_min
        table.add(sigma_txt, cfg.n, poly.n_min, True, "", mean, se, "", True)
    table.metadata["polynomial"] = str(poly)
    return table


# --- ubm covariance ---------------------------------------------------------


def _aligned(times, dt) -> bool:
    return all(abs(t - round(t / dt) * dt) <= 1e-12 for t in times)


@dataclass
class CovCheckConfig:
    n: int
    k: tuple
    t_grid: tuple
    seed: int
    reps: int = 2000
    dt: Optional[float] = None
    workers: int = 1

    def __post_init__(self):
        _require(self.n >= 1, "n must be >= 1")
        self.k = tuple(sorted({int(x) for x in self.k}))
        _require(bool(self.k) and self.k[0] >= 1, "modes k must be >= 1")
        self.t_grid = tuple(sorted({float(t) for t in self.t_grid}))
        _require(bool(self.t_grid) and self.t_grid[0] >= 0, "t grid must be non-empty and non-negative")
        _require(self.reps >= 2, "reps must be >= 2")
        if self.dt is None:
            self.dt = default_dt(max(self.k))
        _require(self.dt > 0, "dt must be positive")
        _require(_aligned(self.t_grid, self.dt), f"t grid {self.t_grid} is not aligned to dt={self.dt}; pass --dt")


def run_cov_check(cfg: CovCheckConfig) -> ResultTable:
    times = tuple(sorted({0.0, *cfg.t_grid}))
    params = SchemeParams(dt=cfg.dt, T=times[-1], record_times=times)
    ens = simulate_ensemble(cfg.n, params, cfg.k, cfg.reps, cfg.seed, workers=cfg.workers)
    allowance = 5 * cfg.dt
    table = ResultTable(
        ("k", "t", "oracle", "mc_mean", "mc_imag", "stderr", "z", "allowance", "pass"),
        metadata=_metadata("ubm cov-check", cfg),
    )
    for k in cfg.k:
        x = ens.trace(k)
        for t in cfg.t_grid:
            i = times.index(t)
            prod = x[:, i] * np.conj(x[:, 0])
            est = estimate(prod.real)
            oracle = trace_autocov(k, cfg.n, t)
            ok = est.agrees(oracle, Z_LIMIT, allowance)
            table.add(k, t, oracle, est.mean, float(prod.imag.mean()), est.stderr, est.z(oracle), allowance, ok)
            table.passed &= ok
    return table


# --- field samples ----------------------------------------------------------


@dataclass
class FieldSampleConfig:
    mode: str
    K: int
    seed: int
    T: float = 1.0
    t_grid: Optional[tuple] = None
    n: Optional[int] = None
    dt: Optional[float] = None
    reps: int = 1
    workers: int = 1

    def __post_init__(self):
        _require(self.mode in ("finite", "limit"), "mode must be 'finite' or 'limit'")
        _require(self.K >= 1, "K must be >= 1")
        _require(self.reps >= 1, "reps must be >= 1")
        if self.t_grid is None:
            self.t_grid = tuple(float(t) for t in uniform_grid(self.T, 11))
        self.t_grid = tuple(float(t) for t in self.t_grid)
        _require(all(b > a for a, b in zip(self.t_grid, self.t_grid[1:])), "t grid must be strictly ascending")
        _require(self.t_grid[0] >= 0, "t grid must be non-negative")
        if self.mode == "finite":
            _require(self.n is not None and self.n >= 1, "finite mode needs --n >= 1")
            if self.dt is None:
                self.dt = default_dt(self.K)
            _require(self.dt > 0, "dt must be positive")
            _require(_aligned(self.t_grid, self.dt), f"t grid is not aligned to dt={self.dt}; pass --dt")


def field_paths(cfg: FieldSampleConfig) -> np.ndarray:
    """(reps, len(t_grid), K) complex coefficient paths."""
    if cfg.mode == "limit":
        return np.stack([sample_ou_paths(cfg.K, cfg.t_grid, RngStream(cfg.seed, r)).paths for r in range(cfg.reps)])
    params = SchemeParams(dt=cfg.dt, T=cfg.t_grid[-1], record_times=cfg.t_grid)
    ens = simulate_ensemble(cfg.n, params, range(1, cfg.K + 1), cfg.reps, cfg.seed, workers=cfg.workers)
    return -ens.traces / np.arange(1, cfg.K + 1)


def run_field_sample(cfg: FieldSampleConfig) -> ResultTable:
    paths = field_paths(cfg)
    table = ResultTable(FIELD_COLUMNS, metadata=_metadata("field sample", cfg))
    for r in range(paths.shape[0]):
        for i, t in enumerate(cfg.t_grid):
            for k in range(1, cfg.K + 1):
                c = paths[r, i, k - 1]
                table.add(t, k, float(c.real), float(c.imag), r)
    return table


# --- Sobolev norms ----------------------------------------------------------


@dataclass
class SobolevScanConfig:
    n: tuple
    seed: int
    s: float = 0.3
    eps: float = 0.4
    K: int = 256
    T: float = 1.0
    num_times: int = 512
    substeps: int = 4
    reps: int = 64
    workers: int = 1

    def __post_init__(self):
        self.n = tuple(int(x) for x in np.atleast_1d(self.n))
        _require(bool(self.n) and min(self.n) >= 1, "n values must be >= 1")
        try:
            SobolevIndex(self.s, self.eps)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        _require(self.K >= 1, "K must be >= 1")
        _require(self.T > 0, "T must be positive")
        _require(self.num_times >= 2, "need at least 2 time points")
        _require(self.substeps >= 1, "substeps must be >= 1")
        _require(self.reps >= 2, "reps must be >= 2")


def simulate_tensor_norms(n: int, idx: SobolevIndex, K: int, T: float, num_times: int, substeps: int, reps: int, seed: int, workers: int = 1) -> np.ndarray:
    """tensor_norm_sq of `reps` simulated log p_n fields."""
    grid = uniform_grid(T, num_times)
    dt = T / ((num_times - 1) * substeps)
    params = SchemeParams(dt=dt, T=T, record_times=grid)
    ens = simulate_ensemble(n, params, range(1, K + 1), reps, seed, workers=workers)
    coeffs = -ens.traces / np.arange(1, K + 1)
    return tensor_norm_sq(DiscreteField(grid, coeffs), idx)


def run_sobolev_scan(cfg: SobolevScanConfig) -> ResultTable:
    idx = SobolevIndex(cfg.s, cfg.eps)
    table = ResultTable(
        ("n", "s", "eps", "K", "T", "num_times", "exact", "tail_bound", "mc_mean", "stderr", "z", "valid_regime", "flag", "pass"),
        metadata=_metadata("sobolev scan", cfg),
    )
    if math.isclose(cfg.s, cfg.eps):
        flag = "no-acceptance"
    elif not idx.valid_regime:
        flag = "invalid-regime"
    else:
        flag = ""
    for n in cfg.n:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            exact = expected_tensor_norm_exact(n, idx, cfg.K, cfg.T, cfg.num_times)
        norms = simulate_tensor_norms(n, idx, cfg.K, cfg.T, cfg.num_times, cfg.substeps, cfg.reps, derive_seed(cfg.seed, n), cfg.workers)
        est = estimate(norms)
        z = est.z(exact.value)
        ok = abs(z) <= Z_LIMIT
        log.info("sobolev n=%d exact=%.6g mc=%.6g +- %.3g", n, exact.value, est.mean, est.stderr)
        table.add(n, cfg.s, cfg.eps, cfg.K, cfg.T, cfg.num_times, exact.value, exact.tail_bound, est.mean, est.stderr, z, idx.valid_regime, flag, ok)
        if idx.valid_regime:
            table.passed &= ok
    return table


# --- GFF covariance -----------------------------------------------------------

DEFAULT_GFF_POINTS = ((0.5, 1.0, 1), (0.5, 1.0, 100), (0.0, math.pi, 1_000_000))


@dataclass
class GffCheckConfig:
    points: tuple = DEFAULT_GFF_POINTS
    K: int = 200

    def __post_init__(self):
        pts = []
        for p in self.points:
            p = tuple(p)
            _require(len(p) in (2, 3), f"point {p} must be (dt, dtheta) or (dt, dtheta, K)")
            dt, dth = float(p[0]), float(p[1])
            K = int(p[2]) if len(p) == 3 else int(self.K)
            _require(K >= 1, "K must be >= 1")
            _require(not (dt == 0 and math.remainder(dth, 2 * math.pi) == 0), f"point {p} is on the diagonal")
            pts.append((dt, dth, K))
        self.points = tuple(pts)


def run_gff_check(cfg: GffCheckConfig) -> ResultTable:
    table = ResultTable(
        ("dt", "dtheta", "K", "series", "closed_form", "abs_err", "tail_bound", "fp_allowance", "pass"),
        metadata=_metadata("gff check", cfg),
    )
    for dt, dth, K in cfg.points:
        series = gff_covariance_series(K, dt, dth, 0.0, 0.0)
        closed = gff_covariance(dt, dth, 0.0, 0.0)
        bound = gff_series_tail_bound(K, dt, dth)
        err = abs(series - closed)
        ok = err <= bound + GFF_FP_ALLOWANCE
        table.add(dt, dth, K, series, closed, err, bound, GFF_FP_ALLOWANCE, ok)
        table.passed &= ok
    return table
