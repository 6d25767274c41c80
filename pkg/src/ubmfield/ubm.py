"""Unitary Brownian motion dU = sqrt(2) U dB - U dt, started from Haar.

Integrator: U <- U exp(sqrt(2) dB) with dB a Gaussian skew-Hermitian
increment.  Each step stays on U(n); the quadratic term of the exponential
supplies the drift -U dt because sum_k X_k^2 = -I over the orthonormal
basis.  Every ``reorth_every`` steps the state is projected back onto U(n)
by polar decomposition to stop roundoff drift.

Each replica owns one random stream, RngStream(master_seed, replica); the
replica's Haar start is drawn first, then its increments in step order.
Results therefore do not depend on how replicas are batched or spread over
worker processes.
"""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .ensembles import (
    _gue_from_normals,
    exp_i_hermitian,
    nearest_unitary,
    sample_haar_unitary,
    trace_powers,
)
from .rng import RngLike, RngStream, as_generator

__all__ = [
    "SchemeParams",
    "UbmTrajectory",
    "UbmEnsemble",
    "default_dt",
    "ubm_step",
    "simulate_trajectory",
    "simulate_ensemble",
]

log = logging.getLogger(__name__)

REORTH_EVERY = 1000
# floats drawn per block and batch; bounds the noise buffer to ~160 MB
_NOISE_BUDGET = 20_000_000


def default_dt(k_max: int) -> float:
    """min(1e-2, 1/(50 k_max^2)): resolves the fastest requested mode."""
    return min(1e-2, 1.0 / (50.0 * k_max**2))


@dataclass
class SchemeParams:
    dt: float
    T: float
    record_times: tuple = None

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.T < 0:
            raise ValueError(f"horizon T must be non-negative, got {self.T}")
        if self.record_times is None:
            self.record_times = (0.0, float(self.T)) if self.T > 0 else (0.0,)
        times = tuple(float(t) for t in self.record_times)
        if not times:
            raise ValueError("need at least one record time")
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError("record times must be strictly ascending")
        if times[0] < 0 or times[-1] > self.T + 1e-12:
            raise ValueError("record times must lie in [0, T]")
        for t in times:
            if abs(t - round(t / self.dt) * self.dt) > 1e-12:
                raise ValueError(f"record time {t} is not a multiple of dt={self.dt}")
        self.record_times = times

    @property
    def record_steps(self) -> np.ndarray:
        return np.rint(np.asarray(self.record_times) / self.dt).astype(int)


@dataclass
class UbmTrajectory:
    n: int
    times: np.ndarray
    modes: tuple
    traces: np.ndarray  # (len(times), len(modes)) complex: Tr U^k(t)
    matrices: np.ndarray | None = None  # (len(times), n, n) when requested

    def trace(self, k: int) -> np.ndarray:
        return self.traces[:, self.modes.index(k)]


@dataclass
class UbmEnsemble:
    """Trace records of independent replicas; replica r used stream r."""

    n: int
    times: np.ndarray
    modes: tuple
    traces: np.ndarray  # (replicas, len(times), len(modes))
    master_seed: int
    params: SchemeParams = field(repr=False, default=None)

    @property
    def replicas(self) -> int:
        return self.traces.shape[0]

    def trace(self, k: int) -> np.ndarray:
        return self.traces[:, :, self.modes.index(k)]

    def trajectory(self, r: int) -> UbmTrajectory:
        return UbmTrajectory(self.n, self.times, self.modes, self.traces[r])


def ubm_step(U: np.ndarray, dt: float, rng: RngLike) -> np.ndarray:
    """One geodesic step U exp(sqrt(2) dB) (U may be a stack)."""
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    n = U.shape[-1]
    gen = as_generator(rng)
    xi = gen.standard_normal(U.shape[:-2] + (n * n,))
    return _advance(U, xi, dt)


def _advance(U: np.ndarray, xi: np.ndarray, dt: float) -> np.ndarray:
    # sqrt(2) dB = i sqrt(2 dt / n) H with H GUE
    n = U.shape[-1]
    return U @ exp_i_hermitian(_gue_from_normals(xi, n), np.sqrt(2.0 * dt / n))


def _check_modes(modes) -> tuple:
    modes = tuple(sorted({int(k) for k in modes}))
    if not modes:
        raise ValueError("need at least one mode")
    if modes[0] < 1:
        raise ValueError("modes must be >= 1")
    return modes


def _run_batch(n: int, params: SchemeParams, modes: tuple, gens: list, keep_matrices: bool = False):
    """Advance one batch of replicas; gens[i] is replica i's generator."""
    b = len(gens)
    m = n * n
    U = np.stack([sample_haar_unitary(n, g) for g in gens])
    steps = params.record_steps
    total = int(steps[-1])
    traces = np.empty((b, len(steps), len(modes)), dtype=complex)
    mats = np.empty((b, len(steps), n, n), dtype=complex) if keep_matrices else None
    block = max(1, min(256, _NOISE_BUDGET // max(1, b * m)))
    rec = 0

    def record(U):
        nonlocal rec
        while rec < len(steps) and steps[rec] == step:
            traces[:, rec, :] = trace_powers(U, modes)
            if keep_matrices:
                mats[:, rec] = U
            rec += 1

    step = 0
    record(U)
    while step < total:
        s = min(block, total - step)
        noise = np.stack([g.standard_normal((s, m)) for g in gens], axis=1)
        for i in range(s):
            U = _advance(U, noise[i], params.dt)
            step += 1
            if step % REORTH_EVERY == 0:
                U = nearest_unitary(U)
            record(U)
    return traces, mats


def simulate_trajectory(
    n: int,
    params: SchemeParams,
    modes,
    rng: RngLike,
    keep_matrices: bool = False,
) -> UbmTrajectory:
    """Single stationary trajectory with Tr U^k recorded at params.record_times."""
    if n < 1:
        raise ValueError("n must be >= 1")
    modes = _check_modes(modes)
    traces, mats = _run_batch(n, params, modes, [as_generator(rng)], keep_matrices)
    return UbmTrajectory(
        n,
        np.asarray(params.record_times),
        modes,
        traces[0],
        None if mats is None else mats[0],
    )


def _ensemble_chunk(args):
    n, params, modes, master_seed, lo, hi, batch = args
    parts = []
    for start in range(lo, hi, batch):
        stop = min(start + batch, hi)
        gens = [RngStream(master_seed, r).generator() for r in range(start, stop)]
        parts.append(_run_batch(n, params, modes, gens)[0])
    return np.concatenate(parts, axis=0)


def simulate_ensemble(
    n: int,
    params: SchemeParams,
    modes,
    replicas: int,
    master_seed: int,
    workers: int = 1,
    batch: int = 500,
) -> UbmEnsemble:
    """Independent stationary replicas, replica r driven by RngStream(master_seed, r).

    Replicas are split into contiguous chunks, one per worker, and
    concatenated in ascending replica order.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if replicas < 1:
        raise ValueError("replicas must be >= 1")
    modes = _check_modes(modes)
    workers = max(1, min(int(workers), replicas))
    edges = np.linspace(0, replicas, workers + 1).astype(int)
    jobs = [(n, params, modes, master_seed, int(a), int(b), batch) for a, b in zip(edges, edges[1:]) if b > a]
    log.info("ubm: n=%d replicas=%d steps=%d workers=%d", n, replicas, params.record_steps[-1], workers)
    if workers == 1:
        chunks = [_ensemble_chunk(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_ensemble_chunk, jobs))
    return UbmEnsemble(
        n,
        np.asarray(params.record_times),
        modes,
        np.concatenate(chunks, axis=0),
        master_seed,
        params,
    )
