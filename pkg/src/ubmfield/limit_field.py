"""The limiting field: independent stationary complex OU coefficients.

Mode k follows dA_k = -k A_k dt + dW_k with W_k a complex Brownian motion
(independent real and imaginary standard parts), so E|A_k|^2 = 1/k and
E[A_k(t+s) conj A_k(t)] = e^{-ks}/k.  The field on the cylinder is
X(t, theta) = sum_k A_k(t) e^{-ik theta}; its real part has covariance

    sum_k e^{-k|dt|} cos(k dtheta) / (2k) = -1/2 log|1 - e^{-|dt|} e^{i dtheta}|.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .char_field import evaluate_series
from .rng import RngLike, as_generator

__all__ = [
    "OuEnsemble",
    "sample_ou_paths",
    "limit_coeff_autocov",
    "gff_covariance",
    "gff_covariance_series",
    "gff_series_tail_bound",
    "assemble_field",
]


@dataclass
class OuEnsemble:
    """paths[..., i, k-1] = A_k(times[i]); leading axis is the replica when present."""

    K: int
    times: np.ndarray
    paths: np.ndarray


def sample_ou_paths(K: int, times, rng: RngLike, replicas: int | None = None) -> OuEnsemble:
    """Exact-transition samples of A_1..A_K on an ascending time grid."""
    if K < 1:
        raise ValueError("K must be >= 1")
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or len(times) == 0:
        raise ValueError("times must be a non-empty 1-d grid")
    if np.any(np.diff(times) <= 0):
        raise ValueError("times must be strictly ascending")
    gen = as_generator(rng)
    k = np.arange(1, K + 1)
    lead = () if replicas is None else (int(replicas),)
    paths = np.empty(lead + (len(times), K), dtype=complex)

    def cgauss(var):
        # complex Gaussian with per-component variance var
        shape = lead + (K,)
        return np.sqrt(var) * (gen.standard_normal(shape) + 1j * gen.standard_normal(shape))

    A = cgauss(1.0 / (2 * k))
    paths[..., 0, :] = A
    for i in range(1, len(times)):
        decay = np.exp(-k * (times[i] - times[i - 1]))
        A = decay * A + cgauss(-np.expm1(-2 * k * (times[i] - times[i - 1])) / (2 * k))
        paths[..., i, :] = A
    return OuEnsemble(K, times, paths)


def limit_coeff_autocov(k: int, lag):
    """E[A_k(t + lag) conj A_k(t)] = e^{-k lag}/k."""
    if k < 1:
        raise ValueError("mode k must be >= 1")
    lag = np.asarray(lag, dtype=float)
    if np.any(lag < 0):
        raise ValueError("lag must be non-negative")
    out = np.exp(-k * lag) / k
    return out if out.ndim else float(out)


def gff_covariance(t, theta, t2, theta2):
    """Covariance of Re X (equally Im X) between (t, theta) and (t2, theta2)."""
    r = np.exp(-np.abs(np.asarray(t, dtype=float) - t2))
    phi = np.asarray(theta, dtype=float) - theta2
    coincide = (r == 1.0) & (np.abs(np.mod(phi + np.pi, 2 * np.pi) - np.pi) == 0)
    if np.any(coincide):
        raise ValueError("covariance diverges at coincident points")
    out = -0.5 * np.log(np.abs(1.0 - r * np.exp(1j * phi)))
    return out if out.ndim else float(out)


def gff_covariance_series(K: int, t, theta, t2, theta2) -> float:
    """Partial sum over k <= K of e^{-k|t-t2|} cos(k(theta-theta2)) / (2k)."""
    if K < 1:
        raise ValueError("K must be >= 1")
    tau = abs(float(t) - float(t2))
    phi = float(theta) - float(theta2)
    k = np.arange(1, int(K) + 1, dtype=float)
    terms = np.exp(-k * tau) * np.cos(k * phi) / (2 * k)
    # sum small terms first
    return float(np.sum(terms[::-1]))


def gff_series_tail_bound(K: int, dt: float, dtheta: float) -> float:
    """Bound on |closed form - series(K)|.

    The geometric bound e^{-(K+1)tau} / (2(K+1)(1 - e^{-tau})) for tau > 0,
    and the Abel-summation bound e^{-(K+1)tau} / (2(K+1)|sin(dtheta/2)|),
    which also covers tau = 0.  The smaller one is returned.
    """
    tau = abs(float(dt))
    decay = np.exp(-(K + 1) * tau)
    bounds = []
    if tau > 0:
        bounds.append(decay / (2 * (K + 1) * -np.expm1(-tau)))
    s = abs(np.sin(float(dtheta) / 2))
    if s > 0:
        bounds.append(decay / (2 * (K + 1) * s))
    return float(min(bounds)) if bounds else float("inf")


def assemble_field(paths: np.ndarray, theta) -> np.ndarray:
    """X(t, theta) = sum_k A_k(t) e^{-ik theta}; trailing axis is theta."""
    return evaluate_series(paths, theta)
