"""Circle, Slobodeckij and tensor Sobolev norms on uniform grids.

Time integrals use the trapezoidal rule on the grid t_i = i h.  The double
integral of the Slobodeckij seminorm is summed over off-diagonal node
pairs only (|t - u| >= h); the diagonal cells are dropped.  This
underestimates the continuous norm by an amount that vanishes as h -> 0
when s < 1/2, and the same discretisation is used for simulated fields and
for the exact expectation so the two are directly comparable.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .covariance import increment_msd

__all__ = [
    "SobolevIndex",
    "DiscreteField",
    "ExpectedNorm",
    "circle_norm_sq",
    "trapezoid_weights",
    "slobodeckij_norm_sq",
    "tensor_norm_sq",
    "expected_tensor_norm_exact",
    "uniform_grid",
]


@dataclass(frozen=True)
class SobolevIndex:
    s: float
    eps: float

    def __post_init__(self):
        if not 0 < self.s < 1:
            raise ValueError(f"time regularity s must lie in (0, 1), got {self.s}")
        if not self.eps > 0:
            raise ValueError(f"circle parameter eps must be positive, got {self.eps}")

    @property
    def valid_regime(self) -> bool:
        """0 < s < 1/2 and eps > s: the regime where the norms stay bounded in n."""
        return self.s < 0.5 and self.eps > self.s


def uniform_grid(T: float, num: int) -> np.ndarray:
    if num < 2:
        raise ValueError("need at least 2 grid points")
    return np.arange(num) * (T / (num - 1))


@dataclass
class DiscreteField:
    """coeffs[..., i, k-1] = c_k(times[i]) on a uniform grid over [0, T]."""

    times: np.ndarray
    coeffs: np.ndarray

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.coeffs = np.asarray(self.coeffs, dtype=complex)
        if len(self.times) < 2:
            raise ValueError("need at least 2 time points")
        steps = np.diff(self.times)
        if np.any(np.abs(steps - steps[0]) > 1e-9 * max(steps[0], 1e-300)) or steps[0] <= 0:
            raise ValueError("time grid must be uniform and ascending")
        if self.coeffs.shape[-2] != len(self.times) or self.coeffs.shape[-1] < 1:
            raise ValueError("coeffs must have shape (..., len(times), K) with K >= 1")

    @property
    def K(self) -> int:
        return self.coeffs.shape[-1]

    @property
    def h(self) -> float:
        return float(self.times[1] - self.times[0])

    @property
    def T(self) -> float:
        return float(self.times[-1] - self.times[0])

    @classmethod
    def from_fourier(cls, field) -> "DiscreteField":
        return cls(field.times, field.coeffs)


def circle_norm_sq(coeffs, exponent: float, modes=None):
    """sum_k |k|^{2 exponent} |f_k|^2 over the given (nonzero) modes.

    ``coeffs`` trailing axis runs over ``modes`` (default 1..K).
    """
    coeffs = np.asarray(coeffs, dtype=complex)
    modes = np.arange(1, coeffs.shape[-1] + 1) if modes is None else np.asarray(modes)
    if np.any(modes == 0):
        raise ValueError("zero mode is not allowed (mean-zero functions)")
    if modes.shape[-1] != coeffs.shape[-1]:
        raise ValueError("modes and coeffs disagree in length")
    w = np.abs(modes).astype(float) ** (2 * exponent)
    out = np.sum(w * np.abs(coeffs) ** 2, axis=-1)
    return out if np.ndim(out) else float(out)


def trapezoid_weights(num: int) -> np.ndarray:
    w = np.ones(num)
    w[0] = w[-1] = 0.5
    return w


def _lag_kernel(num: int, h: float, s: float) -> np.ndarray:
    """kappa[d] = h^2 / (d h)^{1+2s} for d = 1..num-1 (index 0 unused)."""
    d = np.arange(num, dtype=float)
    kappa = np.zeros(num)
    kappa[1:] = h * h / (d[1:] * h) ** (1 + 2 * s)
    return kappa


def _check_s(s: float) -> None:
    if not 0 < s < 1:
        raise ValueError(f"s must lie in (0, 1), got {s}")


def _xcorr(x: np.ndarray, y: np.ndarray, num: int) -> np.ndarray:
    """r[d] = sum_i conj(x_i) y_{i+d} for d = 0..num-1 along axis -2."""
    L = 2 * num
    X = np.fft.fft(x, n=L, axis=-2)
    Y = np.fft.fft(y, n=L, axis=-2)
    return np.fft.ifft(np.conj(X) * Y, axis=-2)[..., :num, :]


def _slobodeckij_parts(values: np.ndarray, h: float, s: float):
    """(L2 part, seminorm part) per trailing axis, time on axis -2.

    The off-diagonal pair sum
        sum_{i != j} w_i w_j kappa_|i-j| |v_i - v_j|^2
    is expanded into |v_i|^2 + |v_j|^2 - 2 Re(conj(v_i) v_j) and each lag
    sum is read off an FFT correlation, O(N log N) instead of O(N^2).
    """
    num = values.shape[-2]
    w = trapezoid_weights(num)
    kappa = _lag_kernel(num, h, s)
    sq = np.abs(values) ** 2
    l2 = h * np.einsum("i,...ik->...k", w, sq)
    wcol = np.broadcast_to(w[:, None], values.shape[-2:])
    p = w[:, None] * sq
    a = w[:, None] * values
    # sum_i w_i w_{i+d} (|v_i|^2 + |v_{i+d}|^2)
    pw = _xcorr(p, wcol, num).real + _xcorr(wcol, p, num).real
    cross = _xcorr(a, a, num).real
    semi = 2 * np.einsum("d,...dk->...k", kappa[1:], pw[..., 1:, :] - 2 * cross[..., 1:, :])
    return l2, semi


def slobodeckij_norm_sq(samples, s: float, T: float) -> float:
    """(f, f)_s for samples of f on the uniform grid of len(samples) points over [0, T]."""
    _check_s(s)
    samples = np.asarray(samples, dtype=complex)
    if samples.ndim != 1 or len(samples) < 2:
        raise ValueError("need a 1-d array of at least 2 samples")
    h = T / (len(samples) - 1)
    l2, semi = _slobodeckij_parts(samples[:, None], h, s)
    return float(l2[0] + semi[0])


def tensor_norm_sq(field: DiscreteField, idx: SobolevIndex):
    """||F||^2 in H^s([0,T]) (x) H_0^{-eps}(S^1) for F = sum_k c_k(t) e^{-ik theta}.

    A leading replica axis on ``field.coeffs`` gives one value per replica.
    """
    l2, semi = _slobodeckij_parts(field.coeffs, field.h, idx.s)
    w = np.arange(1, field.K + 1, dtype=float) ** (-2 * idx.eps)
    out = (l2 + semi) @ w
    return out if np.ndim(out) else float(out)


@dataclass(frozen=True)
class ExpectedNorm:
    value: float
    stationary_part: float
    increment_part: float
    tail_bound: float


def expected_tensor_norm_exact(n: int, idx: SobolevIndex, K: int, T: float, num_times: int = 512) -> ExpectedNorm:
    """E||log p_n||^2 truncated at K modes, on the same quadrature as tensor_norm_sq.

    Mode k contributes k^{-2-2eps} times
      (k ^ n) * (trapezoid length of [0,T])
      + sum over off-diagonal node pairs of E|Tr U^k(t) - Tr U^k(u)|^2 / |t-u|^{1+2s} h^2.
    ``tail_bound`` = T K^{-2eps}/(2 eps) bounds the omitted stationary part.
    """
    if not idx.valid_regime:
        warnings.warn(f"s={idx.s}, eps={idx.eps} is outside 0 < s < 1/2, eps > s", stacklevel=2)
    if K < 1 or n < 1:
        raise ValueError("K and n must be >= 1")
    h = T / (num_times - 1)
    w = trapezoid_weights(num_times)
    kappa = _lag_kernel(num_times, h, idx.s)
    lags = np.arange(1, num_times)
    pair_w = np.array([2 * kappa[d] * np.dot(w[d:], w[:-d]) for d in lags])
    length = h * w.sum()
    stat = 0.0
    incr = 0.0
    for k in range(1, K + 1):
        ck = float(k) ** (-2 - 2 * idx.eps)
        stat += ck * min(k, n) * length
        incr += ck * float(np.dot(pair_w, increment_msd(k, n, lags * h)))
    tail = T * float(K) ** (-2 * idx.eps) / (2 * idx.eps)
    return ExpectedNorm(float(stat + incr), float(stat), float(incr), tail)
