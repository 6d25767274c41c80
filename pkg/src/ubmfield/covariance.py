"""Exact second moments of traces of powers of unitary Brownian motion.

Everything here is closed form; the Monte Carlo modules are tested
against these functions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import factorial
from typing import Mapping, Sequence

import numpy as np

__all__ = [
    "log_sinh",
    "trace_autocov",
    "increment_msd",
    "CircleFunction",
    "linear_stat_cov",
    "ds_threshold",
    "ds_joint_moment",
]

_LARGE = 30.0
_SMALL = 1e-4


def log_sinh(x):
    """log(sinh(x)) for x > 0, without overflow for large x."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    big = x > _LARGE
    small = x < _SMALL
    mid = ~(big | small)
    out[big] = x[big] + np.log1p(-np.exp(-2 * x[big])) - np.log(2.0)
    out[small] = np.log(x[small]) + np.log1p(x[small] ** 2 / 6)
    out[mid] = np.log(np.sinh(x[mid]))
    return out


def _check_kn(k: int, n: int) -> None:
    if k < 1:
        raise ValueError(f"mode k must be >= 1, got {k}")
    if n < 1:
        raise ValueError(f"dimension n must be >= 1, got {n}")


def trace_autocov(k: int, n: int, t):
    """E[Tr U^k(t) conj(Tr U^k(0))] for UBM at stationarity.

    exp(-k(k v n)t/n) sinh(k(k ^ n)t/n) / sinh(kt/n), equal to k ^ n at t = 0.
    Accepts scalar or array ``t``.
    """
    _check_kn(k, n)
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0):
        raise ValueError("lag t must be non-negative")
    lo, hi = min(k, n), max(k, n)
    num = k * lo * t_arr / n
    den = k * t_arr / n
    # at kt/n < 1e-300 the value equals its t = 0 limit in double precision
    pos = den > 1e-300
    out = np.full(t_arr.shape, float(lo))
    if np.any(pos):
        log_val = -k * hi * t_arr[pos] / n + log_sinh(num[pos]) - log_sinh(den[pos])
        out[pos] = np.exp(log_val)
    return out if out.ndim else float(out)


def increment_msd(k: int, n: int, t):
    """E|Tr U^k(t) - Tr U^k(0)|^2 = 2(k ^ n) - 2 trace_autocov(k, n, t)."""
    ac = np.asarray(trace_autocov(k, n, t))
    out = np.maximum(2.0 * min(k, n) - 2.0 * ac, 0.0)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class CircleFunction:
    """Trigonometric polynomial sum_k f_k e^{ik theta} with no zero mode."""

    coeffs: Mapping[int, complex] = field(default_factory=dict)

    def __post_init__(self):
        if 0 in self.coeffs:
            raise ValueError("zero Fourier mode must be absent (mean-zero functions)")
        object.__setattr__(self, "coeffs", {int(k): complex(v) for k, v in self.coeffs.items()})

    def __getitem__(self, k: int) -> complex:
        return self.coeffs.get(k, 0j)

    @property
    def support(self) -> set:
        return {k for k, v in self.coeffs.items() if v != 0}

    def is_real(self, tol: float = 1e-12) -> bool:
        return all(abs(self[-k] - np.conj(v)) <= tol for k, v in self.coeffs.items())

    def __call__(self, theta):
        theta = np.asarray(theta, dtype=float)
        return sum(v * np.exp(1j * k * theta) for k, v in self.coeffs.items())

    @classmethod
    def cos_mode(cls, k: int, amplitude: float = 1.0) -> "CircleFunction":
        """amplitude * 2cos(k theta) = amplitude * (e_k + e_{-k})."""
        return cls({k: amplitude, -k: amplitude})


def _mode_weight(k: int, n: int, t: float) -> float:
    # weight of f_k g_{-k} in the two-time covariance of linear statistics
    a = abs(k)
    if a * t / n < 1e-300:
        return float(min(a, n))
    if a <= n - 1:
        # sgn(k) sinh(k^2 t/n)/sinh(kt/n) = sinh(k^2 t/n)/sinh(|k|t/n)
        return float(np.exp(-a * t + log_sinh(a * a * t / n) - log_sinh(a * t / n)))
    return float(np.exp(-a * a * t / n + log_sinh(a * t) - log_sinh(a * t / n)))


def linear_stat_cov(f: CircleFunction, g: CircleFunction, n: int, t: float) -> float:
    """E[(sum_j f(z_j(0))) (sum_j g(z_j(t)))] for the UBM eigenvalue process.

    Two-sum formula over |k| <= n-1 and |k| >= n, evaluated over the joint
    support of f and g.  Only real-valued f and g are accepted.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if t < 0:
        raise ValueError("lag t must be non-negative")
    if not (f.is_real() and g.is_real()):
        raise ValueError("linear_stat_cov requires real-valued functions (f_{-k} = conj f_k)")
    total = 0j
    for k in sorted(f.support):
        gk = g[-k]
        if gk != 0:
            total += f[k] * gk * _mode_weight(k, n, t)
    return float(total.real)


def _multiplicities(a) -> dict:
    if isinstance(a, Mapping):
        items = {int(j): int(m) for j, m in a.items()}
    else:
        items = {j + 1: int(m) for j, m in enumerate(a)}
    for j, m in items.items():
        if j < 1:
            raise ValueError(f"power index must be >= 1, got {j}")
        if m < 0:
            raise ValueError(f"multiplicities must be non-negative, got {m} at j={j}")
    return {j: m for j, m in items.items() if m}


def ds_threshold(a, b) -> int:
    a, b = _multiplicities(a), _multiplicities(b)
    return max(sum(j * m for j, m in a.items()), sum(j * m for j, m in b.items()))


def ds_joint_moment(a: Sequence[int] | Mapping[int, int], b: Sequence[int] | Mapping[int, int], n: int):
    """E[prod_j (Tr U^j)^{a_j} conj(Tr U^j)^{b_j}] for Haar U in U(n).

    ``a`` and ``b`` are multiplicity vectors (a_1, a_2, ...) or mappings
    {j: a_j}.  Returns the exact integer delta_{ab} prod_j j^{a_j} a_j! when
    n >= max(sum j a_j, sum j b_j); returns None below that threshold,
    where the formula is not claimed.
    """
    am, bm = _multiplicities(a), _multiplicities(b)
    if n < ds_threshold(am, bm):
        return None
    if am != bm:
        return 0
    out = 1
    for j, m in am.items():
        out *= j**m * factorial(m)
    return out
