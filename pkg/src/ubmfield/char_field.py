"""log det(I - e^{-i theta} U) and its Fourier coefficients.

Branch: each factor log(1 - e^{i(theta_k - theta)}) uses the principal
branch, so its imaginary part lies in (-pi/2, pi/2]; an exact hit
theta_k = theta contributes real part -inf and imaginary part pi/2.

The field is kept one-sided against e^{-ik theta}:

    log p(t, theta) = sum_{k>=1} c_k(t) e^{-ik theta},   c_k = -Tr(U^k)/k.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "HIT_TOL",
    "FourierField",
    "log_char_poly",
    "fourier_coeff",
    "field_from_trajectory",
    "field_from_traces",
    "evaluate_series",
]

HIT_TOL = 1e-12


@dataclass
class FourierField:
    """c_k(t_i) for 1 <= k <= K; coeffs has shape (..., len(times), K)."""

    K: int
    times: np.ndarray
    coeffs: np.ndarray
    n: int | None = None

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.coeffs = np.asarray(self.coeffs, dtype=complex)
        if self.coeffs.shape[-1] != self.K or self.coeffs.shape[-2] != len(self.times):
            raise ValueError(f"coeffs shape {self.coeffs.shape} does not match (times={len(self.times)}, K={self.K})")

    @property
    def modes(self) -> np.ndarray:
        return np.arange(1, self.K + 1)

    def values(self, theta) -> np.ndarray:
        return evaluate_series(self.coeffs, theta)


def _wrap(x):
    # distance to the nearest multiple of 2pi
    return np.abs(np.mod(x + np.pi, 2 * np.pi) - np.pi)


def log_char_poly(angles, theta):
    """sum_k log(1 - e^{i(angles_k - theta)}) with the branch convention above.

    ``theta`` may be an array; the result then has its shape.  A real part
    of -inf flags that theta coincides with an eigenangle (within HIT_TOL).
    """
    angles = np.asarray(angles, dtype=float)
    theta_arr = np.asarray(theta, dtype=float)
    diff = angles[None, :] - theta_arr.reshape(-1, 1)
    hit = _wrap(diff) < HIT_TOL
    z = 1.0 - np.exp(1j * np.where(hit, np.pi, diff))
    terms = np.log(z)
    # principal log of 1 - e^{i phi} already has Im in (-pi/2, pi/2)
    terms = np.where(hit, complex(-np.inf, np.pi / 2), terms)
    re = np.sum(terms.real, axis=1)
    im = np.sum(terms.imag, axis=1)
    out = re + 1j * im
    return out.reshape(theta_arr.shape) if theta_arr.ndim else complex(out[0])


def fourier_coeff(trace_k, k: int):
    """Coefficient of e^{-ik theta}: -Tr(U^k)/k."""
    if k < 1:
        raise ValueError("mode k must be >= 1 (the zero mode is excluded)")
    return -trace_k / k


def field_from_traces(traces: np.ndarray, times, n: int | None = None) -> FourierField:
    """Field from Tr U^k for k = 1..K along the trailing axis."""
    traces = np.asarray(traces, dtype=complex)
    K = traces.shape[-1]
    return FourierField(K, times, -traces / np.arange(1, K + 1), n)


def field_from_trajectory(traj, K: int) -> FourierField:
    """Fourier field with cutoff K from a UbmTrajectory or UbmEnsemble."""
    if K < 1:
        raise ValueError("K must be >= 1")
    missing = [k for k in range(1, K + 1) if k not in traj.modes]
    if missing:
        raise ValueError(f"trajectory lacks traces for modes {missing[:5]}{'...' if len(missing) > 5 else ''}")
    idx = [traj.modes.index(k) for k in range(1, K + 1)]
    return field_from_traces(traj.traces[..., idx], traj.times, traj.n)


def evaluate_series(coeffs, theta):
    """sum_k coeffs[..., k-1] e^{-ik theta}; trailing axis of the result is theta."""
    coeffs = np.asarray(coeffs, dtype=complex)
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    k = np.arange(1, coeffs.shape[-1] + 1)
    basis = np.exp(-1j * np.outer(k, theta))
    return coeffs @ basis
