"""Small Monte Carlo summaries shared by the experiments and the tests."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["Estimate", "estimate", "lagged_products"]


@dataclass(frozen=True)
class Estimate:
    mean: float
    stderr: float
    count: int

    def z(self, target: float) -> float:
        if self.stderr == 0:
            return 0.0 if self.mean == target else float("inf")
        return (self.mean - target) / self.stderr

    def agrees(self, target: float, nsigma: float = 4.0, allowance: float = 0.0) -> bool:
        """|mean - target| <= nsigma * stderr + allowance."""
        return abs(self.mean - target) <= nsigma * self.stderr + allowance


def estimate(samples, axis: int = 0) -> Estimate:
    """Sample mean and standard error of real samples along ``axis``."""
    x = np.asarray(samples, dtype=float)
    if x.shape[axis] < 2:
        raise ValueError("need at least 2 samples for a standard error")
    m = x.mean(axis=axis)
    se = x.std(axis=axis, ddof=1) / np.sqrt(x.shape[axis])
    if np.ndim(m):
        raise ValueError("estimate() reduces to a scalar; slice the samples first")
    return Estimate(float(m), float(se), int(x.shape[axis]))


def lagged_products(x: np.ndarray, ref_index: int = 0) -> np.ndarray:
    """x[:, i] * conj(x[:, ref_index]) for every record index i (replicas on axis 0)."""
    return x * np.conj(x[:, [ref_index]])
