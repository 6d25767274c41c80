"""Random matrix samplers and the small amount of complex linear algebra
they need.

Matrices are plain complex ``numpy`` arrays.  Every sampler accepts an
optional ``size`` and then returns a stack of shape ``(size, n, n)``; all
linear-algebra helpers act on the last two axes, so they work on single
matrices and on stacks alike.
"""

from __future__ import annotations

import numpy as np

from .rng import RngLike, as_generator

__all__ = [
    "unitarity_tol",
    "unitarity_error",
    "is_unitary",
    "adjoint",
    "sample_haar_unitary",
    "sample_gue",
    "skew_hermitian_basis",
    "sample_skew_increment",
    "matrix_exp_skew",
    "exp_i_hermitian",
    "nearest_unitary",
    "eigenangles",
    "trace_powers",
]


_POWER_CUTOFF = 8


def unitarity_tol(n: int) -> float:
    return 1e-10 * n


def adjoint(A: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(A, -1, -2))


def unitarity_error(U: np.ndarray) -> float:
    """max |(U U^*)_{ij} - delta_ij| over all entries (and the whole stack)."""
    n = U.shape[-1]
    return float(np.max(np.abs(U @ adjoint(U) - np.eye(n))))


def is_unitary(U: np.ndarray, tol: float | None = None) -> bool:
    n = U.shape[-1]
    return unitarity_error(U) <= (unitarity_tol(n) if tol is None else tol)


def _check_dim(n: int) -> None:
    if int(n) != n or n < 1:
        raise ValueError(f"dimension must be a positive integer, got {n!r}")


def _shape(n: int, size: int | None) -> tuple:
    return (n, n) if size is None else (int(size), n, n)


def sample_haar_unitary(n: int, rng: RngLike, size: int | None = None) -> np.ndarray:
    """Haar-distributed unitary matrix (or a stack of ``size`` of them).

    Complex Ginibre matrix, QR factorisation, then each column of Q is
    multiplied by the phase of the matching diagonal entry of R so the
    factorisation is unique and the law is exactly Haar.
    """
    _check_dim(n)
    gen = as_generator(rng)
    shape = _shape(n, size)
    # the Ginibre scale is irrelevant to Q, so the usual 1/sqrt(2) is skipped
    Z = gen.standard_normal(shape) + 1j * gen.standard_normal(shape)
    Q, R = np.linalg.qr(Z)
    d = np.diagonal(R, axis1=-2, axis2=-1)
    phase = d / np.abs(d)
    return Q * phase[..., None, :]


def _gue_from_normals(xi: np.ndarray, n: int) -> np.ndarray:
    # xi has a trailing axis of n*n standard normals, read as an n x n real
    # matrix M: diag(M) is the diagonal of H, the strict upper triangle of M
    # gives Re H_ij and the strict lower triangle gives Im H_ij (i < j).
    M = xi.reshape(xi.shape[:-1] + (n, n))
    upper = np.triu(M, 1)
    lower_t = np.swapaxes(np.tril(M, -1), -1, -2)
    Z = (upper + 1j * lower_t) / np.sqrt(2.0)
    H = Z + adjoint(Z)
    idx = np.arange(n)
    H[..., idx, idx] = M[..., idx, idx]
    return H


def sample_gue(n: int, rng: RngLike, size: int | None = None) -> np.ndarray:
    """GUE(n): real N(0,1) diagonal, off-diagonal real and imaginary parts
    independent N(0,1/2), Hermitian by construction."""
    _check_dim(n)
    gen = as_generator(rng)
    lead = () if size is None else (int(size),)
    return _gue_from_normals(gen.standard_normal(lead + (n * n,)), n)


def skew_hermitian_basis(n: int) -> np.ndarray:
    """The n^2 matrices (E_kl - E_lk)/sqrt(2n), i(E_kl + E_lk)/sqrt(2n)
    for k < l, and i E_kk/sqrt(n); orthonormal for <A,B> = n Tr(A B^*)."""
    _check_dim(n)
    out = []
    for k in range(n):
        for l in range(k + 1, n):
            A = np.zeros((n, n), dtype=complex)
            A[k, l], A[l, k] = 1.0, -1.0
            out.append(A / np.sqrt(2 * n))
            S = np.zeros((n, n), dtype=complex)
            S[k, l] = S[l, k] = 1j
            out.append(S / np.sqrt(2 * n))
    for k in range(n):
        D = np.zeros((n, n), dtype=complex)
        D[k, k] = 1j
        out.append(D / np.sqrt(n))
    return np.array(out)


def skew_increment_from_normals(xi: np.ndarray, n: int, dt: float) -> np.ndarray:
    """sqrt(dt) * sum_k xi_k X_k for a trailing axis of n^2 standard normals.

    Written as i sqrt(dt/n) H with H the GUE matrix built from the same
    normals, which is the same linear map (up to relabelling and signs of
    the basis) without materialising the basis.
    """
    return 1j * np.sqrt(dt / n) * _gue_from_normals(xi, n)


def exp_i_hermitian(H: np.ndarray, c: float) -> np.ndarray:
    """exp(i c H) for Hermitian H; H must be exactly Hermitian."""
    w, V = np.linalg.eigh(H)
    return (V * np.exp(1j * c * w)[..., None, :]) @ adjoint(V)


def sample_skew_increment(n: int, dt: float, rng: RngLike, size: int | None = None) -> np.ndarray:
    """Brownian increment B(t+dt) - B(t) on skew-Hermitian n x n matrices."""
    _check_dim(n)
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt!r}")
    gen = as_generator(rng)
    lead = () if size is None else (int(size),)
    return skew_increment_from_normals(gen.standard_normal(lead + (n * n,)), n, dt)


def matrix_exp_skew(A: np.ndarray) -> np.ndarray:
    """exp(A) for skew-Hermitian A via the eigendecomposition of iA."""
    A = np.asarray(A, dtype=complex)
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    if A.shape[-1] == 1:
        return np.exp(A)
    H = 1j * A
    H = 0.5 * (H + adjoint(H))
    w, V = np.linalg.eigh(H)
    # A = -i H  =>  exp(A) = V diag(exp(-i w)) V^*
    return (V * np.exp(-1j * w)[..., None, :]) @ adjoint(V)


def nearest_unitary(M: np.ndarray) -> np.ndarray:
    """Unitary polar factor of M (closest unitary in Frobenius norm)."""
    W, _, Vh = np.linalg.svd(M)
    return W @ Vh


def eigenangles(U: np.ndarray) -> np.ndarray:
    """Ascending eigenangles in [0, 2pi) of a unitary matrix (or stack)."""
    lam = np.linalg.eigvals(U)
    theta = np.mod(np.angle(lam), 2 * np.pi)
    # angle() can return exactly 2pi after mod for -0.0 style inputs
    theta[theta >= 2 * np.pi] = 0.0
    return np.sort(theta, axis=-1)


def trace_powers(U: np.ndarray, modes) -> np.ndarray:
    """Tr(U^k) for each k in ``modes``; trailing axis indexes the modes.

    Small mode sets use repeated products; large ones go through the
    eigenvalues (normalised onto the circle, so |Tr U^k| <= n holds).
    """
    modes = np.asarray(modes, dtype=int)
    if modes.size and modes.max() <= _POWER_CUTOFF:
        out = np.empty(U.shape[:-2] + (len(modes),), dtype=complex)
        P = U
        for k in range(1, modes.max() + 1):
            if k > 1:
                P = P @ U
            hit = np.nonzero(modes == k)[0]
            if hit.size:
                out[..., hit] = np.trace(P, axis1=-2, axis2=-1)[..., None]
        return out
    lam = np.linalg.eigvals(U)
    lam = lam / np.abs(lam)
    return np.sum(lam[..., None, :] ** modes[:, None], axis=-1)
