"""Second moments of trace words in a GUE matrix H and a Haar unitary U.

    E |Tr(H U^{s_1} H U^{s_2} ... H U^{s_j})|^2

is reduced, by Wick's theorem for the Gaussian entries of H, to a sum over
pairings pi of {1..2j} of Haar expectations of products of traces of powers
of U.  Each pairing pi is lifted to a pairing pi~ of {1..4j}; the cycles of
pi~ composed with a fixed pairing rho, restricted to even labels, say which
exponents are collected into a common trace.  The resulting Haar moments
are evaluated with the Diaconis-Shahshahani formula, so the answer is an
integer polynomial in n, exact from a threshold n_min upward.

Permutations are stored 1-based: ``images[l - 1]`` is the image of ``l``.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from math import factorial
from typing import Iterator, Sequence

import numpy as np

from .ensembles import adjoint, sample_gue, sample_haar_unitary
from .rng import RngLike, as_generator

__all__ = [
    "Pairing",
    "MomentPolynomial",
    "enumerate_pairings",
    "double_factorial",
    "lift_pairing",
    "rho",
    "even_orbits",
    "sigma_hat",
    "orbit_exponents",
    "ds_evaluate",
    "wick_second_moment",
    "wick_mc_samples",
    "wick_mc_estimate",
    "validate_sigma",
]


@dataclass(frozen=True)
class Pairing:
    """Fixed-point-free involution of {1, ..., size}."""

    images: tuple

    def __post_init__(self):
        imgs = tuple(int(x) for x in self.images)
        object.__setattr__(self, "images", imgs)
        m = len(imgs)
        if m == 0 or m % 2:
            raise ValueError("a pairing acts on a non-empty set of even size")
        for l, p in enumerate(imgs, start=1):
            if not 1 <= p <= m:
                raise ValueError(f"image {p} out of range 1..{m}")
            if p == l:
                raise ValueError(f"{l} is a fixed point")
            if imgs[p - 1] != l:
                raise ValueError(f"not an involution at {l}")

    @classmethod
    def _trusted(cls, images: tuple) -> "Pairing":
        # skip validation for pairings valid by construction
        obj = object.__new__(cls)
        object.__setattr__(obj, "images", images)
        return obj

    @classmethod
    def from_pairs(cls, pairs) -> "Pairing":
        pairs = [tuple(p) for p in pairs]
        m = 2 * len(pairs)
        imgs = [0] * m
        for a, b in pairs:
            if not (1 <= a <= m and 1 <= b <= m):
                raise ValueError(f"pair {(a, b)} out of range 1..{m}")
            imgs[a - 1], imgs[b - 1] = b, a
        return cls(tuple(imgs))

    @property
    def size(self) -> int:
        return len(self.images)

    def __call__(self, l: int) -> int:
        return self.images[l - 1]

    def pairs(self) -> list:
        return [(l, p) for l, p in enumerate(self.images, start=1) if l < p]

    def pairs_even_with_odd(self) -> bool:
        return all((l + p) % 2 == 1 for l, p in self.pairs())

    def __str__(self) -> str:
        return "".join(f"({a},{b})" if self.size > 9 else f"({a}{b})" for a, b in self.pairs())


def double_factorial(m: int) -> int:
    out = 1
    while m > 1:
        out *= m
        m -= 2
    return out


def enumerate_pairings(two_j: int) -> Iterator[Pairing]:
    """All (two_j - 1)!! pairings of {1..two_j}.

    Order: the smallest unpaired element is matched with each remaining
    element in increasing order, recursively.
    """
    if two_j < 2 or two_j % 2:
        raise ValueError(f"pairings need an even size >= 2, got {two_j}")

    imgs = [0] * two_j

    def rec(free: list) -> Iterator[Pairing]:
        if not free:
            yield Pairing._trusted(tuple(imgs))
            return
        a = free[0]
        for i in range(1, len(free)):
            b = free[i]
            imgs[a - 1], imgs[b - 1] = b, a
            yield from rec(free[1:i] + free[i + 1 :])

    yield from rec(list(range(1, two_j + 1)))


def lift_pairing(pi: Pairing) -> Pairing:
    """pi on {1..2j} -> pi~ on {1..4j}: pi~(2l-1) = 2pi(l), pi~(2l) = 2pi(l)-1."""
    imgs = []
    for p in pi.images:
        imgs += (2 * p, 2 * p - 1)
    return Pairing._trusted(tuple(imgs))


@lru_cache(maxsize=None)
def rho(j: int) -> Pairing:
    """(2 3)(4 5)...(2j, 1)(2j+1, 2j+4)(2j+3, 2j+6)...(4j-1, 2j+2)."""
    if j < 1:
        raise ValueError("j must be >= 1")
    pairs = [(2 * l, 2 * l + 1) for l in range(1, j)] + [(2 * j, 1)]
    pairs += [(2 * j + 2 * l - 1, 2 * j + 2 * l + 2) for l in range(1, j)]
    pairs += [(4 * j - 1, 2 * j + 2)]
    return Pairing.from_pairs(pairs)


def even_orbits(pi_tilde: Pairing, rho_: Pairing) -> tuple:
    """Cycles of w -> pi_tilde(rho(w)) on the even labels {2, 4, ..., size}.

    Each orbit is a tuple starting at its smallest label; orbits are sorted
    by that label.
    """
    if pi_tilde.size != rho_.size:
        raise ValueError("pairings act on sets of different size")
    if not (pi_tilde.pairs_even_with_odd() and rho_.pairs_even_with_odd()):
        raise ValueError("both pairings must pair every even label with an odd one")
    p, r = pi_tilde.images, rho_.images
    seen = [False] * (pi_tilde.size + 1)
    orbits = []
    for start in range(2, pi_tilde.size + 1, 2):
        if seen[start]:
            continue
        orbit = []
        w = start
        while not seen[w]:
            seen[w] = True
            orbit.append(w)
            w = p[r[w - 1] - 1]
        orbits.append(tuple(orbit))
    return tuple(orbits)


def validate_sigma(sigma: Sequence[int]) -> tuple:
    sigma = tuple(int(s) for s in sigma)
    if not sigma:
        raise ValueError("sigma must contain at least one exponent")
    if any(s == 0 for s in sigma):
        raise ValueError("exponents must be nonzero (drop identity factors U^0 instead)")
    return sigma


def sigma_hat(sigma: Sequence[int], w: int) -> int:
    """Exponent carried by the even label w = 2l.

    l in 1..j -> sigma_l;  l = j+1 -> -sigma_j;  l in j+2..2j -> -sigma_{l-j-1}.
    """
    j = len(sigma)
    if w % 2 or not 2 <= w <= 4 * j:
        raise ValueError(f"label {w} is not an even label in 2..{4 * j}")
    l = w // 2
    if l <= j:
        return sigma[l - 1]
    if l == j + 1:
        return -sigma[j - 1]
    return -sigma[l - j - 2]


@lru_cache(maxsize=None)
def _orbit_structures(j: int) -> tuple:
    """For each pairing of {1..2j}, its even orbits as tuples of labels."""
    r = rho(j)
    return tuple(even_orbits(lift_pairing(pi), r) for pi in enumerate_pairings(2 * j))


@lru_cache(maxsize=4096)
def _hat_table(sigma: tuple) -> tuple:
    # table[w] = sigma_hat(sigma, w) for even w
    table = [0] * (4 * len(sigma) + 1)
    for w in range(2, len(table), 2):
        table[w] = sigma_hat(sigma, w)
    return tuple(table)


def _orbit_sums(table: tuple, orbits) -> tuple:
    return tuple(sum(table[w] for w in o) for o in orbits)


def orbit_exponents(sigma: Sequence[int], orbits) -> tuple:
    """Total exponent sum_{w in o} sigma_hat(w) of each orbit o."""
    return _orbit_sums(_hat_table(validate_sigma(sigma)), orbits)


@dataclass(frozen=True)
class MomentTerm:
    coeff: int
    n_power: int
    n_min: int


def ds_evaluate(exponents: Sequence[int]) -> MomentTerm:
    """E[prod_o Tr U^{e_o}] for Haar U as a monomial in n.

    Zero exponents give deterministic factors Tr I = n.  The rest is the
    Diaconis-Shahshahani moment: with a_m (b_m) the number of exponents
    equal to m (-m), the value is prod_m m^{a_m} a_m! if a = b and 0
    otherwise, valid for n >= max(sum m a_m, sum m b_m).
    """
    exponents = [int(e) for e in exponents]
    zeros = sum(1 for e in exponents if e == 0)
    a = Counter(e for e in exponents if e > 0)
    b = Counter(-e for e in exponents if e < 0)
    n_min = max(sum(m * c for m, c in a.items()), sum(m * c for m, c in b.items()))
    if a != b:
        return MomentTerm(0, 0, n_min)
    coeff = 1
    for m, c in a.items():
        coeff *= m**c * factorial(c)
    return MomentTerm(coeff, zeros, n_min)


class MomentPolynomial:
    """Integer polynomial in n, exact for integer n >= n_min."""

    def __init__(self, terms=None, n_min: int = 1):
        coeffs = Counter()
        for power, coeff in dict(terms or {}).items():
            if int(power) < 0:
                raise ValueError("powers of n must be non-negative")
            coeffs[int(power)] += int(coeff)
        self.coeffs = {p: c for p, c in sorted(coeffs.items()) if c != 0}
        self.n_min = int(n_min)

    @property
    def terms(self) -> list:
        """(coefficient, power) pairs sorted by power."""
        return [(c, p) for p, c in self.coeffs.items()]

    def __call__(self, n: int) -> int:
        return sum(c * n**p for p, c in self.coeffs.items())

    def is_exact_at(self, n: int) -> bool:
        return n >= self.n_min

    def __eq__(self, other) -> bool:
        if not isinstance(other, MomentPolynomial):
            return NotImplemented
        return self.coeffs == other.coeffs and self.n_min == other.n_min

    def __hash__(self):
        return hash((tuple(self.coeffs.items()), self.n_min))

    def expression(self) -> str:
        if not self.coeffs:
            return "0"
        parts = []
        for p, c in self.coeffs.items():
            mono = "" if p == 0 else ("n" if p == 1 else f"n^{p}")
            if not mono:
                body = str(abs(c))
            elif abs(c) == 1:
                body = mono
            else:
                body = f"{abs(c)}*{mono}"
            if not parts:
                parts.append(body if c > 0 else f"-{body}")
            else:
                parts.append(("+ " if c > 0 else "- ") + body)
        return " ".join(parts)

    def __str__(self) -> str:
        return f"{self.expression()} (valid for n >= {self.n_min})"

    def __repr__(self) -> str:
        return f"MomentPolynomial({self.coeffs!r}, n_min={self.n_min})"


def wick_second_moment(sigma: Sequence[int]) -> MomentPolynomial:
    """E|Tr(H U^{s_1} ... H U^{s_j})|^2 as an exact polynomial in n.

    Negative exponents are allowed (powers of U^*).  The result is claimed
    only for n >= n_min, the largest Diaconis-Shahshahani threshold over all
    pairings (and at least 1).
    """
    sigma = validate_sigma(sigma)
    coeffs = Counter()
    n_min = 1
    table = _hat_table(sigma)
    for orbits in _orbit_structures(len(sigma)):
        term = ds_evaluate(_orbit_sums(table, orbits))
        n_min = max(n_min, term.n_min)
        if term.coeff:
            coeffs[term.n_power] += term.coeff
    return MomentPolynomial(coeffs, n_min)


def _unitary_power(U: np.ndarray, s: int) -> np.ndarray:
    base = U if s > 0 else adjoint(U)
    return np.linalg.matrix_power(base, abs(s))


def wick_mc_samples(sigma: Sequence[int], n: int, replicas: int, rng: RngLike, batch: int = 10_000) -> np.ndarray:
    """Independent draws of |Tr(H U^{s_1} ... H U^{s_j})|^2."""
    sigma = validate_sigma(sigma)
    if n < 1:
        raise ValueError("n must be >= 1")
    gen = as_generator(rng)
    out = np.empty(replicas)
    done = 0
    while done < replicas:
        m = min(batch, replicas - done)
        U = sample_haar_unitary(n, gen, size=m)
        H = sample_gue(n, gen, size=m)
        powers = {s: _unitary_power(U, s) for s in set(sigma)}
        # Tr(W P_last) = sum_ij W_ij (P_last)_ji saves the last product
        W = H
        for s in sigma[:-1]:
            W = W @ powers[s] @ H
        tr = np.einsum("rij,rji->r", W, powers[sigma[-1]])
        out[done : done + m] = np.abs(tr) ** 2
        done += m
    return out


def wick_mc_estimate(sigma: Sequence[int], n: int, replicas: int, rng: RngLike) -> tuple:
    """Monte Carlo (mean, standard error) of the second moment."""
    if replicas < 2:
        raise ValueError("need at least 2 replicas for a standard error")
    x = wick_mc_samples(sigma, n, replicas, rng)
    return float(x.mean()), float(x.std(ddof=1) / np.sqrt(len(x)))
