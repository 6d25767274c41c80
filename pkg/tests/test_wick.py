import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ubmfield.ensembles import sample_haar_unitary
from ubmfield.rng import RngStream
from ubmfield.stats import estimate
from ubmfield.wick import (
    MomentPolynomial,
    Pairing,
    double_factorial,
    ds_evaluate,
    enumerate_pairings,
    even_orbits,
    lift_pairing,
    orbit_exponents,
    rho,
    sigma_hat,
    wick_mc_estimate,
    wick_second_moment,
)

P = Pairing.from_pairs


# --- pairings ---------------------------------------------------------------


def test_pairings_small():
    assert [str(p) for p in enumerate_pairings(2)] == ["(12)"]
    assert [str(p) for p in enumerate_pairings(4)] == ["(12)(34)", "(13)(24)", "(14)(23)"]
    assert sum(1 for _ in enumerate_pairings(6)) == 15


@pytest.mark.parametrize("j", range(1, 7))
def test_pairing_count_and_distinct(j):
    ps = list(enumerate_pairings(2 * j))
    assert len(ps) == double_factorial(2 * j - 1)
    assert len(set(ps)) == len(ps)


def test_pairing_validation():
    with pytest.raises(ValueError):
        Pairing((1, 2))  # fixed points
    with pytest.raises(ValueError):
        Pairing((2, 3, 1))  # odd size
    with pytest.raises(ValueError):
        Pairing((2, 3, 4, 1))  # not an involution
    with pytest.raises(ValueError):
        list(enumerate_pairings(3))


def test_lift_examples():
    assert lift_pairing(P([(1, 2), (3, 4)])) == P([(1, 4), (2, 3), (5, 8), (6, 7)])
    assert lift_pairing(P([(1, 3), (2, 4)])) == P([(1, 6), (2, 5), (3, 8), (4, 7)])
    assert lift_pairing(P([(1, 2)])) == P([(1, 4), (2, 3)])


def test_rho_examples():
    assert rho(2) == P([(1, 4), (2, 3), (5, 8), (6, 7)])
    assert rho(1) == P([(1, 2), (3, 4)])


@pytest.mark.parametrize("j", range(1, 7))
def test_rho_parity(j):
    assert rho(j).pairs_even_with_odd()
    assert rho(j).size == 4 * j


def test_orbit_examples():
    r = rho(2)
    assert even_orbits(lift_pairing(P([(1, 2), (3, 4)])), r) == ((2,), (4,), (6,), (8,))
    assert even_orbits(lift_pairing(P([(1, 4), (2, 3)])), r) == ((2, 6), (4, 8))


def test_orbits_reject_bad_parity():
    with pytest.raises(ValueError):
        even_orbits(P([(1, 3), (2, 4)]), rho(1))


def test_sigma_hat_examples():
    assert [sigma_hat((5, 7), w) for w in (2, 4, 6, 8)] == [5, 7, -7, -5]
    assert [sigma_hat((4,), w) for w in (2, 4)] == [4, -4]
    with pytest.raises(ValueError):
        sigma_hat((1, 2), 3)


def test_ds_evaluate_examples():
    t = ds_evaluate([0, 0])
    assert (t.coeff, t.n_power, t.n_min) == (1, 2, 0)
    for s in (1, 2, 5):
        t = ds_evaluate([s, -s])
        assert (t.coeff, t.n_power, t.n_min) == (s, 0, s)
        t = ds_evaluate([s, s, -s, -s])
        assert (t.coeff, t.n_power, t.n_min) == (2 * s * s, 0, 2 * s)
    assert ds_evaluate([1, -2, 1]).coeff == 0


# --- exact polynomials --------------------------------------------------------


@pytest.mark.parametrize("m", [1, 2, 3, 7, -4])
def test_single_factor(m):
    poly = wick_second_moment((m,))
    assert poly == MomentPolynomial({1: 1}, 1)
    assert str(poly) == "n (valid for n >= 1)"


def test_example_strings():
    assert str(wick_second_moment((1, 1))) == "2 + 2*n^2 (valid for n >= 2)"
    assert str(wick_second_moment((2, 3))) == "7 + n^2 (valid for n >= 5)"


@pytest.mark.parametrize("a,b", [(a, b) for a in range(1, 6) for b in range(1, 6)])
def test_two_factor_closed_form(a, b):
    poly = wick_second_moment((a, b))
    if a == b:
        want = MomentPolynomial({0: 2 * a * a, 2: 2}, 2 * a)
    else:
        want = MomentPolynomial({0: a * b + abs(a - b), 2: 1}, a + b)
    assert poly == want


def test_rejects_zero_exponent():
    with pytest.raises(ValueError):
        wick_second_moment((0, 1))
    with pytest.raises(ValueError):
        wick_second_moment(())


@pytest.mark.parametrize("j", range(1, 5))
def test_reversal_symmetry(j):
    vals = [s for s in range(-3, 4) if s]
    for sigma in itertools.product(vals, repeat=j):
        rev = tuple(-s for s in reversed(sigma))
        assert wick_second_moment(sigma) == wick_second_moment(rev)


@given(st.lists(st.integers(-4, 4).filter(bool), min_size=1, max_size=4), st.integers(0, 20))
@settings(max_examples=100, deadline=None)
def test_nonnegative_integer_above_threshold(sigma, extra):
    poly = wick_second_moment(sigma)
    v = poly(poly.n_min + extra)
    assert isinstance(v, int) and v >= 0


@pytest.mark.parametrize("j", range(1, 6))
def test_orbit_exponents_sum_to_zero(j):
    sigma = tuple(range(1, j + 1))
    r = rho(j)
    for pi in enumerate_pairings(2 * j):
        assert sum(orbit_exponents(sigma, even_orbits(lift_pairing(pi), r))) == 0


def test_polynomial_helpers():
    p = MomentPolynomial({0: 3, 2: -1, 1: 0}, 4)
    assert p.terms == [(3, 0), (-1, 2)]
    assert p(2) == -1 and not p.is_exact_at(3)
    assert p.expression() == "3 - n^2"
    assert str(MomentPolynomial({}, 1)) == "0 (valid for n >= 1)"
    assert hash(p) == hash(MomentPolynomial({2: -1, 0: 3}, 4))


# --- independent oracle: Isserlis over H with U held fixed --------------------


def _pairings(items):
    # plain recursive perfect matchings, kept separate from the engine
    if not items:
        yield []
        return
    a, rest = items[0], items[1:]
    for i, b in enumerate(rest):
        for tail in _pairings(rest[:i] + rest[i + 1 :]):
            yield [(a, b)] + tail


def isserlis_second_moment(mats_fwd, mats_bwd):
    """E_H[Tr(H M_1 ... H M_j) Tr(H N_1 ... H N_j)] for GUE H, given the M, N.

    H positions 0..2j-1; position p is followed by matrix Q_p.  With
    E[H_ab H_cd] = delta_ad delta_bc each pairing sets b_p = a_pi(p), and the
    sum over a is an einsum of the Q's with subscripts (a_pi(p), a_next(p)).
    """
    j = len(mats_fwd)
    Q = list(mats_fwd) + list(mats_bwd)
    nxt = [(p + 1) % j for p in range(j)] + [j + (p + 1) % j for p in range(j)]
    letters = "abcdefghijkl"
    total = 0.0
    for pairs in _pairings(list(range(2 * j))):
        pi = {}
        for a, b in pairs:
            pi[a], pi[b] = b, a
        subs = ",".join("..." + letters[pi[p]] + letters[nxt[p]] for p in range(2 * j))
        total = total + np.einsum(subs + "->...", *Q, optimize=True)
    return total


def _power(U, s):
    V = U if s > 0 else np.conj(np.swapaxes(U, -1, -2))
    return np.linalg.matrix_power(V, abs(s))


def conditional_oracle(sigma, n, samples, seed):
    U = sample_haar_unitary(n, RngStream(seed), size=samples)
    fwd = [_power(U, s) for s in sigma]
    # conj Tr(H V_1 ... H V_j) = Tr(H V_j^* ... H V_1^*)
    bwd = [np.conj(np.swapaxes(V, -1, -2)) for V in reversed(fwd)]
    vals = isserlis_second_moment(fwd, bwd)
    assert np.allclose(vals.imag, 0, atol=1e-8)
    return estimate(vals.real)


def test_isserlis_oracle_fixed_identity():
    # U = I: E|Tr H^j|^2 at n = 1 is E h^{2j} = (2j-1)!!
    one = np.ones((1, 1))
    for j in range(1, 4):
        v = isserlis_second_moment([one] * j, [one] * j)
        assert np.isclose(v, double_factorial(2 * j - 1))


@pytest.mark.parametrize(
    "sigma",
    [(1,), (2,), (1, 1), (1, 2), (2, -1), (1, 1, 1), (1, 2, 3), (2, -1, 1), (3, 3, -2), (-1, -1, 2)],
)
def test_matches_conditional_isserlis(sigma):
    poly = wick_second_moment(sigma)
    n = max(poly.n_min, 2)
    est = conditional_oracle(sigma, n, 4000, seed=abs(hash(sigma)) % 2**31)
    assert est.agrees(poly(n)), (sigma, n, est, poly(n))


def test_below_threshold_differs():
    # at n = 1 the (1, 1) polynomial is not claimed; the true value is 3 not 4
    poly = wick_second_moment((1, 1))
    assert not poly.is_exact_at(1)
    assert isserlis_second_moment([np.eye(1)] * 2, [np.eye(1)] * 2) == 3 != poly(1)


# --- Monte Carlo ----------------------------------------------------------------


@pytest.mark.parametrize(
    "sigma,n,reps,want",
    [((1,), 5, 100_000, 5), ((1, 1), 6, 200_000, 74), ((1, 2), 8, 200_000, 67)],
)
def test_mc_examples(sigma, n, reps, want):
    assert wick_second_moment(sigma)(n) == want
    mean, se = wick_mc_estimate(sigma, n, reps, RngStream(100 + n))
    assert abs(mean - want) <= 4 * se


def test_mc_needs_two_replicas():
    with pytest.raises(ValueError):
        wick_mc_estimate((1,), 3, 1, RngStream(0))
