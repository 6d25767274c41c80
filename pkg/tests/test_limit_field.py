import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ubmfield.limit_field import (
    assemble_field,
    gff_covariance,
    gff_covariance_series,
    gff_series_tail_bound,
    limit_coeff_autocov,
    sample_ou_paths,
)
from ubmfield.rng import RngStream
from ubmfield.stats import estimate

FP = 1e-14  # rounding allowance of double-precision partial sums


def gff_max_form(t, th, t2, th2):
    """Independent oracle: 1/2 log(max(e^-t, e^-t') / |e^-t e^{i th} - e^-t' e^{i th'}|)."""
    num = max(math.exp(-t), math.exp(-t2))
    den = abs(math.exp(-t) * complex(math.cos(th), math.sin(th)) - math.exp(-t2) * complex(math.cos(th2), math.sin(th2)))
    return 0.5 * math.log(num / den)


def test_opposite_point():
    assert gff_covariance(0.0, math.pi, 0.0, 0.0) == pytest.approx(-0.5 * math.log(2))


def test_far_apart():
    assert abs(gff_covariance(0.0, 0.3, 60.0, 0.0)) < 1e-20


def test_coincident_rejected():
    with pytest.raises(ValueError):
        gff_covariance(0.2, 1.0, 0.2, 1.0 + 2 * math.pi)


@given(st.floats(-3, 3), st.floats(-7, 7), st.floats(-3, 3), st.floats(-7, 7))
@settings(max_examples=200, deadline=None)
def test_closed_form_matches_max_form(t, th, t2, th2):
    if abs(t - t2) < 1e-3 and abs(math.remainder(th - th2, 2 * math.pi)) < 1e-3:
        return
    assert gff_covariance(t, th, t2, th2) == pytest.approx(gff_max_form(t, th, t2, th2), rel=1e-9, abs=1e-12)


def test_series_single_term():
    assert gff_covariance_series(1, 0.5, 1.0, 0.0, 0.0) == pytest.approx(math.exp(-0.5) * math.cos(1.0) / 2)


def test_series_within_bound_k100():
    err = abs(gff_covariance_series(100, 0.5, 1.0, 0.0, 0.0) - gff_covariance(0.5, 1.0, 0.0, 0.0))
    assert err <= gff_series_tail_bound(100, 0.5, 1.0) + FP


def test_series_equal_time_pi():
    s = gff_covariance_series(10**6, 0.0, math.pi, 0.0, 0.0)
    assert abs(s + 0.5 * math.log(2)) <= 1e-5
    assert abs(s + 0.5 * math.log(2)) <= gff_series_tail_bound(10**6, 0.0, math.pi) + FP


@given(st.floats(0.05, 3), st.floats(-math.pi, math.pi), st.integers(1, 300))
@settings(max_examples=200, deadline=None)
def test_tail_bound_holds(dt, dth, K):
    err = abs(gff_covariance_series(K, dt, dth, 0, 0) - gff_covariance(dt, dth, 0, 0))
    assert err <= gff_series_tail_bound(K, dt, dth) + FP


def test_tail_bound_is_min_of_both():
    K, tau, phi = 10, 0.2, 2.0
    geo = math.exp(-(K + 1) * tau) / (2 * (K + 1) * (1 - math.exp(-tau)))
    abel = math.exp(-(K + 1) * tau) / (2 * (K + 1) * abs(math.sin(phi / 2)))
    assert gff_series_tail_bound(K, tau, phi) == pytest.approx(min(geo, abel))
    assert gff_series_tail_bound(K, 0.0, 0.0) == math.inf


def test_coeff_autocov():
    assert limit_coeff_autocov(3, 0.0) == pytest.approx(1 / 3)
    assert limit_coeff_autocov(2, math.log(2)) == pytest.approx(1 / 8)
    with pytest.raises(ValueError):
        limit_coeff_autocov(0, 1.0)


def test_ou_validation():
    with pytest.raises(ValueError):
        sample_ou_paths(0, [0.0], RngStream(0))
    with pytest.raises(ValueError):
        sample_ou_paths(2, [0.0, 0.0], RngStream(0))


@pytest.fixture(scope="module")
def ou():
    times = np.array([0.0, 0.1, 0.5, 1.0, 40.0])
    return sample_ou_paths(4, times, RngStream(77), replicas=40_000)


def test_ou_stationary_variance(ou):
    for k in range(1, 5):
        for i in range(len(ou.times)):
            a = ou.paths[:, i, k - 1]
            assert estimate(a.real**2).agrees(1 / (2 * k))
            assert estimate(a.imag**2).agrees(1 / (2 * k))
            assert estimate(a.real * a.imag).agrees(0.0)


def test_ou_autocov(ou):
    for k in range(1, 5):
        a = ou.paths[..., k - 1]
        for i, t in enumerate(ou.times):
            prod = a[:, i] * np.conj(a[:, 0])
            assert estimate(prod.real).agrees(limit_coeff_autocov(k, t))
            assert estimate(prod.imag).agrees(0.0)


def test_ou_decorrelates(ou):
    a = ou.paths[..., 0]
    assert estimate((a[:, -1] * np.conj(a[:, 0])).real).agrees(0.0)


def test_ou_unbatched_matches_replica():
    times = [0.0, 0.5]
    p = sample_ou_paths(3, times, RngStream(9)).paths
    assert p.shape == (2, 3)
    assert np.array_equal(p, sample_ou_paths(3, times, RngStream(9)).paths)


def test_field_covariance_against_series(ou):
    K = ou.K
    pts = [(0, 0.0), (1, 1.0), (2, 2.5)]
    X = {i: assemble_field(ou.paths[:, i, :], th)[:, 0] for i, th in pts}
    i0, th0 = 0, 0.0
    for i, th in pts[1:]:
        want = gff_covariance_series(K, ou.times[i], th, ou.times[i0], th0)
        assert estimate(X[i].real * X[i0].real).agrees(want)
        assert estimate(X[i].imag * X[i0].imag).agrees(want)


def test_assemble_field_basis():
    paths = np.array([[1.0, 0.0, 2.0]])
    out = assemble_field(paths, [0.3])
    assert out[0, 0] == pytest.approx(np.exp(-0.3j) + 2 * np.exp(-0.9j))
