import numpy as np
import pytest

from ubmfield.covariance import trace_autocov
from ubmfield.ensembles import sample_haar_unitary, trace_powers, unitarity_error
from ubmfield.rng import RngStream
from ubmfield.stats import estimate
from ubmfield.ubm import SchemeParams, default_dt, simulate_ensemble, simulate_trajectory, ubm_step


@pytest.fixture(scope="module")
def small_ensemble():
    # n = 6, modes 1..3 (k < n) and 8 (k > n)
    params = SchemeParams(dt=2e-3, T=0.6, record_times=(0.0, 0.1, 0.2, 0.4, 0.6))
    return simulate_ensemble(6, params, (1, 2, 3, 8), 1500, master_seed=17)


def test_default_dt():
    assert default_dt(1) == 1e-2
    assert default_dt(10) == pytest.approx(2e-4)


@pytest.mark.parametrize(
    "kw",
    [dict(dt=0, T=1), dict(dt=0.1, T=-1), dict(dt=0.1, T=1, record_times=(0.5, 0.2)),
     dict(dt=0.1, T=1, record_times=(0.05,)), dict(dt=0.1, T=1, record_times=(1.5,))],
)
def test_scheme_params_validation(kw):
    with pytest.raises(ValueError):
        SchemeParams(**kw)


def test_step_tiny_dt_is_identity():
    U = sample_haar_unitary(5, RngStream(0))
    V = ubm_step(U, 1e-20, RngStream(1))
    assert np.abs(V - U).max() < 1e-9


def test_step_rejects_dt():
    with pytest.raises(ValueError):
        ubm_step(np.eye(2), 0.0, RngStream(0))


def test_zero_horizon_records_haar_start():
    traj = simulate_trajectory(4, SchemeParams(dt=0.01, T=0.0), [1, 2], RngStream(5, 3), keep_matrices=True)
    U0 = sample_haar_unitary(4, RngStream(5, 3))
    assert traj.traces.shape == (1, 2)
    assert np.array_equal(traj.matrices[0], U0)
    assert np.allclose(traj.traces[0], trace_powers(U0, [1, 2]))


def test_unitarity_after_many_steps():
    n = 4
    traj = simulate_trajectory(n, SchemeParams(dt=1e-3, T=10.0, record_times=(10.0,)), [1], RngStream(2), keep_matrices=True)
    assert unitarity_error(traj.matrices[-1]) <= 1e-8 * n


def test_recorded_traces_match_matrices():
    traj = simulate_trajectory(3, SchemeParams(dt=0.01, T=0.5, record_times=(0.0, 0.25, 0.5)), [1, 4, 9], RngStream(8), keep_matrices=True)
    for i in range(3):
        want = [np.trace(np.linalg.matrix_power(traj.matrices[i], k)) for k in (1, 4, 9)]
        assert np.allclose(traj.traces[i], want)


def test_batching_and_workers_do_not_change_results():
    params = SchemeParams(dt=0.01, T=0.2, record_times=(0.0, 0.1, 0.2))
    a = simulate_ensemble(3, params, (1, 2), 7, master_seed=4, batch=7)
    b = simulate_ensemble(3, params, (1, 2), 7, master_seed=4, batch=2)
    c = simulate_ensemble(3, params, (1, 2), 7, master_seed=4, workers=3)
    assert np.array_equal(a.traces, b.traces)
    assert np.array_equal(a.traces, c.traces)
    single = simulate_trajectory(3, params, (1, 2), RngStream(4, 5))
    assert np.array_equal(single.traces, a.trajectory(5).traces)


def test_circle_case_autocorrelation():
    params = SchemeParams(dt=1e-3, T=0.5, record_times=(0.0, 0.1, 0.5))
    ens = simulate_ensemble(1, params, (1, 2), 4000, master_seed=3)
    for k in (1, 2):
        x = ens.trace(k)
        for i, t in enumerate(params.record_times):
            est = estimate((x[:, i] * np.conj(x[:, 0])).real)
            assert est.agrees(np.exp(-k * k * t), allowance=5 * params.dt)


def test_autocov_matches_oracle(small_ensemble):
    ens = small_ensemble
    for k in ens.modes:
        x = ens.trace(k)
        for i, t in enumerate(ens.times):
            est = estimate((x[:, i] * np.conj(x[:, 0])).real)
            assert est.agrees(trace_autocov(k, ens.n, t), allowance=5 * ens.params.dt), (k, t, est)


def test_stationary_second_moment(small_ensemble):
    ens = small_ensemble
    for k in ens.modes:
        for i in range(len(ens.times)):
            assert estimate(np.abs(ens.trace(k)[:, i]) ** 2).agrees(min(k, ens.n))


def test_reversibility_real_autocov(small_ensemble):
    # reversibility makes E[Tr U^k(t) conj Tr U^k(0)] real
    ens = small_ensemble
    for k in ens.modes:
        x = ens.trace(k)
        for i in range(1, len(ens.times)):
            assert estimate((x[:, i] * np.conj(x[:, 0])).imag).agrees(0.0)


def test_decay_ordering():
    params = SchemeParams(dt=2e-3, T=1.0, record_times=(0.0, 0.1, 0.3, 0.6, 1.0))
    ens = simulate_ensemble(10, params, (1, 2, 3), 600, master_seed=23)
    for k in (1, 2, 3):
        x = ens.trace(k)
        ests = [estimate((x[:, i] * np.conj(x[:, 0])).real) for i in range(len(ens.times))]
        for a, b in zip(ests, ests[1:]):
            assert b.mean <= a.mean + 4 * np.hypot(a.stderr, b.stderr)


def test_rejects_bad_modes():
    with pytest.raises(ValueError):
        simulate_ensemble(3, SchemeParams(dt=0.1, T=0.1), (0, 1), 2, 0)
    with pytest.raises(ValueError):
        simulate_ensemble(3, SchemeParams(dt=0.1, T=0.1), (), 2, 0)
