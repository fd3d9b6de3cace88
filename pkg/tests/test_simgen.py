import math

import numpy as np
import pytest

from arbound.simgen import CoverageResult, SimSpec, coverage_experiment, simulate, truth_profile


def test_ar1_variance_and_lag1_autocorrelation():
    x = simulate(SimSpec([0.5], 1.0, 1_000_000, seed=1)).values
    assert np.var(x) == pytest.approx(1 / 0.75, rel=0.01)
    r1 = np.corrcoef(x[:-1], x[1:])[0, 1]
    assert abs(r1 - 0.5) < 0.005


def test_ar2_variance():
    a, b = 0.5, -0.3
    # Yule-Walker: gamma0 = sigma^2 (1 - b) / ((1 + b)((1 - b)^2 - a^2))
    want = (1 - b) / ((1 + b) * ((1 - b) ** 2 - a ** 2))
    x = simulate(SimSpec([a, b], 1.0, 400_000, seed=2)).values
    assert np.var(x) == pytest.approx(want, rel=0.02)


def test_simulate_deterministic():
    a = simulate(SimSpec([0.3, 0.1], 0.5, 500, seed=9)).values
    b = simulate(SimSpec([0.3, 0.1], 0.5, 500, seed=9)).values
    c = simulate(SimSpec([0.3, 0.1], 0.5, 500, seed=10)).values
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c)


def test_burn_in_defaults():
    assert SimSpec([0.1, 0.2, 0.1]).effective_burn_in == 300
    assert SimSpec([0.1], stationary_start=True).effective_burn_in == 0
    assert SimSpec([0.1], burn_in=7).effective_burn_in == 7


def test_stationary_start_has_stationary_variance():
    firsts = np.array([simulate(SimSpec([0.9], 1.0, 1, seed=s, stationary_start=True)).values[0]
                       for s in range(4000)])
    assert np.var(firsts) == pytest.approx(1 / (1 - 0.81), rel=0.08)


def test_spec_validation():
    with pytest.raises(ValueError):
        SimSpec([1.1])
    with pytest.raises(ValueError):
        SimSpec([0.5, 0.1], stationary_start=True)
    with pytest.raises(ValueError):
        SimSpec([0.5], sigma=-1.0)


def test_burn_in_removes_start_effect():
    x = simulate(SimSpec([0.95], 1.0, 20_000, seed=3)).values
    assert abs(np.mean(x[:10_000]) - np.mean(x[10_000:])) < 0.6


@pytest.fixture(scope="module")
def ar2_profile():
    spec = SimSpec([0.5, -0.3], 1.0, 1024, seed=7)
    return truth_profile(spec, 1024, samples=20_000, seed=7)


def test_coverage_small_run(ar2_profile):
    spec = SimSpec([0.5, -0.3], 1.0, 1024, seed=7)
    res = coverage_experiment(spec, 2, 10.0, 0.05, 10, 256, profile=ar2_profile)
    assert res.replicates == 10 and res.skipped == 0
    assert len(res.bounds) == 10
    assert 0.0 <= res.violation_rate <= 1.0
    assert all(r >= 0 for r in res.holdout_risks)


def test_coverage_tiny_cap_can_be_violated(ar2_profile):
    # with M = 0.5 most holdout losses saturate, so the bound is stressed
    spec = SimSpec([0.5, -0.3], 1.0, 1024, seed=7)
    res = coverage_experiment(spec, 2, 0.5, 0.05, 10, 256, profile=ar2_profile)
    assert all(r <= 0.5 for r in res.holdout_risks)
    assert all(b >= 0 for b in res.bounds)


def test_coverage_worker_invariant(ar2_profile):
    spec = SimSpec([0.5, -0.3], 1.0, 1024, seed=7)
    a = coverage_experiment(spec, 2, 10.0, 0.05, 6, 256, profile=ar2_profile, workers=1)
    b = coverage_experiment(spec, 2, 10.0, 0.05, 6, 256, profile=ar2_profile, workers=3)
    assert a.bounds == b.bounds and a.holdout_risks == b.holdout_risks


def test_doubling_n_lowers_mean_bound(ar2_profile):
    small = coverage_experiment(SimSpec([0.5, -0.3], 1.0, 1024, seed=7), 2, 10.0, 0.05, 8, 256,
                                profile=ar2_profile)
    big = coverage_experiment(SimSpec([0.5, -0.3], 1.0, 2048, seed=7), 2, 10.0, 0.05, 8, 256,
                              profile=ar2_profile)
    assert big.mean_bound < small.mean_bound


def test_coverage_input_checks():
    with pytest.raises(ValueError):
        coverage_experiment(SimSpec([0.5]), 1, 1.0, 0.05, 0, 200)
    with pytest.raises(ValueError):
        coverage_experiment(SimSpec([0.5]), 1, 1.0, 0.05, 3, 50)


def test_coverage_result_empty():
    r = CoverageResult(3, 0, 3, 0.05)
    assert math.isnan(r.violation_rate) and math.isnan(r.mean_bound)
    assert r.as_dict()["skipped"] == 3


@pytest.mark.parametrize("phi", [[0.5], [0.5, -0.3], [0.9]])
def test_variance_stable_across_burn_in_doubling(phi):
    base = SimSpec(phi, 1.0, 200_000, seed=6).effective_burn_in
    v1 = np.var(simulate(SimSpec(phi, 1.0, 200_000, burn_in=base, seed=6)).values)
    v2 = np.var(simulate(SimSpec(phi, 1.0, 200_000, burn_in=2 * base, seed=6)).values)
    assert 0.9 <= v1 / v2 <= 1.1


def test_white_noise_variance():
    x = simulate(SimSpec([0.0], 1.0, 50_000, seed=12)).values
    assert abs(np.var(x) - 1.0) < 3 / math.sqrt(50_000) * math.sqrt(2)


@pytest.mark.slow
@pytest.mark.parametrize("phi", [[0.5, -0.3], [0.9], [0.2]])
@pytest.mark.parametrize("n", [1024, 2048])
def test_coverage_grid(phi, n):
    eta, reps = 0.05, 60
    spec = SimSpec(phi, 1.0, n, seed=n + len(phi))
    res = coverage_experiment(spec, len(phi), 10.0, eta, reps, 256,
                              profile=truth_profile(spec, n, samples=20_000, seed=1))
    assert res.skipped == 0
    assert res.violation_rate <= eta + 2 * math.sqrt(eta * (1 - eta) / reps)
