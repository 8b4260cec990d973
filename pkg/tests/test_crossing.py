import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from numpy.testing import assert_allclose, assert_array_equal

from gauss_ucb import crossing
from gauss_ucb.bounds import LAI_BOUNDARY_CONSTANT, SizeBoundMethod, repeated_test_size_bound
from gauss_ucb.crossing import (
    CrossingEstimate,
    Discretization,
    conditional_drift_deficit,
    drifted_crossing_grid,
    drifted_walk_maxima,
    lai_boundary_constant_bound,
    lai_boundary_constant_sup,
    lai_boundary_grid,
    lai_boundary_minimizer,
    mc_drifted_crossing,
    mc_lai_boundary,
    mc_max_normalized_walk,
    mc_stopping_check,
    normalized_walk_maxima,
    sqrt_stopping_bound,
)
from gauss_ucb.gauss_special import partial_second_moment
from gauss_ucb.streams import derive_seed, generator

# Analytic crossing-constant bound (beta = 3.5), recomputed in 30-digit mpmath.
CONSTANT_BOUND_REFERENCE = {
    3.4865: 1.7076920305698466,
    100.0: 0.9900388112880144,
    1e4: 0.7061231936594424,
    1e8: 0.5085097899851184,
}


def direct_walk(horizon, paths, seed):
    """The walk increments of the first path block, drawn in one call."""
    return generator(derive_seed(seed, 0)).standard_normal((horizon, paths))


@given(st.integers(0, 500), st.integers(1, 500))
def test_estimate_record(hits, extra):
    reps = hits + extra
    est = CrossingEstimate.from_hits(hits, reps, 10, Discretization.EXACT_INTEGER_TIME)
    assert 0.0 <= est.estimate <= 1.0
    assert est.std_error == pytest.approx(math.sqrt(est.estimate * (1 - est.estimate) / reps))


@pytest.mark.parametrize("chunk", [7, 64, crossing.STEPS_PER_CHUNK])
def test_walk_maxima_match_direct_computation(monkeypatch, chunk):
    monkeypatch.setattr(crossing, "STEPS_PER_CHUNK", chunk)
    horizons, paths, seed = (5, 40, 300), 50, 12
    got = normalized_walk_maxima(horizons, paths, seed)
    sums = np.cumsum(direct_walk(300, paths, seed), axis=0)
    normalized = sums / np.sqrt(np.arange(1, 301))[:, None]
    for j, h in enumerate(horizons):
        assert_allclose(got[:, j], normalized[:h].max(axis=0), rtol=1e-13)

    gammas = (0.1, 1.0)
    drifted = drifted_walk_maxima(gammas, 300, paths, seed)
    m = np.arange(1, 301)[:, None]
    for j, g in enumerate(gammas):
        assert_allclose(drifted[:, j], ((sums - m * g) / np.sqrt(m)).max(axis=0), rtol=1e-12, atol=1e-12)


def test_walk_paths_are_prefix_consistent():
    many = normalized_walk_maxima([10, 100, 1000], 600, seed=4)
    alone = normalized_walk_maxima([100], 600, seed=4)
    assert_array_equal(many[:, 1], alone[:, 0])
    assert np.all(many[:, 0] <= many[:, 1]) and np.all(many[:, 1] <= many[:, 2])
    reordered = normalized_walk_maxima([1000, 10], 600, seed=4)
    assert_array_equal(reordered, many[:, [2, 0]])


def test_max_walk_estimate_monotone_in_horizon_with_shared_seed():
    ests = [mc_max_normalized_walk(2.5, t, 3000, seed=6).estimate for t in (10, 100, 1000)]
    assert ests[0] <= ests[1] <= ests[2]


def test_max_walk_at_zero_level():
    est = mc_max_normalized_walk(0.0, 50, 2000, seed=1)
    assert est.estimate >= 0.5
    assert est.discretization is Discretization.EXACT_INTEGER_TIME
    with pytest.raises(ValueError):
        mc_max_normalized_walk(-1.0, 50, 100, seed=1)


@pytest.mark.parametrize("b", [2.0, 3.0])
@pytest.mark.parametrize("t", [100, 1000])
def test_max_walk_below_size_bounds(b, t):
    est = mc_max_normalized_walk(b, t, 20_000, seed=int(10 * b) + t)
    for method in SizeBoundMethod:
        assert est.estimate <= repeated_test_size_bound(b, t, method) + 3 * est.std_error


@pytest.mark.slow
def test_max_walk_self_consistency_across_seeds():
    b, t, reps = math.sqrt(2 * math.log(1000)), 1000, 200_000
    a = mc_max_normalized_walk(b, t, reps, seed=100)
    c = mc_max_normalized_walk(b, t, reps, seed=200)
    assert abs(a.estimate - c.estimate) <= 4 * math.hypot(a.std_error, c.std_error)
    assert a.estimate <= repeated_test_size_bound(b, t)


def test_drifted_crossing_examples():
    huge = mc_drifted_crossing(1.0, 1e3, 100, 2000, seed=2)
    assert huge.estimate == 0.0
    assert partial_second_moment(-1.0) / 1e6 < 1e-7
    for (b, g), est in drifted_crossing_grid((1.0, 2.0), (0.2, 0.5, 1.0), 2000, 10_000, seed=8).items():
        assert 0.0 <= est.estimate <= 1.0
        assert est.estimate <= partial_second_moment(-b) / g**2 + 3 * est.std_error
    with pytest.raises(ValueError):
        mc_drifted_crossing(0.0, 1.0, 10, 10, seed=0)


def test_lai_grid():
    grid = lai_boundary_grid(50.0, points_per_decade=10, decades=2)
    assert grid[0] == pytest.approx(0.5)
    assert grid[-1] == 50.0
    assert len(grid) == 21
    with pytest.raises(ValueError):
        lai_boundary_grid(50.0, points_per_decade=9)
    with pytest.raises(ValueError):
        mc_lai_boundary(10.0, 1.0, 100, seed=0, points_per_decade=5)


def test_lai_boundary_depends_on_n_gamma_squared_only():
    a = mc_lai_boundary(25.0, 2.0, 4000, seed=3, points_per_decade=50)
    b = mc_lai_boundary(100.0, 1.0, 4000, seed=3, points_per_decade=50)
    assert a.scale == pytest.approx(b.scale)
    assert abs(a.probability.estimate - b.probability.estimate) <= 3 * math.hypot(a.probability.std_error, b.probability.std_error)


def test_lai_boundary_constant_estimates():
    est100 = mc_lai_boundary(100.0, 1.0, 20_000, seed=5)
    assert est100.probability.discretization is Discretization.EULER_APPROX
    assert est100.constant <= LAI_BOUNDARY_CONSTANT + 3 * est100.constant_std_error
    assert est100.constant <= lai_boundary_constant_bound(100.0) + 3 * est100.constant_std_error
    est_big = mc_lai_boundary(1e6, 1.0, 20_000, seed=6)
    assert est_big.constant < est100.constant


@pytest.mark.parametrize("x, expected", sorted(CONSTANT_BOUND_REFERENCE.items()))
def test_constant_bound_reference(x, expected):
    assert_allclose(lai_boundary_constant_bound(x), expected, rtol=1e-9)


def test_constant_bound_supremum():
    sup, where = lai_boundary_constant_sup()
    assert sup == pytest.approx(1.7076920305698466, rel=1e-9)
    assert where == pytest.approx(3.4865, rel=1e-3)
    # Slightly above the rounded constant 1.7068 used by the regret bound.
    assert sup > LAI_BOUNDARY_CONSTANT
    for beta in (3.3, 3.7):
        assert lai_boundary_constant_sup(beta)[0] > sup


def test_constant_bound_decays():
    vals = [lai_boundary_constant_bound(x) for x in (10.0, 1e2, 1e4, 1e6, 1e8, 1e12)]
    assert all(v2 < v1 for v1, v2 in zip(vals, vals[1:]))
    with pytest.raises(ValueError):
        lai_boundary_constant_bound(0.0)


@given(st.floats(0.01, 1e9))
def test_boundary_minimizer(n):
    t0 = lai_boundary_minimizer(n)
    assert 0.0 < t0 <= n / math.e * (1 + 1e-12)
    if n >= 2 * math.e:
        assert t0 * math.log(n / t0) == pytest.approx(2.0, rel=1e-9)


def test_drift_deficit():
    assert_allclose(conditional_drift_deficit(2.0, 1.0), 0.28278611072715400772, rtol=1e-12)
    assert conditional_drift_deficit(2.0, 1e-9) == pytest.approx(0.0, abs=1e-8)
    for b in (0.5, 1.0, 3.0, 6.0):
        for theta in (0.01, 0.5, 2.0, 8.0):
            assert conditional_drift_deficit(b, theta) > 0.0
    with pytest.raises(ValueError):
        conditional_drift_deficit(0.0, 1.0)


def test_stopping_bound_identity_and_chain():
    for b in (0.3, 1.0, 2.0, 4.0):
        for theta in (0.05, 0.5, 1.0, 3.0):
            t = sqrt_stopping_bound(b, theta)
            g = conditional_drift_deficit(b, theta)
            assert abs(theta * t * t - (b * t + g)) <= 1e-12 * max(1.0, b * t)
            assert t <= b / theta + g / b + 1e-12
            assert t <= b / theta + math.sqrt(g / theta) + 1e-12


def test_stopping_check():
    check = mc_stopping_check(3.0, 1.0, 1e-3, 10_000, seed=9)
    assert check.bound == pytest.approx(sqrt_stopping_bound(3.0, 1.0))
    assert check.cap_hit_fraction <= 0.01
    assert check.mean_sqrt_tau >= 1.0
    assert check.mean_sqrt_tau <= check.bound + 3 * check.std_error
    assert check.passed
    for dt in (0.01, 0.1, 0.0):
        with pytest.raises(ValueError):
            mc_stopping_check(3.0, 1.0, dt, 10, seed=0)


def test_stopping_check_is_reproducible():
    a = mc_stopping_check(2.0, 0.5, 5e-3, 600, seed=4)
    b = mc_stopping_check(2.0, 0.5, 5e-3, 600, seed=4)
    assert a == b
