"""Extreme-process simulation against its analytic Frechet marginals."""

import math

import numpy as np
import pytest

from primewalks.extremes import (
    frechet_cdf,
    frechet_quantile,
    frechet_sup_samples,
    simulate_extreme,
    weighted_frechet_sum_samples,
)
from primewalks.stats import ks_test

# asymptotic 1% critical value of sqrt(n) D_n
KS_CRIT_1PCT = 1.628


def test_atom_count_is_poisson():
    # N ~ Poisson(horizon * c * r_min^-alpha); check mean and variance
    rng = np.random.default_rng(50)
    rate = 2.0 * 0.7 * 0.04**-0.5
    counts = np.array(
        [
            simulate_extreme(0.7, 0.5, horizon=2.0, r_min=0.04, rng=rng).times.size
            for _ in range(800)
        ],
        dtype=float,
    )
    se_mean = math.sqrt(rate / 800)
    assert abs(counts.mean() - rate) < 5 * se_mean
    assert abs(counts.var() / rate - 1.0) < 0.3


def test_atoms_sorted_and_marks_single_coordinate():
    rng = np.random.default_rng(51)
    s = simulate_extreme((0.5, 1.5), 0.6, d=2, horizon=1.0, r_min=0.05, rng=rng)
    assert (np.diff(s.times) >= 0).all()
    assert s.marks.shape == (s.times.size, 2)
    # axis superposition: each atom is large in exactly one coordinate
    assert ((s.marks > 0).sum(axis=1) == 1).all()
    assert (s.marks.max(axis=1) >= s.r_min).all()
    assert s.d == 2
    assert len(s.atoms) == s.times.size


def test_sup_monotone_in_time():
    rng = np.random.default_rng(52)
    s = simulate_extreme(1.0, 0.5, horizon=1.0, r_min=0.01, rng=rng)
    grid = np.linspace(0.1, 1.0, 10)
    sups = np.array([s.sup_at(u)[0] for u in grid])
    assert (np.diff(sups) >= 0).all()
    with pytest.raises(ValueError):
        s.sup_at(-0.1)
    with pytest.raises(ValueError):
        s.sup_at(1.5)
    with pytest.raises(ValueError):
        s.count_above(0.001)


def test_sup_distribution_matches_frechet():
    # with r_min far below the Frechet bulk the truncated process's supremum
    # is Frechet to well under KS resolution
    rng = np.random.default_rng(53)
    m = 1000
    for u, c, alpha in ((1.0, 1.0, 0.5), (0.5, 2.0, 0.7)):
        sups = np.array(
            [
                simulate_extreme(c, alpha, horizon=1.0, r_min=1e-4, rng=rng).sup_at(u)[0]
                for _ in range(m)
            ]
        )
        res = ks_test(sups, lambda x: frechet_cdf(x, u, c, alpha))
        assert math.sqrt(m) * res.statistic < KS_CRIT_1PCT, (u, c, alpha, res.statistic)


def test_sup_joint_coordinates_independent_frechet():
    rng = np.random.default_rng(54)
    m = 800
    cs = (1.0, 2.5)
    sups = np.array(
        [
            simulate_extreme(cs, 0.5, d=2, horizon=1.0, r_min=1e-4, rng=rng).sup_at(0.8)
            for _ in range(m)
        ]
    )
    for j, c in enumerate(cs):
        res = ks_test(sups[:, j], lambda x: frechet_cdf(x, 0.8, c, 0.5))
        assert math.sqrt(m) * res.statistic < KS_CRIT_1PCT, j
    # rank correlation of independent coordinates is near zero
    r1 = np.argsort(np.argsort(sups[:, 0]))
    r2 = np.argsort(np.argsort(sups[:, 1]))
    rho = np.corrcoef(r1, r2)[0, 1]
    assert abs(rho) < 5 / math.sqrt(m)


def test_truncation_misses_only_small_sups():
    # P{M(1) < r_min} = exp(-c r_min^-alpha): negligible at these settings,
    # so no replica should come out empty
    rng = np.random.default_rng(55)
    for _ in range(200):
        s = simulate_extreme(1.0, 0.5, horizon=1.0, r_min=0.001, rng=rng)
        assert s.sup_at(1.0)[0] >= s.r_min
    assert math.exp(-1.0 * 0.001**-0.5) < 1e-13


def test_frechet_cdf_and_quantile():
    assert frechet_cdf(0.0, 1.0, 1.0, 0.5) == 0.0
    assert frechet_cdf(-3.0, 1.0, 1.0, 0.5) == 0.0
    x = frechet_quantile(0.3, 2.0, 0.7, 0.5)
    assert math.isclose(frechet_cdf(x, 2.0, 0.7, 0.5), 0.3, rel_tol=1e-12)
    arr = frechet_cdf(np.array([-1.0, 1.0, 10.0]), 1.0, 1.0, 0.5)
    assert arr[0] == 0.0 and arr[1] == math.exp(-1.0)
    assert (np.diff(arr) > 0).all()
    with pytest.raises(ValueError):
        frechet_cdf(1.0, 1.0, 1.0, 1.5)
    with pytest.raises(ValueError):
        frechet_cdf(1.0, -1.0, 1.0, 0.5)
    with pytest.raises(ValueError):
        frechet_quantile(1.2, 1.0, 1.0, 0.5)


def test_frechet_sup_samples_inversion():
    rng = np.random.default_rng(56)
    m = 2000
    draws = frechet_sup_samples(1.5, 0.8, 0.4, m, rng)
    res = ks_test(draws, lambda x: frechet_cdf(x, 1.5, 0.8, 0.4))
    assert math.sqrt(m) * res.statistic < KS_CRIT_1PCT


def test_weighted_sum_matches_manual_composition():
    # same stream drawn manually coordinate by coordinate
    weights, constants = (math.log(2), math.log(3)), (1.0, 2.0)
    got = weighted_frechet_sum_samples(1.0, weights, constants, 0.5, 500, np.random.default_rng(57))
    rng = np.random.default_rng(57)
    want = np.zeros(500)
    for w, c in zip(weights, constants):
        want += w * frechet_sup_samples(1.0, c, 0.5, 500, rng)
    np.testing.assert_array_equal(got, want)
    with pytest.raises(ValueError):
        weighted_frechet_sum_samples(1.0, (1.0,), (1.0, 2.0), 0.5, 10, rng)
    with pytest.raises(ValueError):
        weighted_frechet_sum_samples(1.0, (), (), 0.5, 10, rng)


def test_simulate_extreme_validation():
    rng = np.random.default_rng(58)
    with pytest.raises(ValueError):
        simulate_extreme(1.0, 1.2, rng=rng)
    with pytest.raises(ValueError):
        simulate_extreme(1.0, 0.5, d=0, rng=rng)
    with pytest.raises(ValueError):
        simulate_extreme(-1.0, 0.5, rng=rng)
    with pytest.raises(ValueError):
        simulate_extreme(1.0, 0.5, horizon=0.0, rng=rng)
    with pytest.raises(ValueError):
        simulate_extreme(1.0, 0.5, r_min=0.0, rng=rng)
    with pytest.raises(ValueError):
        simulate_extreme(1.0, 0.5)  # explicit rng required
    with pytest.raises(ValueError):
        simulate_extreme((1.0, 2.0, 3.0), 0.5, d=2, rng=rng)
