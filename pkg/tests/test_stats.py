"""KS machinery against scipy and its own calibration."""

import math

import numpy as np
import pytest
import scipy.special
import scipy.stats

from primewalks.stats import empirical_cdf, kolmogorov_sf, ks_test, normal_cdf


def test_kolmogorov_sf_against_scipy():
    for x in (0.0, 0.3, 0.5, 0.8, 1.0, 1.18, 1.5, 2.0, 3.0):
        want = float(scipy.special.kolmogorov(x))
        assert math.isclose(kolmogorov_sf(x), want, rel_tol=1e-12, abs_tol=1e-15), x
    assert kolmogorov_sf(-1.0) == 1.0
    assert kolmogorov_sf(50.0) == 0.0


def test_one_sample_against_scipy_asymptotic():
    rng = np.random.default_rng(60)
    for _ in range(20):
        sample = rng.standard_normal(int(rng.integers(100, 400)))
        res = ks_test(sample, lambda x: normal_cdf(x))
        want = scipy.stats.kstest(sample, "norm", mode="asymp")
        assert math.isclose(res.statistic, float(want.statistic), rel_tol=1e-12)
        assert math.isclose(res.pvalue, float(want.pvalue), rel_tol=1e-9, abs_tol=1e-12)
        assert res.n == sample.size and res.n_reference is None
        assert not res.ties


def test_two_sample_against_scipy():
    rng = np.random.default_rng(61)
    for _ in range(20):
        a = rng.standard_normal(int(rng.integers(100, 300)))
        b = rng.standard_normal(int(rng.integers(100, 300))) * 1.1
        res = ks_test(a, b)
        want = scipy.stats.ks_2samp(a, b, method="asymp")
        assert math.isclose(res.statistic, float(want.statistic), rel_tol=1e-12)
        # scipy's asymp two-sample p adds a finite-size continuity correction
        # on top of the plain Kolmogorov formula used here
        assert abs(res.pvalue - float(want.pvalue)) < 0.05
        assert res.n_reference == b.size


def test_ties_on_lattice_samples():
    rng = np.random.default_rng(62)
    sample = rng.integers(0, 6, size=300).astype(float)
    grid = np.arange(-1, 7, dtype=float)
    cdf = lambda x: np.clip((np.floor(x) + 1) / 6.0, 0.0, 1.0)
    res = ks_test(sample, cdf)
    assert res.ties
    want = scipy.stats.kstest(sample, cdf, mode="asymp")
    assert math.isclose(res.statistic, float(want.statistic), rel_tol=1e-12)

    other = rng.integers(0, 6, size=250).astype(float)
    res2 = ks_test(sample, other)
    want2 = scipy.stats.ks_2samp(sample, other, method="asymp")
    assert math.isclose(res2.statistic, float(want2.statistic), rel_tol=1e-12)
    assert res2.ties


def test_one_sample_calibration_at_one_percent():
    # under the null the rejection rate at level 0.01 stays near 0.01
    rng = np.random.default_rng(63)
    rejections = 0
    runs = 600
    for _ in range(runs):
        sample = rng.standard_normal(200)
        if ks_test(sample, lambda x: normal_cdf(x)).pvalue < 0.01:
            rejections += 1
    # binomial(600, ~0.01): mean 6; [0, 16] covers > 99.9%
    assert rejections <= 16


def test_detects_wrong_scale():
    rng = np.random.default_rng(64)
    sample = rng.standard_normal(2000) * 1.4
    assert ks_test(sample, lambda x: normal_cdf(x)).pvalue < 1e-8
    ref = rng.standard_normal(2000)
    assert ks_test(sample, ref).pvalue < 1e-5


def test_sample_validation():
    good = np.linspace(0.0, 1.0, 120)
    with pytest.raises(ValueError):
        ks_test(good[:50], lambda x: x)  # needs at least 100 values
    with pytest.raises(ValueError):
        ks_test(np.array([]), lambda x: x)
    with pytest.raises(ValueError):
        ks_test(np.full(120, np.nan), lambda x: x)
    with pytest.raises(ValueError):
        ks_test(good.reshape(60, 2), lambda x: x.ravel()[:60])
    with pytest.raises(ValueError):
        ks_test(good, lambda x: x * 2.0)  # cdf values above 1
    with pytest.raises(ValueError):
        ks_test(good, lambda x: x[:10])
    with pytest.raises(ValueError):
        ks_test(good, good[:40])  # short reference sample
    d = ks_test(good, lambda x: np.clip(x, 0, 1)).to_dict()
    assert set(d) == {"statistic", "pvalue", "n", "n_reference", "ties"}


def test_normal_cdf_against_scipy():
    xs = np.linspace(-6, 6, 41)
    np.testing.assert_allclose(normal_cdf(xs), scipy.stats.norm.cdf(xs), rtol=1e-12, atol=1e-15)
    np.testing.assert_allclose(
        normal_cdf(xs, mean=1.5, sigma=0.7),
        scipy.stats.norm.cdf(xs, loc=1.5, scale=0.7),
        rtol=1e-12,
        atol=1e-15,
    )
    assert isinstance(normal_cdf(0.3), float)
    with pytest.raises(ValueError):
        normal_cdf(0.0, sigma=0.0)


def test_empirical_cdf_hand_case():
    sample = [3.0, 1.0, 2.0, 2.0]
    grid = [0.5, 1.0, 2.0, 2.5, 3.0, 4.0]
    np.testing.assert_allclose(empirical_cdf(sample, grid), [0, 0.25, 0.75, 0.75, 1.0, 1.0])
