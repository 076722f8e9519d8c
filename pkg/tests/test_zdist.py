import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from scorediff.zdist import (
    DiscLaplaceParams,
    DiscNormalParams,
    ParameterError,
    Skellam2Params,
    SkellamParams,
    ZiSkellamParams,
    disc_laplace_log_pmf,
    disc_normal_log_pmf,
    dist_cdf,
    dist_quantile,
    dist_sample,
    log_bessel_i,
    skellam2_to_rates,
    skellam_log_pmf,
    skellam_moments,
    support_bounds,
    zi_skellam_log_pmf,
)


def convolution_pmf(z, t1, t2, tail=1e-14):
    """Sum over k of Pois(k + z; t1) Pois(k; t2), high precision."""
    mpmath.mp.dps = 40
    t1, t2 = mpmath.mpf(t1), mpmath.mpf(t2)
    k = max(0, -z)
    total = mpmath.mpf(0)
    peak = False
    while True:
        term = mpmath.exp(-t1 - t2 + (k + z) * mpmath.log(t1) + k * mpmath.log(t2)
                          - mpmath.loggamma(k + z + 1) - mpmath.loggamma(k + 1))
        total += term
        if k > t2 + 5:
            peak = True
        if peak and term < tail * total:
            break
        k += 1
    return total


def bessel_series(r, x, terms=200):
    mpmath.mp.dps = 50
    x = mpmath.mpf(x)
    return mpmath.log(mpmath.fsum(
        (x / 2) ** (2 * m + r) / (mpmath.factorial(m) * mpmath.factorial(m + r)) for m in range(terms)))


class TestBessel:
    @pytest.mark.parametrize("r,x", [(0, 2.0), (5, 10.0), (1, 0.3), (12, 60.0), (40, 5.0), (0, 150.0)])
    def test_against_series(self, r, x):
        assert log_bessel_i(r, x) == pytest.approx(float(bessel_series(r, x, 400)), rel=1e-13)

    def test_known_value(self):
        assert math.exp(log_bessel_i(0, 2.0)) == pytest.approx(2.2795853023360673, rel=1e-14)

    def test_small_argument_goes_to_minus_infinity(self):
        vals = [log_bessel_i(1, x) for x in (1e-3, 1e-50, 1e-200)]
        assert vals[0] > vals[1] > vals[2]
        assert vals[2] < -400

    @pytest.mark.parametrize("x", [0.0, -1.0])
    def test_domain(self, x):
        with pytest.raises(ParameterError):
            log_bessel_i(0, x)


class TestSkellam:
    def test_known_value(self):
        lp = skellam_log_pmf(0, SkellamParams(1.0, 1.0))
        assert math.exp(lp) == pytest.approx(0.30850832255367, rel=1e-12)

    @pytest.mark.parametrize("z,t1,t2", [(0, 1, 1), (-2, 0.5, 4), (7, 7.5, 0.1), (-30, 25, 25), (30, 0.1, 25)])
    def test_convolution_oracle(self, z, t1, t2):
        lp = skellam_log_pmf(z, SkellamParams(t1, t2))
        assert lp == pytest.approx(float(mpmath.log(convolution_pmf(z, t1, t2))), rel=1e-10)

    def test_symmetry(self):
        p = SkellamParams(2.0, 2.0)
        z = np.arange(0, 40)
        np.testing.assert_allclose(p.logpmf(z), p.logpmf(-z), rtol=1e-14, atol=1e-14)

    def test_vectorized_matches_scalar(self):
        p = SkellamParams(7.75, 7.25)
        z = np.arange(-20, 21)
        np.testing.assert_allclose(p.logpmf(z), [skellam_log_pmf(int(k), p) for k in z], rtol=1e-12)

    def test_poisson_limit(self):
        p = SkellamParams(3.0, 1e-8)
        z = np.arange(0, 25)
        np.testing.assert_allclose(p.pmf(z), stats.poisson.pmf(z, 3.0), atol=1e-6)

    def test_normal_approximation(self):
        p = SkellamParams(520.0, 480.0)
        z = np.arange(-60, 140)
        approx = stats.norm.cdf(z + 0.5, 40.0, math.sqrt(1000.0))
        assert np.max(np.abs(p.cdf(z) - approx)) < 2e-3

    def test_extreme_rates_finite(self):
        lp = SkellamParams(500.0, 0.05).logpmf(np.array([-5, 0, 500, 2000]))
        assert np.all(np.isfinite(lp))

    @pytest.mark.parametrize("t", [0.0, -1.0, math.inf])
    def test_invalid_rates(self, t):
        with pytest.raises(ParameterError):
            SkellamParams(t, 1.0)


class TestSkellam2:
    def test_to_rates(self):
        r = skellam2_to_rates(Skellam2Params(0.5, 15.0))
        assert (r.theta1, r.theta2) == pytest.approx((7.75, 7.25))
        r = skellam2_to_rates(Skellam2Params(0.0, 2.0))
        assert (r.theta1, r.theta2) == (1.0, 1.0)

    @pytest.mark.parametrize("mu,s2", [(2.0, 2.0), (-3.0, 1.0), (0.0, 0.0)])
    def test_constraint(self, mu, s2):
        with pytest.raises(ParameterError):
            Skellam2Params(mu, s2)

    def test_moments(self):
        m, v, s = skellam_moments(SkellamParams(7.75, 7.25))
        assert (m, v, s) == pytest.approx((0.5, 15.0, 0.5 / 15**1.5))
        assert skellam_moments(SkellamParams(3.3, 3.3))[2] == 0.0
        assert skellam_moments(SkellamParams(4.0, 1.0))[2] == pytest.approx(0.26833, abs=1e-5)

    def test_moments_monte_carlo(self):
        rng = np.random.default_rng(3)
        x = rng.poisson(4.0, 10**6) - rng.poisson(1.0, 10**6)
        m, v, _ = skellam_moments(SkellamParams(4.0, 1.0))
        assert abs(x.mean() - m) < 4 * math.sqrt(v / x.size)
        assert abs(x.var() - v) < 4 * math.sqrt(2 * v * v / x.size) * 1.5


class TestZeroInflated:
    base = Skellam2Params(0.0, 2.0)

    def test_p_zero_is_base(self):
        assert zi_skellam_log_pmf(0, ZiSkellamParams(self.base, 0.0)) == pytest.approx(self.base.logpmf(0))

    def test_zero_cell(self):
        val = zi_skellam_log_pmf(0, ZiSkellamParams(self.base, 0.1))
        assert val == pytest.approx(math.log(0.1 + 0.9 * 0.30850832255367), rel=1e-12)

    def test_nonzero_cell(self):
        base = Skellam2Params(1.3, 9.0)
        val = zi_skellam_log_pmf(5, ZiSkellamParams(base, 0.1))
        assert val == pytest.approx(base.logpmf(5) + math.log(0.9), rel=1e-13)

    @given(p=st.floats(0.0, 0.99), mu=st.floats(-3, 3))
    @settings(max_examples=40, deadline=None)
    def test_zero_mass_identity(self, p, mu):
        base = Skellam2Params(mu, abs(mu) + 4.0)
        d = ZiSkellamParams(base, p)
        b0 = base.pmf(0)
        assert d.pmf(0) - b0 == pytest.approx(p * (1 - b0), abs=1e-14)

    def test_invalid_p(self):
        with pytest.raises(ParameterError):
            ZiSkellamParams(self.base, 1.0)


class TestDiscretized:
    def test_normal_value(self):
        val = disc_normal_log_pmf(0, DiscNormalParams(0.0, 1.0))
        assert math.exp(val) == pytest.approx(0.38292492254802624, rel=1e-12)

    def test_laplace_value(self):
        val = disc_laplace_log_pmf(0, DiscLaplaceParams(0.0, 1.0))
        assert math.exp(val) == pytest.approx(1 - math.exp(-0.5), rel=1e-13)

    @pytest.mark.parametrize("d", [DiscNormalParams(3.0, 7.0), DiscLaplaceParams(-2.0, 2.5)])
    def test_symmetric_about_integer_mean(self, d):
        k = np.arange(0, 30)
        np.testing.assert_allclose(d.pmf(d.mu + k), d.pmf(d.mu - k), rtol=1e-12)

    def test_normal_sum(self):
        d = DiscNormalParams(0.3, 15.0)
        s = math.sqrt(15.0)
        z = np.arange(math.floor(0.3 - 10 * s), math.ceil(0.3 + 10 * s) + 1)
        assert d.pmf(z).sum() == pytest.approx(1.0, abs=1e-12)

    def test_laplace_sum(self):
        d = DiscLaplaceParams(0.3, 2.0)
        z = np.arange(-80, 82)
        assert d.pmf(z).sum() == pytest.approx(1.0, abs=1e-12)

    def test_far_tail_log_space(self):
        d = DiscNormalParams(0.0, 1.0)
        lp = d.logpmf(np.array([40, -40]))
        assert np.all(np.isfinite(lp)) and lp[0] == pytest.approx(lp[1])

    @pytest.mark.parametrize("cls,args", [(DiscNormalParams, (0.0, 0.0)), (DiscLaplaceParams, (0.0, -1.0))])
    def test_invalid(self, cls, args):
        with pytest.raises(ParameterError):
            cls(*args)


ALL_DISTS = [
    SkellamParams(7.75, 7.25),
    Skellam2Params(0.5, 15.0),
    ZiSkellamParams(Skellam2Params(0.5, 14.0), 0.1),
    DiscNormalParams(0.5, 15.0),
    DiscLaplaceParams(0.5, 2.7),
]


@pytest.mark.parametrize("d", ALL_DISTS, ids=lambda d: type(d).__name__)
class TestCommonInterface:
    def test_normalization(self, d):
        lo, hi = support_bounds(d)
        assert d.pmf(np.arange(lo, hi + 1)).sum() == pytest.approx(1.0, abs=1e-10)

    def test_cdf_monotone_and_limits(self, d):
        z = np.arange(-200, 201)
        c = dist_cdf(z, d)
        assert np.all(np.diff(c) >= 0)
        assert c[-1] == pytest.approx(1.0, abs=1e-10)
        assert c[0] == pytest.approx(0.0, abs=1e-10)

    def test_cdf_matches_pmf_sum(self, d):
        lo, _ = support_bounds(d, 1e-16)
        z = np.arange(lo - 5, 20)
        np.testing.assert_allclose(dist_cdf(z, d), np.cumsum(d.pmf(z)), atol=1e-12)

    def test_quantile_round_trip(self, d):
        z = np.arange(-15, 16)
        cz = dist_cdf(z, d)
        cprev = dist_cdf(z - 1, d)
        ok = (cz > 1e-9) & (cz < 1 - 1e-9)
        assert np.all(dist_quantile(cz[ok], d) >= z[ok])
        assert np.all(dist_quantile(np.minimum(cprev[ok] + 1e-9, 1 - 1e-12), d) <= z[ok])

    def test_quantile_extreme(self, d):
        u = 1 - 1e-12
        z = dist_quantile(u, d)
        assert dist_cdf(z, d) >= u

    def test_sampling_moments(self, d):
        rng = np.random.default_rng(11)
        x = dist_sample(d, rng, 10**6)
        assert abs(x.mean() - d.mean()) < 4 * math.sqrt(d.var() / x.size)

    def test_seeded_replay(self, d):
        a = dist_sample(d, np.random.default_rng(5), 100)
        b = dist_sample(d, np.random.default_rng(5), 100)
        np.testing.assert_array_equal(a, b)


def test_symmetric_cdf_identity():
    d = SkellamParams(3.0, 3.0)
    assert dist_cdf(-1, d) == pytest.approx((1 - d.pmf(0)) / 2, abs=1e-14)
    assert dist_cdf(0, SkellamParams(1.0, 1.0)) == pytest.approx(0.654254161276835, abs=1e-12)


def test_inflated_gate_dominates():
    d = ZiSkellamParams(Skellam2Params(0.5, 15.0), 1 - 1e-9)
    x = dist_sample(d, np.random.default_rng(0), 10000)
    assert np.count_nonzero(x) <= 1


def test_skellam_sample_mean():
    x = dist_sample(SkellamParams(7.75, 7.25), np.random.default_rng(2), 10**6)
    assert abs(x.mean() - 0.5) < 4 * math.sqrt(15.0 / 10**6)


def test_quantile_just_above_previous_cdf():
    d = Skellam2Params(0.5, 15.0)
    for z in range(-5, 6):
        assert dist_quantile(float(dist_cdf(z - 1, d)) + 1e-10, d) == z
