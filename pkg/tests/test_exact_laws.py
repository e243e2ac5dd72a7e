import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fbm_expfun import exact_laws as el
from fbm_expfun import fbm_finite as ff
from fbm_expfun.errors import DomainError
from fbm_expfun.fbm_finite import FbmParams
from fbm_expfun.numerics import integrate


def bisection_rate(T, x):
    # u with ∫_0^T e^{ut} dt = x, by plain bisection
    def log_F(u):
        a = u * T
        if a == 0:
            return math.log(T)
        if a > 0:
            return a + math.log(-math.expm1(-a)) - math.log(u)
        return math.log(math.expm1(a) / u)
    lo, hi = -1e3, 1e3
    for _ in range(300):
        mid = 0.5 * (lo + hi)
        if log_F(mid) < math.log(x):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


class TestH1:
    @settings(max_examples=100, deadline=None)
    @given(T=st.floats(0.1, 10), r=st.floats(0.02, 50))
    def test_rate_matches_bisection(self, T, r):
        x = r * T
        u = el.h1_finite_quantile_rate(T, x)
        assert u == pytest.approx(bisection_rate(T, x), abs=1e-9 * max(1, abs(u)))

    def test_rate_at_branch_point(self):
        assert el.h1_finite_quantile_rate(2.0, 2.0) == 0.0
        u = el.h1_finite_quantile_rate(2.0, 2.0 * (1 + 1e-6))
        assert u == pytest.approx(bisection_rate(2.0, 2.0 * (1 + 1e-6)), abs=1e-10)

    def test_finite_converges_to_infinite(self):
        for x in (0.1, 1.0, 10.0):
            assert abs(el.cdf_h1_finite(-1.0, 1.0, 1e3, x) - el.cdf_h1_infinite(-1.0, 1.0, x)) <= 1e-3

    def test_cdfs_monotone_in_unit_interval(self):
        xs = np.geomspace(1e-3, 1e3, 200)
        for f in (lambda x: el.cdf_h1_finite(0.3, 1.0, 2.0, x),
                  lambda x: el.cdf_h1_infinite(-0.4, 1.0, x),
                  lambda x: float(el.cdf_h_half_infinite(-0.4, 1.0, x))):
            v = [f(x) for x in xs]
            assert all(0.0 <= a <= 1.0 for a in v)
            assert all(b >= a for a, b in zip(v, v[1:]))

    @pytest.mark.parametrize("mu", [-1.0, 0.0, 0.5])
    def test_uniform_bound_dominates_exact(self, mu):
        p = FbmParams(mu, 1.0, 1.0, 1.0)
        for x in np.geomspace(0.05, 50, 100):
            assert ff.upper_cdf(p, x).value >= el.cdf_h1_finite(mu, 1.0, 1.0, x) - 1e-12


class TestHalf:
    def test_density_integrates_to_one(self):
        for mu, sigma in ((-1.0, 1.0), (-0.3, 2.0)):
            mass = integrate(lambda y: el.density_h_half_infinite(mu, sigma, y), 0, math.inf)
            assert mass == pytest.approx(1.0, abs=1e-9)

    def test_cdf_is_integrated_density(self):
        mu, sigma = -1.0, 1.0
        for x in (0.2, 1.0, 4.0):
            got = integrate(lambda y: el.density_h_half_infinite(mu, sigma, y), 0, x)
            assert got == pytest.approx(float(el.cdf_h_half_infinite(mu, sigma, x)), abs=1e-10)

    def test_moments(self):
        # shape a = 2, rate b = 1 for μ = -1, σ² = 1
        assert el.moments_h_half_infinite(-1.0, 1.0, 1.0) == pytest.approx(2.0 / 1.0 * 1.0 / 1.0)
        assert el.moments_h_half_infinite(-1.0, 1.0, 2.0) == math.inf

    def test_needs_negative_drift(self):
        with pytest.raises(DomainError):
            el.cdf_h_half_infinite(0.0, 1.0, 1.0)

    def test_w_form_matches_infinite_upper(self):
        from fbm_expfun import fbm_infinite as fi
        p = FbmParams(-1.5, 0.8, 0.5, math.inf)
        for x in np.geomspace(1e-3, 1e3, 30):
            assert float(el.half_bound_w_form(-1.5, 0.8, x)) == pytest.approx(
                fi.upper_cdf(p, x).value, abs=1e-12)


class TestGap:
    def test_reference_value(self):
        assert el.kolmogorov_gap_h_half(-10.0, 1.0, 100.0) == pytest.approx(0.029, abs=0.005)

    def test_decreasing_in_drift(self):
        gaps = [el.kolmogorov_gap_h_half(mu, 1.0) for mu in (-2, -4, -6, -8, -10)]
        assert all(b < a for a, b in zip(gaps, gaps[1:]))

    def test_gap_dominates_grid(self):
        mu, sigma = -2.0, 1.0
        xs = np.geomspace(1e-6, 100, 3000)
        direct = np.max(el.half_bound_w_form(mu, sigma, xs) - el.cdf_h_half_infinite(mu, sigma, xs))
        assert el.kolmogorov_gap_h_half(mu, sigma) >= direct - 1e-12
