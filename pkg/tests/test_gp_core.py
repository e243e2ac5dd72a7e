import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fbm_expfun import fbm_finite as ff
from fbm_expfun import gp_core as gc
from fbm_expfun.errors import DomainError, MembershipError
from fbm_expfun.fbm_finite import FbmParams


def exponential_oracle(mu, sigma, H, lam):
    # Exp(λ) probing density on (0, ∞): m = μ/λ - log λ + 1,
    # s² = σ²Γ(2H+1)/(2λ^{2H}) since |τ-τ'| is again Exp(λ)
    return mu / lam - math.log(lam) + 1.0, sigma * math.sqrt(math.gamma(2 * H + 1) / 2) / lam ** H


class TestModel:
    def test_fbm_covariance_is_psd(self):
        for H in (0.1, 0.5, 0.9, 1.0):
            gc.fbm_model(0.0, 1.0, H, 2.0).check_covariance()

    def test_bad_covariance_rejected(self):
        bad = gc.GaussianModel(mean=lambda t: 0.0, cov=lambda s, t: -abs(s - t), horizon=1.0)
        with pytest.raises(DomainError):
            bad.check_covariance()

    def test_horizon_positive(self):
        with pytest.raises(DomainError):
            gc.fbm_model(0, 1, 0.5, 0.0)


class TestDensities:
    @pytest.mark.parametrize("lam", [-60.0, -3.0, 1e-12, 0.0, 2.0, 60.0])
    def test_truncated_exponential_normalized(self, lam):
        from fbm_expfun.numerics import integrate
        f = gc.TruncatedExponential(lam, 1.5)
        mass = integrate(f.pdf, 0.0, 1.5, points=f.breakpoints())
        assert mass == pytest.approx(1.0, abs=1e-10)

    def test_tabulated_requires_mass_one(self):
        with pytest.raises(DomainError):
            gc.Tabulated(lambda t: 2.0, lambda t: math.log(2.0), 1.0)

    def test_tabulated_requires_positivity(self):
        with pytest.raises(DomainError):
            gc.Tabulated(lambda t: 2.0 * t if t < 0.5 else 0.0, lambda t: 0.0, 1.0)

    def test_bound_value_range(self):
        with pytest.raises(DomainError):
            gc.BoundValue(1.5, gc.BoundKind.UPPER)


class TestLogNormalParams:
    @pytest.mark.parametrize("mu", [-1.0, 0.0, 1.5])
    @pytest.mark.parametrize("sigma", [0.5, 1.0, 2.0])
    @pytest.mark.parametrize("H", [0.25, 0.5, 0.75])
    def test_generic_matches_specialized_finite(self, mu, sigma, H):
        p = FbmParams(mu, sigma, H, 1.3)
        model = gc.fbm_model(mu, sigma, H, 1.3)
        for lam in (-2.0, 0.0, 1.7):
            g = gc.lognormal_params(model, gc.TruncatedExponential(lam, 1.3))
            closed = ff.lognormal_params(p, lam)
            assert g.m == pytest.approx(closed.m, abs=1e-8)
            assert g.s == pytest.approx(closed.s, abs=1e-8)

    @pytest.mark.parametrize("H", [0.2, 0.5, 0.8, 1.0])
    def test_generic_matches_exponential_oracle(self, H):
        model = gc.fbm_model(-0.7, 1.3, H, math.inf)
        for lam in (0.4, 2.0):
            g = gc.lognormal_params(model, gc.Exponential(lam))
            m, s = exponential_oracle(-0.7, 1.3, H, lam)
            assert g.m == pytest.approx(m, abs=1e-8)
            assert g.s == pytest.approx(s, abs=1e-8)

    def test_heavy_tailed_density_is_not_admissible(self):
        model = gc.fbm_model(1.0, 1.0, 0.5, math.inf)
        pareto = gc.Tabulated(lambda t: 1 / (1 + t) ** 2, lambda t: -2 * math.log1p(t), math.inf)
        with pytest.raises(MembershipError):
            gc.lognormal_params(model, pareto)


class TestBounds:
    def test_degenerate_model_is_a_step(self):
        model = gc.GaussianModel(mean=lambda t: 0.8 * t, cov=lambda s, t: 0.0, horizon=1.0)
        f = gc.TruncatedExponential(0.0, 1.0)
        m = gc.lognormal_params(model, f).m
        assert m == pytest.approx(0.4, abs=1e-12)
        assert gc.upper_cdf_bound(model, f, math.exp(m) * 0.999).value == 0.0
        assert gc.upper_cdf_bound(model, f, math.exp(m) * 1.001).value == 1.0

    def test_upper_monotone_in_x(self):
        model = gc.fbm_model(0.3, 1.0, 0.4, 1.0)
        f = gc.TruncatedExponential(0.5, 1.0)
        vals = [gc.upper_cdf_bound(model, f, x).value for x in np.geomspace(0.01, 100, 15)]
        assert all(b >= a for a, b in zip(vals, vals[1:]))

    def test_family_not_worse_than_members(self):
        model = gc.fbm_model(0.3, 1.0, 0.4, 1.0)
        fam = gc.DensityFamily(lambda lam: gc.TruncatedExponential(lam, 1.0), -10.0, 10.0,
                               anchors=(0.0,))
        for x in (0.5, 3.0):
            best = gc.best_upper_over_family(model, fam, x, grid_points=12).value
            for lam in (-3.0, 0.0, 3.0):
                assert best <= gc.upper_cdf_bound(model, gc.TruncatedExponential(lam, 1.0),
                                                  x).value + 1e-12

    def test_sandwich_borell_vs_upper(self):
        mu, sigma, H = 0.5, 1.0, 0.3
        model = gc.fbm_model(mu, sigma, H, 1.0)
        c = ff.sup_mean_constant(H) * sigma
        f = gc.TruncatedExponential(0.0, 1.0)
        for x in np.geomspace(0.1, 1e6, 40):
            lo = gc.lower_cdf_bound_borell(model, lambda t: 0.0, c, x, drift_inf=0.0)
            up = gc.upper_cdf_bound(model, f, x)
            assert lo.value <= up.value

    def test_moment_bounds_ordered(self):
        model = gc.fbm_model(0.2, 0.8, 0.6, 1.0)
        f = gc.TruncatedExponential(0.3, 1.0)
        for p in (0.5, 1.0, 2.0):
            lo, up = gc.moment_bounds(model, f, p)
            assert 0 < lo <= up

    def test_mgf_bounds_ordered(self):
        mu, sigma, H = 0.5, 1.0, 0.3
        model = gc.fbm_model(mu, sigma, H, 1.0)
        c = ff.sup_mean_constant(H) * sigma
        f = gc.TruncatedExponential(0.0, 1.0)
        for lam in (0.1, 1.0, 10.0):
            lo = gc.mgf_lower(model, lambda t: 0.0, c, lam, drift_inf=0.0)
            up = gc.mgf_upper(model, f, lam)
            assert 0.0 <= lo <= up <= 1.0

    @settings(max_examples=40, deadline=None)
    @given(m=st.floats(-3, 3), s=st.floats(0.05, 3), lam=st.floats(0.01, 50))
    def test_lognormal_mgf_upper_dominates_lognormal_laplace(self, m, s, lam):
        # E[exp(-λJ)] for log-normal J by Gauss-Hermite; the bound holds for it too
        z, w = np.polynomial.hermite_e.hermegauss(80)
        exact = float(np.sum(w * np.exp(-lam * np.exp(m + s * z))) / math.sqrt(2 * math.pi))
        assert gc.lognormal_mgf_upper(m, s, lam) >= exact - 1e-9
