import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fbm_expfun.errors import AccuracyError, BracketError, DivergenceError, DomainError
from fbm_expfun.numerics import (Bracket, Tolerance, find_root, gamma_fn, gamma_minimum,
                                 integrate, lambert_w0, lambert_wm1, log_phi_cdf,
                                 minimize_1d, phi_cdf, reg_upper_gamma)


def power_series_oracle(H, lam, T):
    # ∫_0^T t^{2H} e^{λt} dt termwise
    terms, k, fact = [], 0, 1.0
    while True:
        term = lam ** k / fact * T ** (2 * H + k + 1) / (2 * H + k + 1)
        terms.append(term)
        if k > 20 and abs(term) < 1e-18:
            break
        k += 1
        fact *= k
    return math.fsum(terms)


class TestTolerance:
    def test_rejects_zero_tolerance(self):
        with pytest.raises(DomainError):
            Tolerance(0.0, 0.0)

    def test_rejects_zero_iterations(self):
        with pytest.raises(DomainError):
            Tolerance(max_iter=0)

    def test_bracket_order(self):
        with pytest.raises(DomainError):
            Bracket(1.0, 1.0)


class TestLambertW:
    def test_w0_round_trip(self):
        x = np.linspace(-1.0, 10.0, 2001)
        err = np.abs(lambert_w0(x * np.exp(x)) - x) / np.maximum(1.0, np.abs(x))
        assert err.max() <= 1e-11

    def test_wm1_round_trip(self):
        x = np.linspace(-20.0, -1.0, 2001)
        err = np.abs(lambert_wm1(x * np.exp(x)) - x) / np.maximum(1.0, np.abs(x))
        assert err.max() <= 1e-9

    def test_known_values(self):
        assert lambert_w0(1.0) == pytest.approx(0.5671432904097838, abs=1e-15)
        assert lambert_wm1(-0.1) == pytest.approx(-3.577152063957297, abs=1e-13)
        assert lambert_w0(-1 / math.e) == pytest.approx(-1.0, abs=1e-7)
        assert lambert_wm1(-1 / math.e) == pytest.approx(-1.0, abs=1e-7)
        assert lambert_w0(0.0) == 0.0

    def test_branch_point_neighbourhood(self):
        # w e^w for w close to -1 lands within 1e-12 of -1/e
        for d in (1e-3, 1e-5, 1e-7):
            for w in (-1 + d, -1 - d):
                fn = lambert_w0 if w > -1 else lambert_wm1
                assert fn(w * math.exp(w)) == pytest.approx(w, abs=1e-6 * d + 1e-9)

    def test_domain(self):
        with pytest.raises(DomainError):
            lambert_w0(-0.5)
        with pytest.raises(DomainError):
            lambert_wm1(0.1)

    @settings(max_examples=200, deadline=None)
    @given(st.floats(min_value=-1 / math.e + 1e-9, max_value=1e6))
    def test_w0_defining_equation(self, y):
        w = float(lambert_w0(y))
        assert w * math.exp(w) == pytest.approx(y, rel=1e-12, abs=1e-13)


class TestGaussianAndGamma:
    def test_phi_symmetry_and_monotone(self):
        z = np.linspace(-30, 30, 4001)
        v = phi_cdf(z)
        assert np.all(np.diff(v) >= 0)
        assert np.max(np.abs(phi_cdf(z) + phi_cdf(-z) - 1)) <= 1e-14

    def test_log_phi_deep_tail(self):
        # Mills-ratio asymptote
        z = -40.0
        approx = -z * z / 2 - math.log(-z) - 0.5 * math.log(2 * math.pi)
        assert log_phi_cdf(z) == pytest.approx(approx, abs=1e-3)

    def test_gamma_recurrence(self):
        for z in np.linspace(0.1, 20, 400):
            assert gamma_fn(z + 1) == pytest.approx(z * gamma_fn(z), rel=1e-12)

    def test_gamma_domain(self):
        with pytest.raises(DomainError):
            gamma_fn(0.0)

    def test_gamma_minimum(self):
        z0, g0 = gamma_minimum()
        assert z0 == pytest.approx(1.4616321449683622, abs=1e-12)
        assert g0 == pytest.approx(0.8856031944108889, abs=1e-14)

    def test_reg_upper_gamma_nonincreasing(self):
        xs = np.linspace(0, 50, 1000)
        for a in (0.3, 1.0, 4.5):
            v = reg_upper_gamma(a, xs)
            assert np.all(np.diff(v) <= 0)
        # a = 1 is the exponential tail
        assert reg_upper_gamma(1.0, 2.0) == pytest.approx(math.exp(-2.0), rel=1e-14)


class TestIntegrate:
    @pytest.mark.parametrize("H", [0.1, 0.3, 0.5, 0.7, 0.9])
    @pytest.mark.parametrize("lam", [-5.0, -1.0, 0.0, 2.5, 5.0])
    @pytest.mark.parametrize("T", [0.5, 1.0, 2.0])
    def test_power_series_oracle(self, H, lam, T):
        got = integrate(lambda t: t ** (2 * H) * math.exp(lam * t), 0.0, T)
        assert got == pytest.approx(power_series_oracle(H, lam, T), rel=1e-9, abs=1e-12)

    def test_frozen_value(self):
        assert integrate(lambda t: math.sqrt(t) * math.exp(t), 0, 1) == \
            pytest.approx(1.2556300825518634, rel=1e-12)

    def test_infinite_range(self):
        assert integrate(lambda t: math.exp(-t), 0, math.inf) == pytest.approx(1.0, rel=1e-12)

    def test_divergent_integral_raises(self):
        with pytest.raises(DivergenceError):
            integrate(lambda t: 1.0 / (1.0 + t), 0, math.inf)

    def test_divergence_is_accuracy_error(self):
        assert issubclass(DivergenceError, AccuracyError)


class TestMinimizeAndRoot:
    def test_parabola(self):
        r = minimize_1d(lambda x: (x - 0.3) ** 2 + 1.0, Bracket(-5, 5))
        assert r.argmin == pytest.approx(0.3, abs=1e-7)
        assert r.value == pytest.approx(1.0, abs=1e-13)
        assert not r.at_boundary

    def test_boundary_minimum_flagged(self):
        r = minimize_1d(lambda x: x, Bracket(1.0, 2.0))
        assert r.argmin == pytest.approx(1.0, abs=1e-8)
        assert r.at_boundary

    def test_log_scale_wide_bracket(self):
        r = minimize_1d(lambda x: (math.log(x) - math.log(3e4)) ** 2, Bracket(1e-6, 1e8))
        assert r.argmin == pytest.approx(3e4, rel=1e-6)

    def test_multimodal_guard_grid_finds_global(self):
        f = lambda x: math.cos(3 * x) + 0.1 * x
        r = minimize_1d(f, Bracket(0.0, 10.0))
        grid = np.linspace(0, 10, 100001)
        assert r.value <= min(f(x) for x in grid) + 1e-9

    def test_find_root(self):
        assert find_root(lambda x: x * x - 2, Bracket(0, 2)) == pytest.approx(math.sqrt(2), abs=1e-12)

    def test_find_root_without_sign_change(self):
        with pytest.raises(BracketError):
            find_root(lambda x: x * x + 1, Bracket(-1, 1))
