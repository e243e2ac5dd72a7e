import math

import numpy as np
import pytest
from scipy import stats

from fbm_expfun import montecarlo as mc
from fbm_expfun.errors import DomainError
from fbm_expfun.fbm_finite import FbmParams


class TestGrid:
    def test_times(self):
        g = mc.PathGrid(4, 2.0)
        assert g.dt == 0.5
        np.testing.assert_array_equal(g.times, [0, 0.5, 1.0, 1.5, 2.0])

    def test_rejects_small_grid(self):
        with pytest.raises(DomainError):
            mc.PathGrid(1, 1.0)


class TestSampler:
    @pytest.mark.parametrize("method", ["cholesky", "circulant"])
    def test_shape_and_origin(self, method):
        paths = mc.sample_fbm_paths(0.3, mc.PathGrid(64, 1.0), 10, seed=1, method=method)
        assert paths.shape == (10, 65)
        assert np.all(paths[:, 0] == 0.0)

    @pytest.mark.parametrize("method", ["cholesky", "circulant"])
    def test_bitwise_reproducible(self, method):
        g = mc.PathGrid(128, 1.0)
        a = mc.sample_fbm_paths(0.7, g, 50, seed=9, method=method)
        b = mc.sample_fbm_paths(0.7, g, 50, seed=9, method=method)
        assert np.array_equal(a, b)

    def test_path_rows_independent_of_batch_size(self):
        g = mc.PathGrid(128, 1.0)
        a = mc.sample_fbm_paths(0.4, g, 10, seed=5)
        b = mc.sample_fbm_paths(0.4, g, 37, seed=5)
        assert np.array_equal(a, b[:10])

    def test_thread_count_does_not_change_output(self, monkeypatch):
        g = mc.PathGrid(256, 1.0)
        monkeypatch.setenv("FBM_EXPFUN_THREADS", "1")
        a = mc.sample_fbm_paths(0.6, g, 300, seed=2)
        monkeypatch.setenv("FBM_EXPFUN_THREADS", "4")
        b = mc.sample_fbm_paths(0.6, g, 300, seed=2)
        assert np.array_equal(a, b)

    def test_different_seeds_differ(self):
        g = mc.PathGrid(32, 1.0)
        assert not np.array_equal(mc.sample_fbm_paths(0.5, g, 3, seed=0),
                                  mc.sample_fbm_paths(0.5, g, 3, seed=1))

    @pytest.mark.parametrize("H", [0.05, 0.25, 0.5, 0.75, 0.95])
    def test_circulant_spectrum_nonnegative(self, H):
        assert np.all(mc.circulant_eigenvalues(H, 1024) >= 0.0)

    def test_h1_is_a_line(self):
        g = mc.PathGrid(16, 2.0)
        paths = mc.sample_fbm_paths(1.0, g, 5, seed=0)
        slopes = paths[:, 1:] / g.times[1:]
        assert np.allclose(slopes, slopes[:, :1], rtol=1e-12)

    def test_fbm_covariance_matrix(self):
        t = np.array([0.5, 1.0])
        c = mc.fbm_covariance(0.25, t)
        assert c[0, 1] == pytest.approx(0.5 * (0.5 ** 0.5 + 1.0 - 0.5 ** 0.5))

    @pytest.mark.parametrize("H", [0.3, 0.5, 0.8])
    def test_terminal_variance(self, H):
        x = mc.sample_fbm_paths(H, mc.PathGrid(64, 2.0), 4000, seed=11)[:, -1]
        # var = T^{2H}; standard error of the sample variance is ~ var·√(2/n)
        assert np.var(x, ddof=1) == pytest.approx(2.0 ** (2 * H), rel=4 * math.sqrt(2 / 4000))


class TestFunctional:
    def test_trapezoid_on_deterministic_path(self):
        g = mc.PathGrid(1000, 1.0)
        v = mc.functional_values(np.zeros((1, 1001)), 1.0, 1.0, g)
        assert v[0] == pytest.approx(math.e - 1, rel=1e-6)

    def test_sample_set_is_read_only(self):
        ss = mc.simulate_functional(FbmParams(0, 1, 0.5), 20, 64)
        with pytest.raises(ValueError):
            ss.values[0] = 1.0
        assert np.all(ss.values > 0)
        assert "halving_shift" in ss.meta

    def test_rejects_infinite_horizon(self):
        with pytest.raises(DomainError):
            mc.simulate_functional(FbmParams(-1, 1, 0.5, math.inf), 10, 64)

    @pytest.mark.slow
    def test_self_similarity_in_distribution(self):
        mu, sigma, H, T = 0.5, 1.0, 0.35, 2.0
        a = mc.simulate_functional(FbmParams(mu, sigma, H, T), 4000, 256, seed=21).values
        b = T * mc.simulate_functional(FbmParams(mu * T, sigma * T ** H, H, 1.0),
                                       4000, 256, seed=22).values
        assert stats.ks_2samp(a, b).pvalue > 0.01

    def test_moment_and_mgf_estimates(self):
        ss = mc.simulate_functional(FbmParams(0, 1, 0.5), 2000, 128, seed=4)
        mean, se = mc.estimate_moment(ss, 1.0)
        assert abs(mean - 2 * (math.sqrt(math.e) - 1)) < 4 * se
        m0, _ = mc.estimate_mgf(ss, 0.0)
        assert m0 == 1.0


class TestReport:
    def test_dkw(self):
        assert mc.dkw_band(1000, 0.01) == pytest.approx(0.05146997, abs=1e-7)
        with pytest.raises(DomainError):
            mc.dkw_band(0, 0.1)

    def test_ecdf(self):
        assert mc.ecdf(np.array([1.0, 2.0, 3.0, 4.0]), 2.0) == 0.5
        np.testing.assert_array_equal(mc.ecdf(np.array([1.0, 2.0]), [0.0, 5.0]), [0.0, 1.0])

    def test_report_flags_violations(self):
        ss = mc.SampleSet(np.linspace(0.01, 1, 1000), 0, {})
        rows = mc.sandwich_report(ss, [0.5], upper=lambda x: 0.0, lower=lambda x: 1.0)
        assert rows[0].flag
        rows = mc.sandwich_report(ss, [0.5], upper=lambda x: 1.0, lower=lambda x: 0.0)
        assert not rows[0].flag

    def test_csv_layout(self):
        ss = mc.SampleSet(np.linspace(0.01, 1, 100), 0, {})
        text = mc.rows_to_csv(mc.sandwich_report(ss, [0.1, 0.2], upper=lambda x: 1.0))
        lines = text.strip().splitlines()
        assert lines[0] == "x,lower,upper,ecdf,ecdf_lo,ecdf_hi,flag"
        assert len(lines) == 3

    def test_fmt_round_trips(self):
        v = 0.1 + 0.2
        assert float(mc.fmt(v)) == v
