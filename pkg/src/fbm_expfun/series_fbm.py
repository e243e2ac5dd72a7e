"""Bounds for exponential functionals of a finite series of independent fBMs.

The driving process is Z_t = Σ σ_n B_n^{H_n}(t) with drift μt.  Results
depend on the weights through σ² = Σσ_n², ρ = Σσ_n and the extreme indices
H₀ = min H_n, H∞ = max H_n (taken over nonzero weights).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

from . import fbm_finite, gp_core
from .errors import DomainError, NotCoveredError
from .fbm_finite import FbmParams, drift_area
from .fbm_infinite import Finiteness, FinitenessVerdict
from .gp_core import BoundKind, BoundValue, LogNormalParams, clamp01
from .numerics import (DEFAULT_TOL, Bracket, Tolerance, erfc, gamma_fn, gamma_minimum,
                       integrate, minimize_1d, phi_cdf)

INF = math.inf


@dataclass(frozen=True)
class SeriesParams:
    weights: tuple[float, ...]
    hursts: tuple[float, ...]
    mu: float

    def __init__(self, weights: Sequence[float], hursts: Sequence[float], mu: float):
        w = tuple(float(v) for v in weights)
        h = tuple(float(v) for v in hursts)
        if len(w) != len(h) or not w:
            raise DomainError("weights and hursts must be nonempty and of equal length")
        if any(not 0.0 < v <= 1.0 for v in h):
            raise DomainError("every Hurst index must lie in (0, 1]")
        if any(not math.isfinite(v) for v in w) or not math.isfinite(mu):
            raise DomainError("weights and drift must be finite")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "hursts", h)
        object.__setattr__(self, "mu", float(mu))
        if not self.sigma2 > 0:
            raise DomainError("the weights must not all vanish")

    @property
    def active(self) -> list[tuple[float, float]]:
        return [(s, h) for s, h in zip(self.weights, self.hursts) if s != 0.0]

    @property
    def sigma2(self) -> float:
        # fsum is correctly rounded, so the result ignores the list order
        return math.fsum(s * s for s in self.weights)

    @property
    def sigma(self) -> float:
        return math.sqrt(self.sigma2)

    @property
    def h0(self) -> float:
        return min(h for _, h in self.active)

    @property
    def h_inf(self) -> float:
        return max(h for _, h in self.active)

    @property
    def nonnegative(self) -> bool:
        return all(s >= 0 for s in self.weights)

    @property
    def rho(self) -> float:
        if not self.nonnegative:
            raise DomainError("ρ = Σσ_n needs nonnegative weights")
        return math.fsum(self.weights)


def _t_powers(s: SeriesParams, T: float, exponent: float = 1.0) -> tuple[float, float]:
    """(min, max) of T^{e·H₀} and T^{e·H∞}."""
    a, b = T ** (exponent * s.h0), T ** (exponent * s.h_inf)
    return min(a, b), max(a, b)


def lognormal_params_series(s: SeriesParams, f: gp_core.ProbingDensity, T: float,
                            tol: Tolerance = DEFAULT_TOL) -> LogNormalParams:
    """Comparison log-normal parameters; s² adds over independent components."""
    if f.horizon != T:
        raise DomainError("density support and horizon differ")
    components = s.active
    if isinstance(f, gp_core.TruncatedExponential):
        m = fbm_finite.m_lambda(FbmParams(s.mu, 1.0, 1.0, T), f.lam)
        s2 = math.fsum(fbm_finite.s_lambda(FbmParams(s.mu, abs(w), h, T), f.lam, tol) ** 2
                       for w, h in components)
        return LogNormalParams(m, math.sqrt(s2))
    if isinstance(f, gp_core.Exponential):
        lam = f.lam
        m = -math.log(lam) + 1.0 + s.mu / lam
        s2 = math.fsum(w * w * gamma_fn(2 * h + 1) / (2.0 * lam ** (2 * h))
                       for w, h in components)
        return LogNormalParams(m, math.sqrt(s2))
    m = gp_core.lognormal_params(gp_core.fbm_model(s.mu, 0.0, 1.0, T), f, tol).m
    s2 = math.fsum(gp_core.lognormal_params(gp_core.fbm_model(0.0, w, h, T), f, tol).s ** 2
                   for w, h in components)
    return LogNormalParams(m, math.sqrt(s2))


def upper_cdf_finite(s: SeriesParams, T: float, x: float) -> BoundValue:
    """Uniform-density upper bound on P[I_T <= x] with the variance bracketed by H₀, H∞."""
    if not (T > 0 and math.isfinite(T)):
        raise DomainError("T must be positive and finite")
    if not x > 0:
        raise DomainError("x must be positive")
    z = math.log(x) - math.log(T) - s.mu * T / 2.0
    t_min, t_max = _t_powers(s, T)
    if z < 0:
        c = math.sqrt(2 * s.h0 + 2) / (s.sigma * t_max)
    else:
        c = math.sqrt(2 * s.h_inf + 2) / (s.sigma * t_min)
    return BoundValue(clamp01(phi_cdf(c * z)), BoundKind.UPPER)


def gamma_lower_bound(s: SeriesParams) -> float:
    """min over n of Γ(2H_n + 1), bounded below using where Γ is monotone."""
    z0, g0 = gamma_minimum()
    if 2 * s.h0 + 1 > z0:
        return gamma_fn(2 * s.h0 + 1)
    if 2 * s.h_inf + 1 < z0:
        return gamma_fn(2 * s.h_inf + 1)
    return g0


def _gamma_upper(s: SeriesParams) -> float:
    return max(gamma_fn(2 * s.h0 + 1), gamma_fn(2 * s.h_inf + 1))


def upper_cdf_infinite(s: SeriesParams, x: float) -> BoundValue:
    """Exponential-density upper bound on P[I_∞ <= x] with λ = -μ or λ = 1/x."""
    if not x > 0:
        raise DomainError("x must be positive")
    mu, sigma, h0, hi = s.mu, s.sigma, s.h0, s.h_inf
    if hi < 1.0:
        if mu > 0:
            return BoundValue(0.0, BoundKind.UPPER, note="almost surely infinite")
        if mu == 0:
            z = -math.sqrt(2.0 / _gamma_upper(s)) / (sigma * max(x ** h0, x ** hi))
            return BoundValue(clamp01(phi_cdf(z)), BoundKind.UPPER)
        r = -mu
        log_term = math.log(r * x)
        if mu <= -1.0 / x:
            z = max(r ** h0, r ** hi) / sigma * math.sqrt(2.0 / gamma_lower_bound(s)) * log_term
        else:
            z = min(r ** h0, r ** hi) / sigma * math.sqrt(2.0 / _gamma_upper(s)) * log_term
        return BoundValue(clamp01(phi_cdf(z)), BoundKind.UPPER)
    # H∞ = 1
    if mu <= -1.0 / x:
        z = -math.sqrt(2.0 / gamma_lower_bound(s)) * (1.0 + mu * x) / (sigma * min(x, x ** h0))
    else:
        z = -(1.0 + mu * x) / (sigma * max(x, x ** h0))
    return BoundValue(clamp01(phi_cdf(z)), BoundKind.UPPER)


def moment_bounds_finite(s: SeriesParams, T: float, pth: float) -> tuple[float, float]:
    """Bounds on E[I_T^p], p >= 1."""
    if not (T > 0 and math.isfinite(T)):
        raise DomainError("T must be positive and finite")
    if not pth >= 1.0:
        raise DomainError("moment order must be >= 1")
    mu, s2 = s.mu, s.sigma2
    t2_min, t2_max = _t_powers(s, T, 2.0)
    lower = T ** pth * math.exp(mu * pth * T / 2.0
                                + pth ** 2 * s2 * t2_min / (4 * s.h_inf + 4))
    var_term = math.exp(pth ** 2 * s2 * t2_max / 2.0)
    if mu == 0.0:
        upper = T ** pth * var_term
    elif mu > 0:
        upper = drift_area(mu * pth, T) * T ** (pth - 1.0) * var_term
    else:
        upper = drift_area(mu, T) ** pth * var_term
    return lower, upper


def _series_markov_mean(s: SeriesParams, q: float) -> float:
    """Bound on E[I_∞^q] (q >= 1) splitting the integral at t = 1."""
    mu, sigma, hi = s.mu, s.sigma, s.h_inf
    expo = (0.5 - hi) * ((-2.0 * hi / mu) ** hi * q * sigma) ** (2.0 / (1.0 - 2.0 * hi))
    return ((-math.expm1(mu)) * math.exp(q * q * sigma ** 2 / 2.0)
            + 2.0 * math.exp(mu / 2.0) * math.exp(expo)) / (-mu) ** q


def moment_bounds_infinite(s: SeriesParams, pth: float,
                           tol: Tolerance = DEFAULT_TOL) -> tuple[float, float]:
    """(lower, upper) bounds on E[I_∞^p]; ``inf`` where the moment is infinite."""
    if not pth > 0:
        raise DomainError("moment order must be positive")
    mu, sigma2, h0, hi = s.mu, s.sigma2, s.h0, s.h_inf
    if mu >= 0 or hi > 0.5:
        return INF, INF
    if hi == 0.5:
        if h0 == 0.5:
            from .exact_laws import moments_h_half_infinite
            v = moments_h_half_infinite(mu, s.sigma, pth)
            return v, v
        raise NotCoveredError("mixed indices with H∞ = 1/2 are not covered")
    upper = _series_markov_mean(s, max(pth, 1.0))
    if pth < 1.0:
        upper = upper ** pth
    _, g0 = gamma_minimum()

    def neg_log_lower(lam):
        return -(-pth * math.log(lam) + pth * (1.0 + mu / lam)
                 + pth ** 2 * sigma2 * g0 / (4.0 * max(lam ** (2 * h0), lam ** (2 * hi))))

    res = minimize_1d(neg_log_lower, Bracket(1e-8 * -mu, 1e4 * -mu), tol,
                      grid_points=129, log_scale=True)
    return math.exp(-res.value), upper


def lower_cdf(s: SeriesParams, T: float, x: float,
              drift: Callable[[float], float] | None = None,
              tol: Tolerance = DEFAULT_TOL,
              drift_inf: float | None = None) -> BoundValue:
    """Lower bound on P[I_T <= x] for the three covered configurations.

    Finite T with all indices below 1/2 or all at least 1/2 (Borell-TIS with
    an expected-supremum bound), or T = ∞ with μ < 0 and H∞ < 1/2 (Markov).
    """
    if not x > 0:
        raise DomainError("x must be positive")
    mu, h0, hi = s.mu, s.h0, s.h_inf
    if math.isinf(T):
        if not (mu < 0 and hi < 0.5):
            raise NotCoveredError("infinite-horizon lower bound needs μ < 0 and H∞ < 1/2")
        value = 1.0 - _series_markov_mean(s, 1.0) / x
        return BoundValue(clamp01(value), BoundKind.LOWER, note="markov")
    if not T > 0:
        raise DomainError("T must be positive")
    if not (hi < 0.5 or h0 >= 0.5):
        raise NotCoveredError("indices straddle 1/2 on a finite horizon")
    rho = s.rho
    _, t_max = _t_powers(s, T)
    if hi < 0.5:
        log2 = math.log(2.0)
        c = (3.75 * math.sqrt(2.0 * math.pi) * rho * t_max / math.sqrt(h0 * log2 ** 3)
             * erfc(math.sqrt(h0 * log2 / 2.0)))
    else:
        c = math.sqrt(2.0 / math.pi) * rho * t_max
    if drift is None:
        area, f_inf = drift_area(mu, T), 0.0
    else:
        f_inf = drift_inf if drift_inf is not None else minimize_1d(
            drift, Bracket(0.0, T), tol, grid_points=1024, log_scale=False).value
        area = integrate(lambda t: math.exp(mu * t + drift(t)), 0.0, T, tol)
    threshold = math.exp(c - f_inf) * area
    if x <= threshold:
        return BoundValue(0.0, BoundKind.LOWER, valid_from=threshold)
    z = math.log(x / area) + f_inf - c
    value = -math.expm1(-z * z / (2.0 * s.sigma2 * t_max ** 2))
    return BoundValue(clamp01(value), BoundKind.LOWER, valid_from=threshold)


def classify_finiteness_series(s: SeriesParams) -> FinitenessVerdict:
    """Finiteness of I_∞ for the series-driven functional."""
    mu, h0, hi = s.mu, s.h0, s.h_inf
    if hi < 1.0:
        if mu > 0:
            return FinitenessVerdict(Finiteness.ALMOST_SURELY_INFINITE, 0.0)
        if mu == 0:
            return FinitenessVerdict(Finiteness.FINITE_WITH_PROB_AT_MOST_HALF, 0.5)
        if hi < 0.5:
            reason = "finite moments"
        elif hi < (1.0 + h0) / 2.0:
            reason = "H∞ < (1+H₀)/2"
        else:
            reason = "finitely many terms (Hölder)"
        return FinitenessVerdict(Finiteness.ALMOST_SURELY_FINITE, 1.0, reason)
    if mu >= 0:
        return FinitenessVerdict(Finiteness.FINITE_WITH_PROB_AT_MOST,
                                 phi_cdf(-mu / s.sigma), "H∞ = 1")
    # μ < 0 with an index-one component: limit of the x → ∞ upper bound
    if h0 == 1.0:
        q = phi_cdf(-math.sqrt(2.0 / gamma_lower_bound(s)) * mu / s.sigma)
    else:
        q = 1.0
    return FinitenessVerdict(Finiteness.UNKNOWN, q, "μ < 0 with H∞ = 1")
