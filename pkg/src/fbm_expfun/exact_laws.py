"""Exact laws of the exponential functional where they are explicit.

H = 1 makes B^H_t = tN, so I_T is a monotone function of one Gaussian
variable.  H = 1/2 with an infinite horizon gives the inverse-Gamma law of
Dufresne.  The Kolmogorov-gap diagnostic compares the latter with the
closed-form infinite-horizon upper bound.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import DomainError
from .numerics import (Bracket, lambert_w0, lambert_wm1, minimize_1d,
                       phi_cdf, reg_upper_gamma)

INF = math.inf


def _check_sigma(sigma: float) -> None:
    if not sigma > 0:
        raise DomainError("sigma must be positive")


def _expm1_ratio(a: float) -> float:
    """(e^a - 1)/a, equal to 1 at a = 0."""
    if abs(a) < 1e-8:
        return 1.0 + a / 2.0
    return math.expm1(a) / a


def h1_finite_quantile_rate(T: float, x: float) -> float:
    """The u with ∫_0^T e^{ut} dt = x, i.e. the drift making the integral x.

    Solved through Lambert W: with v = T/x and z = -Tu - v, z e^z = -v e^{-v}.
    The root z = -v is spurious; the other root sits on W_{-1} when x > T
    and on W_0 when x < T.
    """
    v = T / x
    y = -v * math.exp(-v)
    if v < 1.0:
        z = lambert_wm1(y)
    elif v > 1.0:
        z = lambert_w0(y)
    else:
        return 0.0
    u = -(z + v) / T
    if abs(v - 1.0) < 1e-3:
        # near the branch point polish with Newton on log(F(u)) = log(x/T)
        target = math.log(x / T)
        for _ in range(4):
            a = T * u
            g = math.log(_expm1_ratio(a)) - target
            # d/du log((e^{a}-1)/a) = T(1/(1-e^{-a}) - 1/a)
            slope = T * ((0.5 + a / 12.0) if abs(a) < 1e-4
                         else (-1.0 / math.expm1(-a) - 1.0 / a))
            u -= g / slope
    return u


def cdf_h1_finite(mu: float, sigma: float, T: float, x: float) -> float:
    """P[∫_0^T e^{μt + σtN} dt <= x]."""
    _check_sigma(sigma)
    if not (T > 0 and math.isfinite(T)):
        raise DomainError("T must be positive and finite")
    if not x > 0:
        raise DomainError("x must be positive")
    u = h1_finite_quantile_rate(T, x)
    return phi_cdf((u - mu) / sigma)


def cdf_h1_infinite(mu: float, sigma: float, x: float) -> float:
    """P[∫_0^∞ e^{μt + σtN} dt <= x] = Φ(-(μ + 1/x)/σ); the law has mass 1 - Φ(-μ/σ) at ∞."""
    _check_sigma(sigma)
    if not x > 0:
        raise DomainError("x must be positive")
    return phi_cdf(-(mu + 1.0 / x) / sigma)


def _inverse_gamma_params(mu: float, sigma: float) -> tuple[float, float]:
    if not mu < 0:
        raise DomainError("the inverse-Gamma law needs μ < 0")
    _check_sigma(sigma)
    return -2.0 * mu / sigma ** 2, 2.0 / sigma ** 2


def cdf_h_half_infinite(mu, sigma: float, x):
    """P[I_∞ <= x] for Brownian motion with drift μ < 0 (array-aware in x)."""
    shape, rate = _inverse_gamma_params(mu, sigma)
    xs = np.asarray(x, dtype=float)
    if np.any(xs <= 0):
        raise DomainError("x must be positive")
    return reg_upper_gamma(shape, rate / xs)


def density_h_half_infinite(mu: float, sigma: float, y: float) -> float:
    """Inverse-Gamma density of I_∞ for H = 1/2."""
    shape, rate = _inverse_gamma_params(mu, sigma)
    if not y > 0:
        return 0.0
    log_d = (shape * math.log(rate / y) - rate / y - math.log(y)
             - math.lgamma(shape))
    return math.exp(log_d)


def moments_h_half_infinite(mu: float, sigma: float, pth: float) -> float:
    """E[I_∞^p] for H = 1/2; infinite when p >= -2μ/σ²."""
    shape, rate = _inverse_gamma_params(mu, sigma)
    if not pth > 0:
        raise DomainError("moment order must be positive")
    if pth >= shape:
        return INF
    return math.exp(math.lgamma(shape - pth) - math.lgamma(shape)) * rate ** pth


def half_bound_w_form(mu: float, sigma: float, x):
    """Optimal exponential-density bound at H = 1/2 written with W(-μxe)."""
    w = np.sqrt(lambert_w0(-mu * np.asarray(x, dtype=float) * math.e))
    return phi_cdf(2.0 * math.sqrt(-2.0 * mu) / sigma * (w - 1.0 / w))


def kolmogorov_gap_h_half(mu: float, sigma: float, T_split: float = 100.0,
                          grid_size: int = 10_000) -> float:
    """Upper estimate of sup_x(bound(x) - exact CDF(x)) at H = 1/2.

    Supremum over a log grid on (0, T_split] refined locally, plus the tail
    mass 1 - exact(T_split) beyond the split point.
    """
    _inverse_gamma_params(mu, sigma)
    if not T_split > 0:
        raise DomainError("T_split must be positive")
    lo = T_split * 1e-10
    xs = np.geomspace(lo, T_split, int(grid_size))
    gap = half_bound_w_form(mu, sigma, xs) - cdf_h_half_infinite(mu, sigma, xs)
    i = int(np.argmax(gap))
    best = float(gap[i])
    a, b = xs[max(i - 1, 0)], xs[min(i + 1, len(xs) - 1)]
    if b > a:
        res = minimize_1d(lambda t: -(float(half_bound_w_form(mu, sigma, t))
                                      - float(cdf_h_half_infinite(mu, sigma, t))),
                          Bracket(a, b), grid_points=16, log_scale=True)
        best = max(best, -res.value)
    tail = 1.0 - float(cdf_h_half_infinite(mu, sigma, T_split))
    return max(best, tail, 0.0)
