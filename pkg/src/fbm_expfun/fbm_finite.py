"""Finite-horizon bounds for I_T = ∫_0^T exp(μt + σB^H_t) dt.

Upper CDF bounds use the truncated-exponential probing densities
f_λ(t) = λe^{λt}/(e^{λT}-1); lower bounds come from Borell-TIS with an
entropy-type bound on E[sup B^H] (H < 1/2) or from a Slepian comparison with
drifted Brownian motion in the time scale t^{2H} (H >= 1/2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from . import gp_core
from .errors import DomainError
from .gp_core import BoundKind, BoundValue, clamp01
from .numerics import (DEFAULT_TOL, Bracket, Tolerance, erfc, integrate,
                       log_phi_cdf, minimize_1d, phi_cdf)

INF = math.inf


@dataclass(frozen=True)
class FbmParams:
    """Drift, volatility, Hurst index and horizon of μt + σB^H_t.

    ``sigma = 0`` is accepted so that degenerate simulations can be set up;
    the analytic bounds require ``sigma > 0``.
    """

    mu: float
    sigma: float
    hurst: float
    horizon: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.mu) and math.isfinite(self.sigma)):
            raise DomainError("mu and sigma must be finite")
        if self.sigma < 0:
            raise DomainError("sigma must be nonnegative")
        if not 0.0 < self.hurst <= 1.0:
            raise DomainError("hurst must lie in (0, 1]")
        if not self.horizon > 0:
            raise DomainError("horizon must be positive")

    @property
    def finite(self) -> bool:
        return math.isfinite(self.horizon)


def _require_finite(p: FbmParams) -> None:
    if not p.finite:
        raise DomainError("operation needs a finite horizon")
    if not p.sigma > 0:
        raise DomainError("operation needs sigma > 0")


def drift_area(mu: float, T: float) -> float:
    """∫_0^T e^{μt} dt, equal to T when μ = 0."""
    a = mu * T
    if a == 0.0:
        return T
    return math.expm1(a) / mu


def _log_drift_area(mu: float, T: float) -> float:
    a = mu * T
    if abs(a) < 1e-5:
        return math.log(T) + math.log1p(a / 2.0 + a * a / 6.0 + a ** 3 / 24.0)
    if a > 0:
        return a + math.log(-math.expm1(-a)) - math.log(mu)
    return math.log(math.expm1(a) / mu)


def _tilt_mean(a: float) -> float:
    """E[τ]/T for τ with density ∝ e^{aτ/T} on (0, T): 1/(1-e^{-a}) - 1/a."""
    if abs(a) < 1e-3:
        return 0.5 + a / 12.0 - a ** 3 / 720.0 + a ** 5 / 30240.0
    if a > 0:
        return -1.0 / math.expm1(-a) - 1.0 / a
    return 1.0 + 1.0 / math.expm1(a) - 1.0 / a


def m_lambda(p: FbmParams, lam: float) -> float:
    """Location parameter of the comparison log-normal for density f_λ."""
    if not p.finite:
        raise DomainError("m_lambda needs a finite horizon")
    T, mu = p.horizon, p.mu
    if lam == 0.0:
        return math.log(T) + mu * T / 2.0
    # log((e^{λT}-1)/λ) + (μ-λ) E_λ[τ]
    return _log_drift_area(lam, T) + (mu - lam) * T * _tilt_mean(lam * T)


def _density_pdf(lam: float, T: float) -> Callable[[float], float]:
    if lam == 0.0:
        return lambda t: 1.0 / T
    a = abs(lam)
    norm = a / -math.expm1(-a * T)
    if lam > 0:
        return lambda t: norm * math.exp(lam * (t - T))
    return lambda t: norm * math.exp(lam * t)


def _gap_pdf(lam: float, T: float) -> Callable[[float], float]:
    """Density of |τ - τ'| for independent τ, τ' with density f_λ."""
    if lam == 0.0:
        return lambda u: 2.0 * (T - u) / (T * T)
    a = abs(lam)
    c = a / math.expm1(-a * T) ** 2
    return lambda u: c * math.exp(-a * u) * -math.expm1(-2.0 * a * (T - u))


def s_lambda(p: FbmParams, lam: float, tol: Tolerance = DEFAULT_TOL) -> float:
    """Scale parameter of the comparison log-normal for density f_λ.

    Uses s² = σ²(E[τ^{2H}] - ½E|τ-τ'|^{2H}), an expansion of the double
    covariance integral that avoids cancellation as λ → 0.
    """
    _require_finite(p)
    T, H, sigma = p.horizon, p.hurst, p.sigma
    if lam == 0.0:
        return sigma * math.sqrt(T ** (2 * H) / (2 * H + 2))
    two_h = 2.0 * H
    f = _density_pdf(lam, T)
    k = _gap_pdf(lam, T)
    edge = min(T, 30.0 / abs(lam))
    pts = (T - edge,) if lam > 0 else (edge,)
    first = integrate(lambda t: t ** two_h * f(t), 0.0, T, tol, pts)
    second = integrate(lambda u: u ** two_h * k(u), 0.0, T, tol, (edge,))
    s2 = sigma * sigma * (first - 0.5 * second)
    return math.sqrt(max(s2, 0.0))


def s_lambda_display(p: FbmParams, lam: float, tol: Tolerance = DEFAULT_TOL) -> float:
    """Same quantity through the combination of ∫t^{2H}e^{±λt}dt.

    Loses relative accuracy like 1/|λT| for small λ; kept as a
    cross-check of :func:`s_lambda`.
    """
    _require_finite(p)
    if lam == 0.0:
        return s_lambda(p, 0.0, tol)
    T, H, sigma = p.horizon, p.hurst, p.sigma
    plus = integrate(lambda t: t ** (2 * H) * math.exp(lam * t), 0.0, T, tol)
    minus = integrate(lambda t: t ** (2 * H) * math.exp(-lam * t), 0.0, T, tol)
    e = math.exp(lam * T)
    s2 = lam * sigma ** 2 / (2.0 * (e - 1.0) ** 2) * ((2.0 * e - 1.0) * plus - e * e * minus)
    return math.sqrt(max(s2, 0.0))


def lognormal_params(p: FbmParams, lam: float, tol: Tolerance = DEFAULT_TOL):
    return gp_core.LogNormalParams(m_lambda(p, lam), s_lambda(p, lam, tol))


def upper_cdf(p: FbmParams, x: float, lam: float = 0.0,
              tol: Tolerance = DEFAULT_TOL) -> BoundValue:
    """Log-normal upper bound on P[I_T <= x] for density f_λ."""
    _require_finite(p)
    if not x > 0:
        raise DomainError("x must be positive")
    T, H = p.horizon, p.hurst
    if lam == 0.0:
        half = p.mu * T / 2.0
        # log(x / (T e^{μT/2})) vanishes exactly at the median of the bound
        if abs(half) < 700.0:
            log_ratio = math.log(x / (T * math.exp(half)))
        else:
            log_ratio = math.log(x) - math.log(T) - half
        z = math.sqrt(2 * H + 2) / (p.sigma * T ** H) * log_ratio
    else:
        z = (math.log(x) - m_lambda(p, lam)) / s_lambda(p, lam, tol)
    return BoundValue(clamp01(phi_cdf(z)), BoundKind.UPPER)


def optimal_upper_cdf(p: FbmParams, x: float, tol: Tolerance = DEFAULT_TOL,
                      lam_range: float = 50.0, grid_points: int = 64) -> BoundValue:
    """Upper bound minimized over λ in [-lam_range/T, lam_range/T].

    The minimizing λ is reported in ``note``.
    """
    _require_finite(p)
    if not x > 0:
        raise DomainError("x must be positive")
    T = p.horizon
    logx = math.log(x)
    family = gp_core.DensityFamily(
        make=lambda lam: gp_core.TruncatedExponential(lam, T),
        lo=-lam_range / T, hi=lam_range / T, anchors=(0.0,),
        params=lambda lam: lognormal_params(p, lam, tol))
    res = minimize_1d(lambda lam: (logx - m_lambda(p, lam)) / s_lambda(p, lam, tol),
                      Bracket(family.lo, family.hi), tol, grid_points=grid_points,
                      log_scale=False, anchors=family.anchors)
    return BoundValue(clamp01(phi_cdf(res.value)), BoundKind.UPPER,
                      note=f"lambda={res.argmin!r}")


def sup_mean_constant(hurst: float) -> float:
    """Entropy bound on E[sup_{[0,1]} B^H] used for H < 1/2."""
    log2 = math.log(2.0)
    return 3.75 * math.sqrt(2.0 * math.pi / (hurst * log2 ** 3)) * erfc(
        math.sqrt(hurst * log2 / 2.0))


def _drift_area_general(p: FbmParams, drift, tol) -> float:
    if drift is None:
        return drift_area(p.mu, p.horizon)
    return integrate(lambda t: math.exp(p.mu * t + drift(t)), 0.0, p.horizon, tol)


def lower_cdf_small_h(p: FbmParams, x: float, drift: Callable[[float], float] | None = None,
                      tol: Tolerance = DEFAULT_TOL,
                      drift_inf: float | None = None) -> BoundValue:
    """Borell-TIS lower bound on P[I_T <= x] for H < 1/2.

    ``drift`` defaults to f ≡ 0.
    """
    _require_finite(p)
    if not p.hurst < 0.5:
        raise DomainError("lower_cdf_small_h needs H < 1/2")
    if not x > 0:
        raise DomainError("x must be positive")
    T, H, sigma = p.horizon, p.hurst, p.sigma
    if drift is None:
        f_inf = 0.0
    elif drift_inf is not None:
        f_inf = drift_inf
    else:
        f_inf = minimize_1d(drift, Bracket(0.0, T), tol, grid_points=1024,
                            log_scale=False).value
    area = _drift_area_general(p, drift, tol)
    c = sup_mean_constant(H) * sigma * T ** H
    threshold = math.exp(c - f_inf) * area
    if x <= threshold:
        return BoundValue(0.0, BoundKind.LOWER, valid_from=threshold)
    z = math.log(x / area) + f_inf - c
    value = -math.expm1(-z * z / (2.0 * sigma ** 2 * T ** (2 * H)))
    return BoundValue(clamp01(value), BoundKind.LOWER, valid_from=threshold)


def slepian_area(p: FbmParams, lam: float, tol: Tolerance = DEFAULT_TOL) -> float:
    """A_λ = ∫_0^T exp(μt + λt^{2H}) dt."""
    if lam == 0.0:
        return drift_area(p.mu, p.horizon)
    two_h = 2.0 * p.hurst
    return integrate(lambda t: math.exp(p.mu * t + lam * t ** two_h), 0.0, p.horizon, tol)


def lower_cdf_large_h(p: FbmParams, x: float, lam: float = 0.0,
                      tol: Tolerance = DEFAULT_TOL) -> BoundValue:
    """Slepian lower bound on P[I_T <= x] for H >= 1/2.

    Compares sup(σB^H_t - λt^{2H}) with drifted Brownian motion on [0, T^{2H}].
    """
    _require_finite(p)
    if not p.hurst >= 0.5:
        raise DomainError("lower_cdf_large_h needs H >= 1/2")
    if not x > 0:
        raise DomainError("x must be positive")
    T, H, sigma = p.horizon, p.hurst, p.sigma
    area = slepian_area(p, lam, tol)
    if x <= area:
        return BoundValue(0.0, BoundKind.LOWER, valid_from=area)
    y = math.log(x / area)
    vol = sigma * T ** H
    shift = lam * T ** (2 * H)
    first = phi_cdf((y + shift) / vol)
    second = math.exp(-2.0 * lam * y / sigma ** 2 + log_phi_cdf((shift - y) / vol))
    return BoundValue(clamp01(first - second), BoundKind.LOWER, valid_from=area)


def slepian_tail_bound(p: FbmParams, x: float) -> float:
    """2Φ(log(A_0/x)/(σT^H)): tail P[I_T > x] bound implied by the λ = 0 lower bound."""
    _require_finite(p)
    area = drift_area(p.mu, p.horizon)
    if x <= area:
        return 1.0
    return min(1.0, 2.0 * phi_cdf(math.log(area / x) / (p.sigma * p.horizon ** p.hurst)))


def dung_threshold(p: FbmParams, tol: Tolerance = DEFAULT_TOL) -> float:
    """B = ∫_0^T exp(μt + σ²t^{2H}/2) dt = E[I_T]."""
    two_h = 2.0 * p.hurst
    half_s2 = 0.5 * p.sigma ** 2
    return integrate(lambda t: math.exp(p.mu * t + half_s2 * t ** two_h), 0.0, p.horizon, tol)


def dung_tail_bound(p: FbmParams, x: float, tol: Tolerance = DEFAULT_TOL) -> BoundValue:
    """Comparison bound P[I_T > x] <= 2exp(-log(x/B)²/(2σ²T^{2H})), x > B."""
    _require_finite(p)
    if not x > 0:
        raise DomainError("x must be positive")
    b = dung_threshold(p, tol)
    if x <= b:
        return BoundValue(1.0, BoundKind.TAIL_UPPER, valid_from=b)
    y = math.log(x / b)
    value = 2.0 * math.exp(-y * y / (2.0 * p.sigma ** 2 * p.horizon ** (2 * p.hurst)))
    return BoundValue(clamp01(value), BoundKind.TAIL_UPPER, valid_from=b)


def dung_lower_cdf(p: FbmParams, x: float, tol: Tolerance = DEFAULT_TOL) -> BoundValue:
    """Complement 1 - dung_tail_bound as a lower bound on P[I_T <= x]."""
    tail = dung_tail_bound(p, x, tol)
    return BoundValue(clamp01(1.0 - tail.value), BoundKind.LOWER, valid_from=tail.valid_from)


def moment_bounds(p: FbmParams, pth: float) -> tuple[float, float]:
    """Bounds on E[I_T^p] for p >= 1."""
    _require_finite(p)
    if not pth >= 1.0:
        raise DomainError("moment order must be >= 1")
    T, H, mu, sigma = p.horizon, p.hurst, p.mu, p.sigma
    var_term = pth * pth * sigma * sigma * T ** (2 * H)
    lower = T ** pth * math.exp(mu * pth * T / 2.0 + var_term / (4 * H + 4))
    if mu == 0.0:
        upper = T ** pth * math.exp(var_term / 2.0)
    elif mu > 0:
        upper = drift_area(mu * pth, T) * T ** (pth - 1.0) * math.exp(var_term / 2.0)
    else:
        upper = drift_area(mu, T) ** pth * math.exp(var_term / 2.0)
    return lower, upper


def mgf_bounds(p: FbmParams, lam: float, tol: Tolerance = DEFAULT_TOL) -> tuple[float, float]:
    """(lower, upper) bounds on E[exp(-λ I_T)]."""
    _require_finite(p)
    if not lam > 0:
        raise DomainError("λ must be positive")
    T, H, mu, sigma = p.horizon, p.hurst, p.mu, p.sigma
    upper = gp_core.lognormal_mgf_upper(
        math.log(T) + mu * T / 2.0, sigma * T ** H / math.sqrt(2 * H + 2), lam, tol)
    area = drift_area(mu, T)
    vol2 = sigma ** 2 * T ** (2 * H)
    if H < 0.5:
        c = 16.3 * sigma * T ** H / math.sqrt(H)
        lower = gp_core.borell_mgf_lower(area, 0.0, c, vol2, lam, tol)
    else:
        vol = math.sqrt(vol2)
        scale = lam * area
        if scale > 745.0:
            lower = 0.0
        else:
            def integrand(y):
                return math.exp(-y) * (2.0 * phi_cdf(math.log(y / scale) / vol) - 1.0)
            lower = integrate(integrand, scale, INF, tol, points=(scale + 1.0,))
            lower = min(1.0, max(0.0, lower))
    return lower, upper


def upper_bound_error_estimate(p: FbmParams, x: float) -> float:
    """Largest possible gap between the λ = 0 upper bound and the true CDF."""
    _require_finite(p)
    if not x > 0:
        raise DomainError("x must be positive")
    first = upper_cdf(p, x, 0.0).value
    T = p.horizon
    second = drift_area(p.mu, T) * math.exp(p.sigma ** 2 * T ** (2 * p.hurst) / 2.0) / x
    return min(first, second)
