"""Infinite-horizon results for I_∞ = ∫_0^∞ exp(μt + σB^H_t) dt.

Upper CDF bounds use exponential probing densities λe^{-λt}; the optimal
λ has a closed form through the principal Lambert W branch.  Lower bounds
use Markov's inequality on a self-similar rescaling of the supremum of
-t + B^H_t, or, for H > 1/2, a Slepian comparison giving the integral l_H.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from . import exact_laws
from .errors import DomainError
from .fbm_finite import FbmParams
from .gp_core import BoundKind, BoundValue, clamp01
from .numerics import (DEFAULT_TOL, Bracket, Tolerance, find_root, gamma_fn,
                       integrate, lambert_w0, minimize_1d, phi_cdf)

INF = math.inf


class Finiteness(enum.Enum):
    ALMOST_SURELY_INFINITE = "almost_surely_infinite"
    ALMOST_SURELY_FINITE = "almost_surely_finite"
    FINITE_WITH_PROB_AT_MOST_HALF = "finite_with_prob_at_most_half"
    FINITE_WITH_PROB_AT_MOST = "finite_with_prob_at_most"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class FinitenessVerdict:
    tag: Finiteness
    q: float | None = None
    reason: str = ""

    def __post_init__(self):
        if self.q is not None and not 0.0 <= self.q <= 1.0:
            raise DomainError("probability cap outside [0, 1]")


def _require_infinite(p: FbmParams) -> None:
    if p.finite:
        raise DomainError("operation needs an infinite horizon")
    if not p.sigma > 0:
        raise DomainError("operation needs sigma > 0")


def classify_finiteness(p: FbmParams) -> FinitenessVerdict:
    """Whether I_∞ is finite, almost surely or with a probability cap."""
    _require_infinite(p)
    mu, H = p.mu, p.hurst
    if H == 1.0:
        # I = ∞ exactly when μ + σN >= 0
        return FinitenessVerdict(Finiteness.FINITE_WITH_PROB_AT_MOST,
                                 phi_cdf(-mu / p.sigma), "H=1: B_t = tN")
    if mu > 0:
        return FinitenessVerdict(Finiteness.ALMOST_SURELY_INFINITE, 0.0)
    if mu < 0:
        return FinitenessVerdict(Finiteness.ALMOST_SURELY_FINITE, 1.0)
    return FinitenessVerdict(Finiteness.FINITE_WITH_PROB_AT_MOST_HALF, 0.5)


def _gamma_factor(H: float) -> float:
    return math.sqrt(2.0 / gamma_fn(2.0 * H + 1.0))


def _lambert_argument(mu: float, H: float, x: float) -> tuple[float, float]:
    """(c, W) with c = (1-1/H)μ and W = W0(c x e^{1/H-1})."""
    c = (1.0 - 1.0 / H) * mu
    return c, lambert_w0(c * x * math.exp(1.0 / H - 1.0))


def optimal_rate(p: FbmParams, x: float) -> float:
    """Minimizer λ* of the exponential-density bound (μ < 0, H < 1)."""
    _require_infinite(p)
    if not (p.mu < 0 and p.hurst < 1):
        raise DomainError("closed-form rate needs μ < 0 and H < 1")
    c, w = _lambert_argument(p.mu, p.hurst, x)
    return c / w


def upper_cdf(p: FbmParams, x: float) -> BoundValue:
    """Closed-form optimal exponential-density upper bound on P[I_∞ <= x]."""
    _require_infinite(p)
    if not x > 0:
        raise DomainError("x must be positive")
    mu, sigma, H = p.mu, p.sigma, p.hurst
    if H == 1.0:
        return BoundValue(clamp01(phi_cdf(-(mu + 1.0 / x) / sigma)), BoundKind.UPPER)
    if mu > 0:
        return BoundValue(0.0, BoundKind.UPPER, note="almost surely infinite")
    g = _gamma_factor(H)
    if mu == 0:
        z = -g / (sigma * H * math.exp(1.0 - H) * x ** H)
        return BoundValue(clamp01(phi_cdf(z)), BoundKind.UPPER)
    lam = optimal_rate(p, x)
    z = -g * (mu + lam) / (sigma * H * lam ** (1.0 - H))
    return BoundValue(clamp01(phi_cdf(z)), BoundKind.UPPER)


def upper_cdf_simple(p: FbmParams, x: float) -> BoundValue:
    """Weaker bound obtained with the rate λ = -μ."""
    _require_infinite(p)
    if not (p.mu < 0 and p.hurst < 1):
        raise DomainError("upper_cdf_simple needs μ < 0 and H < 1")
    if not x > 0:
        raise DomainError("x must be positive")
    H = p.hurst
    z = (-p.mu) ** H / p.sigma * _gamma_factor(H) * math.log(-p.mu * x)
    return BoundValue(clamp01(phi_cdf(z)), BoundKind.UPPER)


def rate_objective(p: FbmParams, x: float, lam: float) -> float:
    """F(λ) = λ^H log x + λ^H log λ - λ^H - μλ^{H-1}."""
    H = p.hurst
    return lam ** (H - 1.0) * (lam * (math.log(x) + math.log(lam) - 1.0) - p.mu)


def _objective_limit_at_zero(p: FbmParams) -> float:
    if p.hurst == 1.0:
        return -p.mu
    if p.mu > 0:
        return -INF
    return 0.0 if p.mu == 0 else INF


def upper_cdf_numeric(p: FbmParams, x: float, tol: Tolerance = DEFAULT_TOL,
                      lam_lo: float = 1e-8, lam_hi: float = 1e8,
                      grid_points: int = 129) -> BoundValue:
    """Exponential-density bound with the infimum over λ found numerically."""
    _require_infinite(p)
    if not x > 0:
        raise DomainError("x must be positive")
    res = minimize_1d(lambda lam: rate_objective(p, x, lam), Bracket(lam_lo, lam_hi),
                      tol, grid_points=grid_points, log_scale=True)
    best = min(res.value, _objective_limit_at_zero(p))
    z = _gamma_factor(p.hurst) / p.sigma * best
    return BoundValue(clamp01(phi_cdf(z)), BoundKind.UPPER,
                      note=f"lambda={res.argmin!r}")


def l_h(x: float, H: float, tol: Tolerance = DEFAULT_TOL) -> float:
    """(2π)^{-1/2} ∫_0^∞ t^{-H} exp(-(t+x)²/(2t^{2H})) dt for H in (1/2, 1)."""
    if not 0.5 < H < 1.0:
        raise DomainError("l_h needs 1/2 < H < 1")
    if not x > 0:
        raise DomainError("x must be positive")

    def log_integrand(t):
        return -H * math.log(t) - (t + x) ** 2 / (2.0 * t ** (2.0 * H))

    def integrand(t):
        return math.exp(log_integrand(t))

    # the exponent is extremal at t = Hx/(1-H); the integrand mode is nearby
    centre = H * x / (1.0 - H)
    mode = minimize_1d(lambda t: -log_integrand(t), Bracket(centre * 1e-3, centre * 1e3),
                       tol, grid_points=64, log_scale=True).argmin
    pts = sorted({x, mode, centre})
    head = integrate(integrand, 0.0, pts[-1], tol, points=pts[:-1])
    tail = integrate(integrand, pts[-1], INF, tol)
    return (head + tail) / math.sqrt(2.0 * math.pi)


def m_script_bound(H: float) -> float:
    """Explicit upper bound on E[sup_{t>=0}(-t + B^H_t)] for H < 1/2."""
    if not 0.0 < H < 0.5:
        raise DomainError("m_script_bound needs 0 < H < 1/2")
    lam_h = 1.695 / math.sqrt(2.0 / math.log2(math.ceil(2.0 ** (2.0 / H))))
    factor = min(2.0 * (2.0 * H) ** (H / (1.0 - H))
                 * (1.0 - 2.0 * H) ** ((1.0 - 2.0 * H) / (2.0 - 2.0 * H)),
                 H ** H * (1.0 - H) ** (1.0 - H))
    bracket = (lam_h ** (1.0 / (1.0 - H))
               + math.sqrt(math.pi / 2.0) / (1.0 - H)
               * (lam_h ** (H / (1.0 - H))
                  + 2.0 ** (H / (2.0 - 2.0 * H)) / math.sqrt(math.pi)
                  * gamma_fn(1.0 / (2.0 - 2.0 * H))))
    return factor * bracket


def rescaled_level(p: FbmParams, x: float) -> float:
    """Λ: level for sup(-t + B^H_t) equivalent to the optimal-λ event (x > -1/μ)."""
    mu, sigma, H = p.mu, p.sigma, p.hurst
    _, w = _lambert_argument(mu, H, x)
    gap = w + 1.0 - 1.0 / H
    if not gap > 0:
        return 0.0
    return (-mu / w) ** (H / (1.0 - H)) * (gap / sigma) ** (1.0 / (1.0 - H))


def markov_lower_cdf(p: FbmParams, x: float) -> float:
    """1 + (2/(μx)) exp((1/2-H)((-2H/μ)^H σ)^{2/(1-2H)}), for H < 1/2."""
    mu, sigma, H = p.mu, p.sigma, p.hurst
    expo = (0.5 - H) * ((-2.0 * H / mu) ** H * sigma) ** (2.0 / (1.0 - 2.0 * H))
    return 1.0 + 2.0 / (mu * x) * math.exp(expo)


def lower_cdf(p: FbmParams, x: float, tol: Tolerance = DEFAULT_TOL) -> BoundValue:
    """Lower bound on P[I_∞ <= x] for μ < 0.

    H < 1/2 reports the larger of the Markov bound and 1 - M_bound/Λ;
    H exactly 1/2 returns the exact inverse-Gamma CDF.
    """
    _require_infinite(p)
    mu, H = p.mu, p.hurst
    if not mu < 0:
        raise DomainError("lower_cdf needs μ < 0")
    if H >= 1.0:
        raise DomainError("lower_cdf needs H < 1")
    if not x > 0:
        raise DomainError("x must be positive")
    if H == 0.5:
        return BoundValue(exact_laws.cdf_h_half_infinite(mu, p.sigma, x), BoundKind.LOWER,
                          note="exact law")
    if H < 0.5:
        markov = markov_lower_cdf(p, x)
        if x <= -1.0 / mu:
            return BoundValue(clamp01(markov), BoundKind.LOWER, note="markov")
        level = rescaled_level(p, x)
        sup_form = 1.0 - m_script_bound(H) / level if level > 0 else 0.0
        if sup_form > markov:
            return BoundValue(clamp01(sup_form), BoundKind.LOWER, valid_from=-1.0 / mu,
                              note="supremum-mean")
        return BoundValue(clamp01(markov), BoundKind.LOWER, note="markov")
    threshold = -1.0 / mu
    if x <= threshold:
        return BoundValue(0.0, BoundKind.LOWER, valid_from=threshold)
    level = rescaled_level(p, x)
    if level <= 0:
        return BoundValue(0.0, BoundKind.LOWER, valid_from=threshold)
    return BoundValue(clamp01(1.0 - l_h(level, H, tol)), BoundKind.LOWER,
                      valid_from=threshold)


def _positive_moment_root(mu: float, sigma: float, H: float, pth: float,
                          tol: Tolerance) -> float:
    coef = pth * sigma ** 2 * H * gamma_fn(2.0 * H + 1.0) / 2.0
    return find_root(lambda lam: lam + coef * lam ** (1.0 - 2.0 * H) + mu,
                     Bracket(0.0, -mu), tol)


def moment_bounds(p: FbmParams, pth: float,
                  tol: Tolerance = DEFAULT_TOL) -> tuple[float, float]:
    """(lower, upper) bounds on E[I_∞^p]; ``inf`` where the moment is infinite."""
    _require_infinite(p)
    if not pth > 0:
        raise DomainError("moment order must be positive")
    mu, sigma, H = p.mu, p.sigma, p.hurst
    if mu >= 0 or H > 0.5:
        return INF, INF
    if H == 0.5:
        v = exact_laws.moments_h_half_infinite(mu, sigma, pth)
        return v, v
    g = gamma_fn(2.0 * H + 1.0)
    lam = _positive_moment_root(mu, sigma, H, pth, tol)
    lower = lam ** (-pth) * math.exp(pth * (1.0 + mu / lam)
                                     + pth ** 2 * sigma ** 2 * g / (4.0 * lam ** (2.0 * H)))
    q = max(pth, 1.0)
    expo = (0.5 - H) * ((-2.0 * H / mu) ** H * q * sigma) ** (2.0 / (1.0 - 2.0 * H))
    upper = 2.0 / (-mu) ** q * math.exp(expo)
    if pth < 1.0:
        # Jensen: E[I^p] <= (E[I])^p
        upper = upper ** pth
    return lower, upper


def mgf_upper(p: FbmParams, lam: float, tol: Tolerance = DEFAULT_TOL,
              method: str = "closed") -> float:
    """Upper bound on E[exp(-λ I_∞)].

    The inner infimum over the density rate δ is the CDF bound at
    x = log(1/ε)/λ; ``method='closed'`` uses the Lambert form and
    ``method='nested'`` minimizes over δ numerically.
    """
    _require_infinite(p)
    if not lam > 0:
        raise DomainError("λ must be positive")
    if method == "closed":
        cdf = lambda x: upper_cdf(p, x).value
    elif method == "nested":
        cdf = lambda x: upper_cdf_numeric(p, x, tol).value
    else:
        raise DomainError(f"unknown method {method!r}")

    def g(u):
        e = math.exp(u)
        eps = math.exp(-e)
        return eps + (-math.expm1(-e)) * cdf(e / lam)

    u_lo = math.log(-math.log1p(-1e-12))
    u_hi = math.log(-math.log(1e-12))
    res = minimize_1d(g, Bracket(u_lo, u_hi), tol, grid_points=64, log_scale=False)
    return min(1.0, max(0.0, res.value))


def upper_error_estimate(p: FbmParams, x: float) -> float:
    """Largest possible gap between the λ = -μ bound and the true CDF (H < 1/2)."""
    _require_infinite(p)
    mu, sigma, H = p.mu, p.sigma, p.hurst
    if not (mu < 0 and H < 0.5):
        raise DomainError("upper_error_estimate needs μ < 0 and H < 1/2")
    if not x > 0:
        raise DomainError("x must be positive")
    first = upper_cdf_simple(p, x).value
    expo = (0.5 - H) * ((-2.0 * H / mu) ** H * sigma) ** (2.0 / (1.0 - 2.0 * H))
    return min(first, 2.0 * math.exp(expo) / (-mu * x))
