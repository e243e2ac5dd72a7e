"""Generic bounds for exponential functionals of Gaussian processes.

For a continuous Gaussian process X on [0, T) and a probability density f
on the same interval, Jensen's inequality compares
``I = ∫ exp(X_t) dt`` with the log-normal variable
``exp(∫ (X_t - log f(t)) f(t) dt)``.  This module computes the parameters
of that log-normal law for arbitrary mean/covariance functions, and the
CDF, moment and Laplace-transform bounds derived from it.  The lower CDF
bound combines the Borell-TIS concentration inequality with a caller
supplied bound on the expected supremum.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import (AccuracyError, DegenerateError, DivergenceError, DomainError,
                     MembershipError)
from .numerics import (DEFAULT_TOL, Bracket, Tolerance, integrate, minimize_1d,
                       phi_cdf)

INF = math.inf


# ---------------------------------------------------------------------------
# domain types

@dataclass(frozen=True)
class GaussianModel:
    """Mean function, covariance function and horizon of a Gaussian process."""

    mean: Callable[[float], float]
    cov: Callable[[float, float], float]
    horizon: float
    var: Callable[[float], float] | None = None

    def __post_init__(self):
        if not self.horizon > 0:
            raise DomainError("horizon must be positive")

    def variance(self, t: float) -> float:
        return self.var(t) if self.var is not None else self.cov(t, t)

    def check_covariance(self, n: int = 33, eig_tol: float = 1e-9) -> None:
        """Raise if a sampled Gram matrix is asymmetric or not PSD."""
        top = self.horizon if math.isfinite(self.horizon) else 10.0
        ts = np.linspace(0.0, top, n)
        gram = np.array([[self.cov(s, t) for t in ts] for s in ts])
        if not np.allclose(gram, gram.T, rtol=1e-12, atol=1e-14):
            raise DomainError("covariance is not symmetric")
        eig = np.linalg.eigvalsh(gram)
        if eig.min() < -eig_tol * max(1.0, eig.max()):
            raise DomainError("covariance Gram matrix is not positive semidefinite")


def fbm_model(mu: float, sigma: float, hurst: float, horizon: float) -> GaussianModel:
    """Drifted fBM ``mu*t + sigma*B^H_t`` as a :class:`GaussianModel`."""
    two_h = 2.0 * hurst
    s2 = sigma * sigma

    def cov(s, t):
        return 0.5 * s2 * (s ** two_h + t ** two_h - abs(s - t) ** two_h)

    return GaussianModel(mean=lambda t: mu * t, cov=cov, horizon=horizon,
                         var=lambda t: s2 * t ** two_h)


class ProbingDensity:
    """A strictly positive probability density on the support (0, T)."""

    horizon: float

    def pdf(self, t: float) -> float:
        raise NotImplementedError

    def logpdf(self, t: float) -> float:
        raise NotImplementedError

    def breakpoints(self) -> tuple[float, ...]:
        return ()


@dataclass(frozen=True)
class TruncatedExponential(ProbingDensity):
    """Density λe^{λt}/(e^{λT}-1) on (0, T); uniform when λ = 0."""

    lam: float
    horizon: float

    def __post_init__(self):
        if not (self.horizon > 0 and math.isfinite(self.horizon)):
            raise DomainError("truncated exponential needs 0 < T < ∞")

    def logpdf(self, t):
        lam, T = self.lam, self.horizon
        if lam == 0.0:
            return -math.log(T)
        if lam > 0:
            return math.log(lam) + lam * (t - T) - math.log(-math.expm1(-lam * T))
        return math.log(-lam) + lam * t - math.log(-math.expm1(lam * T))

    def pdf(self, t):
        return math.exp(self.logpdf(t))

    def breakpoints(self):
        T, lam = self.horizon, abs(self.lam)
        if lam * T <= 20.0:
            return ()
        # mass concentrates within a few multiples of 1/|λ| of one end
        edge = min(T, 30.0 / lam)
        return (T - edge,) if self.lam > 0 else (edge,)


@dataclass(frozen=True)
class Exponential(ProbingDensity):
    """Density λe^{-λt} on (0, ∞)."""

    lam: float
    horizon: float = field(default=INF, init=False)

    def __post_init__(self):
        if not self.lam > 0:
            raise DomainError("exponential density needs λ > 0")

    def logpdf(self, t):
        return math.log(self.lam) - self.lam * t

    def pdf(self, t):
        return self.lam * math.exp(-self.lam * t)

    def breakpoints(self):
        return (1.0 / self.lam,)


class Tabulated(ProbingDensity):
    """User-supplied density with its logarithm on (0, T).

    The constructor checks normalization by quadrature (to 1e-10) and
    positivity on a sample grid.
    """

    def __init__(self, f: Callable[[float], float], log_f: Callable[[float], float],
                 horizon: float, tol: Tolerance = DEFAULT_TOL):
        if not horizon > 0:
            raise DomainError("horizon must be positive")
        self._f, self._log_f, self.horizon = f, log_f, horizon
        top = horizon if math.isfinite(horizon) else 50.0
        grid = np.linspace(0.0, top, 257)[1:-1]
        if any(not f(t) > 0 for t in grid):
            raise DomainError("tabulated density must be strictly positive")
        mass = integrate(f, 0.0, horizon, Tolerance(1e-13, 1e-13, tol.max_iter))
        if abs(mass - 1.0) > 1e-10:
            raise DomainError(f"tabulated density integrates to {mass!r}, not 1")

    def pdf(self, t):
        return self._f(t)

    def logpdf(self, t):
        return self._log_f(t)


@dataclass(frozen=True)
class LogNormalParams:
    m: float
    s: float

    def __post_init__(self):
        if not (math.isfinite(self.m) and math.isfinite(self.s)) or self.s < 0:
            raise DomainError("log-normal parameters must be finite with s >= 0")


class BoundKind(enum.Enum):
    UPPER = "upper"
    LOWER = "lower"
    TAIL_UPPER = "tail_upper"


@dataclass(frozen=True)
class BoundValue:
    """A probability bound and the smallest x for which the statement holds."""

    value: float
    kind: BoundKind
    valid_from: float = -INF
    note: str = ""

    def __post_init__(self):
        if not 0.0 <= self.value <= 1.0:
            raise DomainError(f"bound value {self.value!r} outside [0, 1]")

    def __float__(self):
        return float(self.value)


def clamp01(v: float) -> float:
    if math.isnan(v):
        raise AccuracyError("bound evaluated to nan")
    return min(1.0, max(0.0, v))


# ---------------------------------------------------------------------------
# integrals over the density

def _guard(fn, what: str):
    try:
        return fn()
    except (DivergenceError, OverflowError) as exc:
        raise MembershipError(f"{what} diverges: {exc}") from exc
    except AccuracyError as exc:
        if not math.isfinite(exc.estimate):
            raise MembershipError(f"{what} diverges: {exc}") from exc
        raise


def _safe(fn):
    def wrapped(t):
        try:
            v = fn(t)
        except OverflowError:
            return INF
        return v
    return wrapped


def lognormal_params(model: GaussianModel, f: ProbingDensity,
                     tol: Tolerance = DEFAULT_TOL) -> LogNormalParams:
    """Location m and scale s of the Jensen log-normal comparison variable.

    m = ∫(E X_t - log f(t)) f(t) dt and s² = ∬ Cov(X_s, X_t) f(s) f(t) ds dt.
    The double integral is folded onto the triangle s < t.
    """
    T = model.horizon
    if f.horizon != T:
        raise DomainError("density support and model horizon differ")
    pts = f.breakpoints()

    def m_integrand(t):
        lf = f.logpdf(t)
        return (model.mean(t) - lf) * math.exp(lf)

    m = _guard(lambda: integrate(_safe(m_integrand), 0.0, T, tol, pts), "location integral")

    inner_tol = Tolerance(tol.abs_tol * 1e-2, tol.rel_tol * 1e-2, tol.max_iter)

    def inner(t):
        if t == 0.0:
            return 0.0
        return integrate(lambda u: model.cov(u, t) * f.pdf(u), 0.0, t, inner_tol)

    def outer(t):
        return f.pdf(t) * inner(t)

    s2 = _guard(lambda: 2.0 * integrate(_safe(outer), 0.0, T, tol, pts), "scale integral")
    if s2 < 0:
        if s2 < -1e-10:
            raise AccuracyError("negative variance from quadrature", s2)
        s2 = 0.0
    return LogNormalParams(m, math.sqrt(s2))


def _upper_from_params(params: LogNormalParams, x: float) -> BoundValue:
    if not x > 0:
        raise DomainError("x must be positive")
    if params.s == 0.0:
        return BoundValue(0.0 if math.log(x) < params.m else 1.0, BoundKind.UPPER,
                          note="degenerate")
    return BoundValue(clamp01(phi_cdf((math.log(x) - params.m) / params.s)),
                      BoundKind.UPPER)


def upper_cdf_bound(model: GaussianModel, f: ProbingDensity, x: float,
                    tol: Tolerance = DEFAULT_TOL) -> BoundValue:
    """P[I <= x] <= Φ((log x - m)/s)."""
    return _upper_from_params(lognormal_params(model, f, tol), x)


@dataclass(frozen=True)
class DensityFamily:
    """One-parameter family of probing densities indexed by λ in [lo, hi].

    ``params`` may supply the log-normal parameters directly (closed or
    semi-closed forms); otherwise they are computed generically.
    """

    make: Callable[[float], ProbingDensity]
    lo: float
    hi: float
    log_scale: bool = False
    anchors: tuple[float, ...] = ()
    params: Callable[[float], LogNormalParams] | None = None


def best_upper_over_family(model: GaussianModel,
                           family: DensityFamily | Sequence[ProbingDensity],
                           x: float, tol: Tolerance = DEFAULT_TOL,
                           grid_points: int = 64) -> BoundValue:
    """Smallest log-normal upper bound over a family of densities."""
    if not x > 0:
        raise DomainError("x must be positive")
    logx = math.log(x)
    if not isinstance(family, DensityFamily):
        members = list(family)
        if not members:
            raise DomainError("empty density family")
        return min((upper_cdf_bound(model, f, x, tol) for f in members),
                   key=lambda b: b.value)

    def params_of(lam):
        if family.params is not None:
            return family.params(lam)
        return lognormal_params(model, family.make(lam), tol)

    def objective(lam):
        p = params_of(lam)
        if p.s == 0.0:
            return -INF if logx < p.m else INF
        return (logx - p.m) / p.s

    anchors = tuple(a for a in family.anchors if family.lo <= a <= family.hi)
    res = minimize_1d(objective, Bracket(family.lo, family.hi), tol,
                      grid_points=grid_points, log_scale=family.log_scale,
                      anchors=anchors)
    return BoundValue(clamp01(phi_cdf(res.value)), BoundKind.UPPER,
                      note=f"lambda={res.argmin!r}")


def _grid_extremum(fn: Callable[[float], float], T: float, maximize: bool,
                   tol: Tolerance, n: int = 1024) -> float:
    sign = -1.0 if maximize else 1.0
    res = minimize_1d(lambda t: sign * fn(t), Bracket(0.0, T), tol,
                      grid_points=n, log_scale=False)
    return sign * res.value


def lower_cdf_bound_borell(model: GaussianModel, drift: Callable[[float], float],
                           sup_mean_bound: float, x: float,
                           tol: Tolerance = DEFAULT_TOL,
                           drift_inf: float | None = None) -> BoundValue:
    """Borell-TIS lower bound on P[I <= x] for a finite horizon.

    ``drift`` is a bounded continuous function f; its infimum is found by
    grid search unless ``drift_inf`` is given.  ``sup_mean_bound`` must
    dominate E[sup_t (X_t - E X_t)].
    """
    T = model.horizon
    if not math.isfinite(T):
        raise DomainError("Borell-TIS lower bound needs a finite horizon")
    if not x > 0:
        raise DomainError("x must be positive")
    f_inf = drift_inf if drift_inf is not None else _grid_extremum(drift, T, False, tol)
    if not math.isfinite(f_inf):
        raise MembershipError("drift is unbounded")
    area = _guard(lambda: integrate(_safe(lambda t: math.exp(model.mean(t) + drift(t))),
                                    0.0, T, tol), "drifted integral")
    var_sup = _grid_extremum(model.variance, T, True, tol)
    threshold = math.exp(sup_mean_bound - f_inf) * area
    if x <= threshold or var_sup <= 0:
        return BoundValue(0.0, BoundKind.LOWER, valid_from=threshold)
    z = math.log(x / area) + f_inf - sup_mean_bound
    value = -math.expm1(-z * z / (2.0 * var_sup))
    return BoundValue(clamp01(value), BoundKind.LOWER, valid_from=threshold)


def moment_bounds(model: GaussianModel, f: ProbingDensity, p: float,
                  tol: Tolerance = DEFAULT_TOL) -> tuple[float, float]:
    """Bounds on E[I^p]; divergent integrals give ``inf``."""
    if not p > 0:
        raise DomainError("moment order must be positive")
    T = model.horizon

    def weighted(t):
        return math.exp(p * model.mean(t) + 0.5 * p * p * model.variance(t)
                        + (1.0 - p) * f.logpdf(t))

    def finite_or_inf(fn):
        try:
            return fn()
        except (DivergenceError, MembershipError, OverflowError):
            return INF
        except AccuracyError as exc:
            if not math.isfinite(exc.estimate):
                return INF
            raise

    f_integral = finite_or_inf(lambda: integrate(_safe(weighted), 0.0, T, tol,
                                                 f.breakpoints()))
    if p >= 1.0:
        params = lognormal_params(model, f, tol)
        lower = math.exp(p * params.m + 0.5 * p * p * params.s ** 2)
        return lower, f_integral
    mean_integral = finite_or_inf(lambda: integrate(
        _safe(lambda t: math.exp(model.mean(t) + 0.5 * model.variance(t))), 0.0, T, tol))
    upper = mean_integral ** p if math.isfinite(mean_integral) else INF
    return f_integral, upper


# ---------------------------------------------------------------------------
# Laplace transform bounds

def lognormal_mgf_upper(m: float, s: float, lam: float,
                        tol: Tolerance = DEFAULT_TOL) -> float:
    """inf over ε of ε + (1-ε)Φ((log log(1/ε) - log λ - m)/s).

    Minimized in u = log log(1/ε), for ε in (1e-12, 1 - 1e-12).
    """
    if not lam > 0:
        raise DomainError("λ must be positive")
    if not s > 0:
        raise DegenerateError("Laplace-transform bound needs s > 0")
    shift = math.log(lam) + m

    def g(u):
        e = math.exp(u)
        eps = math.exp(-e)
        return eps + (-math.expm1(-e)) * phi_cdf((u - shift) / s)

    u_lo = math.log(-math.log1p(-1e-12))
    u_hi = math.log(-math.log(1e-12))
    res = minimize_1d(g, Bracket(u_lo, u_hi), tol, grid_points=64, log_scale=False)
    return min(1.0, max(0.0, res.value))


def mgf_upper(model: GaussianModel, f: ProbingDensity, lam: float,
              tol: Tolerance = DEFAULT_TOL) -> float:
    """Upper bound on E[exp(-λ I)] via the log-normal comparison."""
    params = lognormal_params(model, f, tol)
    return lognormal_mgf_upper(params.m, params.s, lam, tol)


def borell_mgf_lower(area: float, f_inf: float, sup_mean: float, var_sup: float,
                     lam: float, tol: Tolerance = DEFAULT_TOL) -> float:
    """Integral of the Borell-TIS CDF bound against the Laplace kernel.

    Written in y = log(1/x): ∫_{y0}^∞ e^{-y}(1 - exp(-(log(y/(λA)) + f_inf - μ)²/(2σ²))) dy
    with y0 = λ e^{μ - f_inf} A.
    """
    if not lam > 0:
        raise DomainError("λ must be positive")
    scale = lam * area
    y0 = scale * math.exp(sup_mean - f_inf)
    if y0 > 745.0:
        return 0.0

    def integrand(y):
        z = math.log(y / scale) + f_inf - sup_mean
        return math.exp(-y) * -math.expm1(-z * z / (2.0 * var_sup))

    val = integrate(integrand, y0, INF, tol, points=(y0 + 1.0,))
    return min(1.0, max(0.0, val))


def mgf_lower(model: GaussianModel, drift: Callable[[float], float],
              sup_mean_bound: float, lam: float,
              tol: Tolerance = DEFAULT_TOL,
              drift_inf: float | None = None) -> float:
    """Lower bound on E[exp(-λ I)] from the Borell-TIS CDF bound."""
    T = model.horizon
    if not math.isfinite(T):
        raise DomainError("Laplace lower bound needs a finite horizon")
    f_inf = drift_inf if drift_inf is not None else _grid_extremum(drift, T, False, tol)
    area = _guard(lambda: integrate(_safe(lambda t: math.exp(model.mean(t) + drift(t))),
                                    0.0, T, tol), "drifted integral")
    var_sup = _grid_extremum(model.variance, T, True, tol)
    return borell_mgf_lower(area, f_inf, sup_mean_bound, var_sup, lam, tol)
