"""Special functions, quadrature, scalar minimization and root finding.

The normal CDF, erfc, Gamma and the regularized incomplete Gamma are thin
wrappers over :mod:`scipy.special`; quadrature, bounded minimization and
bracketed roots delegate the inner loop to QUADPACK / Brent routines from
:mod:`scipy`, with the guard grids, tolerances and error semantics defined
here.  Both Lambert W branches are implemented directly (Halley iteration
seeded per branch, branch-point series).
"""

from __future__ import annotations

import functools
import math
import warnings
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy import integrate as _sp_integrate
from scipy import optimize as _sp_optimize
from scipy import special as _sp

from .errors import AccuracyError, BracketError, DivergenceError, DomainError

__all__ = [
    "Tolerance", "Bracket", "DEFAULT_TOL", "MinResult",
    "phi_cdf", "log_phi_cdf", "erfc", "gamma_fn", "reg_upper_gamma",
    "gamma_minimum", "lambert_w0", "lambert_wm1",
    "integrate", "minimize_1d", "find_root",
]


@dataclass(frozen=True)
class Tolerance:
    abs_tol: float = 1e-10
    rel_tol: float = 1e-10
    max_iter: int = 200

    def __post_init__(self):
        if self.abs_tol < 0 or self.rel_tol < 0:
            raise DomainError("tolerances must be nonnegative")
        if self.abs_tol + self.rel_tol <= 0:
            raise DomainError("abs_tol + rel_tol must be positive")
        if int(self.max_iter) != self.max_iter or self.max_iter < 1:
            raise DomainError("max_iter must be a positive integer")

    def target(self, value: float) -> float:
        return max(self.abs_tol, self.rel_tol * abs(value))


@dataclass(frozen=True)
class Bracket:
    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise DomainError(f"bracket needs lo < hi, got [{self.lo}, {self.hi}]")


DEFAULT_TOL = Tolerance()


def _as_output(values: np.ndarray, scalar: bool):
    return float(values[()]) if scalar else values


# ---------------------------------------------------------------------------
# special functions

def phi_cdf(z):
    """Standard normal CDF (array-aware)."""
    out = _sp.ndtr(np.asarray(z, dtype=float))
    return float(out) if np.ndim(out) == 0 else out


def log_phi_cdf(z):
    """log of the standard normal CDF, accurate in the far left tail."""
    out = _sp.log_ndtr(np.asarray(z, dtype=float))
    return float(out) if np.ndim(out) == 0 else out


def erfc(z):
    out = _sp.erfc(np.asarray(z, dtype=float))
    return float(out) if np.ndim(out) == 0 else out


def gamma_fn(z: float) -> float:
    """Euler Gamma on the positive half-line."""
    if not z > 0:
        raise DomainError(f"gamma_fn needs z > 0, got {z}")
    return float(_sp.gamma(z))


def reg_upper_gamma(a, x):
    """Regularized upper incomplete Gamma Q(a, x) = Γ(a, x)/Γ(a)."""
    a_arr = np.asarray(a, dtype=float)
    x_arr = np.asarray(x, dtype=float)
    if np.any(a_arr <= 0) or np.any(x_arr < 0):
        raise DomainError("reg_upper_gamma needs a > 0 and x >= 0")
    out = _sp.gammaincc(a_arr, x_arr)
    return float(out) if np.ndim(out) == 0 else out


@functools.lru_cache(maxsize=1)
def gamma_minimum() -> tuple[float, float]:
    """Location z0 and value of the minimum of Γ on (0, ∞).

    Solved from digamma(z0) = 0 rather than hard-coded.
    """
    z0 = find_root(lambda z: float(_sp.digamma(z)), Bracket(1.0, 2.0),
                   Tolerance(abs_tol=1e-15, rel_tol=1e-15))
    return z0, gamma_fn(z0)


# ---------------------------------------------------------------------------
# Lambert W

# 1/e as an unevaluated sum hi + lo, so that x + 1/e is exact near -1/e
_INV_E_HI = 0.36787944117144233
_INV_E_LO = -1.2428753672788363e-17
# series of W around the branch point in p = sqrt(2(e x + 1)); W0 uses +p, W-1 uses -p
_BRANCH_COEFFS = (-1.0, 1.0, -1.0 / 3.0, 11.0 / 72.0, -43.0 / 540.0,
                  769.0 / 17280.0, -221.0 / 8505.0, 680863.0 / 43545600.0)
_SERIES_ONLY = 1e-12
_ROUNDING_SLACK = 1e-15


def _branch_distance(x: np.ndarray) -> np.ndarray:
    """e·(x + 1/e), computed without cancellation; clamps rounding noise."""
    q = math.e * ((x + _INV_E_HI) + _INV_E_LO)
    if np.any(q < -_ROUNDING_SLACK):
        raise DomainError("Lambert W argument below -1/e")
    return np.maximum(q, 0.0)


def _branch_series(q: np.ndarray, sign: float) -> np.ndarray:
    p = sign * np.sqrt(2.0 * q)
    acc = np.zeros_like(p)
    for c in reversed(_BRANCH_COEFFS):
        acc = acc * p + c
    return acc


def _halley(w: np.ndarray, x: np.ndarray, active: np.ndarray) -> np.ndarray:
    """Halley iterations on w e^w = x, or on w + log|w| = log|x| away from -1."""
    use_log = active & (np.abs(w) > 2.0)
    logx = np.where(use_log, np.log(np.abs(np.where(use_log, x, 1.0))), 0.0)
    todo = active.copy()
    for _ in range(50):
        if not todo.any():
            break
        wt = w[todo]
        xt = x[todo]
        lg = use_log[todo]
        step = np.empty_like(wt)
        # direct form
        d = ~lg
        if d.any():
            wd = wt[d]
            ew = np.exp(wd)
            f = wd * ew - xt[d]
            wp1 = wd + 1.0
            denom = ew * wp1 - (wp1 + 1.0) * f / (2.0 * wp1)
            step[d] = np.where(f == 0.0, 0.0, f / denom)
        # logarithmic form, well scaled for large |w|
        if lg.any():
            wl = wt[lg]
            h = wl + np.log(np.abs(wl)) - logx[todo][lg]
            h1 = 1.0 + 1.0 / wl
            h2 = -1.0 / (wl * wl)
            step[lg] = (h / h1) / (1.0 - h * h2 / (2.0 * h1 * h1))
        wt = wt - step
        w[todo] = wt
        still = np.abs(step) > 4.0 * np.finfo(float).eps * (1.0 + np.abs(wt))
        idx = np.flatnonzero(todo)
        todo[idx[~still]] = False
    return w


def lambert_w0(x):
    """Principal branch W0 on [-1/e, ∞)."""
    arr = np.asarray(x, dtype=float)
    scalar = arr.ndim == 0
    xs = np.atleast_1d(arr).astype(float).copy()
    if not np.all(np.isfinite(xs)):
        raise DomainError("lambert_w0 needs finite input")
    q = _branch_distance(xs)
    w = np.empty_like(xs)
    near = q < 0.5
    w[near] = _branch_series(q[near], 1.0)
    mid = (~near) & (xs < 3.0)
    w[mid] = np.log1p(xs[mid])
    mid2 = mid & (xs > 0.5)
    w[mid2] *= 1.0 - np.log1p(np.log1p(xs[mid2])) / (2.0 + np.log1p(xs[mid2]))
    big = xs >= 3.0
    l1 = np.log(xs[big])
    l2 = np.log(l1)
    w[big] = l1 - l2 + l2 / l1
    w = _halley(w, xs, q >= _SERIES_ONLY)
    w = np.maximum(w, -1.0)
    return _as_output(w.reshape(arr.shape), scalar)


def lambert_wm1(x):
    """Lower branch W-1 on [-1/e, 0)."""
    arr = np.asarray(x, dtype=float)
    scalar = arr.ndim == 0
    xs = np.atleast_1d(arr).astype(float).copy()
    if not np.all(np.isfinite(xs)) or np.any(xs >= 0.0):
        raise DomainError("lambert_wm1 needs -1/e <= x < 0")
    q = _branch_distance(xs)
    w = np.empty_like(xs)
    near = q < 0.5
    w[near] = _branch_series(q[near], -1.0)
    far = ~near
    l1 = np.log(-xs[far])
    l2 = np.log(-l1)
    w[far] = l1 - l2 + l2 / l1
    w = _halley(w, xs, q >= _SERIES_ONLY)
    w = np.minimum(w, -1.0)
    return _as_output(w.reshape(arr.shape), scalar)


# ---------------------------------------------------------------------------
# quadrature

def _quad(f, lo, hi, tol: Tolerance, points=None):
    kwargs = dict(epsabs=tol.abs_tol, epsrel=max(tol.rel_tol, 5e-15),
                  limit=tol.max_iter, full_output=1)
    if points is not None and math.isfinite(hi):
        inner = sorted(p for p in points if lo < p < hi)
        if inner:
            kwargs["points"] = inner
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", _sp_integrate.IntegrationWarning)
        with np.errstate(all="ignore"):
            res = _sp_integrate.quad(f, lo, hi, **kwargs)
    value, err = float(res[0]), float(res[1])
    flagged = len(res) > 3
    return value, err, flagged


def _tail_grows(f, lo: float, tol: Tolerance) -> bool:
    """Heuristic divergence test: do increments over doubling intervals fail to shrink?"""
    start = max(1.0, abs(lo)) + lo
    prev = None
    growing = 0
    for k in range(12):
        a = start * 2.0 ** k
        v, _, _ = _quad(f, a, 2.0 * a, tol)
        if not math.isfinite(v):
            return True
        mag = abs(v)
        if prev is not None and mag >= prev and mag > tol.abs_tol:
            growing += 1
            if growing >= 3:
                return True
        else:
            growing = 0
        prev = mag
    return False


def integrate(f: Callable[[float], float], lo: float, hi: float,
              tol: Tolerance = DEFAULT_TOL,
              points: Sequence[float] | None = None) -> float:
    """Adaptive Gauss-Kronrod integral of ``f`` over [lo, hi].

    ``hi`` may be ``inf``; QUADPACK then maps the half-line onto (0, 1].
    ``points`` lists interior breakpoints (kinks, peaks) on finite ranges.

    Raises
    ------
    DivergenceError
        Non-finite result or partial integrals that keep growing.
    AccuracyError
        Error estimate far above the requested tolerance after
        ``tol.max_iter`` subdivisions; ``estimate`` holds the best value.
    """
    if hi == lo:
        return 0.0
    if hi < lo:
        return -integrate(f, hi, lo, tol, points)
    if math.isinf(lo):
        raise DomainError("integrate needs a finite lower limit")
    if math.isinf(hi) and points:
        split = max(p for p in points if p > lo) if any(p > lo for p in points) else None
        if split is not None:
            head = integrate(f, lo, split, tol, points)
            return head + integrate(f, split, hi, tol)
    value, err, flagged = _quad(f, lo, hi, tol, points)
    if not math.isfinite(value):
        raise DivergenceError("integral is not finite", value, err)
    if flagged and err > 1e3 * tol.target(value):
        if math.isinf(hi) and _tail_grows(f, lo, tol):
            raise DivergenceError("integral appears divergent", value, err)
        raise AccuracyError(
            f"quadrature error estimate {err:.3g} exceeds tolerance", value, err)
    return value


# ---------------------------------------------------------------------------
# minimization and roots

@dataclass(frozen=True)
class MinResult:
    argmin: float
    value: float
    at_boundary: bool = False

    def __iter__(self):
        # allows ``x, v = minimize_1d(...)``
        yield self.argmin
        yield self.value


def _safe_eval(f, x: float) -> float:
    try:
        with np.errstate(all="ignore"):
            v = float(f(x))
    except (OverflowError, ZeroDivisionError):
        return math.inf
    return math.inf if math.isnan(v) else v


def minimize_1d(f: Callable[[float], float], bracket: Bracket,
                tol: Tolerance = DEFAULT_TOL, grid_points: int = 64,
                log_scale: bool | None = None,
                anchors: Iterable[float] = ()) -> MinResult:
    """Global-ish minimum of a scalar function on a bracket.

    A guard grid (log-spaced when the bracket is positive and spans more
    than two decades, unless ``log_scale`` says otherwise) locates the best
    cell, then bounded Brent refinement is run on the two neighbouring cells.
    ``anchors`` are extra abscissae always evaluated (e.g. λ = 0).
    """
    lo, hi = bracket.lo, bracket.hi
    if log_scale is None:
        log_scale = lo > 0 and hi / lo > 100.0
    if log_scale and lo <= 0:
        raise DomainError("log-scale minimization needs a positive bracket")
    to_x = math.exp if log_scale else (lambda u: u)
    u_lo, u_hi = (math.log(lo), math.log(hi)) if log_scale else (lo, hi)
    grid = np.linspace(u_lo, u_hi, max(int(grid_points), 3))
    vals = np.array([_safe_eval(f, to_x(u)) for u in grid])
    i = int(np.argmin(vals))
    best_x, best_v = to_x(grid[i]), float(vals[i])
    a = grid[max(i - 1, 0)]
    b = grid[min(i + 1, len(grid) - 1)]
    if math.isfinite(best_v) and b > a:
        g = lambda u: _safe_eval(f, to_x(u))
        res = _sp_optimize.minimize_scalar(
            g, bounds=(a, b), method="bounded",
            options=dict(xatol=max(tol.abs_tol, 1e-14 * max(1.0, abs(a), abs(b))),
                         maxiter=tol.max_iter))
        if res.fun <= best_v:
            best_x, best_v = to_x(float(res.x)), float(res.fun)
    for xa in anchors:
        if lo <= xa <= hi:
            va = _safe_eval(f, xa)
            if va < best_v:
                best_x, best_v = float(xa), va
    width = (hi - lo) * 1e-9
    at_boundary = abs(best_x - lo) <= width or abs(best_x - hi) <= width
    return MinResult(best_x, best_v, at_boundary)


def find_root(f: Callable[[float], float], bracket: Bracket,
              tol: Tolerance = DEFAULT_TOL) -> float:
    """Root of ``f`` inside a sign-changing bracket (Brent's method)."""
    flo, fhi = float(f(bracket.lo)), float(f(bracket.hi))
    if flo == 0.0:
        return bracket.lo
    if fhi == 0.0:
        return bracket.hi
    if flo * fhi > 0 or not (math.isfinite(flo) and math.isfinite(fhi)):
        raise BracketError(
            f"no sign change on [{bracket.lo}, {bracket.hi}]: f = {flo:.3g}, {fhi:.3g}")
    root, info = _sp_optimize.brentq(
        f, bracket.lo, bracket.hi, xtol=max(tol.abs_tol, 1e-300),
        rtol=max(tol.rel_tol, 4.0 * np.finfo(float).eps),
        maxiter=tol.max_iter, full_output=True, disp=False)
    if not info.converged:
        raise AccuracyError("root finding did not converge", root)
    return float(root)
