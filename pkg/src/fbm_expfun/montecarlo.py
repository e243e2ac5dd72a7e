"""Monte Carlo simulation of fBM paths and of the exponential functional.

Random streams
--------------
Every path draws from its own Philox-4x64 counter-based stream.  The key is
``(seed, component)`` and the path index occupies the top 64-bit word of the
counter, so a path's normals depend only on ``(seed, component, path)``.
Splitting work across threads therefore cannot change any value.

``FBM_EXPFUN_THREADS`` caps the number of worker threads (default 1).
"""

from __future__ import annotations

import csv
import enum
import io
import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import AccuracyError, DomainError
from .fbm_finite import FbmParams

MASK64 = (1 << 64) - 1
CHOLESKY_MAX_STEPS = 4096
CSV_HEADER = ("x", "lower", "upper", "ecdf", "ecdf_lo", "ecdf_hi", "flag")


class Method(enum.Enum):
    CHOLESKY = "cholesky"
    CIRCULANT = "circulant"


@dataclass(frozen=True)
class PathGrid:
    n_steps: int
    horizon: float = 1.0

    def __post_init__(self):
        if int(self.n_steps) != self.n_steps or self.n_steps < 2:
            raise DomainError("n_steps must be an integer >= 2")
        if not (self.horizon > 0 and math.isfinite(self.horizon)):
            raise DomainError("simulation needs a finite positive horizon")

    @property
    def dt(self) -> float:
        return self.horizon / self.n_steps

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.n_steps + 1) * self.dt


@dataclass(frozen=True)
class SampleSet:
    values: np.ndarray
    seed: int
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        if vals.ndim != 1 or not np.all(np.isfinite(vals)) or np.any(vals < 0):
            raise DomainError("samples must be finite and nonnegative")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def __len__(self):
        return len(self.values)


def thread_count() -> int:
    raw = os.environ.get("FBM_EXPFUN_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def path_stream(seed: int, component: int, path: int) -> np.random.Generator:
    """Generator for one (seed, component, path) triple."""
    bitgen = np.random.Philox(key=[seed & MASK64, component & MASK64],
                              counter=[0, 0, 0, path & MASK64])
    return np.random.Generator(bitgen)


def _normals(seed: int, component: int, paths: range, size: int) -> np.ndarray:
    out = np.empty((len(paths), size))
    for row, k in enumerate(paths):
        out[row] = path_stream(seed, component, k).standard_normal(size)
    return out


def fgn_autocovariance(hurst: float, n: int) -> np.ndarray:
    """γ(k) = ½(|k+1|^{2H} - 2|k|^{2H} + |k-1|^{2H}) for k = 0..n-1."""
    k = np.arange(n, dtype=float)
    two_h = 2.0 * hurst
    return 0.5 * (np.abs(k + 1) ** two_h - 2.0 * k ** two_h + np.abs(k - 1) ** two_h)


def circulant_eigenvalues(hurst: float, n: int) -> np.ndarray:
    """Spectrum of the minimal power-of-two circulant embedding of γ(0..n-1)."""
    m = 1
    while m < 2 * (n - 1):
        m *= 2
    m = max(m, 2)
    half = m // 2
    gam = fgn_autocovariance(hurst, half + 1)
    row = np.concatenate([gam, gam[half - 1:0:-1]])
    eig = np.fft.fft(row).real
    return eig


def fbm_covariance(hurst: float, times: np.ndarray) -> np.ndarray:
    two_h = 2.0 * hurst
    s = times[:, None]
    t = times[None, :]
    return 0.5 * (s ** two_h + t ** two_h - np.abs(s - t) ** two_h)


def _cholesky_factor(hurst: float, grid: PathGrid) -> np.ndarray:
    cov = fbm_covariance(hurst, grid.times[1:])
    scale = np.max(np.diag(cov))
    for jitter in (0.0, 1e-14, 1e-12, 1e-10):
        try:
            return np.linalg.cholesky(cov + jitter * scale * np.eye(len(cov)))
        except np.linalg.LinAlgError:
            continue
    raise AccuracyError("fBM covariance is numerically not positive definite")


def _chunks(n_paths: int, workers: int) -> list[range]:
    size = max(1, math.ceil(n_paths / workers))
    return [range(a, min(a + size, n_paths)) for a in range(0, n_paths, size)]


def _run_chunked(fn: Callable[[range], np.ndarray], n_paths: int) -> np.ndarray:
    workers = thread_count()
    chunks = _chunks(n_paths, workers)
    if workers == 1 or len(chunks) == 1:
        return np.vstack([fn(c) for c in chunks])
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return np.vstack(list(pool.map(fn, chunks)))


def sample_fbm_paths(hurst: float, grid: PathGrid, n_paths: int, seed: int = 0,
                     method: Method | str = Method.CIRCULANT,
                     component: int = 0) -> np.ndarray:
    """Exact fBM samples on ``grid.times``; shape (n_paths, n_steps + 1), column 0 is B_0 = 0.

    Circulant embedding falls back to Cholesky (with a warning) when the
    embedding spectrum has a clearly negative value.
    """
    method = Method(method)
    if not 0.0 < hurst <= 1.0:
        raise DomainError("hurst must lie in (0, 1]")
    if int(n_paths) != n_paths or n_paths < 1:
        raise DomainError("n_paths must be a positive integer")
    n = grid.n_steps
    times = grid.times
    if hurst == 1.0:
        z = _run_chunked(lambda c: _normals(seed, component, c, 1), n_paths)
        return z * times[None, :]
    if method is Method.CIRCULANT:
        eig = circulant_eigenvalues(hurst, n)
        if eig.min() < -1e-9 * eig.max():
            warnings.warn("circulant embedding not nonnegative; using Cholesky",
                          RuntimeWarning, stacklevel=2)
            method = Method.CHOLESKY
    if method is Method.CHOLESKY:
        if n > CHOLESKY_MAX_STEPS:
            raise DomainError(f"Cholesky sampling limited to {CHOLESKY_MAX_STEPS} steps")
        factor = _cholesky_factor(hurst, grid)

        def draw(chunk):
            z = _normals(seed, component, chunk, n)
            return z @ factor.T

        body = _run_chunked(draw, n_paths)
        return np.hstack([np.zeros((n_paths, 1)), body])

    m = len(eig)
    amp = np.sqrt(np.clip(eig, 0.0, None) / m)
    scale = grid.dt ** hurst

    def draw(chunk):
        z = _normals(seed, component, chunk, 2 * m)
        coeff = amp[None, :] * (z[:, :m] + 1j * z[:, m:])
        incr = np.fft.fft(coeff, axis=1).real[:, :n]
        return np.cumsum(incr, axis=1) * scale

    body = _run_chunked(draw, n_paths)
    return np.hstack([np.zeros((n_paths, 1)), body])


def _trapezoid(vals: np.ndarray, dx: float) -> np.ndarray:
    return dx * (vals[:, 1:-1].sum(axis=1) + 0.5 * (vals[:, 0] + vals[:, -1]))


def functional_values(paths: np.ndarray, mu: float, sigma: float,
                      grid: PathGrid) -> np.ndarray:
    """Trapezoid rule for ∫_0^T exp(μt + σ path_t) dt, one value per row."""
    expo = np.exp(mu * grid.times[None, :] + sigma * paths)
    return _trapezoid(expo, grid.dt)


def estimate_functional(paths: np.ndarray, p: FbmParams, grid: PathGrid,
                        seed: int = 0, method: str = "") -> SampleSet:
    """Sample of I_T from simulated paths.

    ``meta['halving_shift']`` is the change in the sample mean when every
    second grid point is dropped, an empirical discretization-bias gauge.
    """
    if not p.finite:
        raise DomainError("simulation needs a finite horizon")
    if abs(p.horizon - grid.horizon) > 1e-12 * grid.horizon:
        raise DomainError("parameter and grid horizons differ")
    if paths.shape[1] != grid.n_steps + 1:
        raise DomainError("paths do not match the grid")
    values = functional_values(paths, p.mu, p.sigma, grid)
    meta = {"mu": p.mu, "sigma": p.sigma, "hurst": p.hurst, "horizon": p.horizon,
            "n_steps": grid.n_steps, "n_paths": int(paths.shape[0]), "method": method}
    if grid.n_steps % 2 == 0:
        expo = np.exp(p.mu * grid.times[None, ::2] + p.sigma * paths[:, ::2])
        coarse = _trapezoid(expo, 2.0 * grid.dt)
        meta["halving_shift"] = float(np.mean(values) - np.mean(coarse))
    return SampleSet(values, seed, meta)


def simulate_functional(p: FbmParams, n_paths: int, n_steps: int = 1024, seed: int = 0,
                        method: Method | str = Method.CIRCULANT) -> SampleSet:
    grid = PathGrid(n_steps, p.horizon)
    paths = sample_fbm_paths(p.hurst, grid, n_paths, seed, method)
    return estimate_functional(paths, p, grid, seed, Method(method).value)


def ecdf(samples: SampleSet | np.ndarray, x):
    """Fraction of samples <= x (array-aware in x)."""
    vals = np.sort(samples.values if isinstance(samples, SampleSet) else np.asarray(samples))
    out = np.searchsorted(vals, np.asarray(x, dtype=float), side="right") / len(vals)
    return float(out) if np.ndim(out) == 0 else out


def dkw_band(n: int, delta: float) -> float:
    """Half-width ε of the Dvoretzky-Kiefer-Wolfowitz band at level 1 - δ."""
    if n < 1 or not 0.0 < delta < 1.0:
        raise DomainError("dkw_band needs n >= 1 and 0 < δ < 1")
    return math.sqrt(math.log(2.0 / delta) / (2.0 * n))


def _mean_se(vals: np.ndarray) -> tuple[float, float]:
    n = len(vals)
    mean = float(np.mean(vals))
    se = float(np.std(vals, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return mean, se


def estimate_mgf(samples: SampleSet, lam: float) -> tuple[float, float]:
    if lam < 0:
        raise DomainError("λ must be nonnegative")
    return _mean_se(np.exp(-lam * samples.values))


def estimate_moment(samples: SampleSet, pth: float) -> tuple[float, float]:
    return _mean_se(samples.values ** pth)


def sample_series_paths(s, grid: PathGrid, n_paths: int, seed: int = 0,
                        method: Method | str = Method.CIRCULANT) -> np.ndarray:
    """Paths of Σσ_n B_n^{H_n}; component streams are indexed among nonzero weights."""
    total = np.zeros((n_paths, grid.n_steps + 1))
    for idx, (w, h) in enumerate(s.active):
        total += w * sample_fbm_paths(h, grid, n_paths, seed, method, component=idx)
    return total


# ---------------------------------------------------------------------------
# sandwich reports

@dataclass(frozen=True)
class SandwichRow:
    x: float
    lower: float
    upper: float
    ecdf: float
    ecdf_lo: float
    ecdf_hi: float
    flag: bool


def sandwich_report(samples: SampleSet, x_grid: Sequence[float],
                    upper: Callable[[float], float],
                    lower: Callable[[float], float] | None = None,
                    delta: float = 0.01) -> list[SandwichRow]:
    """Compare bound curves with the e.c.d.f. and its DKW band.

    A row is flagged when the band lies entirely above the upper bound or
    entirely below the lower bound.  ``lower`` returns ``nan`` where it
    makes no claim.
    """
    eps = dkw_band(len(samples), delta)
    xs = np.asarray(x_grid, dtype=float)
    emp = ecdf(samples, xs)
    rows = []
    for x, e in zip(xs, np.atleast_1d(emp)):
        up = float(upper(float(x)))
        lo = float(lower(float(x))) if lower is not None else math.nan
        flag = (e - eps > up) or (not math.isnan(lo) and e + eps < lo)
        rows.append(SandwichRow(float(x), lo, up, float(e), max(0.0, e - eps),
                                min(1.0, e + eps), bool(flag)))
    return rows


def fmt(v: float) -> str:
    return "%.17g" % v


def rows_to_csv(rows: Sequence[SandwichRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for r in rows:
        writer.writerow([fmt(r.x), fmt(r.lower), fmt(r.upper), fmt(r.ecdf),
                         fmt(r.ecdf_lo), fmt(r.ecdf_hi), int(r.flag)])
    return buf.getvalue()


def default_x_grid(samples: SampleSet, n: int = 200) -> np.ndarray:
    lo, hi = float(np.min(samples.values)), float(np.max(samples.values))
    return np.geomspace(lo * 0.8, hi * 1.25, n)


def figure_bounds(p: FbmParams, tol=None):
    """(upper, lower) curves used for the finite-horizon figures.

    Upper: λ = 0 log-normal bound.  Lower: Slepian bound (λ = 0) for
    H >= 1/2, complement of the comparison tail bound for H < 1/2.
    """
    from . import fbm_finite
    from .numerics import DEFAULT_TOL
    tol = tol or DEFAULT_TOL
    upper = lambda x: fbm_finite.upper_cdf(p, x, 0.0).value
    if p.hurst >= 0.5:
        def lower(x):
            b = fbm_finite.lower_cdf_large_h(p, x, 0.0, tol)
            return b.value if x > b.valid_from else math.nan
    else:
        b_star = fbm_finite.dung_threshold(p, tol)

        def lower(x):
            if x <= b_star:
                return math.nan
            return fbm_finite.dung_lower_cdf(p, x, tol).value
    return upper, lower
