"""Command-line interface: every computation as CSV on stdout.

Output starts with ``#``-prefixed lines echoing the command and all flags,
followed by a CSV table.  Exit codes: 0 success, 2 domain error,
3 numerical-accuracy error, 64 usage error.

Examples::

    fbm-expfun bound finite-upper --mu 1 --sigma 1 --hurst 0.75 --t 1 --x 1
    fbm-expfun exact kolmogorov-gap --mu -10 --sigma 1
    fbm-expfun compare --figure finite_2 --mu 0 --sigma 1 --paths 1000
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from typing import Callable, Sequence

import numpy as np

from . import exact_laws, fbm_finite, fbm_infinite, montecarlo, series_fbm
from .errors import AccuracyError, DomainError
from .fbm_finite import FbmParams
from .montecarlo import fmt

EXIT_OK, EXIT_DOMAIN, EXIT_ACCURACY, EXIT_USAGE = 0, 2, 3, 64


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def parse_x_grid(text: str) -> np.ndarray:
    """``lo:hi:n`` (linear) or ``lo:hi:n:log`` (geometric)."""
    parts = text.split(":")
    if len(parts) not in (3, 4) or (len(parts) == 4 and parts[3] != "log"):
        raise argparse.ArgumentTypeError("x-grid must be lo:hi:n or lo:hi:n:log")
    try:
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc
    if n < 1 or not lo <= hi:
        raise argparse.ArgumentTypeError("x-grid needs n >= 1 and lo <= hi")
    if len(parts) == 4:
        if lo <= 0:
            raise argparse.ArgumentTypeError("log x-grid needs lo > 0")
        return np.geomspace(lo, hi, n)
    return np.linspace(lo, hi, n)


def _xs(args, default: np.ndarray | None = None) -> np.ndarray:
    if args.x is not None:
        return np.array([args.x])
    if args.x_grid is not None:
        return args.x_grid
    if default is not None:
        return default
    raise DomainError("give --x or --x-grid")


def _table(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(v) if isinstance(v, float) else v for v in r])
    return buf.getvalue()


def _bound_rows(xs, fn: Callable[[float], object]):
    rows = []
    for x in xs:
        b = fn(float(x))
        rows.append([float(x), float(b.value), b.kind.value, float(b.valid_from)])
    return _table(["x", "value", "kind", "valid_from"], rows)


# ---------------------------------------------------------------------------
# handlers

def _finite(args) -> FbmParams:
    return FbmParams(args.mu, args.sigma, args.hurst, args.t)


def _infinite(args) -> FbmParams:
    return FbmParams(args.mu, args.sigma, args.hurst, math.inf)


def cmd_bound(args) -> str:
    kind = args.which
    if kind == "finite-upper":
        p = _finite(args)
        return _bound_rows(_xs(args), lambda x: fbm_finite.upper_cdf(p, x, args.lam))
    if kind == "finite-optimal":
        p = _finite(args)
        rows = []
        for x in _xs(args):
            b = fbm_finite.optimal_upper_cdf(p, float(x))
            rows.append([float(x), float(b.value), float(b.note.split("=")[1])])
        return _table(["x", "value", "lambda"], rows)
    if kind == "finite-lower":
        p = _finite(args)
        if p.hurst < 0.5:
            return _bound_rows(_xs(args), lambda x: fbm_finite.lower_cdf_small_h(p, x))
        return _bound_rows(_xs(args), lambda x: fbm_finite.lower_cdf_large_h(p, x, args.lam))
    if kind == "dung-tail":
        p = _finite(args)
        return _bound_rows(_xs(args), lambda x: fbm_finite.dung_tail_bound(p, x))
    if kind == "infinite-upper":
        p = _infinite(args)
        fn = fbm_infinite.upper_cdf_numeric if args.numeric else fbm_infinite.upper_cdf
        return _bound_rows(_xs(args), lambda x: fn(p, x))
    if kind == "infinite-lower":
        p = _infinite(args)
        return _bound_rows(_xs(args), lambda x: fbm_infinite.lower_cdf(p, x))
    raise DomainError(f"unknown bound {kind}")


def cmd_exact(args) -> str:
    kind = args.which
    if kind == "kolmogorov-gap":
        gap = exact_laws.kolmogorov_gap_h_half(args.mu, args.sigma, args.t_split,
                                               args.grid_size)
        return _table(["mu", "sigma", "t_split", "gap"],
                      [[float(args.mu), float(args.sigma), float(args.t_split), gap]])
    if kind == "h1-fin":
        fn = lambda x: exact_laws.cdf_h1_finite(args.mu, args.sigma, args.t, x)
    elif kind == "h1-inf":
        fn = lambda x: exact_laws.cdf_h1_infinite(args.mu, args.sigma, x)
    else:
        fn = lambda x: float(exact_laws.cdf_h_half_infinite(args.mu, args.sigma, x))
    return _table(["x", "cdf"], [[float(x), float(fn(float(x)))] for x in _xs(args)])


def cmd_moments(args) -> str:
    if args.which == "finite":
        lo, up = fbm_finite.moment_bounds(_finite(args), args.p)
    else:
        lo, up = fbm_infinite.moment_bounds(_infinite(args), args.p)
    return _table(["p", "lower", "upper"], [[float(args.p), float(lo), float(up)]])


def cmd_mgf(args) -> str:
    if args.which == "finite":
        lo, up = fbm_finite.mgf_bounds(_finite(args), args.lam)
    else:
        lo, up = math.nan, fbm_infinite.mgf_upper(_infinite(args), args.lam)
    return _table(["lambda", "lower", "upper"], [[float(args.lam), float(lo), float(up)]])


def read_weights(path: str) -> tuple[list[float], list[float]]:
    """Two-column CSV of (sigma, hurst); a non-numeric first row is a header."""
    sig, hur = [], []
    with open(path, newline="") as fh:
        for i, row in enumerate(csv.reader(fh)):
            cells = [c.strip() for c in row if c.strip() != ""]
            if not cells or cells[0].startswith("#"):
                continue
            if len(cells) != 2:
                raise DomainError(f"{path}: row {i + 1} needs two columns")
            try:
                sig.append(float(cells[0]))
                hur.append(float(cells[1]))
            except ValueError:
                if i == 0:
                    continue
                raise DomainError(f"{path}: row {i + 1} is not numeric") from None
    return sig, hur


def cmd_series(args) -> str:
    sig, hur = read_weights(args.weights)
    s = series_fbm.SeriesParams(sig, hur, args.mu)
    kind = args.which
    if kind == "classify":
        v = series_fbm.classify_finiteness_series(s)
        return _table(["verdict", "q", "reason"],
                      [[v.tag.value, float(v.q) if v.q is not None else "", v.reason]])
    if kind == "moments":
        if math.isinf(args.t):
            lo, up = series_fbm.moment_bounds_infinite(s, args.p)
        else:
            lo, up = series_fbm.moment_bounds_finite(s, args.t, args.p)
        return _table(["p", "lower", "upper"], [[float(args.p), float(lo), float(up)]])
    if kind == "upper":
        if math.isinf(args.t):
            return _bound_rows(_xs(args), lambda x: series_fbm.upper_cdf_infinite(s, x))
        return _bound_rows(_xs(args), lambda x: series_fbm.upper_cdf_finite(s, args.t, x))
    return _bound_rows(_xs(args), lambda x: series_fbm.lower_cdf(s, args.t, x))


def cmd_simulate(args) -> str:
    p = _finite(args)
    ss = montecarlo.simulate_functional(p, args.paths, args.steps, args.seed, args.method)
    mean, se = montecarlo.estimate_moment(ss, 1.0)
    head = (f"# sample_mean={fmt(mean)}\n# sample_mean_se={fmt(se)}\n"
            f"# halving_shift={fmt(ss.meta.get('halving_shift', math.nan))}\n")
    return head + _table(["path", "value"], [[i, float(v)] for i, v in enumerate(ss.values)])


FIGURE_HURST = {"finite_1": 0.25, "finite_2": 0.75}


def cmd_compare(args) -> str:
    fig = args.figure
    if fig in FIGURE_HURST:
        hurst = args.hurst if args.hurst is not None else FIGURE_HURST[fig]
        p = FbmParams(args.mu, args.sigma, hurst, args.t)
        ss = montecarlo.simulate_functional(p, args.paths, args.steps, args.seed, args.method)
        upper, lower = montecarlo.figure_bounds(p)
        xs = args.x_grid if args.x_grid is not None else montecarlo.default_x_grid(ss)
        rows = montecarlo.sandwich_report(ss, xs, upper, lower, args.delta)
        eps = montecarlo.dkw_band(len(ss), args.delta)
        head = (f"# hurst_used={fmt(hurst)}\n# dkw_eps={fmt(eps)}\n"
                f"# violations={sum(r.flag for r in rows)}\n")
        return head + montecarlo.rows_to_csv(rows)
    if fig == "several_bounds":
        p = FbmParams(args.mu, args.sigma, args.hurst if args.hurst is not None else 0.75,
                      args.t)
        lams = (-1.0, -0.5, 0.0, 0.5, 1.0)
        xs = args.x_grid if args.x_grid is not None else np.geomspace(0.1, 20.0, 60)
        rows = []
        for x in xs:
            x = float(x)
            rows.append([x] + [fbm_finite.upper_cdf(p, x, lam).value for lam in lams]
                        + [fbm_finite.optimal_upper_cdf(p, x).value])
        header = ["x"] + [f"lambda_{lam:g}" for lam in lams] + ["optimal"]
        return _table(header, rows)
    # infinite horizon
    hurst = args.hurst if args.hurst is not None else 0.5
    p = FbmParams(args.mu, args.sigma, hurst, math.inf)
    if args.mu >= 0:
        raise DomainError("the infinite-horizon comparison needs mu < 0")
    xs = args.x_grid if args.x_grid is not None else np.geomspace(1e-3, 100.0, 200) / -args.mu
    rows = []
    for x in xs:
        x = float(x)
        up = fbm_infinite.upper_cdf(p, x).value
        lo = fbm_infinite.lower_cdf(p, x).value if hurst != 1.0 else math.nan
        ex = float(exact_laws.cdf_h_half_infinite(args.mu, args.sigma, x)) if hurst == 0.5 \
            else math.nan
        rows.append([x, lo, up, ex])
    head = ""
    if hurst == 0.5:
        gap = exact_laws.kolmogorov_gap_h_half(args.mu, args.sigma, args.t_split)
        head = f"# kolmogorov_gap={fmt(gap)}\n"
    return head + _table(["x", "lower", "upper", "exact"], rows)


# ---------------------------------------------------------------------------
# parser

def _add_model(p, hurst_default=0.5, with_t=True, hurst_required=False):
    p.add_argument("--mu", type=float, required=True)
    p.add_argument("--sigma", type=float, required=True)
    if hurst_required:
        p.add_argument("--hurst", type=float, default=hurst_default)
    else:
        p.add_argument("--hurst", type=float, default=hurst_default)
    if with_t:
        p.add_argument("--t", type=float, default=1.0, help="horizon T")


def _add_x(p):
    g = p.add_mutually_exclusive_group()
    g.add_argument("--x", type=float)
    g.add_argument("--x-grid", type=parse_x_grid, help="lo:hi:n[:log]")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fbm-expfun", description=__doc__.splitlines()[0])
    parser.add_argument("--out", help="write output to this file instead of stdout")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    b = sub.add_parser("bound", help="CDF bounds for fBM functionals")
    b.add_argument("which", choices=["finite-upper", "finite-lower", "finite-optimal",
                                     "infinite-upper", "infinite-lower", "dung-tail"])
    _add_model(b)
    b.add_argument("--lambda", dest="lam", type=float, default=0.0)
    b.add_argument("--numeric", action="store_true",
                   help="infinite-upper: minimize over the rate numerically")
    _add_x(b)
    b.set_defaults(func=cmd_bound)

    e = sub.add_parser("exact", help="exact laws (H=1, or H=1/2 with T=inf)")
    e.add_argument("which", choices=["h1-fin", "h1-inf", "hhalf-inf", "kolmogorov-gap"])
    e.add_argument("--mu", type=float, required=True)
    e.add_argument("--sigma", type=float, required=True)
    e.add_argument("--t", type=float, default=1.0)
    e.add_argument("--t-split", type=float, default=100.0)
    e.add_argument("--grid-size", type=int, default=10_000)
    _add_x(e)
    e.set_defaults(func=cmd_exact)

    m = sub.add_parser("moments", help="moment bounds")
    m.add_argument("which", choices=["finite", "infinite"])
    _add_model(m)
    m.add_argument("--p", type=float, required=True)
    m.set_defaults(func=cmd_moments)

    g = sub.add_parser("mgf", help="Laplace-transform bounds E[exp(-lam I)]")
    g.add_argument("which", choices=["finite", "infinite"])
    _add_model(g)
    g.add_argument("--lam", type=float, required=True)
    g.set_defaults(func=cmd_mgf)

    s = sub.add_parser("series", help="bounds for series of fBMs")
    s.add_argument("which", choices=["upper", "moments", "lower", "classify"])
    s.add_argument("--weights", required=True, help="CSV file with columns sigma,hurst")
    s.add_argument("--mu", type=float, required=True)
    s.add_argument("--t", type=float, default=1.0, help="horizon; 'inf' allowed")
    s.add_argument("--p", type=float, default=1.0)
    _add_x(s)
    s.set_defaults(func=cmd_series)

    sim = sub.add_parser("simulate", help="Monte Carlo samples of I_T")
    _add_model(sim)
    _add_sim(sim)
    sim.set_defaults(func=cmd_simulate)

    c = sub.add_parser("compare", help="figure data: bounds against e.c.d.f. or exact law")
    c.add_argument("--figure", required=True,
                   choices=["finite_1", "finite_2", "infinite", "several_bounds"])
    c.add_argument("--mu", type=float, required=True)
    c.add_argument("--sigma", type=float, required=True)
    c.add_argument("--hurst", type=float, default=None)
    c.add_argument("--t", type=float, default=1.0)
    c.add_argument("--t-split", type=float, default=100.0)
    c.add_argument("--delta", type=float, default=0.01)
    _add_sim(c)
    c.add_argument("--x-grid", type=parse_x_grid)
    c.set_defaults(func=cmd_compare)
    return parser


def _add_sim(p):
    p.add_argument("--paths", type=int, default=1000)
    p.add_argument("--steps", type=int, default=1024)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--method", choices=["cholesky", "circulant"], default="circulant")


def _metadata(args) -> str:
    lines = [f"# command={args.command}" + (f" {args.which}" if hasattr(args, "which") else "")]
    for key, val in vars(args).items():
        if key in ("func", "command", "which", "out"):
            continue
        if isinstance(val, np.ndarray):
            val = f"{fmt(val[0])}..{fmt(val[-1])} ({len(val)} points)"
        elif isinstance(val, float):
            val = fmt(val)
        lines.append(f"# {key}={val}")
    return "\n".join(lines) + "\n"


def run(argv: Sequence[str] | None = None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    try:
        text = _metadata(args) + args.func(args)
    except DomainError as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except AccuracyError as exc:
        print(f"accuracy error: {exc}", file=sys.stderr)
        return EXIT_ACCURACY
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
