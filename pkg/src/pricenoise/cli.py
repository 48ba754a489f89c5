"""Command-line entry point: ``pricenoise <subcommand> ...``.

Exit status: 0 success, 1 a checked claim failed, 2 usage or input error.
Frequencies are ordinary (cycles per time unit) unless ``--angular`` is
given, in which case they are radians per time unit.
"""
from __future__ import annotations

import argparse
import io
import logging
import math
import sys
import warnings
from pathlib import Path

import numpy as np

from . import estimate, theory
from .errors import PriceNoiseError
from .ingest import calibrate_n0, load_prices, price_to_logprice
from .noisegen import export_ensemble, generate_ensemble
from .pricemodel import integrate_ensemble, log_returns, trend_component, trend_lstsq
from .report import ClaimResult, VerificationReport
from .series import DISTRIBUTIONS, Ensemble, NoiseSpec, read_series_csv, series_to_csv
from .verify import DEFAULT_SEED, SUITES, run_suite

log = logging.getLogger("pricenoise")

EXIT_OK, EXIT_CLAIM_FAILED, EXIT_USAGE = 0, 1, 2
SLOPE_ACCEPT = (-2.3, -1.7)


def _u64(text):
    value = int(text, 0)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError(f"seed must be an unsigned 64-bit integer, got {text}")
    return value


def _positive_float(text):
    value = float(text)
    if not (math.isfinite(value) and value > 0):
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text}")
    return value


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _pow2(text):
    value = _positive_int(text)
    if value < 8 or value & (value - 1):
        raise argparse.ArgumentTypeError(f"segment must be a power of two >= 8, got {text}")
    return value


def _fraction(text):
    value = float(text)
    if not 0.0 <= value < 1.0:
        raise argparse.ArgumentTypeError(f"expected a value in [0, 1), got {text}")
    return value


def _alpha(text):
    value = float(text)
    if not 0.0 < value < 1.0:
        raise argparse.ArgumentTypeError(f"alpha must be in (0, 1), got {text}")
    return value


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def _seed(args) -> int:
    if args.seed is None:
        log.warning("no --seed given; using default seed %d", DEFAULT_SEED)
        return DEFAULT_SEED
    return args.seed


def _meta_lines(meta: dict) -> list[str]:
    return ["meta: " + " ".join(f"{k}={v}" for k, v in meta.items())]


def _two_column_csv(header, xs, ys, meta) -> str:
    buf = io.StringIO()
    for line in _meta_lines(meta):
        buf.write(f"# {line}\n")
    buf.write(",".join(header) + "\n")
    for x, y in zip(xs, ys):
        buf.write(f"{x!r},{y!r}\n")
    return buf.getvalue()


# -- simulate ---------------------------------------------------------------

def cmd_simulate(args) -> int:
    spec = NoiseSpec(args.n0, args.dist, _seed(args))
    e = generate_ensemble(spec, args.paths, args.steps, args.dt)
    if args.kind != "noise":
        e = integrate_ensemble(e)
        if args.kind == "price":
            with np.errstate(over="raise"):
                try:
                    prices = np.exp(e.matrix)
                except FloatingPointError:
                    raise PriceNoiseError("exp(log-price) overflows; lower --n0 or --steps") from None
            e = Ensemble(spec=spec, dt=e.dt, matrix=prices, kind="price")
    if args.paths == 1:
        _emit(series_to_csv(e.path(0)), args.out)
    else:
        if args.out is None:
            raise PriceNoiseError("--out DIRECTORY is required when --paths > 1")
        export_ensemble(args.out, e, kind=args.kind)
    return EXIT_OK


# -- acf / psd --------------------------------------------------------------

def cmd_acf(args) -> int:
    x = read_series_csv(args.input)
    est = estimate.sample_acf(x, args.max_lag, normalize=not args.no_normalize)
    meta = {"mode": est.mode, "n": est.n, "dt": repr(est.dt), "normalized": est.normalized,
            "input": args.input}
    if args.format == "csv":
        _emit(_two_column_csv(("lag", "value"), est.lags.tolist(), est.values.tolist(), meta), args.out)
    else:
        lines = [f"{k}: {v}" for k, v in meta.items()]
        lines += [f"lag {k}: {v:.6g}" for k, v in zip(est.lags, est.values)]
        _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def _default_segment(n: int) -> int:
    seg = 1024
    while seg > 8 and seg * 8 > n:
        seg //= 2
    return seg


def _psd_of(series, args):
    segment = args.segment or _default_segment(len(series))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        return estimate.averaged_psd(series, segment, args.overlap, args.taper)


def _band(args, n, dt):
    lo, hi = estimate.default_band(n, dt)
    return (args.band_lo if args.band_lo is not None else lo,
            args.band_hi if args.band_hi is not None else hi)


def cmd_psd(args) -> int:
    x = read_series_csv(args.input)
    p = _psd_of(x, args)
    meta = p.meta()
    meta["input"] = args.input
    if args.band_lo is not None or args.band_hi is not None:
        fit = estimate.fit_loglog_slope(p, *_band(args, len(x), x.dt))
        meta.update(slope=repr(fit.slope), r_squared=repr(fit.r_squared))
    if args.angular:
        p = p.as_angular()
        meta["freq_kind"] = "angular"
    header = ("freq", "value")
    if args.format == "csv":
        _emit(_two_column_csv(header, p.freqs.tolist(), p.values.tolist(), meta), args.out)
    else:
        lines = [f"{k}: {v}" for k, v in meta.items()]
        lines += [f"{f:.6g}: {v:.6g}" for f, v in zip(p.freqs, p.values)]
        _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


# -- analyze ----------------------------------------------------------------

def cmd_analyze(args) -> int:
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        table = load_prices(args.input, args.time_col, args.price_col)
        y = price_to_logprice(table)
        n0_hat = calibrate_n0(y)
    for w in caught:
        log.warning("%s", w.message)
    r = log_returns(y, 1)
    white = estimate.whiteness_test(r, args.max_lag, args.alpha)
    trend = trend_component(y)
    ls = trend_lstsq(y)
    p = _psd_of(y, args)
    lo, hi = _band(args, len(y), y.dt)
    fit = estimate.fit_loglog_slope(p, lo, hi)
    slope_ok = SLOPE_ACCEPT[0] <= fit.slope <= SLOPE_ACCEPT[1]
    entries = [
        ClaimResult("returns_white", "log-returns are white noise", white.q_statistic,
                    f"Q <= {white.threshold!r}", f"alpha={args.alpha!r} K={args.max_lag}",
                    white.passed,
                    details={"band_violation_fraction": repr(white.band_violation_fraction)}),
        ClaimResult("psd_inverse_square", "log-price PSD falls as 1/f^2", fit.slope, "-2",
                    f"[{SLOPE_ACCEPT[0]}, {SLOPE_ACCEPT[1]}]", slope_ok,
                    details={"r_squared": repr(fit.r_squared), "bins": fit.bins,
                             "band_lo": repr(lo), "band_hi": repr(hi),
                             "segment": p.segment_len, "taper": p.taper_name,
                             "overlap": repr(p.overlap_fraction)}),
    ]
    flags = {"input": args.input, "time_col": args.time_col, "price_col": args.price_col,
             "max_lag": args.max_lag, "alpha": args.alpha, "taper": args.taper,
             "overlap": args.overlap, "segment": args.segment or "auto"}
    report = VerificationReport("analyze", entries, flags=flags)
    summary = {
        "samples": len(y), "dt": repr(y.dt), "irregular_spacing": table.irregular,
        "n0_hat": repr(n0_hat), "trend_slope_endpoint": repr(trend.slope),
        "trend_slope_lstsq": repr(ls.slope),
    }
    kv = "".join(f"{k}={_fmt(v)}\n" for k, v in summary.items()) + report.to_kv()
    if args.format == "csv":
        text = "key,value\n" + "".join(f"{line.replace('=', ',', 1)}\n" for line in kv.splitlines())
    else:
        head = "".join(f"{k}: {_fmt(v)}\n" for k, v in summary.items())
        text = head + "\n" + report.to_text()
    _emit(text, args.out)
    if args.out is not None:
        Path(str(args.out) + ".kv").write_text(kv, encoding="utf-8")
    return EXIT_OK if report.passed else EXIT_CLAIM_FAILED


def _fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    return str(v)


# -- theory -----------------------------------------------------------------

def cmd_theory(args) -> int:
    params = theory.TheoryParams(args.n0, args.horizon)
    if args.curve == "psd":
        omega_max = args.omega_max or 8 * math.pi / args.horizon
        x, y = theory.psd_curve(params, omega_max, args.points, literal=args.paper_eq12_literal)
        if not args.angular:
            x = theory.ordinary_frequency(x)
        formula = ("n0*T^2*sinc^2(omega*T)  [printed variant, non-normative]"
                   if args.paper_eq12_literal else "n0*T^2*sinc^2(omega*T/2)")
        header = ("omega" if args.angular else "xi", "S")
        meta = {"curve": "psd", "n0": repr(args.n0), "T": repr(args.horizon), "formula": formula.replace(" ", "_"),
                "freq_kind": "angular" if args.angular else "ordinary"}
    else:
        x, y = theory.acf_curve(params, args.points)
        header = ("tau", "R")
        meta = {"curve": "acf", "n0": repr(args.n0), "T": repr(args.horizon), "formula": "n0*(T-|tau|)"}
    _emit(_two_column_csv(header, x.tolist(), y.tolist(), meta), args.out)
    return EXIT_OK


# -- verify -----------------------------------------------------------------

def cmd_verify(args) -> int:
    seed = _seed(args)
    flags = {"suite": args.suite, "seed": seed, "paths": args.paths or "default"}
    report = run_suite(args.suite, seed=seed, paths=args.paths, timings=args.timings, flags=flags)
    text = report.to_csv() if args.format == "csv" else report.to_text()
    _emit(text, args.out)
    if args.out is not None:
        Path(str(args.out) + ".kv").write_text(report.to_kv(), encoding="utf-8")
    return EXIT_OK if report.passed else EXIT_CLAIM_FAILED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pricenoise", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, fmt="csv"):
        p.add_argument("--out", help="output path (default: stdout)")
        p.add_argument("--format", choices=("csv", "report"), default=fmt)

    def spectral(p):
        p.add_argument("--segment", type=_pow2, help="segment length, power of two (default: auto, <= 1024)")
        p.add_argument("--overlap", type=_fraction, default=0.5)
        p.add_argument("--taper", choices=estimate.TAPERS, default="hann")
        p.add_argument("--band-lo", type=_positive_float, help="slope-fit band, cycles per time unit")
        p.add_argument("--band-hi", type=_positive_float)

    p = sub.add_parser("simulate", help="generate noise, log-price or price paths")
    p.add_argument("--seed", type=_u64)
    p.add_argument("--n0", type=_positive_float, default=1.0)
    p.add_argument("--dt", type=_positive_float, default=1.0)
    p.add_argument("--dist", choices=DISTRIBUTIONS, default="gaussian")
    p.add_argument("--paths", type=_positive_int, default=1)
    p.add_argument("--steps", type=_positive_int, required=True)
    p.add_argument("--kind", choices=("noise", "logprice", "price"), default="noise",
                   help="noise: x; logprice: integral of x (steps+1 samples); price: exp(logprice)")
    p.add_argument("--out", help="CSV file for one path, directory for several (default: stdout)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("acf", help="sample autocorrelation of a t,value series")
    p.add_argument("input")
    p.add_argument("--max-lag", type=_positive_int, default=20)
    p.add_argument("--no-normalize", action="store_true")
    common(p)
    p.set_defaults(func=cmd_acf)

    p = sub.add_parser("psd", help="averaged-segment PSD of a t,value series")
    p.add_argument("input")
    spectral(p)
    p.add_argument("--angular", action="store_true", help="report frequencies in radians per time unit")
    common(p)
    p.set_defaults(func=cmd_psd)

    p = sub.add_parser("analyze", help="log-price, returns, whiteness, N0, trend and PSD slope of prices")
    p.add_argument("input")
    p.add_argument("--time-col", default="t")
    p.add_argument("--price-col", default="value")
    p.add_argument("--max-lag", type=_positive_int, default=20)
    p.add_argument("--alpha", type=_alpha, default=0.05)
    spectral(p)
    common(p, fmt="report")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("theory", help="dump closed-form PSD or ACF curves")
    p.add_argument("--curve", choices=("psd", "acf"), default="psd")
    p.add_argument("--n0", type=_positive_float, default=1.0)
    p.add_argument("--horizon", type=_positive_float, default=1.0, help="T, time units")
    p.add_argument("--points", type=_positive_int, default=1001)
    p.add_argument("--omega-max", type=_positive_float, help="angular half-range (default 8*pi/T)")
    p.add_argument("--angular", action="store_true")
    p.add_argument("--paper-eq12-literal", action="store_true",
                   help="use the printed sinc^2(omega*T) variant (non-normative, for comparison)")
    p.add_argument("--out")
    p.set_defaults(func=cmd_theory)

    p = sub.add_parser("verify", help="run claim-verification suites")
    p.add_argument("--suite", choices=tuple(SUITES), default="all")
    p.add_argument("--seed", type=_u64)
    p.add_argument("--paths", type=_positive_int, help="override ensemble size (quick runs)")
    p.add_argument("--timings", action="store_true", help="include runtimes (breaks byte-identity)")
    common(p, fmt="report")
    p.set_defaults(func=cmd_verify)
    return parser


def run_cli(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(levelname)s: %(message)s")
    try:
        return args.func(args)
    except (PriceNoiseError, OSError) as exc:
        print(f"pricenoise {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
