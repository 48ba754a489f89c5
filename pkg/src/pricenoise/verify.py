"""Monte Carlo and quadrature checks of the model's quantitative claims.

Each ``check_*`` function returns a :class:`~pricenoise.report.ClaimResult`;
``run_suite`` groups them. Defaults are the full-size studies; ``paths``
and ``seeds`` can be lowered for quick smoke runs.
"""
from __future__ import annotations

import math
import tempfile
import time
from functools import wraps
from pathlib import Path

import numpy as np
from scipy import integrate as _quad
from scipy.signal import lfilter

from . import estimate, theory
from .noisegen import generate_ensemble, generate_noise, iter_ensemble
from .pricemodel import average_speed, integrate, integrate_ensemble
from .report import ClaimResult, VerificationReport
from .series import DISTRIBUTIONS, NoiseSpec, SampleSeries

DEFAULT_SEED = 42


def _timed(fn):
    @wraps(fn)
    def wrapper(*args, **kwargs):
        start = time.perf_counter()
        result = fn(*args, **kwargs)
        result.runtime = time.perf_counter() - start
        return result
    return wrapper


def fourier_quadrature(omega: float, horizon: float, n0: float) -> float:
    """``int R(tau) exp(-i omega tau) dtau`` of the triangular ACF by adaptive quadrature.

    The ACF is even, so the transform is twice the cosine integral over ``[0, T]``.
    """
    def acf(tau):
        return theory.acf_price(tau, horizon, n0)

    if omega == 0.0:
        val, _ = _quad.quad(acf, 0.0, horizon, epsabs=0.0, epsrel=1e-13, limit=200)
    else:
        val, _ = _quad.quad(acf, 0.0, horizon, weight="cos", wvar=omega,
                            epsabs=0.0, epsrel=1e-13, limit=200)
    return 2.0 * val


def wk_grid(horizon: float, points: int = 200, span: float = 8.0 * math.pi) -> np.ndarray:
    """Cell-midpoint grid on ``|omega| <= span/T``.

    Midpoints never land on ``2*pi*k/T``, where the PSD vanishes and a
    relative error is undefined.
    """
    edges = np.linspace(-span / horizon, span / horizon, points + 1)
    return 0.5 * (edges[:-1] + edges[1:])


@_timed
def check_ensemble_acf(seed=DEFAULT_SEED, paths=10_000, t_index=512, lags=(0, 64, 128, 256, 448),
                       n0=1.0, dt=1.0) -> ClaimResult:
    spec = NoiseSpec(n0, "gaussian", seed)
    e = integrate_ensemble(generate_ensemble(spec, paths, t_index, dt))
    est = estimate.ensemble_acf(e, t_index, lags)
    t = t_index * dt
    expected = theory.acf_price(est.tau, t, n0)
    z = np.abs(est.values - expected) / est.stderr
    details = {f"lag{int(k)}": f"{v:.6g}+-{s:.3g} (theory {x:.6g})"
               for k, v, s, x in zip(est.lags, est.values, est.stderr, expected)}
    details["paths"] = paths
    return ClaimResult("ensemble_acf_law", "R_y(tau) = N0 (t - tau) across paths",
                       float(z.max()), "max |z| over lags", "<= 3 standard errors",
                       bool(np.all(z <= 3.0)), seed, details=details)


def _values_at(spec, paths, times, dt, chunk=1000):
    """Integrated-path values at grid indices ``times`` for every path, chunked."""
    n = max(times)
    cols = np.asarray(times)
    out = []
    for e in iter_ensemble(spec, paths, n, dt, chunk=max(1, min(chunk, 10_000_000 // n))):
        out.append(integrate_ensemble(e).matrix[:, cols])
    return np.vstack(out)


@_timed
def check_variance_linear(seed=DEFAULT_SEED, paths=10_000, times=(100, 1000, 10_000), n0=1.0,
                          dt=1.0) -> ClaimResult:
    ratios = {}
    for dist in DISTRIBUTIONS:
        y = _values_at(NoiseSpec(n0, dist, seed), paths, times, dt)
        for j, k in enumerate(times):
            ratios[f"{dist}.t{k}"] = float(np.var(y[:, j], ddof=1) / (n0 * k * dt))
    worst = max(ratios.values(), key=lambda r: abs(r - 1.0))
    ok = all(0.95 <= r <= 1.05 for r in ratios.values())
    return ClaimResult("variance_linear_in_time", "Var y(t) = N0 t (zero-lag R_y)",
                       worst, "Var(y(t))/(N0 t) = 1", "[0.95, 1.05] for every t and distribution",
                       ok, seed, details={**{k: f"{v:.6f}" for k, v in ratios.items()}, "paths": paths})


@_timed
def check_spectral_exponent(seed=DEFAULT_SEED, paths=20, n=2**14, segment=1024, overlap=0.5,
                            taper_name="hann", n0=1.0, dt=1.0) -> ClaimResult:
    spec = NoiseSpec(n0, "gaussian", seed)
    e = integrate_ensemble(generate_ensemble(spec, paths, n, dt))
    p = estimate.mean_psd(estimate.averaged_psd(e.path(i), segment, overlap, taper_name)
                          for i in range(paths))
    lo, hi = estimate.default_band(n, dt)
    fit = estimate.fit_loglog_slope(p, lo, hi)
    return ClaimResult("spectral_exponent", "S_y inversely proportional to squared frequency",
                       fit.slope, "-2.0", "+-0.15", abs(fit.slope + 2.0) <= 0.15, seed,
                       details={"r_squared": f"{fit.r_squared:.6f}", "bins": fit.bins,
                                "band": f"[{lo:.6g}, {hi:.6g}]", "paths": paths})


@_timed
def check_zero_frequency(n0=1.0, horizon=1.0) -> ClaimResult:
    params = theory.TheoryParams(n0, horizon)
    closed = theory.psd_price(0.0, params)
    quad = fourier_quadrature(0.0, horizon, n0)
    rel = abs(quad - closed) / closed
    exact = closed == n0 * horizon ** 2
    return ClaimResult("zero_frequency", "S_y(0) = N0 T^2", closed, f"{n0 * horizon ** 2!r}",
                       "exact; quadrature within 1e-9 rel", exact and rel <= 1e-9,
                       details={"quadrature": repr(quad), "quadrature_rel_err": f"{rel:.3e}"})


@_timed
def check_wiener_khinchin(n0=1.0, horizon=1.0, points=200) -> ClaimResult:
    params = theory.TheoryParams(n0, horizon)
    omega = wk_grid(horizon, points)
    quad = np.array([fourier_quadrature(w, horizon, n0) for w in omega])
    closed = theory.psd_price(omega, params)
    rel = np.abs(quad - closed) / np.abs(quad)
    literal = theory.psd_price(omega, params, literal=True)
    lit_rel = np.abs(literal - quad) / np.abs(quad)
    return ClaimResult(
        "wiener_khinchin", "S_y = Fourier transform of R_y", float(rel.max()),
        "N0 T^2 sinc^2(omega T/2)", "<= 1e-6 relative on 200 points, |omega| <= 8 pi/T",
        bool(rel.max() <= 1e-6),
        details={"printed_sinc2_omegaT_max_rel_err": f"{lit_rel.max():.3e}",
                 "printed_form_note": "sinc^2(omega T) is not the transform of the triangle; "
                                      "its zeros sit at pi/T instead of 2 pi/T"})


@_timed
def check_main_lobe() -> ClaimResult:
    frac = theory.main_lobe_fraction()
    quad, _ = _quad.quad(lambda u: theory.sinc(u) ** 2, -math.pi, math.pi, epsabs=0.0, epsrel=1e-12)
    oracle = quad / math.pi
    ok = 0.90 < frac < 0.91 and abs(frac - oracle) <= 1e-3
    return ClaimResult("main_lobe_energy", "main lobe holds more than 90% of the energy", frac,
                       "(0.90, 0.91)", "quadrature within 1e-3", ok,
                       details={"quadrature": f"{oracle:.12f}"})


def ar1_series(seed: int, n: int, phi: float = 0.9, path: int = 0) -> SampleSeries:
    """``x[i] = phi * x[i-1] + eps[i]`` driven by unit gaussian noise, ``x[0] = eps[0]``."""
    eps = generate_noise(NoiseSpec(1.0, "gaussian", seed), n, 1.0, path=path).values
    return SampleSeries(1.0, lfilter([1.0], [1.0, -phi], eps))


@_timed
def check_whiteness_calibration(seed=DEFAULT_SEED, seeds=1000, n=2048, max_lag=20,
                                alpha=0.05) -> ClaimResult:
    spec = NoiseSpec(1.0, "gaussian", seed)
    white = sum(estimate.whiteness_test(generate_noise(spec, n, 1.0, path=i), max_lag, alpha).passed
                for i in range(seeds)) / seeds
    ar_fail = sum(not estimate.whiteness_test(ar1_series(seed + 1, n, path=i), max_lag, alpha).passed
                  for i in range(seeds)) / seeds
    ok = abs(white - 0.95) <= 0.02 and ar_fail >= 0.99
    return ClaimResult("whiteness_calibration", "log-returns are white noise", white,
                       "0.95 pass rate; AR(0.9) fail rate >= 0.99", "+-0.02", ok, seed,
                       details={"ar09_fail_rate": f"{ar_fail:.4f}", "seeds": seeds, "n": n})


@_timed
def check_displacement_identity(seed=DEFAULT_SEED, paths=100, n=1000, dt=1.0) -> ClaimResult:
    spec = NoiseSpec(1.0, "gaussian", seed)
    worst = 0.0
    for i in range(paths):
        y = integrate(generate_noise(spec, n, dt, path=i))
        v = average_speed(y)
        back = v.values * v.times
        ulps = np.abs(back - y.values[1:]) / np.spacing(np.abs(y.values[1:]))
        worst = max(worst, float(ulps.max()))
    return ClaimResult("displacement_identity", "y(t) = average speed times t", worst, "0 ulp",
                       "<= 4 ulp", worst <= 4.0, seed, details={"paths": paths})


@_timed
def check_speed_stabilization(seed=DEFAULT_SEED, paths=10_000, t_short=100, t_long=1000,
                              n0=1.0, dt=1.0) -> ClaimResult:
    y = _values_at(NoiseSpec(n0, "gaussian", seed), paths, (t_short, t_long), dt)
    v_short = y[:, 0] / (t_short * dt)
    v_long = y[:, 1] / (t_long * dt)
    ratio = float(np.var(v_short, ddof=1) / np.var(v_long, ddof=1))
    expected = t_long / t_short
    return ClaimResult("speed_stabilization", "fluctuation of the average speed decreases", ratio,
                       f"{expected!r}", "+-15%", abs(ratio / expected - 1.0) <= 0.15, seed,
                       details={"paths": paths})


@_timed
def check_round_trip(seed=DEFAULT_SEED, steps=100_000, n0=1e-4, dt=1.0) -> ClaimResult:
    from .cli import run_cli

    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        sim = ["simulate", "--paths", "1", "--steps", str(steps), "--dt", repr(dt), "--n0", repr(n0),
               "--dist", "gaussian", "--seed", str(seed), "--kind", "price"]
        run_cli(sim + ["--out", str(tmp / "a.csv")])
        run_cli(sim + ["--out", str(tmp / "b.csv")])
        same_sim = (tmp / "a.csv").read_bytes() == (tmp / "b.csv").read_bytes()
        analyze = ["analyze", str(tmp / "a.csv"), "--format", "report"]
        run_cli(analyze + ["--out", str(tmp / "r1.txt")])
        status = run_cli(analyze + ["--out", str(tmp / "r2.txt")])
        r1 = (tmp / "r1.txt").read_bytes()
        same_report = r1 == (tmp / "r2.txt").read_bytes()
        kv = dict(line.split("=", 1) for line in (tmp / "r1.txt.kv").read_text().splitlines())
    n0_hat = float(kv["n0_hat"])
    white = kv["returns_white.pass"] == "true"
    rel = abs(n0_hat / n0 - 1.0)
    ok = rel <= 0.02 and white and same_sim and same_report
    return ClaimResult("round_trip", "simulate -> CSV -> analyze closes the loop", n0_hat,
                       f"{n0!r}", "n0_hat within 2%, returns white, byte-identical reruns", ok, seed,
                       details={"n0_rel_err": f"{rel:.4f}", "returns_white": white,
                                "identical_simulate": same_sim, "identical_report": same_report,
                                "analyze_status": status})


SUITES = {
    "theory": (check_zero_frequency, check_wiener_khinchin, check_main_lobe),
    "time": (check_ensemble_acf, check_variance_linear, check_displacement_identity,
             check_speed_stabilization),
    "spectral": (check_spectral_exponent,),
    "whiteness": (check_whiteness_calibration,),
    "roundtrip": (check_round_trip,),
}
SUITES["all"] = tuple(fn for name in ("time", "spectral", "theory", "whiteness", "roundtrip")
                      for fn in SUITES[name])

_SEEDED = {check_ensemble_acf, check_variance_linear, check_spectral_exponent,
           check_whiteness_calibration, check_displacement_identity, check_speed_stabilization,
           check_round_trip}
_SCALED = {check_ensemble_acf: "paths", check_variance_linear: "paths",
           check_speed_stabilization: "paths", check_whiteness_calibration: "seeds"}


def run_suite(name: str, seed: int = DEFAULT_SEED, paths: int | None = None,
              timings: bool = False, flags: dict | None = None) -> VerificationReport:
    """Run every check in suite ``name``.

    ``paths`` overrides the ensemble size (and the seed count of the
    whiteness calibration) for quicker, less powerful runs.
    """
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; choose one of {', '.join(SUITES)}")
    entries = []
    for check in SUITES[name]:
        kwargs = {}
        if check in _SEEDED:
            kwargs["seed"] = seed
        if paths is not None and check in _SCALED:
            kwargs[_SCALED[check]] = paths
        entries.append(check(**kwargs))
    return VerificationReport(suite=name, entries=entries, flags=flags or {}, timings=timings)
