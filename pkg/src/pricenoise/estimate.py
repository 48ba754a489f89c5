"""Empirical counterparts of the closed forms: ACF, PSD, slope, DC level, whiteness."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.special import gammaincinv, ndtri

from .errors import (
    ConfigError,
    DegenerateInputError,
    InsufficientDataError,
    StatisticalPowerError,
)
from .pricemodel import SwitchWindow
from .series import Ensemble, SampleSeries
from .theory import TWO_PI

TAPERS = ("rectangular", "hann")
MIN_ENSEMBLE_PATHS = 30


@dataclass(frozen=True)
class AcfEstimate:
    lags: np.ndarray
    values: np.ndarray
    mode: str
    n: int
    dt: float
    stderr: np.ndarray | None = None
    normalized: bool = False

    @property
    def tau(self) -> np.ndarray:
        return self.lags * self.dt


@dataclass(frozen=True)
class PsdEstimate:
    freqs: np.ndarray
    values: np.ndarray
    freq_kind: str = "ordinary"
    method: str = "periodogram"
    segment_len: int | None = None
    overlap_fraction: float = 0.0
    taper_name: str = "rectangular"
    n_segments: int = 1
    n: int = 0
    dt: float = 1.0
    fallback: bool = False

    def as_angular(self) -> "PsdEstimate":
        """Relabel the axis as ``omega = 2*pi*xi``.

        Densities follow ``S(omega) = int R(tau) exp(-i omega tau) dtau``,
        which takes the same value at ``omega = 2*pi*xi`` as the per-cycle
        density at ``xi``, so only the axis changes.
        """
        if self.freq_kind == "angular":
            return self
        return replace(self, freqs=self.freqs * TWO_PI, freq_kind="angular")

    def as_ordinary(self) -> "PsdEstimate":
        if self.freq_kind == "ordinary":
            return self
        return replace(self, freqs=self.freqs / TWO_PI, freq_kind="ordinary")

    def two_sided(self) -> np.ndarray:
        """Undo the one-sided fold: density at ``+f`` of the symmetric spectrum."""
        m = self.segment_len or self.n
        out = self.values / 2.0
        out[0] = self.values[0]
        if m % 2 == 0:
            out[-1] = self.values[-1]
        return out

    def meta(self) -> dict:
        return {
            "method": self.method, "freq_kind": self.freq_kind, "n": self.n, "dt": self.dt,
            "segment_len": self.segment_len, "overlap": self.overlap_fraction,
            "taper": self.taper_name, "segments": self.n_segments, "fallback": self.fallback,
        }


@dataclass(frozen=True)
class SlopeFit:
    band_lo: float
    band_hi: float
    slope: float
    intercept: float
    r_squared: float
    bins: int


@dataclass(frozen=True)
class WhitenessResult:
    max_lag: int
    q_statistic: float
    threshold: float
    band_violation_fraction: float
    alpha: float
    n: int
    pass_: bool = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "pass_", bool(self.q_statistic <= self.threshold))

    @property
    def passed(self) -> bool:
        return self.pass_


def sample_mean(x: SampleSeries) -> float:
    if len(x) == 0:
        raise InsufficientDataError("mean of an empty series")
    return float(np.mean(x.values))


def _biased_acov(v: np.ndarray, max_lag: int) -> np.ndarray:
    n = v.shape[0]
    d = v - v.mean()
    # zero-padded FFT to >= 2n avoids circular wrap-around
    nfft = 1 << (2 * n - 1).bit_length()
    spec = np.fft.rfft(d, nfft)
    acov = np.fft.irfft(spec * np.conj(spec), nfft)[: max_lag + 1] / n
    return acov


def sample_acf(x: SampleSeries, max_lag: int, normalize: bool = True) -> AcfEstimate:
    """Biased (1/n) sample autocovariance with mean removal, optionally divided by lag 0."""
    n = len(x)
    if max_lag < 0:
        raise ConfigError(f"max_lag must be non-negative, got {max_lag}")
    if max_lag >= n:
        raise InsufficientDataError(f"max_lag {max_lag} needs more than {max_lag} samples, got {n}")
    acov = _biased_acov(x.values, max_lag)
    if np.ptp(x.values) == 0.0:
        if normalize:
            raise DegenerateInputError("normalised ACF of a constant series is undefined")
        acov = np.zeros(max_lag + 1)
    if normalize:
        acov = acov / acov[0]
    return AcfEstimate(lags=np.arange(max_lag + 1), values=acov, mode="biased-time-average",
                       n=n, dt=x.dt, normalized=normalize)


def ensemble_acf(e: Ensemble, t_index: int, lags) -> AcfEstimate:
    """Ensemble average of ``y(t - k) * y(t)`` across paths, per lag ``k``.

    Means use ``math.fsum`` so the result does not depend on path order.
    """
    lags = np.asarray(sorted(set(int(k) for k in lags)), dtype=int)
    if lags.size == 0:
        raise ConfigError("no lags requested")
    if lags[0] < 0 or t_index - lags[-1] < 0 or t_index >= e.n_samples:
        raise InsufficientDataError(
            f"lags {lags.min()}..{lags.max()} do not fit below t_index={t_index} "
            f"on paths of {e.n_samples} samples")
    paths = len(e)
    if paths < MIN_ENSEMBLE_PATHS:
        raise StatisticalPowerError(
            f"ensemble ACF needs at least {MIN_ENSEMBLE_PATHS} paths, got {paths}")
    y_t = e.matrix[:, t_index]
    values, stderr = [], []
    for k in lags:
        prod = e.matrix[:, t_index - k] * y_t
        mean = math.fsum(prod) / paths
        var = math.fsum((prod - mean) ** 2) / (paths - 1)
        values.append(mean)
        stderr.append(math.sqrt(var / paths))
    return AcfEstimate(lags=lags, values=np.array(values), mode="ensemble", n=paths,
                       dt=e.dt, stderr=np.array(stderr))


def _fold(power: np.ndarray, n: int) -> np.ndarray:
    # one-sided density: double every bin except DC and (for even n) Nyquist
    power = power.copy()
    if n % 2 == 0:
        power[1:-1] *= 2.0
    else:
        power[1:] *= 2.0
    return power


def periodogram(x: SampleSeries) -> PsdEstimate:
    """One-sided periodogram ``|DFT|**2 * dt / n`` on ``xi_j = j / (n*dt)``.

    Summing ``values * (1/(n*dt))`` reproduces the mean power ``mean(x**2)``.
    """
    n = len(x)
    if n < 8:
        raise InsufficientDataError(f"periodogram needs at least 8 samples, got {n}")
    spec = np.fft.rfft(x.values)
    power = _fold(np.abs(spec) ** 2 * x.dt / n, n)
    freqs = np.arange(power.shape[0]) / (n * x.dt)
    return PsdEstimate(freqs=freqs, values=power, n=n, dt=x.dt)


def taper(name: str, m: int) -> np.ndarray:
    if name == "rectangular":
        return np.ones(m)
    if name == "hann":
        # periodic Hann: exact zero at the first sample, DFT-even
        return 0.5 - 0.5 * np.cos(TWO_PI * np.arange(m) / m)
    raise ConfigError(f"unknown taper {name!r}; choose one of {', '.join(TAPERS)}")


def averaged_psd(x: SampleSeries, segment_len: int, overlap_fraction: float = 0.5,
                 taper_name: str = "hann", detrend: bool = True) -> PsdEstimate:
    """Average of tapered, overlapping segment periodograms.

    Each segment is mean-removed (``detrend=True``), multiplied by the taper
    and normalised by the taper power ``sum(w**2)`` so that white noise of
    variance ``s2`` comes out at the one-sided level ``2 * s2 * dt``
    (``two_sided()`` recovers ``s2 * dt``). With fewer than two
    segments the plain periodogram is returned with ``fallback=True``.
    """
    n = len(x)
    if segment_len < 8 or segment_len & (segment_len - 1):
        raise ConfigError(f"segment length must be a power of two >= 8, got {segment_len}")
    if segment_len > n:
        raise InsufficientDataError(f"segment length {segment_len} exceeds series length {n}")
    if not 0.0 <= overlap_fraction < 1.0:
        raise ConfigError(f"overlap fraction must be in [0, 1), got {overlap_fraction}")
    w = taper(taper_name, segment_len)
    step = segment_len - int(round(overlap_fraction * segment_len))
    starts = range(0, n - segment_len + 1, step)
    if len(starts) < 2:
        warnings.warn("fewer than two segments; falling back to the plain periodogram",
                      RuntimeWarning, stacklevel=2)
        p = periodogram(x)
        return replace(p, fallback=True, taper_name="rectangular")
    segs = np.lib.stride_tricks.sliding_window_view(x.values, segment_len)[::step]
    if detrend:
        segs = segs - segs.mean(axis=1, keepdims=True)
    spec = np.fft.rfft(segs * w, axis=1)
    power = np.mean(np.abs(spec) ** 2, axis=0) * x.dt / np.sum(w * w)
    power = _fold(power, segment_len)
    freqs = np.arange(power.shape[0]) / (segment_len * x.dt)
    return PsdEstimate(freqs=freqs, values=power, method="averaged-segments",
                       segment_len=segment_len, overlap_fraction=overlap_fraction,
                       taper_name=taper_name, n_segments=segs.shape[0], n=n, dt=x.dt)


def mean_psd(estimates) -> PsdEstimate:
    """Bin-wise mean of estimates sharing one frequency grid (e.g. one per path)."""
    estimates = list(estimates)
    first = estimates[0]
    for p in estimates[1:]:
        if p.freqs.shape != first.freqs.shape or not np.array_equal(p.freqs, first.freqs):
            raise ConfigError("cannot average PSD estimates on different frequency grids")
    values = np.mean([p.values for p in estimates], axis=0)
    return replace(first, values=values, n_segments=sum(p.n_segments for p in estimates))


def default_band(n: int, dt: float) -> tuple[float, float]:
    """``[4/(n*dt), 0.1/dt]`` in ordinary frequency: skips trend-dominated and taper-dominated bins."""
    return 4.0 / (n * dt), 0.1 / dt


def fit_loglog_slope(p: PsdEstimate, band_lo: float, band_hi: float) -> SlopeFit:
    """Least-squares line through ``(log f, log S)`` for bins strictly inside the band."""
    if not band_lo < band_hi:
        raise ConfigError(f"band_lo must be below band_hi, got [{band_lo}, {band_hi}]")
    inside = (p.freqs > band_lo) & (p.freqs < band_hi)
    if inside.sum() < 8:
        raise InsufficientDataError(
            f"only {int(inside.sum())} bins inside ({band_lo}, {band_hi}); need at least 8")
    f = p.freqs[inside]
    s = p.values[inside]
    bad = np.flatnonzero(s <= 0)
    if bad.size:
        listed = ", ".join(f"{f[i]:.6g}" for i in bad[:10])
        raise DegenerateInputError(f"non-positive density in band at frequencies {listed}")
    lx, ly = np.log(f), np.log(s)
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (intercept + slope * lx)
    ss_tot = np.sum((ly - ly.mean()) ** 2)
    r2 = 1.0 - np.sum(resid ** 2) / ss_tot if ss_tot > 0 else 1.0
    return SlopeFit(band_lo=band_lo, band_hi=band_hi, slope=float(slope),
                    intercept=float(intercept), r_squared=float(min(max(r2, 0.0), 1.0)),
                    bins=int(inside.sum()))


def dc_component(xk: SampleSeries, window: SwitchWindow | None = None) -> float:
    """Mean of the in-window samples (all samples when no window is given)."""
    values = xk.values if window is None else xk.values[window.gate(xk.times)]
    if values.size == 0:
        raise InsufficientDataError("no samples inside the window")
    return float(np.mean(values))


def chi2_quantile(p: float, df: float) -> float:
    """Lower-tail chi-square quantile via inversion of the regularised incomplete gamma."""
    if not 0.0 < p < 1.0:
        raise ConfigError(f"probability must be in (0, 1), got {p}")
    return float(2.0 * gammaincinv(df / 2.0, p))


def whiteness_test(x: SampleSeries, max_lag: int = 20, alpha: float = 0.05) -> WhitenessResult:
    """Ljung-Box portmanteau test of the first ``max_lag`` autocorrelations.

    ``Q = n(n+2) sum_k rho_k**2 / (n-k)`` is compared with the upper-``alpha``
    chi-square quantile on ``max_lag`` degrees of freedom. The fraction of
    lags outside ``+-z_{1-alpha/2}/sqrt(n)`` is reported alongside.
    """
    n = len(x)
    if max_lag < 1:
        raise ConfigError(f"max_lag must be at least 1, got {max_lag}")
    if n < 5 * max_lag:
        raise InsufficientDataError(f"whiteness test with K={max_lag} needs {5 * max_lag} samples, got {n}")
    if not 0.0 < alpha < 1.0:
        raise ConfigError(f"alpha must be in (0, 1), got {alpha}")
    rho = sample_acf(x, max_lag, normalize=True).values[1:]
    k = np.arange(1, max_lag + 1)
    q = float(n * (n + 2) * np.sum(rho ** 2 / (n - k)))
    band = ndtri(1.0 - alpha / 2.0) / math.sqrt(n)
    return WhitenessResult(max_lag=max_lag, q_statistic=q,
                           threshold=chi2_quantile(1.0 - alpha, max_lag),
                           band_violation_fraction=float(np.mean(np.abs(rho) > band)),
                           alpha=alpha, n=n)
