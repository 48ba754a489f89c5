"""Switch + integrator system: noise in, log-price out, and back again."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateWindowError, InsufficientDataError, InvalidSeriesError
from .series import Ensemble, SampleSeries


@dataclass(frozen=True)
class SwitchWindow:
    """Closed interval ``[t_open, t_close]`` during which the switch passes its input."""

    t_close: float
    t_open: float = 0.0

    def __post_init__(self):
        if not self.t_close > self.t_open:
            raise InvalidSeriesError(
                f"switch must close after it opens: t_open={self.t_open}, t_close={self.t_close}")

    def gate(self, times: np.ndarray) -> np.ndarray:
        """Boolean mask of samples that fall inside the window."""
        return (times >= self.t_open) & (times <= self.t_close)


def apply_switch(x: SampleSeries, w: SwitchWindow) -> SampleSeries:
    """Rectangular truncation: keep samples inside ``w``, zero the rest."""
    inside = w.gate(x.times)
    if not inside.any():
        raise DegenerateWindowError(
            f"window [{w.t_open}, {w.t_close}] contains no sample of the series "
            f"spanning [{x.t0}, {x.time_of(len(x) - 1)}]")
    return x.with_values(np.where(inside, x.values, 0.0))


def integrate(x: SampleSeries, y0: float = 0.0) -> SampleSeries:
    """Left-endpoint running integral; returns ``len(x) + 1`` samples starting at ``y0``.

    ``y[k+1] = y[k] + x[k] * dt`` so that sample 0 is the initial value
    itself rather than the first increment.
    """
    if len(x) == 0:
        raise InsufficientDataError("cannot integrate an empty series")
    y = np.empty(len(x) + 1)
    y[0] = y0
    np.cumsum(x.values * x.dt, out=y[1:])
    y[1:] += y0
    return SampleSeries(x.dt, y, x.t0)


def integrate_ensemble(e: Ensemble, y0: float = 0.0) -> Ensemble:
    """Row-wise :func:`integrate`; row ``i`` is bit-identical to ``integrate(e.path(i))``."""
    m = np.empty((len(e), e.n_samples + 1))
    m[:, 0] = y0
    np.cumsum(e.matrix * e.dt, axis=1, out=m[:, 1:])
    m[:, 1:] += y0
    return Ensemble(spec=e.spec, dt=e.dt, matrix=m, t0=e.t0, first_path=e.first_path,
                    kind="logprice")


def log_returns(y: SampleSeries, span: int = 1) -> SampleSeries:
    """``r[k] = y[k+span] - y[k]`` on the grid of ``y``."""
    if span < 1:
        raise InvalidSeriesError(f"span must be a positive integer, got {span}")
    if len(y) <= span:
        raise InsufficientDataError(f"need more than {span} samples for span {span}, got {len(y)}")
    return y.with_values(y.values[span:] - y.values[:-span])


def average_speed(y: SampleSeries) -> SampleSeries:
    """Running average speed ``v[k] = y[k] / t[k]`` for ``k >= 1``.

    The path must start at the origin (``t0 == 0`` and ``y[0] == 0``); the
    origin itself is dropped because the speed is undefined there.
    """
    if y.t0 != 0.0 or y.values[0] != 0.0:
        raise InvalidSeriesError(
            f"average speed needs a path anchored at the origin, got t0={y.t0}, y0={y.values[0]}")
    if len(y) < 2:
        raise InsufficientDataError("average speed needs at least one sample after the origin")
    out = SampleSeries(y.dt, y.values[1:], y.dt)
    return out.with_values(out.values / out.times)


@dataclass(frozen=True)
class Trend:
    slope: float
    residual: SampleSeries


def trend_component(y: SampleSeries) -> Trend:
    """Endpoint-anchored linear trend.

    The slope is the terminal average speed ``(y[N] - y[0]) / T``, i.e. the
    realised DC level of the increments. The residual vanishes at both ends.
    """
    if len(y) < 2:
        raise InsufficientDataError("trend needs at least two samples")
    elapsed = y.times - y.t0
    slope = (y.values[-1] - y.values[0]) / elapsed[-1]
    residual = y.values - y.values[0] - slope * elapsed
    residual[-1] = 0.0
    return Trend(slope=float(slope), residual=y.with_values(residual))


def trend_lstsq(y: SampleSeries) -> Trend:
    """Ordinary least-squares line; offered for empirical data with a free intercept."""
    if len(y) < 2:
        raise InsufficientDataError("trend needs at least two samples")
    t = y.times
    slope, intercept = np.polyfit(t, y.values, 1)
    return Trend(slope=float(slope), residual=y.with_values(y.values - (intercept + slope * t)))
