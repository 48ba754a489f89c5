"""Sampled series and noise specifications shared by every module.

Continuous-time objects are rendered on a uniform grid ``t_k = t0 + k*dt``.
White noise of intensity ``n0`` (autocorrelation ``n0 * delta(tau)``)
becomes i.i.d. samples with variance ``n0 / dt``, and the running integral
is the left-endpoint sum ``y_k = sum_{i<k} x_i * dt``. Under this
convention the ensemble variance of ``y`` equals ``n0 * t_k`` exactly on
every grid point.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import ConfigError, InvalidSeriesError

DISTRIBUTIONS = ("gaussian", "uniform", "rademacher")


def _frozen(values) -> np.ndarray:
    arr = np.array(values, dtype=np.float64, copy=True)
    if arr.ndim != 1:
        raise InvalidSeriesError(f"values must be one-dimensional, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class SampleSeries:
    """Uniformly sampled real signal.

    Instances are immutable; ``values`` is a read-only float64 array.
    Equality is bit-exact on ``dt``, ``t0`` and every value.
    """

    dt: float
    values: np.ndarray
    t0: float = 0.0

    def __post_init__(self):
        dt = float(self.dt)
        t0 = float(self.t0)
        if not math.isfinite(dt) or dt <= 0:
            raise InvalidSeriesError(f"dt must be positive and finite, got {self.dt!r}")
        if not math.isfinite(t0):
            raise InvalidSeriesError(f"t0 must be finite, got {self.t0!r}")
        values = self.values
        if not (isinstance(values, np.ndarray) and values.dtype == np.float64
                and not values.flags.writeable and values.ndim == 1):
            values = _frozen(values)
        if not np.all(np.isfinite(values)):
            bad = int(np.flatnonzero(~np.isfinite(values))[0])
            raise InvalidSeriesError(f"non-finite value at index {bad}: {values[bad]!r}")
        object.__setattr__(self, "dt", dt)
        object.__setattr__(self, "t0", t0)
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return self.values.shape[0]

    def __eq__(self, other):
        if not isinstance(other, SampleSeries):
            return NotImplemented
        return (self.dt == other.dt and self.t0 == other.t0
                and self.values.shape == other.values.shape
                and bool(np.all(self.values.view(np.int64) == other.values.view(np.int64))))

    __hash__ = None

    @property
    def times(self) -> np.ndarray:
        return self.t0 + np.arange(len(self)) * self.dt

    @property
    def duration(self) -> float:
        """Time between the first and the last sample."""
        return (len(self) - 1) * self.dt

    def time_of(self, k: int) -> float:
        return self.t0 + k * self.dt

    def index_of(self, t: float) -> int:
        """Grid index nearest to time ``t``."""
        return int(round((t - self.t0) / self.dt))

    def with_values(self, values) -> "SampleSeries":
        """Same grid, new values."""
        return SampleSeries(self.dt, values, self.t0)


def make_series(dt: float, t0: float, values: Iterable[float]) -> SampleSeries:
    if not isinstance(values, np.ndarray):
        values = list(values)
    return SampleSeries(dt=dt, values=np.asarray(values, dtype=np.float64), t0=t0)


@dataclass(frozen=True)
class NoiseSpec:
    """Reproducible white-noise source.

    ``n0`` is the delta-correlation intensity; rendered at step ``dt`` the
    per-sample variance is ``n0 / dt``.
    """

    n0: float
    dist: str = "gaussian"
    seed: int = 0

    def __post_init__(self):
        n0 = float(self.n0)
        if not math.isfinite(n0) or n0 <= 0:
            raise ConfigError(f"n0 must be positive and finite, got {self.n0!r}")
        if self.dist not in DISTRIBUTIONS:
            raise ConfigError(
                f"unsupported distribution {self.dist!r}; choose one of {', '.join(DISTRIBUTIONS)}")
        seed = int(self.seed)
        if not 0 <= seed < 2**64:
            raise ConfigError(f"seed must fit in an unsigned 64-bit integer, got {self.seed!r}")
        object.__setattr__(self, "n0", n0)
        object.__setattr__(self, "seed", seed)

    def variance(self, dt: float) -> float:
        return self.n0 / dt


@dataclass(frozen=True, eq=False)
class Ensemble:
    """Collection of equally gridded sample paths.

    Paths are stored as rows of a read-only matrix; ``first_path`` is the
    stream index of row 0, so a slice of a large ensemble remembers where
    it came from.
    """

    spec: NoiseSpec
    dt: float
    matrix: np.ndarray
    t0: float = 0.0
    first_path: int = 0
    kind: str = field(default="noise")

    def __post_init__(self):
        m = np.array(self.matrix, dtype=np.float64, copy=False)
        if m.ndim != 2:
            raise InvalidSeriesError(f"ensemble matrix must be 2-D, got shape {m.shape}")
        if m.flags.writeable:
            m = m.copy()
            m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def __len__(self) -> int:
        return self.matrix.shape[0]

    def __eq__(self, other):
        if not isinstance(other, Ensemble):
            return NotImplemented
        return (self.spec == other.spec and self.dt == other.dt and self.t0 == other.t0
                and self.first_path == other.first_path
                and self.matrix.shape == other.matrix.shape
                and bool(np.all(self.matrix.view(np.int64) == other.matrix.view(np.int64))))

    __hash__ = None

    @property
    def n_samples(self) -> int:
        return self.matrix.shape[1]

    @property
    def stream_ids(self) -> range:
        return range(self.first_path, self.first_path + len(self))

    def path(self, i: int) -> SampleSeries:
        return SampleSeries(self.dt, self.matrix[i], self.t0)

    @property
    def paths(self) -> tuple[SampleSeries, ...]:
        return tuple(self.path(i) for i in range(len(self)))


def _fmt(x: float) -> str:
    # repr round-trips float64 exactly and never uses thousands separators
    return repr(float(x))


def series_to_csv(series: SampleSeries, header: Sequence[str] = ("t", "value"),
                  comments: Sequence[str] = ()) -> str:
    buf = io.StringIO()
    for line in comments:
        buf.write(f"# {line}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for t, v in zip(series.times, series.values):
        writer.writerow((_fmt(t), _fmt(v)))
    return buf.getvalue()


def write_series_csv(path, series: SampleSeries, comments: Sequence[str] = ()) -> None:
    Path(path).write_text(series_to_csv(series, comments=comments), encoding="utf-8")


def read_series_csv(path, dt: float | None = None, rtol: float = 1e-9) -> SampleSeries:
    """Read a ``t,value`` CSV written by :func:`write_series_csv`.

    ``dt`` is inferred from the time column unless given; the time column
    must advance uniformly (to ``rtol``) and strictly.
    """
    times, values = [], []
    with open(path, newline="", encoding="utf-8") as fh:
        rows = (row for row in csv.reader(fh) if row and not row[0].startswith("#"))
        header = next(rows, None)
        if header is None or [h.strip() for h in header[:2]] != ["t", "value"]:
            raise InvalidSeriesError(f"{path}: expected header 't,value', got {header!r}")
        for lineno, row in enumerate(rows, start=2):
            try:
                times.append(float(row[0]))
                values.append(float(row[1]))
            except (ValueError, IndexError) as exc:
                raise InvalidSeriesError(f"{path}: bad row {lineno}: {row!r}") from exc
    if not values:
        raise InvalidSeriesError(f"{path}: no samples")
    t = np.asarray(times)
    steps = np.diff(t)
    if np.any(steps <= 0):
        raise InvalidSeriesError(f"{path}: time column is not strictly increasing")
    if dt is None:
        if len(t) < 2:
            raise InvalidSeriesError(f"{path}: cannot infer dt from a single sample")
        dt = (t[-1] - t[0]) / (len(t) - 1)
    if len(t) > 1 and not np.allclose(steps, dt, rtol=rtol, atol=0.0):
        raise InvalidSeriesError(f"{path}: time column is not uniformly spaced by dt={dt!r}")
    return SampleSeries(dt=dt, values=np.asarray(values), t0=t[0])
