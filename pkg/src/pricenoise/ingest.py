"""Price CSV ingestion and noise-intensity calibration."""
from __future__ import annotations

import csv
import datetime as _dt
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import (
    InsufficientDataError,
    MissingColumnError,
    NonMonotoneTimeError,
    NonPositivePriceError,
    PriceFileError,
    UnparseableValueError,
)
from .series import SampleSeries

MIN_CALIBRATION_SAMPLES = 30


class IrregularSpacingWarning(UserWarning):
    pass


class DegenerateCalibrationWarning(UserWarning):
    pass


@dataclass(frozen=True, eq=False)
class PriceTable:
    """Validated price column with its time axis.

    ``times`` are in abstract units: integer/real indices as given, or
    days since the first row for ISO-8601 dates.
    """

    times: np.ndarray
    prices: np.ndarray
    time_col: str
    price_col: str
    dt: float
    irregular: bool = False
    time_kind: str = "index"
    first_label: str = ""

    def __len__(self):
        return self.prices.shape[0]


def _parse_time(text: str):
    text = text.strip()
    try:
        return float(text), "index"
    except ValueError:
        pass
    try:
        stamp = _dt.datetime.fromisoformat(text)
    except ValueError:
        return None, None
    if stamp.tzinfo is None:
        stamp = stamp.replace(tzinfo=_dt.timezone.utc)
    return stamp.timestamp() / 86400.0, "date"


def load_prices(path, time_col: str = "t", price_col: str = "value") -> PriceTable:
    """Read and validate a price CSV.

    Non-positive prices, unparseable cells, missing columns and
    non-increasing timestamps each raise their own ``PriceFileError``
    subclass naming the line. Irregular spacing is accepted with
    ``dt`` set to the median spacing and an ``IrregularSpacingWarning``.
    """
    times, prices = [], []
    kind = None
    first_label = ""
    with open(path, newline="", encoding="utf-8-sig") as fh:
        reader = csv.reader(row for row in fh if not row.lstrip().startswith("#"))
        header = next(reader, None)
        if header is None:
            raise PriceFileError(f"{path}: empty file", line=1)
        header = [h.strip() for h in header]
        for col in (time_col, price_col):
            if col not in header:
                raise MissingColumnError(f"{path}: no column {col!r} in header {header}", line=1)
        ti, pi = header.index(time_col), header.index(price_col)
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) <= max(ti, pi):
                raise UnparseableValueError(f"{path}: expected {len(header)} fields, got {len(row)}",
                                            line=lineno)
            t, row_kind = _parse_time(row[ti])
            if t is None:
                raise UnparseableValueError(f"{path}: cannot parse time {row[ti]!r}", line=lineno)
            if kind is None:
                kind, first_label = row_kind, row[ti].strip()
            elif row_kind != kind:
                raise UnparseableValueError(f"{path}: mixed date and index timestamps", line=lineno)
            try:
                price = float(row[pi])
            except ValueError:
                raise UnparseableValueError(f"{path}: cannot parse price {row[pi]!r}",
                                            line=lineno) from None
            if not math.isfinite(price):
                raise UnparseableValueError(f"{path}: non-finite price {row[pi]!r}", line=lineno)
            if price <= 0:
                raise NonPositivePriceError(f"{path}: price {price!r} has no logarithm", line=lineno)
            if times and t <= times[-1]:
                raise NonMonotoneTimeError(
                    f"{path}: time {row[ti].strip()!r} does not increase", line=lineno)
            times.append(t)
            prices.append(price)
    if len(prices) < 2:
        raise InsufficientDataError(f"{path}: need at least 2 price rows, got {len(prices)}")
    t = np.asarray(times)
    if kind == "date":
        t = t - t[0]
    steps = np.diff(t)
    dt = float(np.median(steps))
    irregular = not np.allclose(steps, dt, rtol=1e-9, atol=0.0)
    if irregular:
        warnings.warn(f"{path}: irregular time spacing; using median step dt={dt!r}",
                      IrregularSpacingWarning, stacklevel=2)
    return PriceTable(times=t, prices=np.asarray(prices), time_col=time_col, price_col=price_col,
                      dt=dt, irregular=irregular, time_kind=kind, first_label=first_label)


def price_to_logprice(p: PriceTable) -> SampleSeries:
    """Natural log of prices on the uniform grid ``t[0] + k*dt``."""
    return SampleSeries(dt=p.dt, values=np.log(p.prices), t0=float(p.times[0]))


def calibrate_n0(y: SampleSeries) -> float:
    """Noise intensity from a log-price series: ``var(diff(y)) / dt``.

    A series whose increments are constant to rounding (a deterministic
    ramp) yields 0.0 with a ``DegenerateCalibrationWarning``.
    """
    if len(y) < MIN_CALIBRATION_SAMPLES:
        raise InsufficientDataError(
            f"calibration needs at least {MIN_CALIBRATION_SAMPLES} samples, got {len(y)}")
    d = np.diff(y.values)
    var = float(np.var(d, ddof=1))
    scale = float(np.max(np.abs(d)))
    if var <= (64 * np.finfo(float).eps * scale) ** 2:
        warnings.warn("increments are constant; no noise to calibrate", DegenerateCalibrationWarning,
                      stacklevel=2)
        return 0.0
    return var / y.dt
