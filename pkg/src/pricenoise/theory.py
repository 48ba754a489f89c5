"""Closed-form time- and frequency-domain characteristics of the model.

Frequencies are angular (radians per time unit) unless a name says
otherwise; ``angular_frequency`` / ``ordinary_frequency`` convert.

The price spectrum is the Fourier transform of the even, triangular
autocorrelation ``n0 * (T - |tau|)`` on ``|tau| <= T``::

    S(w) = n0 * T**2 * sinc(w * T / 2)**2

Its first zeros sit at ``|w| = 2*pi/T``. The variant with ``sinc(w*T)``
(zeros at ``pi/T``) is available as ``literal=True`` for comparison
plots only; it is not the transform of the triangle.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import sici

from .errors import ConfigError, InvalidSeriesError

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class TheoryParams:
    n0: float
    horizon: float

    def __post_init__(self):
        for name in ("n0", "horizon"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ConfigError(f"{name} must be positive and finite, got {value!r}")


def sinc(x):
    """Unnormalised sinc, ``sin(x)/x`` with the removable point ``sinc(0) = 1``.

    Accepts scalars or arrays; scalars come back as float.
    """
    x = np.asarray(x, dtype=np.float64)
    zero = x == 0.0
    safe = np.where(zero, 1.0, x)
    out = np.where(zero, 1.0, np.sin(safe) / safe)
    return float(out) if out.ndim == 0 else out


def acf_noise(tau: float, n0: float, dt: float, rtol: float = 1e-9) -> float:
    """Grid rendering of ``n0 * delta(tau)``: ``n0/dt`` at lag 0, else 0.

    ``tau`` must be a multiple of ``dt`` (to ``rtol``).
    """
    k = tau / dt
    nearest = round(k)
    if abs(k - nearest) > rtol * max(1.0, abs(k)):
        raise InvalidSeriesError(f"lag {tau!r} is not on the grid of step {dt!r}")
    return n0 / dt if nearest == 0 else 0.0


def acf_price(tau, t: float, n0: float):
    """Triangular price autocorrelation ``n0 * (t - |tau|)``, zero beyond ``|tau| > t``."""
    tau = np.asarray(tau, dtype=np.float64)
    out = n0 * np.clip(t - np.abs(tau), 0.0, None)
    return float(out) if out.ndim == 0 else out


def psd_price(omega, params: TheoryParams, literal: bool = False):
    """Finite-horizon price PSD at angular frequency ``omega``.

    With ``literal=True`` the argument of the sinc is ``omega*T`` instead of
    ``omega*T/2``; both agree at ``omega = 0`` where they equal ``n0*T**2``.
    """
    big_t = params.horizon
    arg = np.asarray(omega, dtype=np.float64) * big_t
    if not literal:
        arg = arg / 2.0
    out = params.n0 * big_t * big_t * np.square(sinc(arg))
    return float(out) if np.ndim(out) == 0 else out


def psd_noise(omega, n0: float):
    omega = np.asarray(omega, dtype=np.float64)
    out = np.full(omega.shape, float(n0))
    return float(out) if out.ndim == 0 else out


def main_lobe_fraction() -> float:
    """Share of the sinc**2 energy that lies between its first zeros.

    ``int_{-pi}^{pi} sinc(u)**2 du / pi``. Integrating by parts gives
    ``2 * Si(2*pi) / pi`` with ``Si`` the sine integral.
    """
    si, _ = sici(TWO_PI)
    return float(2.0 * si / math.pi)


def main_lobe_halfwidth(params: TheoryParams, literal: bool = False) -> float:
    """First zero of the price PSD in angular frequency."""
    return (math.pi if literal else TWO_PI) / params.horizon


def angular_frequency(xi):
    return TWO_PI * np.asarray(xi, dtype=np.float64) if np.ndim(xi) else TWO_PI * float(xi)


def ordinary_frequency(omega):
    return np.asarray(omega, dtype=np.float64) / TWO_PI if np.ndim(omega) else float(omega) / TWO_PI


def psd_curve(params: TheoryParams, omega_max: float, points: int = 1001, literal: bool = False):
    """``(omega, S)`` arrays on a symmetric grid, for plotting."""
    omega = np.linspace(-omega_max, omega_max, points)
    return omega, psd_price(omega, params, literal=literal)


def acf_curve(params: TheoryParams, points: int = 1001):
    """``(tau, R)`` arrays over ``[-T, T]``."""
    tau = np.linspace(-params.horizon, params.horizon, points)
    return tau, acf_price(tau, params.horizon, params.n0)
