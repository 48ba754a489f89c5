import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from pricenoise.errors import DegenerateWindowError, InsufficientDataError, InvalidSeriesError
from pricenoise.noisegen import generate_noise, iter_ensemble
from pricenoise.pricemodel import (
    SwitchWindow,
    apply_switch,
    average_speed,
    integrate,
    integrate_ensemble,
    log_returns,
    trend_component,
    trend_lstsq,
)
from pricenoise.series import NoiseSpec, SampleSeries, make_series

# ulp bounds are meaningless for subnormals, which noise samples never are
finite = st.floats(-1e6, 1e6, allow_nan=False, allow_subnormal=False)
TINY = np.finfo(float).tiny
noise_arrays = arrays(np.float64, st.integers(1, 200), elements=finite)
steps = st.sampled_from([1.0, 0.5, 0.25, 2.0, 1 / 252])


def test_switch_identity_when_covering():
    x = make_series(1.0, 0.0, np.arange(10.0))
    assert apply_switch(x, SwitchWindow(t_open=-1.0, t_close=100.0)) == x


def test_switch_outside_span():
    x = make_series(1.0, 0.0, np.ones(10))
    with pytest.raises(DegenerateWindowError):
        apply_switch(x, SwitchWindow(t_open=20.0, t_close=30.0))


def test_switch_half_window():
    x = make_series(1.0, 0.0, np.ones(10))
    out = apply_switch(x, SwitchWindow(t_open=0.0, t_close=4.0))
    assert out.values.tolist() == [1.0] * 5 + [0.0] * 5


def test_window_must_close_after_opening():
    with pytest.raises(InvalidSeriesError):
        SwitchWindow(t_open=2.0, t_close=2.0)


@given(noise_arrays, st.floats(-5, 5), st.floats(0.1, 20))
def test_switch_idempotent(values, t_open, width):
    x = SampleSeries(0.5, values)
    w = SwitchWindow(t_open=t_open, t_close=t_open + width)
    try:
        once = apply_switch(x, w)
    except DegenerateWindowError:
        return
    assert apply_switch(once, w) == once


def test_integrate_unit_ramp():
    y = integrate(make_series(1.0, 0.0, [1, 1, 1]), 0.0)
    assert y.values.tolist() == [0.0, 1.0, 2.0, 3.0]
    assert y.dt == 1.0


def test_integrate_zeros_is_constant():
    y = integrate(make_series(0.5, 0.0, np.zeros(7)), 2.5)
    assert np.all(y.values == 2.5)
    assert len(y) == 8


def test_integrate_scales_by_dt():
    y = integrate(make_series(0.25, 0.0, [4.0, 4.0]))
    assert y.values.tolist() == [0.0, 1.0, 2.0]


def test_log_returns_of_ramp():
    r = log_returns(make_series(1.0, 0.0, [0, 1, 2, 3]), 1)
    assert r.values.tolist() == [1.0, 1.0, 1.0]


def test_log_returns_span():
    r = log_returns(make_series(1.0, 0.0, [0, 1, 4, 9, 16]), 2)
    assert r.values.tolist() == [4.0, 8.0, 12.0]


def test_log_returns_insufficient():
    with pytest.raises(InsufficientDataError):
        log_returns(make_series(1.0, 0.0, [5.0]), 1)


@given(noise_arrays, steps)
def test_integrate_and_difference_are_inverse(values, dt):
    x = SampleSeries(dt, values)
    y = integrate(x)
    back = log_returns(y, 1).values / dt
    # each increment is a difference of two rounded partial sums
    scale = np.maximum(np.abs(y.values[1:]), np.abs(y.values[:-1])) / dt
    assert np.all(np.abs(back - values) <= 4 * np.finfo(float).eps * (scale + np.abs(values)) + TINY)


@settings(max_examples=50)
@given(noise_arrays, st.data(), finite)
def test_memory_property(values, data, delta):
    x = SampleSeries(1.0, values)
    j = data.draw(st.integers(0, len(values) - 1))
    bumped = values.copy()
    bumped[j] += delta
    y0 = integrate(x).values
    y1 = integrate(SampleSeries(1.0, bumped)).values
    assert np.array_equal(y0[: j + 1], y1[: j + 1])
    change = y1[j + 1:] - y0[j + 1:]
    actual = bumped[j] - values[j]
    tol = 1e-9 * (np.abs(y0[j + 1:]) + np.abs(y1[j + 1:]) + abs(actual))
    assert np.all(np.abs(change - actual) <= tol)


def test_integrate_ensemble_matches_rows():
    spec = NoiseSpec(1.0, "uniform", 4)
    e = next(iter_ensemble(spec, 5, 100, 0.1, chunk=5))
    ye = integrate_ensemble(e)
    for i in range(5):
        assert ye.path(i) == integrate(e.path(i))


def test_average_speed_constant_ramp():
    v = average_speed(make_series(1.0, 0.0, [0, 2, 4, 6]))
    assert v.values.tolist() == [2.0, 2.0, 2.0]
    assert v.t0 == 1.0


def test_average_speed_requires_origin():
    with pytest.raises(InvalidSeriesError):
        average_speed(make_series(1.0, 1.0, [0, 1, 2]))
    with pytest.raises(InvalidSeriesError):
        average_speed(make_series(1.0, 0.0, [1, 2, 3]))


@given(noise_arrays, steps)
def test_displacement_identity(values, dt):
    y = integrate(SampleSeries(dt, values))
    v = average_speed(y)
    back = v.values * v.times
    target = y.values[1:]
    assert np.all(np.abs(back - target) <= 4 * np.spacing(np.abs(target)) + TINY)


def test_average_speed_variance_decays_like_one_over_t():
    # Var(y(t))/t**2 = n0/t for the integrated process
    spec = NoiseSpec(1.0, "gaussian", 21)
    cols = np.array([100, 1000])
    rows = [integrate_ensemble(e).matrix[:, cols] for e in iter_ensemble(spec, 10_000, 1000, 1.0)]
    v = np.vstack(rows) / cols
    for j, t in enumerate(cols):
        assert np.var(v[:, j], ddof=1) == pytest.approx(1.0 / t, rel=0.05)


def test_integrated_variance_grows_linearly():
    # y(t) only depends on the first t draws of each stream, so n = 10**4 is enough
    spec = NoiseSpec(1.0, "gaussian", 8)
    cols = np.array([100, 1000, 10_000])
    y = np.vstack([integrate_ensemble(e).matrix[:, cols]
                   for e in iter_ensemble(spec, 10_000, 10_000, 1.0)])
    ratio = np.var(y, axis=0, ddof=1) / cols
    assert np.all(np.abs(ratio - 1.0) <= 0.05), ratio


def test_trend_of_ramp():
    tr = trend_component(make_series(0.5, 0.0, 3.0 * 0.5 * np.arange(9)))
    assert tr.slope == 3.0
    assert np.all(tr.residual.values == 0.0)


def test_trend_of_zeros():
    tr = trend_component(make_series(1.0, 0.0, np.zeros(5)))
    assert tr.slope == 0.0


def test_trend_slope_is_endpoint_average_speed():
    x = generate_noise(NoiseSpec(1.0, "gaussian", 2), 500, 0.2)
    y = integrate(x)
    tr = trend_component(y)
    assert tr.slope == (y.values[-1] - y.values[0]) / (500 * 0.2)
    assert tr.slope == pytest.approx(average_speed(y).values[-1], rel=1e-12)
    assert tr.slope == pytest.approx(np.mean(x.values), rel=1e-9)
    assert tr.residual.values[0] == 0.0 and tr.residual.values[-1] == 0.0


def test_trend_lstsq_recovers_line():
    t = np.arange(20.0)
    tr = trend_lstsq(make_series(1.0, 0.0, 1.5 + 0.25 * t))
    assert tr.slope == pytest.approx(0.25)
    assert np.allclose(tr.residual.values, 0.0, atol=1e-12)
