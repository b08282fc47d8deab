"""Randomized invariants of the shift curves."""

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from tsdev import (EstimatorInput, SampledSignal, Window, cc_curve, estimate_delay, pncc_curve,
                   tsdev_curve, tsdev_curve_fast)

FS = 1000.0


@st.composite
def pairs(draw, max_n=512, max_m=24):
    n = draw(st.integers(16, max_n))
    m = draw(st.integers(0, max_m))
    seed = draw(st.integers(0, 2 ** 32 - 1))
    scale = draw(st.floats(1e-2, 1e2))
    rng = np.random.default_rng(seed)
    lag = draw(st.integers(-m, m))
    a = rng.standard_normal(n + 2 * m) * scale
    # x2 is x1 moved by ``lag`` samples plus independent noise
    b = np.roll(a, lag) + 0.3 * scale * rng.standard_normal(a.size)
    start = -m / FS
    return EstimatorInput(SampledSignal(a, FS, start), SampledSignal(b, FS, start),
                          Window(0.0, n / FS), (-m / FS, m / FS))


def _with(inp, f1, f2):
    t1, t2 = inp.x1.times, inp.x2.times
    return EstimatorInput(inp.x1.with_samples(f1(inp.x1.samples, t1)),
                          inp.x2.with_samples(f2(inp.x2.samples, t2)), inp.window, inp.tau_range_s)


@settings(max_examples=60, deadline=None)
@given(pairs())
def test_tsdev_nonnegative(inp):
    assert np.all(tsdev_curve(inp).values >= -1e-12)
    assert np.all(tsdev_curve_fast(inp).values >= -1e-12)


@settings(max_examples=60, deadline=None)
@given(pairs(), st.floats(-1e3, 1e3), st.floats(-1e3, 1e3))
def test_offset_immunity(inp, c1, c2):
    ref = tsdev_curve(inp).values
    moved = _with(inp, lambda x, t: x + c1, lambda x, t: x + c2)
    np.testing.assert_allclose(tsdev_curve(moved).values, ref, rtol=0, atol=1e-10 * max(1, ref.max()))
    np.testing.assert_allclose(tsdev_curve_fast(moved).values, ref, rtol=0,
                               atol=1e-10 * max(1, ref.max()))


@settings(max_examples=60, deadline=None)
@given(pairs(), st.floats(-100.0, 100.0))
def test_common_drift_immunity(inp, k):
    ref = tsdev_curve(inp).values
    drifted = _with(inp, lambda x, t: x + k * t, lambda x, t: x + k * t)
    np.testing.assert_allclose(tsdev_curve(drifted).values, ref, rtol=0, atol=1e-9)
    np.testing.assert_allclose(tsdev_curve_fast(drifted).values, ref, rtol=0, atol=1e-9)


@settings(max_examples=40, deadline=None)
@given(st.floats(-100.0, 100.0), st.integers(16, 2000), st.integers(0, 40))
def test_drift_nullity(k, n, m):
    total = n + 2 * m
    start = -m / FS
    t = start + np.arange(total) / FS
    x = SampledSignal(k * t, FS, start)
    inp = EstimatorInput(x, x, Window(0.0, n / FS), (-m / FS, m / FS))
    assert np.max(np.abs(tsdev_curve(inp).values)) < 1e-10
    assert np.max(np.abs(tsdev_curve_fast(inp).values)) < 1e-10


@settings(max_examples=60, deadline=None)
@given(pairs())
def test_pncc_bounded(inp):
    assert np.all(np.abs(pncc_curve(inp).values) <= 1 + 1e-12)


@settings(max_examples=60, deadline=None)
@given(pairs(), st.floats(1e-3, 1e3))
def test_amplitude_scaling(inp, a):
    scaled = _with(inp, lambda x, t: a * x, lambda x, t: a * x)
    ts0, ts1 = tsdev_curve(inp), tsdev_curve(scaled)
    np.testing.assert_allclose(ts1.values, a * a * ts0.values, rtol=1e-9, atol=1e-300)
    if np.unique(ts0.values).size == ts0.values.size:
        assert estimate_delay(ts1).tau_s == estimate_delay(ts0).tau_s
    np.testing.assert_allclose(pncc_curve(scaled).values, pncc_curve(inp).values, rtol=0,
                               atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(8, 17), st.integers(0, 2 ** 32 - 1))
def test_fast_equals_naive_across_sizes(log_n, seed):
    rng = np.random.default_rng(seed)
    n = 2 ** log_n
    m = min(64, n // 4)
    x = rng.standard_normal(n + 2 * m)
    y = rng.standard_normal(n + 2 * m) + 5.0
    start = -m / FS
    inp = EstimatorInput(SampledSignal(x, FS, start), SampledSignal(y, FS, start),
                         Window(0.0, n / FS), (-m / FS, m / FS))
    a, b = tsdev_curve(inp).values, tsdev_curve_fast(inp).values
    assert np.max(np.abs(a - b) / np.abs(a)) < 1e-9


@settings(max_examples=40, deadline=None)
@given(st.floats(0.0, 0.05), st.floats(0.1, 0.3), st.integers(-30, 30))
def test_clean_sine_exactness(t0, tw, k):
    fs = 100_000.0
    t0 = round(t0 * fs) / fs
    tw = round(tw * fs) / fs
    m = 40
    tau0 = k / fs
    start = t0 - m / fs
    t = start + np.arange(int(round(tw * fs)) + 2 * m) / fs
    w = 2 * np.pi * 20.0
    inp = EstimatorInput(SampledSignal(np.sin(w * t), fs, start),
                         SampledSignal(np.sin(w * (t - tau0)), fs, start),
                         Window(t0, tw), (-m / fs, m / fs))
    assert estimate_delay(tsdev_curve_fast(inp)).index == k + m
    half_periods = tw / 0.025
    if abs(half_periods - round(half_periods)) < 1e-9:
        assert estimate_delay(cc_curve(inp)).index == k + m
