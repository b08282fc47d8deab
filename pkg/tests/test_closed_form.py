"""Analytic sine curves checked against hand values and the discrete estimators."""

import numpy as np
import pytest

from conftest import sine_input
from tsdev import Window, average_power, cc_curve, gen_sine, tsdev_curve
from tsdev.closed_form import (sine_average_power, sine_cc_closed_form, sine_tsdev_closed_form,
                               sine_tsdev_full_period, sine_tsdev_mean)

W = 2 * np.pi * 20.0
T = 0.05


def test_cc_half_period_window_drops_second_term():
    tau = np.linspace(-1e-3, 1e-3, 21)
    for n in (1, 3, 8):
        got = sine_cc_closed_form(W, 1e-4, 0.0123, n * T / 2, tau)
        np.testing.assert_allclose(got, 0.5 * np.cos(W * (tau - 1e-4)), atol=1e-12)


def test_cc_hand_value():
    # w tw = pi / 2, t0 = 0, tau = tau0
    w = 1.0
    assert sine_cc_closed_form(w, 0.0, 0.0, np.pi / 2, 0.0) == pytest.approx(0.5)


def test_tsdev_zero_at_true_delay():
    rng = np.random.default_rng(0)
    for _ in range(50):
        t0, tw, tau0 = rng.uniform(0, 1), rng.uniform(0.01, 1), rng.uniform(-1e-3, 1e-3)
        assert abs(sine_tsdev_closed_form(W, tau0, t0, tw, tau0)) < 1e-15


def test_tsdev_reduces_to_cosine_on_whole_periods():
    tau = np.linspace(-2e-3, 2e-3, 41)
    got = sine_tsdev_closed_form(W, 1e-4, 0.0377, 4 * T, tau)
    np.testing.assert_allclose(got, sine_tsdev_full_period(W, 1e-4, tau), atol=1e-12)


def test_tsdev_closed_form_matches_direct_quadrature():
    t0, tw, tau0 = 0.011, 0.1173, 1e-4
    t = t0 + (np.arange(2_000_000) + 0.5) * tw / 2_000_000
    for tau in (-4e-4, 0.0, 3e-4, 2e-3):
        d = np.sin(W * t) - np.sin(W * (t + tau - tau0))
        assert sine_tsdev_closed_form(W, tau0, t0, tw, tau) == pytest.approx(np.var(d), abs=1e-10)
        assert sine_tsdev_mean(W, tau0, t0, tw, tau) == pytest.approx(np.mean(d), abs=1e-10)


@pytest.mark.parametrize("t0,tw", [(0.0, 0.2), (0.0123, 0.1125), (0.031, 0.2371)])
def test_discrete_curves_track_closed_forms(t0, tw):
    inp = sine_input(t0_s=t0, tw_s=tw, k_max=100)
    cc, ts = cc_curve(inp), tsdev_curve(inp)
    np.testing.assert_allclose(cc.values, sine_cc_closed_form(W, 1e-4, t0, tw, cc.taus_s),
                               atol=1e-3)
    np.testing.assert_allclose(ts.values, sine_tsdev_closed_form(W, 1e-4, t0, tw, ts.taus_s),
                               atol=1e-3)


def test_average_power_half_periods_and_oracle():
    assert sine_average_power(W, 0.017, 3 * T / 2) == pytest.approx(0.5, abs=1e-12)
    fs = 1e7
    s = gen_sine(20.0, 1.0, 0.0, 0.12, fs)
    for t0, tw in ((0.0, 0.0731), (0.0113, 0.1), (0.02, 0.0917)):
        got = average_power(s, Window(t0, tw))
        assert got == pytest.approx(sine_average_power(W, t0, tw), abs=1e-6)


def test_rejects_nonpositive_window():
    with pytest.raises(ValueError):
        sine_cc_closed_form(W, 0, 0, 0.0, 0)
    with pytest.raises(ValueError):
        sine_average_power(W, 0, -1.0)
