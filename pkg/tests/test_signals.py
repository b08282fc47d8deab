import math

import numpy as np
import pytest

from tsdev import (AlignmentError, NoiseSpec, SampledSignal, Window, average_power, delayed,
                   gen_noise, gen_sine, intercept, make_rng, mix_at_snr)
from tsdev.signals import channel_pair, gated, grid_shift, snr_scale


class TestGenSine:
    def test_fig1_sine_length_and_first_sample(self):
        s = gen_sine(20.0, 1.0, 0.0, 0.2, 100_000.0)
        assert len(s) == 20_000
        assert s.samples[0] == 0.0

    def test_zero_amplitude(self):
        s = gen_sine(7.0, 0.0, 1.3, 0.5, 1000.0)
        assert not np.any(s.samples)

    def test_phase_offset(self):
        s = gen_sine(1.0, 1.0, math.pi / 2, 1.0, 1000.0)
        assert s.samples[0] == pytest.approx(1.0)
        assert s.samples[250] == pytest.approx(0.0, abs=1e-12)

    @pytest.mark.parametrize("args", [(0.0, 1, 0, 1, 1e3), (-1.0, 1, 0, 1, 1e3),
                                      (1.0, 1, 0, 0.0, 1e3)])
    def test_rejects_bad_arguments(self, args):
        with pytest.raises(ValueError):
            gen_sine(*args)

    def test_rejects_undersampling(self):
        with pytest.raises(ValueError, match="rate"):
            gen_sine(100.0, 1.0, 0.0, 1.0, 400.0)

    def test_samples_are_read_only(self):
        s = gen_sine(20.0, 1.0, 0.0, 0.1, 1e4)
        with pytest.raises(ValueError):
            s.samples[0] = 2.0


class TestGenNoise:
    def test_linear_drift_is_exact(self):
        s = gen_noise(NoiseSpec.linear_drift(100.0), 1.0, 1000.0)
        np.testing.assert_allclose(s.samples, 0.1 * np.arange(1000), rtol=0, atol=1e-12)

    def test_white_is_deterministic_per_seed(self):
        a = gen_noise(NoiseSpec.white(), 0.1, 1e4, seed=7)
        b = gen_noise(NoiseSpec.white(), 0.1, 1e4, seed=7)
        c = gen_noise(NoiseSpec.white(), 0.1, 1e4, seed=8)
        np.testing.assert_array_equal(a.samples, b.samples)
        assert not np.array_equal(a.samples, c.samples)

    def test_white_with_power(self):
        s = gen_noise(NoiseSpec.white(power_rad2=4.0), 1.0, 1e5, seed=1)
        assert np.var(s.samples) == pytest.approx(4.0, rel=0.03)

    def test_streams_are_independent(self):
        a = gen_noise(NoiseSpec.white(), 1.0, 1e4, seed=7, stream=0)
        b = gen_noise(NoiseSpec.white(), 1.0, 1e4, seed=7, stream=1)
        assert abs(np.corrcoef(a.samples, b.samples)[0, 1]) < 0.05

    def test_bandlimited_power_stays_in_band(self):
        fs = 2000.0
        s = gen_noise(NoiseSpec.bandlimited(40.0, 20.0, 0.5), 10.0, fs, seed=3)
        spec = np.abs(np.fft.rfft(s.samples)) ** 2
        f = np.fft.rfftfreq(len(s), 1 / fs)
        inside = spec[(f >= 30.0) & (f <= 50.0)].sum()
        assert inside / spec.sum() >= 0.99
        assert average_power(s) == pytest.approx(0.5, rel=1e-9)

    def test_bandlimited_above_nyquist_rejected(self):
        with pytest.raises(ValueError):
            gen_noise(NoiseSpec.bandlimited(450.0, 200.0, 1.0), 1.0, 1000.0)

    def test_bandlimited_below_zero_rejected(self):
        with pytest.raises(ValueError, match="below 0"):
            NoiseSpec.bandlimited(10.0, 30.0, 1.0)

    def test_lowfreq_sine_is_deterministic_in_absolute_time(self):
        spec = NoiseSpec.lowfreq_sine(0.5, 2.0)
        s = gen_noise(spec, 1.0, 100.0, start_time_s=3.0)
        np.testing.assert_allclose(s.samples, 2.0 * np.sin(np.pi * s.times), atol=1e-12)

    def test_unknown_kind(self):
        with pytest.raises(ValueError, match="unknown noise kind"):
            NoiseSpec("pink")


class TestDelay:
    def test_zero_delay_is_identity(self):
        s = gen_sine(20.0, 1.0, 0.0, 0.1, 1e5)
        np.testing.assert_array_equal(delayed(s, 0.0).samples, s.samples)

    def test_fig1_delay_is_ten_samples(self):
        assert grid_shift(100e-6, 100_000.0) == 10
        src = gen_sine(20.0, 1.0, 0.0, 0.3, 1e5)
        x1, x2 = channel_pair(src, 100e-6, Window(0.01, 0.2))
        np.testing.assert_array_equal(x2.samples, src.samples[990:990 + 20_000])
        np.testing.assert_array_equal(x1.samples, src.samples[1000:1000 + 20_000])

    def test_unit_shift(self):
        s = SampledSignal(np.arange(10.0), 10.0)
        d = delayed(s, 0.1)
        assert d.start_time_s == pytest.approx(0.1)
        np.testing.assert_array_equal(d.samples, s.samples)
        assert d.index_of(0.5) == 4

    def test_off_grid_delay_names_neighbours(self):
        with pytest.raises(AlignmentError) as info:
            grid_shift(105e-6, 100_000.0)
        assert info.value.nearest == pytest.approx((100e-6, 110e-6))
        assert "0.0001" in str(info.value) and "0.00011" in str(info.value)


class TestIntercept:
    def test_full_window_is_identity(self):
        s = gen_sine(20.0, 1.0, 0.0, 0.1, 1e4)
        np.testing.assert_array_equal(intercept(s, Window.full(s)).samples, s.samples)

    def test_fig1_window_length(self):
        s = gen_sine(20.0, 1.0, 0.0, 0.3, 1e5)
        assert len(intercept(s, Window(0.0, 0.2))) == 20_000

    def test_shifted_start(self):
        s = SampledSignal(np.arange(100.0), 100.0)
        a = intercept(s, Window(0.10, 0.2))
        b = intercept(s, Window(0.11, 0.2))
        np.testing.assert_array_equal(b.samples, a.samples + 1)

    def test_out_of_bounds(self):
        s = SampledSignal(np.zeros(100), 100.0)
        with pytest.raises(ValueError):
            intercept(s, Window(0.5, 0.6))


class TestPower:
    def test_zero_signal(self):
        assert average_power(SampledSignal(np.zeros(50), 10.0)) == 0.0

    @pytest.mark.parametrize("halves", [1, 2, 3, 8])
    def test_half_period_multiples(self, halves):
        s = gen_sine(20.0, 1.0, 0.3, 1.0, 1e5)
        assert average_power(s, Window(0.0123, halves * 0.025)) == pytest.approx(0.5, abs=1e-9)

    def test_mix_at_zero_db(self):
        sig = gen_sine(20.0, 1.0, 0.0, 0.2, 1e4)
        noise = gen_noise(NoiseSpec.white(), 0.2, 1e4, seed=2)
        mixed = mix_at_snr(sig, noise, 0.0)
        added = mixed.with_samples(mixed.samples - sig.samples)
        assert average_power(added) == pytest.approx(average_power(sig), rel=1e-12)

    def test_mix_at_30db_variance(self):
        sig = gen_sine(20.0, 1.0, 0.0, 0.2, 1e5)
        noise = gen_noise(NoiseSpec.white(), 0.2, 1e5, seed=2)
        k = snr_scale(sig, noise, 30.0)
        assert average_power(noise.scaled(k)) == pytest.approx(0.5e-3, rel=1e-9)

    def test_zero_power_snr_rejected(self):
        sig = SampledSignal(np.zeros(10), 10.0)
        with pytest.raises(ValueError, match="undefined"):
            mix_at_snr(sig, SampledSignal(np.ones(10), 10.0), 10.0)


def test_gated_zeroes_outside():
    s = SampledSignal(np.ones(10), 10.0)
    g = gated(s, 0.3, 0.6)
    np.testing.assert_array_equal(g.samples, [0, 0, 0, 1, 1, 1, 0, 0, 0, 0])


def test_make_rng_keys_differ():
    a = make_rng(1, 0, 0).standard_normal(4)
    b = make_rng(1, 1, 0).standard_normal(4)
    c = make_rng(1, 0, 0).standard_normal(4)
    assert not np.array_equal(a, b)
    np.testing.assert_array_equal(a, c)


def test_nearby_seeds_do_not_share_trials():
    # seed 0 / trial 1 and seed 1 / trial 0 must be unrelated streams
    a = make_rng(0, 1).standard_normal(8)
    b = make_rng(1, 0).standard_normal(8)
    assert not np.array_equal(a, b)
