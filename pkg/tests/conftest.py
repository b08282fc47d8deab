import numpy as np
import pytest

from tsdev import EstimatorInput, SampledSignal, Window


def sine_input(freq_hz=20.0, tau0_s=100e-6, t0_s=0.0, tw_s=0.2, fs=100_000.0, k_max=50,
               amplitude=1.0, x1_extra=None, x2_extra=None):
    """Clean shifted sine pair ``x2(t) = x1(t - tau0)`` with room for +-k_max shifts."""
    start = t0_s - (k_max + 1) / fs
    n = int(round(tw_s * fs)) + 2 * k_max + 2
    t = start + np.arange(n) / fs
    w = 2 * np.pi * freq_hz
    a = amplitude * np.sin(w * t)
    b = amplitude * np.sin(w * (t - tau0_s))
    if x1_extra is not None:
        a = a + x1_extra(t)
    if x2_extra is not None:
        b = b + x2_extra(t)
    return EstimatorInput(SampledSignal(a, fs, start), SampledSignal(b, fs, start),
                          Window(t0_s, tw_s), (-k_max / fs, k_max / fs))


def random_input(rng, n, m, fs=1000.0):
    """White-noise pair with ``n``-sample window and shifts in ``[-m, m]``."""
    total = n + 2 * m
    a = rng.standard_normal(total)
    b = rng.standard_normal(total)
    start = -m / fs
    return EstimatorInput(SampledSignal(a, fs, start), SampledSignal(b, fs, start),
                          Window(0.0, n / fs), (-m / fs, m / fs))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = {}


def record_criterion(number, ok, detail):
    """Remember and print one acceptance verdict line."""
    line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES[number] = line
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[n])
