"""
Fast TSDEV
==========

The direct TSDEV costs one pass over the window per shift. Expanding the
variance as P1 + P2(tau) - 2 R(tau) - C(tau)^2 needs one FFT correlation
and two running sums instead.
"""

import time

import numpy as np

from tsdev import EstimatorInput, SampledSignal, Window, tsdev_curve, tsdev_curve_fast

fs = 100_000.0
n, half = 2 ** 17, 512
rng = np.random.default_rng(0)
x = rng.standard_normal(n + 2 * half)
y = np.roll(x, 40) + 0.3 * rng.standard_normal(x.size)
inp = EstimatorInput(SampledSignal(x, fs, -half / fs), SampledSignal(y, fs, -half / fs),
                     Window(0.0, n / fs), (-half / fs, (half - 1) / fs))

tic = time.perf_counter()
slow = tsdev_curve(inp)
t_slow = time.perf_counter() - tic
tic = time.perf_counter()
fast = tsdev_curve_fast(inp)
t_fast = time.perf_counter() - tic

dev = np.max(np.abs(slow.values - fast.values) / np.abs(slow.values))
print(f"{len(fast)} shifts over {n} samples")
print(f"direct {t_slow * 1e3:.1f} ms, fast {t_fast * 1e3:.1f} ms, max relative gap {dev:.1e}")
