"""
White noise and window length
=============================

Monte Carlo runs with independent white noise on each channel. Under white
noise CC and TSDEV are equally accurate; once the window is not a whole
number of half periods, CC scatters widely while TSDEV and PNCC do not.

Trial counts are kept small so the script finishes in seconds; the
acceptance suite uses 200 to 400 trials.
"""

from tsdev import Method
from tsdev import experiments as ex

trials = 40
step = 1 / ex.DEFAULT_FS

snr = ex.run_snr_sweep([40.0, 20.0, 5.0], trials=trials, seed=1)
print("SNR [dB]   std CC [steps]   std TSDEV [steps]")
for v, a, b in zip(snr.param_values, snr.std_error_s(Method.CC), snr.std_error_s(Method.TSDEV)):
    print(f"{v:7.0f}   {a / step:14.2f}   {b / step:17.2f}")

period = 0.05
win = ex.run_window_sweep([4 * period, 4.25 * period, 4.5 * period], trials=trials, seed=1)
print("\nTw [periods]   std CC   std PNCC   std TSDEV   [steps]")
for i, v in enumerate(win.param_values):
    row = [win.std_error_s(m)[i] / step for m in (Method.CC, Method.PNCC, Method.TSDEV)]
    print(f"{v / period:12.2f}   " + "   ".join(f"{x:7.2f}" for x in row))
