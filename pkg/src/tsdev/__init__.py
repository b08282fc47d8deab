"""Time delay estimation by time-shift deviation (TSDEV) and correlation baselines."""

from .errors import AlignmentError, CoverageError, DegeneratePowerError, OutOfLinkError
from .estimators import (DelayEstimate, EstimatorInput, Method, ShiftCurve, cc_curve,
                         compensated_tsdev_curve, estimate_delay, parabolic_refine, pncc_curve,
                         shift_curves, tsdev_curve, tsdev_curve_fast)
from .localization import (FiberLink, FieldEmulation, NoisePlan, VibrationEvent, delay_to_position,
                           localize, position_to_delay, run_field_emulation, simulate_dual_channel)
from .signals import (NoiseSpec, SampledSignal, Window, average_power, channel_pair, delayed,
                      gen_noise, gen_sine, intercept, make_rng, mix_at_snr)

__version__ = "0.1.0"

__all__ = [
    "AlignmentError", "CoverageError", "DegeneratePowerError", "OutOfLinkError",
    "DelayEstimate", "EstimatorInput", "Method", "ShiftCurve", "cc_curve",
    "compensated_tsdev_curve", "estimate_delay", "parabolic_refine", "pncc_curve",
    "shift_curves", "tsdev_curve", "tsdev_curve_fast",
    "FiberLink", "FieldEmulation", "NoisePlan", "VibrationEvent", "delay_to_position",
    "localize", "position_to_delay", "run_field_emulation", "simulate_dual_channel",
    "NoiseSpec", "SampledSignal", "Window", "average_power", "channel_pair", "delayed",
    "gen_noise", "gen_sine", "intercept", "make_rng", "mix_at_snr",
]
