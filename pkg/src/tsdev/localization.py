"""Dual-path fiber link model and delay-to-position mapping.

A vibration at distance ``l`` (clockwise from the coupler) on a loop of
length ``L`` reaches the clockwise detector after ``(L - l) / v`` and the
counter-clockwise detector after ``l / v``, with ``v = c / n``. Taking the
CCW channel as ``x1`` and the CW channel as ``x2``, the CW copy lags by

    tau0 = (L - 2 l) / v

which is positive for vibrations in the first half of the loop. Inverting
gives ``l = (L - v tau0) / 2``.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from .errors import OutOfLinkError
from .estimators import (DelayEstimate, EstimatorInput, Method, estimate_delay, shift_curves)
from .signals import (NoiseSpec, SampledSignal, Window, delayed, gated, gen_noise, intercept,
                      make_rng, snr_scale)

SPEED_OF_LIGHT = 299_792_458.0
# standard single-mode fiber
DEFAULT_REFRACTIVE_INDEX = 1.468


@dataclass(frozen=True)
class FiberLink:
    length_m: float
    refractive_index: float = DEFAULT_REFRACTIVE_INDEX
    light_speed_m_per_s: float = SPEED_OF_LIGHT

    def __post_init__(self):
        if not self.length_m > 0:
            raise ValueError(f"length_m must be > 0, got {self.length_m}")
        if not self.refractive_index > 1:
            raise ValueError(f"refractive_index must be > 1, got {self.refractive_index}")
        if not self.light_speed_m_per_s > 0:
            raise ValueError(f"light speed must be > 0, got {self.light_speed_m_per_s}")

    @property
    def speed_m_per_s(self) -> float:
        """Propagation speed ``c / n``."""
        return self.light_speed_m_per_s / self.refractive_index

    @property
    def max_delay_s(self) -> float:
        """Largest possible ``|tau0|`` (vibration at either end)."""
        return self.length_m / self.speed_m_per_s

    def to_dict(self):
        return {"length_m": self.length_m, "refractive_index": self.refractive_index,
                "light_speed_m_per_s": self.light_speed_m_per_s}


def position_to_delay(link: FiberLink, position_m: float) -> float:
    """``(L - 2 l) n / c``: lag of the CW channel behind the CCW channel."""
    if not 0.0 <= position_m <= link.length_m:
        raise ValueError(f"position {position_m} m lies outside the link [0, {link.length_m}] m")
    return (link.length_m - 2.0 * position_m) / link.speed_m_per_s


def delay_to_position(link: FiberLink, tau_s: float) -> float:
    """``(L - v tau) / 2``; raises :class:`OutOfLinkError` outside ``[0, L]``."""
    pos = 0.5 * (link.length_m - link.speed_m_per_s * tau_s)
    # one part in 1e12 of slack for round-off at the link ends
    slack = 1e-12 * link.length_m
    if pos < -slack or pos > link.length_m + slack:
        raise OutOfLinkError(
            f"delay {tau_s!r} s maps to {pos!r} m, outside the link [0, {link.length_m}] m",
            tau_s, pos,
        )
    return min(max(pos, 0.0), link.length_m)


@dataclass(frozen=True)
class VibrationEvent:
    position_m: float
    signal: SampledSignal


@dataclass(frozen=True)
class NoisePlan:
    """Noise for both detectors.

    White noise is independent per channel, set either by ``white_snr_db``
    (relative to the event power over ``snr_window``, or the whole record)
    or by an absolute ``white_power_rad2``. Every entry of ``common`` is
    realized once and added to both channels.
    """

    white_snr_db: Optional[float] = None
    white_power_rad2: Optional[float] = None
    common: Tuple[NoiseSpec, ...] = ()
    snr_window: Optional[Window] = None

    def __post_init__(self):
        if self.white_snr_db is not None and self.white_power_rad2 is not None:
            raise ValueError("give white_snr_db or white_power_rad2, not both")
        for spec in self.common:
            if spec.kind == "white":
                raise ValueError("common noise cannot be white; use white_snr_db")
        object.__setattr__(self, "common", tuple(self.common))


@dataclass(frozen=True, eq=False)
class DualChannel:
    """Simulated detector outputs plus the grid bookkeeping.

    ``tau0_s`` is the exact model delay; the channels carry ``tau0_grid_s``
    after both path delays were rounded to whole samples. ``residual_s`` is
    their difference and ``position_grid_m`` the position that the grid
    delay maps back to.
    """

    x_cw: SampledSignal
    x_ccw: SampledSignal
    cw_delay_samples: int
    ccw_delay_samples: int
    tau0_s: float
    tau0_grid_s: float
    position_grid_m: float

    @property
    def residual_s(self) -> float:
        return self.tau0_grid_s - self.tau0_s

    def __iter__(self):
        return iter((self.x_cw, self.x_ccw))


def simulate_dual_channel(link: FiberLink, event: VibrationEvent, noise_plan: Optional[NoisePlan] = None,
                          fs: Optional[float] = None, seed: int = 0, trial: int = 0) -> DualChannel:
    """CW and CCW detector signals for ``event`` on ``link``.

    The channels cover the part of the event record where both delayed
    copies exist, i.e. they start ``max(path delay)`` after the event signal.
    """
    sig = event.signal
    if fs is not None and fs != sig.sample_rate_hz:
        raise ValueError(f"fs {fs} differs from the event sample rate {sig.sample_rate_hz}")
    fs = sig.sample_rate_hz
    tau0 = position_to_delay(link, event.position_m)
    v = link.speed_m_per_s
    d_cw = int(round((link.length_m - event.position_m) / v * fs))
    d_ccw = int(round(event.position_m / v * fs))
    dmax = max(d_cw, d_ccw)
    if len(sig) <= dmax:
        raise ValueError(
            f"event signal has {len(sig)} samples but the longer path delay alone is {dmax}"
        )
    span = Window(sig.start_time_s + dmax / fs, (len(sig) - dmax) / fs)
    cw = intercept(delayed(sig, d_cw / fs), span)
    ccw = intercept(delayed(sig, d_ccw / fs), span)

    plan = noise_plan or NoisePlan()
    a, b = cw.samples.copy(), ccw.samples.copy()
    if plan.white_snr_db is not None or plan.white_power_rad2 is not None:
        unit = NoiseSpec.white()
        for arr, clean, stream in ((a, cw, 2), (b, ccw, 3)):
            w = gen_noise(unit, span.tw_s, fs, seed, span.t0_s, trial=trial, stream=stream)
            if plan.white_snr_db is not None:
                scale = snr_scale(clean, w, plan.white_snr_db, plan.snr_window)
            else:
                scale = math.sqrt(plan.white_power_rad2)
            arr += scale * w.samples
    for k, spec in enumerate(plan.common):
        c = gen_noise(spec, span.tw_s, fs, seed, span.t0_s, trial=trial, stream=8 + k)
        a += c.samples
        b += c.samples

    tau_grid = (d_cw - d_ccw) / fs
    return DualChannel(cw.with_samples(a), ccw.with_samples(b), d_cw, d_ccw, tau0, tau_grid,
                       delay_to_position(link, tau_grid))


@dataclass(frozen=True, eq=False)
class Localization:
    position_m: float
    estimate: DelayEstimate


def link_tau_range(link: FiberLink) -> Tuple[float, float]:
    return (-link.max_delay_s, link.max_delay_s)


def localize(x_cw: SampledSignal, x_ccw: SampledSignal, link: FiberLink, method, window: Window,
             tau_range: Optional[Tuple[float, float]] = None,
             compensation_window: Optional[Window] = None) -> Localization:
    """Estimate the delay between the channels and map it onto the link.

    ``compensation_window`` selects the noise-only segment for
    ``TSDEV_COMP``. Raises :class:`~tsdev.errors.OutOfLinkError` (carrying
    the raw delay) when the estimate falls outside the link.
    """
    method = Method.parse(method)
    rng = tau_range or link_tau_range(link)
    inp = EstimatorInput(x_ccw, x_cw, window, rng)
    noise = None
    if method is Method.TSDEV_COMP:
        if compensation_window is None:
            raise ValueError("compensated TSDEV needs a compensation window")
        noise = EstimatorInput(x_ccw, x_cw, compensation_window, rng)
    est = estimate_delay(shift_curves(inp, [method], noise)[method])
    return Localization(delay_to_position(link, est.tau_s), est)


# ---------------------------------------------------------------------------
# field emulation


@dataclass(frozen=True)
class FieldEmulation:
    """Desk-scale stand-in for the loop experiment.

    A band-limited vibration is switched on after a noise-only stretch and
    both detectors see independent white noise plus common wideband noise,
    a linear drift and a slow sine (slope and phase drawn per trial).
    """

    link: FiberLink = FiberLink(59_330.0)
    position_m: float = 49_490.0
    sample_rate_hz: float = 1_000_000.0
    vibration_center_hz: float = 150.0
    vibration_bandwidth_hz: float = 100.0
    vibration_power_rad2: float = 100.0
    window_s: float = 0.126
    white_snr_db: float = 30.0
    common_center_hz: float = 150.0
    common_bandwidth_hz: float = 100.0
    common_power_rad2: float = 1.0
    max_drift_rad_per_s: float = 50.0
    lowfreq_hz: float = 0.3
    lowfreq_amplitude_rad: float = 50.0
    methods: Tuple[Method, ...] = (Method.CC, Method.PNCC, Method.TSDEV, Method.TSDEV_COMP)

    def __post_init__(self):
        object.__setattr__(self, "methods", tuple(Method.parse(m) for m in self.methods))

    def replace(self, **changes) -> "FieldEmulation":
        return replace(self, **changes)


@dataclass
class FieldTrial:
    channels: DualChannel
    window: Window
    noise_window: Window


def build_field_trial(cfg: FieldEmulation, seed: int, trial: int) -> FieldTrial:
    fs = cfg.sample_rate_hz
    link = cfg.link
    n = int(round(cfg.window_s * fs))
    kmax = int(math.floor(link.max_delay_s * fs))
    v = link.speed_m_per_s
    dmax = max(int(round((link.length_m - cfg.position_m) / v * fs)),
               int(round(cfg.position_m / v * fs)))
    rng = make_rng(seed, trial, 0)
    period = int(round(fs / cfg.vibration_center_hz))
    offset = int(rng.integers(0, period))

    # channel-time layout (samples from the first channel sample)
    noise_start = kmax
    onset = noise_start + n + kmax + 1
    start = onset + dmax + kmax + 1 + offset
    n_chan = start + n + kmax + period + 1
    total = n_chan + dmax

    band = NoiseSpec.bandlimited(cfg.vibration_center_hz, cfg.vibration_bandwidth_hz,
                                 cfg.vibration_power_rad2)
    src = gen_noise(band, total / fs, fs, seed, 0.0, trial=trial, stream=1)
    # onset in source time: channels start dmax samples into the source
    src = gated(src, (onset + dmax) / fs)

    common = []
    if cfg.common_power_rad2 > 0:
        common.append(NoiseSpec.bandlimited(cfg.common_center_hz, cfg.common_bandwidth_hz,
                                            cfg.common_power_rad2))
    if cfg.max_drift_rad_per_s > 0:
        common.append(NoiseSpec.linear_drift(
            rng.uniform(-cfg.max_drift_rad_per_s, cfg.max_drift_rad_per_s)))
    if cfg.lowfreq_amplitude_rad > 0:
        common.append(NoiseSpec.lowfreq_sine(cfg.lowfreq_hz, cfg.lowfreq_amplitude_rad,
                                             rng.uniform(0.0, 2 * math.pi)))
    white = cfg.vibration_power_rad2 * 10.0 ** (-cfg.white_snr_db / 10.0)
    plan = NoisePlan(white_power_rad2=white, common=tuple(common))
    chans = simulate_dual_channel(link, VibrationEvent(cfg.position_m, src), plan,
                                  seed=seed, trial=trial)
    t_first = chans.x_cw.start_time_s
    return FieldTrial(chans, Window(t_first + start / fs, cfg.window_s),
                      Window(t_first + noise_start / fs, cfg.window_s))


def field_trial_positions(cfg: FieldEmulation, seed: int, trial: int) -> Dict[Method, float]:
    ft = build_field_trial(cfg, seed, trial)
    x_cw, x_ccw = ft.channels
    rng = link_tau_range(cfg.link)
    inp = EstimatorInput(x_ccw, x_cw, ft.window, rng)
    noise = EstimatorInput(x_ccw, x_cw, ft.noise_window, rng)
    curves = shift_curves(inp, cfg.methods, noise if Method.TSDEV_COMP in cfg.methods else None)
    return {m: delay_to_position(cfg.link, estimate_delay(curves[m]).tau_s) for m in cfg.methods}


def _field_chunk(args):
    cfg, seed, trials = args
    return [field_trial_positions(cfg, seed, t) for t in trials]


@dataclass
class FieldReport:
    config: FieldEmulation
    positions_m: Dict[Method, np.ndarray]
    seed: int

    @property
    def true_position_m(self) -> float:
        return self.config.position_m

    def errors_m(self, method) -> np.ndarray:
        return self.positions_m[Method.parse(method)] - self.true_position_m

    def mean_error_m(self, method) -> float:
        return float(np.mean(self.errors_m(method)))

    def std_m(self, method) -> float:
        return float(np.std(self.positions_m[Method.parse(method)]))

    def summary(self) -> dict:
        return {m.value: {"mean_error_m": self.mean_error_m(m), "std_m": self.std_m(m)}
                for m in self.positions_m}


def run_field_emulation(trials: int = 100, seed: int = 0, config: Optional[FieldEmulation] = None,
                        workers: int = 1) -> FieldReport:
    """Localize the emulated event ``trials`` times with fresh noise each time."""
    if trials < 2:
        raise ValueError(f"trials must be >= 2, got {trials}")
    cfg = config or FieldEmulation()
    idx = list(range(trials))
    if workers <= 1:
        rows = [field_trial_positions(cfg, seed, t) for t in idx]
    else:
        chunks = [idx[i::workers] for i in range(workers)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_field_chunk, [(cfg, seed, c) for c in chunks]))
        rows = [None] * trials
        for c, part in zip(chunks, parts):
            for t, r in zip(c, part):
                rows[t] = r
    return FieldReport(cfg, {m: np.array([r[m] for r in rows]) for m in cfg.methods}, seed)
