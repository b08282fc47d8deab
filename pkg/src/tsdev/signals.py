"""Synthetic phase signals, noise generators and windowing.

Everything here works on a uniform sample grid. A :class:`SampledSignal` is
an immutable array of phase samples (radians) with a sample rate and the time
of its first sample; sample ``i`` sits at ``start_time_s + i / sample_rate_hz``.
Delays are restricted to whole samples so a delayed copy is the same
realization read at an index offset.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import AlignmentError

# fraction of a sample within which a time is considered on-grid
GRID_TOL = 1e-6

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True, eq=False)
class SampledSignal:
    """Uniformly sampled real-valued time series."""

    samples: np.ndarray
    sample_rate_hz: float
    start_time_s: float = 0.0

    def __post_init__(self):
        arr = np.array(self.samples, dtype=np.float64)
        if arr.ndim != 1:
            raise ValueError(f"samples must be one-dimensional, got shape {arr.shape}")
        if not self.sample_rate_hz > 0:
            raise ValueError(f"sample_rate_hz must be > 0, got {self.sample_rate_hz}")
        arr.setflags(write=False)
        object.__setattr__(self, "samples", arr)
        object.__setattr__(self, "sample_rate_hz", float(self.sample_rate_hz))
        object.__setattr__(self, "start_time_s", float(self.start_time_s))

    def __len__(self):
        return self.samples.size

    @property
    def duration_s(self) -> float:
        return self.samples.size / self.sample_rate_hz

    @property
    def dt(self) -> float:
        return 1.0 / self.sample_rate_hz

    @property
    def end_time_s(self) -> float:
        """Time just past the last sample (``start + duration``)."""
        return self.start_time_s + self.duration_s

    @property
    def times(self) -> np.ndarray:
        return self.start_time_s + np.arange(self.samples.size) / self.sample_rate_hz

    def index_of(self, t_s: float) -> int:
        """Nearest sample index of time ``t_s`` (may fall outside the signal)."""
        return int(round((t_s - self.start_time_s) * self.sample_rate_hz))

    def with_samples(self, samples) -> "SampledSignal":
        return SampledSignal(samples, self.sample_rate_hz, self.start_time_s)

    def __add__(self, other):
        if isinstance(other, SampledSignal):
            _check_compatible(self, other)
            return self.with_samples(self.samples + other.samples)
        return self.with_samples(self.samples + other)

    def scaled(self, factor: float) -> "SampledSignal":
        return self.with_samples(self.samples * factor)


@dataclass(frozen=True)
class Window:
    """Analysis window ``[t0_s, t0_s + tw_s)``."""

    t0_s: float
    tw_s: float

    def __post_init__(self):
        if not self.tw_s > 0:
            raise ValueError(f"window length tw_s must be > 0, got {self.tw_s}")

    def n_samples(self, sample_rate_hz: float) -> int:
        return int(round(self.tw_s * sample_rate_hz))

    @classmethod
    def full(cls, signal: SampledSignal) -> "Window":
        return cls(signal.start_time_s, signal.duration_s)


NOISE_KINDS = ("white", "linear_drift", "lowfreq_sine", "bandlimited")


@dataclass(frozen=True)
class NoiseSpec:
    """Description of one additive noise component.

    Use the constructors :meth:`white`, :meth:`linear_drift`,
    :meth:`lowfreq_sine` and :meth:`bandlimited` rather than filling fields
    by hand. ``snr_db`` on a white spec is informational for the generator
    (which emits unit variance unless ``power_rad2`` is set); trial builders
    pass it to :func:`mix_at_snr`.
    """

    kind: str
    snr_db: Optional[float] = None
    slope_rad_per_s: Optional[float] = None
    freq_hz: Optional[float] = None
    amplitude_rad: Optional[float] = None
    phase_rad: float = 0.0
    center_hz: Optional[float] = None
    bandwidth_hz: Optional[float] = None
    power_rad2: Optional[float] = None

    def __post_init__(self):
        if self.kind not in NOISE_KINDS:
            raise ValueError(f"unknown noise kind {self.kind!r}; expected one of {NOISE_KINDS}")
        if self.kind == "linear_drift" and self.slope_rad_per_s is None:
            raise ValueError("linear_drift noise needs slope_rad_per_s")
        if self.kind == "lowfreq_sine":
            if self.freq_hz is None or not self.freq_hz > 0:
                raise ValueError("lowfreq_sine noise needs freq_hz > 0")
            if self.amplitude_rad is None or self.amplitude_rad < 0:
                raise ValueError("lowfreq_sine noise needs amplitude_rad >= 0")
        if self.kind == "bandlimited":
            if self.center_hz is None or self.bandwidth_hz is None or self.power_rad2 is None:
                raise ValueError("bandlimited noise needs center_hz, bandwidth_hz and power_rad2")
            if not self.bandwidth_hz > 0:
                raise ValueError(f"bandwidth_hz must be > 0, got {self.bandwidth_hz}")
            if not self.bandwidth_hz < 2 * self.center_hz:
                raise ValueError(
                    f"band [{self.center_hz - self.bandwidth_hz / 2}, "
                    f"{self.center_hz + self.bandwidth_hz / 2}] Hz extends below 0 Hz"
                )
        if self.power_rad2 is not None and self.power_rad2 < 0:
            raise ValueError(f"power_rad2 must be >= 0, got {self.power_rad2}")

    @classmethod
    def white(cls, snr_db=None, power_rad2=None):
        return cls("white", snr_db=snr_db, power_rad2=power_rad2)

    @classmethod
    def linear_drift(cls, slope_rad_per_s):
        return cls("linear_drift", slope_rad_per_s=float(slope_rad_per_s))

    @classmethod
    def lowfreq_sine(cls, freq_hz, amplitude_rad=1.0, phase_rad=0.0):
        return cls("lowfreq_sine", freq_hz=float(freq_hz), amplitude_rad=float(amplitude_rad),
                   phase_rad=float(phase_rad))

    @classmethod
    def bandlimited(cls, center_hz, bandwidth_hz, power_rad2=1.0):
        return cls("bandlimited", center_hz=float(center_hz), bandwidth_hz=float(bandwidth_hz),
                   power_rad2=float(power_rad2))

    def to_dict(self) -> dict:
        return {k: v for k, v in self.__dict__.items() if v is not None}


# ---------------------------------------------------------------------------
# random streams


def _mix64(x: int) -> int:
    """splitmix64 finalizer: a bijection on 64-bit integers that scatters nearby inputs."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def make_rng(seed: int, trial: int = 0, stream: int = 0) -> np.random.Generator:
    """Counter-based generator for ``(seed, trial, stream)``.

    The Philox key is ``(mix(seed) XOR trial, stream)``, so every trial and
    every noise component inside a trial gets its own stream without
    depending on the order in which trials run. Scrambling the seed first
    keeps seeds 0, 1, 2, ... from reusing each other's trials.
    """
    seed = int(seed)
    if seed < 0 or seed > _MASK64:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
    key = np.array([_mix64(seed) ^ (int(trial) & _MASK64), int(stream) & _MASK64],
                   dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


# ---------------------------------------------------------------------------
# generators


def _n_samples(duration_s, sample_rate_hz):
    if not duration_s > 0:
        raise ValueError(f"duration_s must be > 0, got {duration_s}")
    if not sample_rate_hz > 0:
        raise ValueError(f"sample_rate_hz must be > 0, got {sample_rate_hz}")
    n = int(round(duration_s * sample_rate_hz))
    if n < 1:
        raise ValueError(f"duration {duration_s} s holds no samples at {sample_rate_hz} Hz")
    return n


def gen_sine(freq_hz, amplitude, phase_rad, duration_s, sample_rate_hz, start_time_s=0.0):
    """``amplitude * sin(2 pi f t + phase)`` on the sample grid.

    The sample rate must be at least ten times the tone frequency.
    """
    if not freq_hz > 0:
        raise ValueError(f"freq_hz must be > 0, got {freq_hz}")
    n = _n_samples(duration_s, sample_rate_hz)
    if sample_rate_hz < 10 * freq_hz:
        raise ValueError(
            f"sample rate {sample_rate_hz} Hz is below 10x the tone frequency {freq_hz} Hz"
        )
    t = start_time_s + np.arange(n) / sample_rate_hz
    return SampledSignal(amplitude * np.sin(2 * np.pi * freq_hz * t + phase_rad),
                         sample_rate_hz, start_time_s)


def bandlimited_noise(n, sample_rate_hz, low_hz, high_hz, power, rng):
    """Gaussian noise confined to ``[low_hz, high_hz]`` by an FFT brick-wall mask.

    The output is rescaled so its mean square is exactly ``power``.
    """
    if low_hz < 0 or high_hz > sample_rate_hz / 2:
        raise ValueError(
            f"band [{low_hz}, {high_hz}] Hz must lie inside [0, {sample_rate_hz / 2}] Hz"
        )
    spectrum = np.fft.rfft(rng.standard_normal(n))
    freqs = np.fft.rfftfreq(n, d=1.0 / sample_rate_hz)
    spectrum[(freqs < low_hz) | (freqs > high_hz)] = 0.0
    y = np.fft.irfft(spectrum, n)
    p = np.mean(y * y)
    if p == 0.0:
        raise ValueError(
            f"band [{low_hz}, {high_hz}] Hz contains no frequency bins for {n} samples"
        )
    return y * math.sqrt(power / p)


def gen_noise(spec: NoiseSpec, duration_s, sample_rate_hz, seed=0, start_time_s=0.0,
              trial=0, stream=0):
    """Realize ``spec`` over ``duration_s`` seconds.

    Deterministic kinds (drift, low-frequency sine) ignore the seed. The
    drift and sine are functions of absolute time, so two signals generated
    with different ``start_time_s`` agree wherever they overlap.
    """
    n = _n_samples(duration_s, sample_rate_hz)
    t = start_time_s + np.arange(n) / sample_rate_hz
    if spec.kind == "white":
        x = make_rng(seed, trial, stream).standard_normal(n)
        if spec.power_rad2 is not None:
            x = x * math.sqrt(spec.power_rad2)
    elif spec.kind == "linear_drift":
        x = spec.slope_rad_per_s * t
    elif spec.kind == "lowfreq_sine":
        x = spec.amplitude_rad * np.sin(2 * np.pi * spec.freq_hz * t + spec.phase_rad)
    else:
        half = spec.bandwidth_hz / 2
        x = bandlimited_noise(n, sample_rate_hz, spec.center_hz - half, spec.center_hz + half,
                              spec.power_rad2, make_rng(seed, trial, stream))
    return SampledSignal(x, sample_rate_hz, start_time_s)


# ---------------------------------------------------------------------------
# grid operations


def grid_shift(tau_s, sample_rate_hz) -> int:
    """Whole-sample count for ``tau_s``; raises if it is off the grid."""
    exact = tau_s * sample_rate_hz
    k = int(round(exact))
    if abs(exact - k) > GRID_TOL:
        lo, hi = math.floor(exact), math.ceil(exact)
        nearest = (lo / sample_rate_hz, hi / sample_rate_hz)
        raise AlignmentError(
            f"delay {tau_s!r} s is not a multiple of the sample period 1/{sample_rate_hz} s; "
            f"nearest grid values are {nearest[0]!r} s and {nearest[1]!r} s",
            nearest,
        )
    return k


def delayed(signal: SampledSignal, tau0_s: float) -> SampledSignal:
    """Return ``signal(t - tau0_s)`` as the same samples relabelled in time.

    ``tau0_s`` must be a whole number of sample periods. The result shares
    the realization of ``signal``: its sample at time ``t`` is the original
    sample at ``t - tau0_s``. Use :func:`intercept` to cut both onto a
    common span.
    """
    k = grid_shift(tau0_s, signal.sample_rate_hz)
    return SampledSignal(signal.samples, signal.sample_rate_hz,
                         signal.start_time_s + k / signal.sample_rate_hz)


def window_indices(signal: SampledSignal, window: Window):
    """``(first index, sample count)`` of ``window`` inside ``signal``.

    The window start snaps to the nearest sample. Raises ``ValueError`` when
    the window does not fit.
    """
    i0 = signal.index_of(window.t0_s)
    n = window.n_samples(signal.sample_rate_hz)
    if n < 1:
        raise ValueError(f"window {window} holds no samples at {signal.sample_rate_hz} Hz")
    if i0 < 0 or i0 + n > len(signal):
        raise ValueError(
            f"window [{window.t0_s}, {window.t0_s + window.tw_s}) s exceeds the signal span "
            f"[{signal.start_time_s}, {signal.end_time_s}) s"
        )
    return i0, n


def intercept(signal: SampledSignal, window: Window) -> SampledSignal:
    """Samples of ``signal`` inside ``window`` (``round(tw * fs)`` of them)."""
    i0, n = window_indices(signal, window)
    return SampledSignal(signal.samples[i0:i0 + n], signal.sample_rate_hz,
                         signal.start_time_s + i0 / signal.sample_rate_hz)


def average_power(signal: SampledSignal, window: Optional[Window] = None) -> float:
    """Mean square of the samples inside ``window`` (whole signal if omitted)."""
    x = signal.samples if window is None else intercept(signal, window).samples
    if x.size == 0:
        raise ValueError("average power of an empty signal is undefined")
    return float(np.mean(x * x))


def snr_scale(signal: SampledSignal, noise: SampledSignal, snr_db: float,
              window: Optional[Window] = None) -> float:
    """Factor that brings ``noise`` to ``snr_db`` below ``signal`` over ``window``."""
    _check_compatible(signal, noise)
    if not math.isfinite(snr_db):
        raise ValueError(f"snr_db must be finite, got {snr_db}")
    ps = average_power(signal, window)
    pn = average_power(noise, window)
    if ps == 0.0 or pn == 0.0:
        raise ValueError(
            f"SNR is undefined for zero power (signal {ps}, noise {pn}) over the window"
        )
    return math.sqrt(ps / (pn * 10.0 ** (snr_db / 10.0)))


def mix_at_snr(signal: SampledSignal, noise: SampledSignal, snr_db: float,
               window: Optional[Window] = None) -> SampledSignal:
    """``signal`` plus ``noise`` rescaled to ``snr_db`` over ``window``.

    Both powers are mean squares over the window; the single scale factor is
    then applied to the whole noise record.
    """
    scale = snr_scale(signal, noise, snr_db, window)
    return signal.with_samples(signal.samples + scale * noise.samples)


def _check_compatible(a: SampledSignal, b: SampledSignal):
    if a.sample_rate_hz != b.sample_rate_hz:
        raise ValueError(f"sample rates differ: {a.sample_rate_hz} vs {b.sample_rate_hz}")
    if len(a) != len(b) or abs(a.start_time_s - b.start_time_s) * a.sample_rate_hz > GRID_TOL:
        raise ValueError(
            f"signals cover different spans: [{a.start_time_s}, {a.end_time_s}) vs "
            f"[{b.start_time_s}, {b.end_time_s})"
        )


def channel_pair(source: SampledSignal, tau0_s: float, span: Window):
    """Cut ``(s(t), s(t - tau0))`` from one realization onto ``span``.

    ``source`` must cover both ``span`` and ``span`` moved back by
    ``tau0_s``.
    """
    x1 = intercept(source, span)
    x2 = intercept(delayed(source, tau0_s), span)
    return x1, x2


def gated(signal: SampledSignal, on_s: float, off_s: Optional[float] = None) -> SampledSignal:
    """Zero every sample outside ``[on_s, off_s)``."""
    t = signal.times
    keep = t >= on_s - 0.5 / signal.sample_rate_hz
    if off_s is not None:
        keep &= t < off_s - 0.5 / signal.sample_rate_hz
    return signal.with_samples(np.where(keep, signal.samples, 0.0))


def stack(signals: Sequence[SampledSignal]) -> SampledSignal:
    """Sum of signals sharing one grid."""
    out = signals[0]
    for s in signals[1:]:
        out = out + s
    return out
