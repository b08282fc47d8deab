"""Monte Carlo sweeps comparing CC, PNCC, TSDEV and compensated TSDEV.

A :class:`TrialSpec` fully describes one simulated measurement: the source
(a sine or band-limited vibration), its delay, the analysis window, the
noise terms and the estimators to run. :func:`run_trial` turns
``(spec, trial index)`` into per-method delay errors; every random draw comes
from a stream keyed by ``(seed, trial, component)`` so trials can run in any
order or in parallel and still give identical numbers.

The five ``run_*`` functions reproduce the simulation protocols: white-noise
SNR sweep, window-length sweep, common linear drift, common low-frequency
sine and wideband common noise with compensation.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .estimators import EstimatorInput, Method, estimate_delay, shift_curves
from .signals import (NoiseSpec, SampledSignal, Window, channel_pair, gated, gen_noise,
                      gen_sine, grid_shift, make_rng, snr_scale)

DEFAULT_TRIALS = 200
DEFAULT_FS = 100_000.0
# amplitude of the common low-frequency sine in the low-frequency sweep
LOWFREQ_AMPLITUDE_RAD = 50.0
# power of the 40 Hz / 20 Hz wideband common noise
COMMON_NOISE_POWER_RAD2 = 0.01

FIGURE_FILES = {
    "snr": "fig1_snr",
    "window": "fig2_window",
    "drift": "fig3a_drift",
    "lowfreq": "fig3b_lowfreq",
    "commonnoise": "fig4_commonnoise",
}

# stream ids inside one trial
_STREAM_T0 = 0
_STREAM_SOURCE = 1
_STREAM_NOISE = 16


@dataclass(frozen=True)
class SineSource:
    freq_hz: float = 20.0
    amplitude: float = 1.0

    @property
    def period_s(self) -> float:
        return 1.0 / self.freq_hz

    @property
    def nominal_power(self) -> float:
        return self.amplitude ** 2 / 2


@dataclass(frozen=True)
class BandSource:
    center_hz: float
    bandwidth_hz: float
    power_rad2: float = 1.0

    @property
    def period_s(self) -> float:
        return 1.0 / self.center_hz

    @property
    def nominal_power(self) -> float:
        return self.power_rad2


@dataclass(frozen=True)
class NoiseTerm:
    """A noise component and the channel(s) it enters.

    White noise is drawn independently for each channel it applies to. Any
    other kind is common noise: one realization added to both channels.
    """

    spec: NoiseSpec
    applied_to: str = "both"

    def __post_init__(self):
        if self.applied_to not in ("x1", "x2", "both"):
            raise ValueError(f"applied_to must be x1, x2 or both, got {self.applied_to!r}")
        if self.spec.kind != "white" and self.applied_to != "both":
            raise ValueError(f"common {self.spec.kind} noise must be applied to both channels")
        if self.spec.kind == "white" and self.spec.snr_db is None and self.spec.power_rad2 is None:
            raise ValueError("white noise needs snr_db or power_rad2")


@dataclass(frozen=True)
class TrialSpec:
    """One simulated two-channel measurement and the estimators to run on it."""

    signal: Union[SineSource, BandSource] = SineSource()
    tau0_s: float = 100e-6
    tw_s: float = 0.2
    noise: Tuple[NoiseTerm, ...] = (NoiseTerm(NoiseSpec.white(snr_db=30.0)),)
    methods: Tuple[Method, ...] = (Method.CC, Method.TSDEV)
    sample_rate_hz: float = DEFAULT_FS
    tau_range_s: Optional[Tuple[float, float]] = None
    random_t0: bool = True
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "methods", tuple(Method.parse(m) for m in self.methods))
        object.__setattr__(self, "noise", tuple(self.noise))
        if not self.methods:
            raise ValueError("at least one method is required")
        grid_shift(self.tau0_s, self.sample_rate_hz)
        if self.window_samples < 8:
            raise ValueError(f"window of {self.tw_s} s holds fewer than 8 samples")
        if self.tau_range_s is not None and self.tau_range_s[0] > self.tau_range_s[1]:
            raise ValueError(f"empty tau range {self.tau_range_s}")

    @property
    def window_samples(self) -> int:
        return int(round(self.tw_s * self.sample_rate_hz))

    @property
    def tau_range(self) -> Tuple[float, float]:
        """Search range; defaults to +-5 tau0 (+-50 samples when tau0 = 0)."""
        if self.tau_range_s is not None:
            return tuple(self.tau_range_s)
        half = 5 * abs(self.tau0_s) if self.tau0_s else 50 / self.sample_rate_hz
        return (-half, half)

    @property
    def compensated(self) -> bool:
        return Method.TSDEV_COMP in self.methods

    def replace(self, **changes) -> "TrialSpec":
        return dataclasses.replace(self, **changes)


# ---------------------------------------------------------------------------
# one trial


@dataclass
class TrialData:
    """Channels and windows built for one trial."""

    x1: SampledSignal
    x2: SampledSignal
    window: Window
    noise_window: Optional[Window]
    tau_range: Tuple[float, float]

    def estimator_input(self) -> EstimatorInput:
        return EstimatorInput(self.x1, self.x2, self.window, self.tau_range)

    def noise_input(self) -> Optional[EstimatorInput]:
        if self.noise_window is None:
            return None
        return EstimatorInput(self.x1, self.x2, self.noise_window, self.tau_range)


def build_trial(spec: TrialSpec, trial: int) -> TrialData:
    """Synthesize both channels for trial number ``trial``.

    Layout, in samples from t = 0: with compensation a noise-only stretch
    comes first and the source switches on after it; the analysis window
    then starts a margin after the onset plus a random offset within one
    source period. Margins keep every shifted window of x2 fully populated
    and free of the onset.
    """
    fs = spec.sample_rate_hz
    n = spec.window_samples
    d0 = grid_shift(spec.tau0_s, fs)
    lo, hi = spec.tau_range
    kmin, kmax = math.ceil(lo * fs - 1e-6), math.floor(hi * fs + 1e-6)
    pad = max(abs(kmin), abs(kmax)) + abs(d0) + 1
    period = max(1, int(round(spec.signal.period_s * fs)))

    offset = 0
    if spec.random_t0:
        offset = int(make_rng(spec.seed, trial, _STREAM_T0).integers(0, period))

    if spec.compensated:
        n_on = n + 2 * pad
        noise_start = pad
    else:
        n_on = 0
        noise_start = None
    start = n_on + pad + offset
    total = n_on + 2 * pad + n + period

    src = _source(spec, trial, total, d0)
    if spec.compensated:
        src = gated(src, n_on / fs)
    span = Window(0.0, total / fs)
    clean1, clean2 = channel_pair(src, spec.tau0_s, span)
    window = Window(start / fs, spec.tw_s)

    x1, x2 = clean1.samples.copy(), clean2.samples.copy()
    for k, term in enumerate(spec.noise):
        stream = _STREAM_NOISE + 2 * k
        if term.spec.kind == "white":
            unit = NoiseSpec.white()
            for ch, clean, arr, s in ((1, clean1, x1, stream), (2, clean2, x2, stream + 1)):
                if term.applied_to not in ("both", f"x{ch}"):
                    continue
                w = gen_noise(unit, total / fs, fs, spec.seed, trial=trial, stream=s)
                if term.spec.snr_db is not None:
                    scale = snr_scale(clean, w, term.spec.snr_db, window)
                else:
                    scale = math.sqrt(term.spec.power_rad2)
                arr += scale * w.samples
        else:
            c = gen_noise(term.spec, total / fs, fs, spec.seed, trial=trial, stream=stream)
            x1 += c.samples
            x2 += c.samples

    noise_window = None if noise_start is None else Window(noise_start / fs, spec.tw_s)
    return TrialData(clean1.with_samples(x1), clean2.with_samples(x2), window, noise_window,
                     (lo, hi))


def _source(spec: TrialSpec, trial: int, total: int, d0: int) -> SampledSignal:
    fs = spec.sample_rate_hz
    lead = abs(d0)
    start = -lead / fs
    duration = (total + 2 * lead) / fs
    sig = spec.signal
    if isinstance(sig, SineSource):
        return gen_sine(sig.freq_hz, sig.amplitude, 0.0, duration, fs, start)
    band = NoiseSpec.bandlimited(sig.center_hz, sig.bandwidth_hz, sig.power_rad2)
    return gen_noise(band, duration, fs, spec.seed, start, trial=trial, stream=_STREAM_SOURCE)


def run_trial(spec: TrialSpec, trial: int) -> Dict[Method, float]:
    """Delay error ``estimate - tau0`` (seconds) for each method in ``spec``."""
    data = build_trial(spec, trial)
    curves = shift_curves(data.estimator_input(), spec.methods, data.noise_input())
    return {m: estimate_delay(curves[m]).tau_s - spec.tau0_s for m in spec.methods}


def _run_chunk(args):
    spec, trials = args
    return [run_trial(spec, t) for t in trials]


def run_trials(spec: TrialSpec, trials: int, workers: int = 1) -> Dict[Method, np.ndarray]:
    """Errors of ``trials`` independent trials, ordered by trial index."""
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    idx = list(range(trials))
    if workers <= 1:
        rows = [run_trial(spec, t) for t in idx]
    else:
        chunks = [idx[i::workers] for i in range(workers)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_run_chunk, [(spec, c) for c in chunks]))
        rows = [None] * trials
        for c, part in zip(chunks, parts):
            for t, r in zip(c, part):
                rows[t] = r
    return {m: np.array([r[m] for r in rows]) for m in spec.methods}


# ---------------------------------------------------------------------------
# statistics and reports


def summarize(raw_errors) -> Tuple[float, float]:
    """Arithmetic mean and population (1/N) standard deviation."""
    x = np.asarray(raw_errors, dtype=float)
    if x.size < 2:
        raise ValueError(f"need at least two samples to summarize, got {x.size}")
    return float(x.mean()), float(x.std())


@dataclass
class SweepReport:
    """Per-parameter, per-method delay errors of a sweep.

    ``raw_errors_s[method]`` has shape ``(len(param_values), trials)``.
    """

    param_name: str
    param_values: List[float]
    raw_errors_s: Dict[Method, np.ndarray]
    tau0_s: float
    sample_rate_hz: float
    seed: int
    config: dict = field(default_factory=dict)

    @property
    def methods(self) -> List[Method]:
        return list(self.raw_errors_s)

    @property
    def trials(self) -> int:
        return next(iter(self.raw_errors_s.values())).shape[1]

    @property
    def grid_step_s(self) -> float:
        return 1.0 / self.sample_rate_hz

    def stats(self, method) -> np.ndarray:
        """Array of ``(mean, std)`` rows, one per parameter value."""
        raw = self.raw_errors_s[Method.parse(method)]
        return np.array([summarize(row) for row in raw])

    def mean_error_s(self, method) -> np.ndarray:
        return self.stats(method)[:, 0]

    def std_error_s(self, method) -> np.ndarray:
        return self.stats(method)[:, 1]

    def summary(self) -> dict:
        return {
            "param_name": self.param_name,
            "param_values": [float(v) for v in self.param_values],
            "tau0_s": self.tau0_s,
            "fs": self.sample_rate_hz,
            "trials": self.trials,
            "seed": self.seed,
            "methods": {
                m.value: {"mean_error_s": self.mean_error_s(m).tolist(),
                          "std_error_s": self.std_error_s(m).tolist()}
                for m in self.methods
            },
            "config": self.config,
        }

    def write(self, out_dir, name: str) -> Tuple[Path, Path]:
        """Write ``<name>.csv`` (``param,method,trial,error_s``) and ``<name>.json``."""
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        csv_path = out_dir / f"{name}.csv"
        with csv_path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(("param", "method", "trial", "error_s"))
            for p_i, p in enumerate(self.param_values):
                for m in self.methods:
                    for t, e in enumerate(self.raw_errors_s[m][p_i]):
                        w.writerow((repr(float(p)), m.value, t, repr(float(e))))
        json_path = out_dir / f"{name}.json"
        json_path.write_text(json.dumps(self.summary(), indent=2) + "\n")
        return csv_path, json_path


def read_report_csv(path) -> Dict[Tuple[float, str], np.ndarray]:
    """Raw errors from a sweep CSV, keyed by ``(param, method)``."""
    rows: Dict[Tuple[float, str], List[Tuple[int, float]]] = {}
    with open(path, newline="") as fh:
        for r in csv.DictReader(fh):
            rows.setdefault((float(r["param"]), r["method"]), []).append(
                (int(r["trial"]), float(r["error_s"])))
    return {k: np.array([e for _, e in sorted(v)]) for k, v in rows.items()}


def run_sweep(param_name: str, values: Sequence[float], specs: Sequence[TrialSpec], trials: int,
              workers: int = 1, config: Optional[dict] = None) -> SweepReport:
    """Run ``trials`` trials of each spec; ``specs[i]`` belongs to ``values[i]``."""
    if len(values) == 0:
        raise ValueError("sweep needs at least one parameter value")
    if trials < 2:
        raise ValueError(f"trials must be >= 2, got {trials}")
    per_point = [run_trials(s, trials, workers) for s in specs]
    methods = specs[0].methods
    raw = {m: np.vstack([pp[m] for pp in per_point]) for m in methods}
    return SweepReport(param_name, [float(v) for v in values], raw, specs[0].tau0_s,
                       specs[0].sample_rate_hz, specs[0].seed, config or {})


def _base(base: Optional[TrialSpec], seed: int, methods) -> TrialSpec:
    base = base or TrialSpec()
    return base.replace(seed=seed, methods=tuple(methods))


def _white_snr(spec: TrialSpec, snr_db: float) -> TrialSpec:
    others = tuple(t for t in spec.noise if t.spec.kind != "white")
    return spec.replace(noise=(NoiseTerm(NoiseSpec.white(snr_db=snr_db)),) + others)


def run_snr_sweep(snr_db_values, trials=DEFAULT_TRIALS, seed=0, *, base=None, workers=1,
                  methods=(Method.CC, Method.TSDEV)) -> SweepReport:
    """White-noise SNR sweep (20 Hz sine, tau0 = 100 us, 0.2 s window by default)."""
    vals = [float(v) for v in snr_db_values]
    if not all(math.isfinite(v) for v in vals):
        raise ValueError(f"SNR values must be finite, got {vals}")
    b = _base(base, seed, methods)
    specs = [_white_snr(b, v) for v in vals]
    return run_sweep("snr_db", vals, specs, trials, workers, {"kind": "snr"})


def run_window_sweep(tw_values_s, trials=DEFAULT_TRIALS, seed=0, *, base=None, workers=1,
                     methods=(Method.CC, Method.PNCC, Method.TSDEV)) -> SweepReport:
    """Window-length sweep with a random window start on every trial."""
    vals = [float(v) for v in tw_values_s]
    b = _base(base, seed, methods).replace(random_t0=True)
    specs = [b.replace(tw_s=v) for v in vals]
    return run_sweep("tw_s", vals, specs, trials, workers, {"kind": "window"})


def run_drift_sweep(slopes_rad_per_s, trials=DEFAULT_TRIALS, seed=0, *, base=None, workers=1,
                    methods=(Method.PNCC, Method.TSDEV)) -> SweepReport:
    """Common linear drift ``k t`` on both channels for each slope ``k``."""
    vals = [float(v) for v in slopes_rad_per_s]
    if not all(math.isfinite(v) for v in vals):
        raise ValueError(f"slopes must be finite, got {vals}")
    b = _base(base, seed, methods)
    specs = [b.replace(noise=b.noise + (NoiseTerm(NoiseSpec.linear_drift(v)),)) for v in vals]
    return run_sweep("slope_rad_per_s", vals, specs, trials, workers, {"kind": "drift"})


def run_lowfreq_sweep(freqs_hz, trials=DEFAULT_TRIALS, seed=0, *, base=None, workers=1,
                      amplitude_rad=LOWFREQ_AMPLITUDE_RAD,
                      methods=(Method.PNCC, Method.TSDEV)) -> SweepReport:
    """Common low-frequency sine ``A sin(2 pi f t)`` on both channels."""
    vals = [float(v) for v in freqs_hz]
    b = _base(base, seed, methods)
    limit = 1.0 / b.signal.period_s
    if not all(0 < v < limit for v in vals):
        raise ValueError(f"frequencies must lie in (0, {limit}) Hz, got {vals}")
    specs = [b.replace(noise=b.noise + (NoiseTerm(NoiseSpec.lowfreq_sine(v, amplitude_rad)),))
             for v in vals]
    return run_sweep("freq_hz", vals, specs, trials, workers,
                     {"kind": "lowfreq", "amplitude_rad": amplitude_rad})


def run_commonnoise_experiment(trials=DEFAULT_TRIALS, seed=0, *, base=None, workers=1,
                               center_hz=40.0, bandwidth_hz=20.0,
                               power_rad2=COMMON_NOISE_POWER_RAD2,
                               methods=(Method.PNCC, Method.TSDEV, Method.TSDEV_COMP)
                               ) -> SweepReport:
    """Wideband common noise with compensation from a noise-only segment.

    Errors are reported against tau0, so ``tau0 + mean error`` is the mean
    estimate of each method.
    """
    if trials < 50:
        raise ValueError(f"the common-noise experiment needs >= 50 trials, got {trials}")
    b = _base(base, seed, methods)
    common = NoiseTerm(NoiseSpec.bandlimited(center_hz, bandwidth_hz, power_rad2))
    spec = b.replace(noise=b.noise + (common,))
    return run_sweep("common_noise_power_rad2", [power_rad2], [spec], trials, workers,
                     {"kind": "commonnoise", "center_hz": center_hz,
                      "bandwidth_hz": bandwidth_hz})
