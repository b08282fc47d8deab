"""Shift curves for cross-correlation, PNCC and TSDEV delay estimation.

The first channel ``x1`` is read over a fixed window; the second channel
``x2`` is read over the same window moved by each candidate shift ``tau``
(whole samples, linear shifts only). For every shift the estimators compare
``x1(t)`` with ``x2(t + tau)``:

* CC      mean of ``x1 * x2``                               (maximize)
* PNCC    CC divided by ``sqrt(P1 * P2(tau))``               (maximize)
* TSDEV   variance of ``x1 - x2``, mean removed per shift    (minimize)

With ``x2(t) = s(t - tau0) + noise`` every curve peaks (or dips) at
``tau = tau0`` in the noise-free, well-conditioned case.

:func:`tsdev_curve` is the direct per-shift computation and serves as the
reference for :func:`tsdev_curve_fast`, which expands the variance into
window powers (prefix sums) and one cross term (FFT correlation).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, Optional, Tuple

import numpy as np
from scipy import fft as sp_fft

from .errors import AlignmentError, CoverageError, DegeneratePowerError
from .signals import GRID_TOL, SampledSignal, Window, average_power, window_indices

__all__ = [
    "Method", "ShiftCurve", "DelayEstimate", "EstimatorInput",
    "cc_curve", "pncc_curve", "tsdev_curve", "tsdev_curve_fast",
    "compensated_tsdev_curve", "shift_curves", "estimate_delay",
    "parabolic_refine", "average_power",
]


class Method(str, enum.Enum):
    CC = "CC"
    PNCC = "PNCC"
    TSDEV = "TSDEV"
    TSDEV_COMP = "TSDEV_COMP"

    @property
    def maximize(self) -> bool:
        return self in (Method.CC, Method.PNCC)

    @classmethod
    def parse(cls, value) -> "Method":
        if isinstance(value, cls):
            return value
        key = str(value).strip().upper().replace("-", "_")
        aliases = {"COMP": "TSDEV_COMP", "COMPENSATED": "TSDEV_COMP",
                   "TSDEV_COMPENSATED": "TSDEV_COMP"}
        try:
            return cls(aliases.get(key, key))
        except ValueError:
            raise ValueError(
                f"unknown method {value!r}; expected one of {[m.value for m in cls]}"
            ) from None


@dataclass(frozen=True, eq=False)
class ShiftCurve:
    """Estimator score over a grid of candidate shifts."""

    taus_s: np.ndarray
    values: np.ndarray
    method: Method
    sample_rate_hz: float
    window: Optional[Window] = None
    tau_range_s: Optional[Tuple[float, float]] = None

    def __post_init__(self):
        taus = np.asarray(self.taus_s, dtype=np.float64)
        values = np.asarray(self.values, dtype=np.float64)
        if taus.shape != values.shape or taus.ndim != 1:
            raise ValueError(f"taus and values must be 1-D of equal length, "
                             f"got {taus.shape} and {values.shape}")
        object.__setattr__(self, "taus_s", taus)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "method", Method.parse(self.method))

    def __len__(self):
        return self.values.size

    @property
    def shifts(self) -> np.ndarray:
        """Candidate shifts in samples."""
        return np.rint(self.taus_s * self.sample_rate_hz).astype(np.int64)


@dataclass(frozen=True, eq=False)
class DelayEstimate:
    tau_s: float
    score: float
    method: Method
    curve: ShiftCurve
    index: int


@dataclass(frozen=True, eq=False)
class EstimatorInput:
    """Two channels, the analysis window on ``x1`` and the shift range.

    ``x2`` must hold every sample of the window moved by each shift in
    ``tau_range_s``; nothing is zero-padded or wrapped.
    """

    x1: SampledSignal
    x2: SampledSignal
    window: Window
    tau_range_s: Tuple[float, float]

    def __post_init__(self):
        if self.x1.sample_rate_hz != self.x2.sample_rate_hz:
            raise ValueError(
                f"channels have different sample rates: "
                f"{self.x1.sample_rate_hz} vs {self.x2.sample_rate_hz}"
            )
        lo, hi = (float(v) for v in self.tau_range_s)
        if lo > hi:
            raise ValueError(f"tau range ({lo}, {hi}) is empty")
        object.__setattr__(self, "tau_range_s", (lo, hi))

    @property
    def sample_rate_hz(self) -> float:
        return self.x1.sample_rate_hz

    @property
    def shift_bounds(self) -> Tuple[int, int]:
        fs = self.sample_rate_hz
        lo, hi = self.tau_range_s
        kmin = math.ceil(lo * fs - GRID_TOL)
        kmax = math.floor(hi * fs + GRID_TOL)
        if kmin > kmax:
            raise ValueError(f"tau range {self.tau_range_s} contains no grid shift at {fs} Hz")
        return kmin, kmax

    @property
    def n_window(self) -> int:
        return self.window.n_samples(self.sample_rate_hz)


# ---------------------------------------------------------------------------
# layout shared by all curves


class _Layout:
    """Window of x1, the covering stretch of x2 and lazily built sums.

    ``seg`` has N samples, ``y`` has N + M - 1; shift j (0-based) compares
    ``seg`` with ``y[j:j + N]``.
    """

    def __init__(self, inp: EstimatorInput):
        x1, x2 = inp.x1, inp.x2
        fs = inp.sample_rate_hz
        i0, n = window_indices(x1, inp.window)
        offset = (x1.start_time_s - x2.start_time_s) * fs
        if abs(offset - round(offset)) > GRID_TOL:
            raise AlignmentError(
                f"channel start times {x1.start_time_s} s and {x2.start_time_s} s "
                f"are not on a common sample grid"
            )
        j0 = i0 + int(round(offset))
        kmin, kmax = inp.shift_bounds
        before = max(0, -(j0 + kmin))
        after = max(0, j0 + kmax + n - len(x2))
        if before or after:
            raise CoverageError(
                f"x2 does not cover the shifted windows: missing {before} samples before "
                f"and {after} samples after its span for tau in {inp.tau_range_s}",
                before, after,
            )
        self.fs = fs
        self.n = n
        self.kmin, self.kmax = kmin, kmax
        self.m = kmax - kmin + 1
        self.seg = x1.samples[i0:i0 + n]
        self.y = x2.samples[j0 + kmin:j0 + kmax + n]
        self.t_seg = x1.start_time_s + (i0 + np.arange(n)) / fs
        self.t_y = self.t_seg[0] + (kmin + np.arange(self.y.size)) / fs
        self.window = inp.window
        self.tau_range = inp.tau_range_s
        self._raw = None

    @property
    def taus(self) -> np.ndarray:
        return np.arange(self.kmin, self.kmax + 1) / self.fs

    def curve(self, values, method) -> ShiftCurve:
        return ShiftCurve(self.taus, values, method, self.fs, self.window, self.tau_range)

    def _window_sums(self, v):
        c = np.concatenate(([0.0], np.cumsum(v)))
        return (c[self.n:self.n + self.m] - c[:self.m]) / self.n

    def _cross(self, a, b):
        return blocked_correlation(a, b) / self.n

    def raw(self):
        """``(R, P1, P2)`` on the untouched samples."""
        if self._raw is None:
            r = self._cross(self.seg, self.y)
            p1 = float(np.mean(self.seg * self.seg))
            p2 = self._window_sums(self.y * self.y)
            self._raw = (r, p1, p2)
        return self._raw

    def tsdev(self):
        # Subtracting one affine function of time from both channels leaves
        # every TSDEV value unchanged (the difference becomes a per-shift
        # constant, which C(tau) absorbs); doing so first keeps the expansion
        # below from cancelling large drift terms.
        t = self.t_seg - self.t_seg.mean()
        slope = float(np.dot(t, self.seg) / np.dot(t, t)) if self.n > 1 else 0.0
        ref_t = self.t_seg.mean()
        level = float(np.mean(self.seg))
        a = self.seg - level - slope * (self.t_seg - ref_t)
        b = self.y - level - slope * (self.t_y - ref_t)
        b_shift = float(np.mean(b))
        b = b - b_shift
        a_mean = float(np.mean(a))
        p1 = float(np.mean(a * a))
        cross = self._cross(a, b)
        s2 = self._window_sums(b)
        q2 = self._window_sums(b * b)
        c = a_mean - s2
        return p1 + q2 - 2.0 * cross - c * c


def blocked_correlation(a, b, block=None):
    """``r[k] = sum_i a[i] b[i + k]`` for ``k = 0 .. len(b) - len(a)``.

    ``a`` is cut into blocks of ``block`` samples; each block is correlated
    with its stretch of ``b`` by FFT and the spectra are summed before one
    inverse transform. With few lags this is several times cheaper than a
    single full-length transform. The default block is four times the lag
    count (at least 1024), capped at ``len(a)``.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    n = a.size
    m = b.size - n + 1
    if n == 0 or m < 1:
        raise ValueError(f"need len(b) >= len(a) > 0, got {b.size} and {n}")
    size = min(block or max(4 * m, 1024), n)
    nb = -(-n // size)
    span = size + m - 1
    nfft = sp_fft.next_fast_len(span, real=True)
    a_blocks = np.zeros((nb, size))
    a_blocks.reshape(-1)[:n] = a
    b_pad = np.zeros(nb * size + m - 1)
    b_pad[:b.size] = b
    b_blocks = np.lib.stride_tricks.sliding_window_view(b_pad, span)[::size]
    spec = np.sum(np.conj(sp_fft.rfft(a_blocks, nfft, axis=1)) * sp_fft.rfft(b_blocks, nfft, axis=1),
                  axis=0)
    return sp_fft.irfft(spec, nfft)[:m]


def _layout(inp) -> _Layout:
    return inp if isinstance(inp, _Layout) else _Layout(inp)


# ---------------------------------------------------------------------------
# curves


def cc_curve(inp: EstimatorInput) -> ShiftCurve:
    """Cross-correlation ``(1/N) sum x1[i] x2[i + k]`` for each shift ``k``."""
    lay = _layout(inp)
    r, _, _ = lay.raw()
    return lay.curve(r, Method.CC)


def pncc_curve(inp: EstimatorInput) -> ShiftCurve:
    """Cross-correlation normalized by both window powers at every shift.

    Raises
    ------
    DegeneratePowerError
        If the x1 window or any shifted x2 window has zero power.
    """
    lay = _layout(inp)
    r, p1, p2 = lay.raw()
    if p1 <= 0.0:
        raise DegeneratePowerError("x1 window has zero power")
    bad = np.flatnonzero(p2 <= 0.0)
    if bad.size:
        raise DegeneratePowerError(
            f"shifted x2 window has zero power at tau = {lay.taus[bad[0]]!r} s "
            f"({bad.size} shifts affected)"
        )
    return lay.curve(r / np.sqrt(p1 * p2), Method.PNCC)


def tsdev_curve(inp: EstimatorInput) -> ShiftCurve:
    """Direct TSDEV: for each shift, the mean-removed mean square of ``x1 - x2``.

    Costs O(N M); this is the reference implementation.
    """
    lay = _layout(inp)
    seg, y, n = lay.seg, lay.y, lay.n
    values = np.empty(lay.m)
    for j in range(lay.m):
        d = seg - y[j:j + n]
        d = d - d.mean()
        values[j] = np.mean(d * d)
    return lay.curve(values, Method.TSDEV)


def tsdev_curve_fast(inp: EstimatorInput) -> ShiftCurve:
    """TSDEV via ``P1 + P2(tau) - 2 R(tau) - C(tau)^2``.

    ``R`` comes from one FFT correlation and ``P2``, ``C`` from prefix sums
    over x2, so the cost is O(N log N + M) instead of O(N M). Matches
    :func:`tsdev_curve` to rounding.
    """
    lay = _layout(inp)
    return lay.curve(lay.tsdev(), Method.TSDEV)


def compensated_tsdev_curve(inp: EstimatorInput, noise_input: EstimatorInput) -> ShiftCurve:
    """TSDEV of the signal segment minus TSDEV of a noise-only segment.

    The noise segment should be free of the event and about as long as the
    signal window (within one sample); both must use the same shift grid.
    The difference can go negative.
    """
    lay = _layout(inp)
    noise = _layout(noise_input)
    return lay.curve(lay.tsdev() - _noise_tsdev(lay, noise), Method.TSDEV_COMP)


def _noise_tsdev(lay: _Layout, noise: _Layout):
    if abs(noise.n - lay.n) > 1:
        raise ValueError(
            f"noise window has {noise.n} samples but the signal window has {lay.n}; "
            f"they must agree within one sample"
        )
    if (noise.kmin, noise.kmax) != (lay.kmin, lay.kmax):
        raise ValueError(
            f"noise shift grid [{noise.kmin}, {noise.kmax}] differs from the signal grid "
            f"[{lay.kmin}, {lay.kmax}]"
        )
    return noise.tsdev()


def shift_curves(inp: EstimatorInput, methods: Iterable, noise_input: Optional[EstimatorInput] = None
                 ) -> Dict[Method, ShiftCurve]:
    """Several curves from one layout, sharing the correlation and prefix sums.

    TSDEV and compensated TSDEV use the fast path. ``noise_input`` is
    required when ``TSDEV_COMP`` is requested.
    """
    lay = _layout(inp)
    out = {}
    ts = None
    for m in (Method.parse(m) for m in methods):
        if m is Method.CC:
            out[m] = cc_curve(lay)
        elif m is Method.PNCC:
            out[m] = pncc_curve(lay)
        else:
            if ts is None:
                ts = lay.tsdev()
            if m is Method.TSDEV:
                out[m] = lay.curve(ts, m)
            else:
                if noise_input is None:
                    raise ValueError("TSDEV_COMP needs a noise-only input")
                out[m] = lay.curve(ts - _noise_tsdev(lay, _layout(noise_input)), m)
    return out


# ---------------------------------------------------------------------------
# extremum search


def estimate_delay(curve: ShiftCurve, refine: Optional[Callable[[ShiftCurve, int], float]] = None
                   ) -> DelayEstimate:
    """Pick the maximum (CC, PNCC) or minimum (TSDEV variants) of ``curve``.

    Exact ties go to the smallest ``|tau|``, then to the negative shift. No
    sub-sample interpolation is done unless ``refine`` is given; it receives
    the curve and the winning index and returns a refined delay (see
    :func:`parabolic_refine`). With a refiner ``tau_s`` is no longer on the
    grid; ``score`` stays the grid value.
    """
    if len(curve) == 0:
        raise ValueError("cannot estimate a delay from an empty curve")
    v = curve.values
    if np.isnan(v).any():
        raise ValueError("curve contains NaN values")
    best = v.max() if curve.method.maximize else v.min()
    idx = np.flatnonzero(v == best)
    if idx.size > 1:
        shifts = curve.shifts[idx]
        # lexicographic: |shift| first, negative before positive
        idx = idx[np.lexsort((shifts > 0, np.abs(shifts)))]
    i = int(idx[0])
    tau = float(curve.taus_s[i]) if refine is None else float(refine(curve, i))
    return DelayEstimate(tau, float(v[i]), curve.method, curve, i)


def parabolic_refine(curve: ShiftCurve, index: int) -> float:
    """Vertex of the parabola through the extremum and its two neighbours."""
    if index == 0 or index == len(curve) - 1:
        return float(curve.taus_s[index])
    ym, y0, yp = curve.values[index - 1:index + 2]
    denom = ym - 2.0 * y0 + yp
    if denom == 0.0:
        return float(curve.taus_s[index])
    step = 1.0 / curve.sample_rate_hz
    return float(curve.taus_s[index] + 0.5 * (ym - yp) / denom * step)
