"""Two-channel signal files and shift-curve export.

Two formats carry a pair of channels on one time grid:

CSV
    header ``time_s,ch1_rad,ch2_rad``, one row per sample.
Binary (``.tde``)
    24-byte little-endian header: magic ``b"TDE1"``, four zero bytes,
    sample rate (float64), sample count (uint64); then ``count`` interleaved
    float64 pairs ``ch1, ch2``. The start time is 0.

Shift curves are written as CSV ``tau_s,value`` with a JSON sidecar holding
``method``, ``fs``, ``window`` and ``tau_range``.
"""

from __future__ import annotations

import csv
import json
import struct
from pathlib import Path

import numpy as np

from .estimators import Method, ShiftCurve
from .signals import SampledSignal, Window

MAGIC = b"TDE1"
_HEADER = struct.Struct("<4s4xdQ")
CSV_HEADER = ("time_s", "ch1_rad", "ch2_rad")


class FormatError(ValueError):
    """Malformed two-channel file."""


def _fmt(x) -> str:
    return repr(float(x))


def write_two_channel(path, ch1: SampledSignal, ch2: SampledSignal, fmt=None):
    """Write both channels; ``fmt`` is ``"csv"`` or ``"bin"`` (default from suffix)."""
    if ch1.sample_rate_hz != ch2.sample_rate_hz or len(ch1) != len(ch2):
        raise ValueError("channels must share sample rate and length")
    if abs(ch1.start_time_s - ch2.start_time_s) * ch1.sample_rate_hz > 1e-6:
        raise ValueError("channels must share the start time")
    path = Path(path)
    fmt = fmt or _format_from_suffix(path)
    if fmt == "csv":
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(CSV_HEADER)
            for t, a, b in zip(ch1.times, ch1.samples, ch2.samples):
                w.writerow((_fmt(t), _fmt(a), _fmt(b)))
    elif fmt == "bin":
        if ch1.start_time_s != 0.0:
            raise ValueError("the binary format stores no start time; shift the channels to t=0")
        data = np.empty(2 * len(ch1), dtype="<f8")
        data[0::2] = ch1.samples
        data[1::2] = ch2.samples
        with path.open("wb") as fh:
            fh.write(_HEADER.pack(MAGIC, ch1.sample_rate_hz, len(ch1)))
            fh.write(data.tobytes())
    else:
        raise ValueError(f"unknown format {fmt!r}")
    return path


def read_two_channel(path, fmt=None):
    """Read ``(ch1, ch2)`` from a CSV or binary two-channel file."""
    path = Path(path)
    fmt = fmt or _format_from_suffix(path)
    if fmt == "bin":
        return _read_bin(path)
    if fmt == "csv":
        return _read_csv(path)
    raise ValueError(f"unknown format {fmt!r}")


def _format_from_suffix(path: Path) -> str:
    return "csv" if path.suffix.lower() == ".csv" else "bin"


def _read_bin(path: Path):
    raw = path.read_bytes()
    if len(raw) < _HEADER.size:
        raise FormatError(f"{path}: shorter than the {_HEADER.size}-byte header")
    magic, fs, count = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}, expected {MAGIC!r}")
    if not fs > 0:
        raise FormatError(f"{path}: sample rate {fs} is not positive")
    body = raw[_HEADER.size:]
    if len(body) != 16 * count:
        raise FormatError(f"{path}: header says {count} samples but body holds "
                          f"{len(body) / 16:g}")
    if count == 0:
        raise FormatError(f"{path}: no samples")
    data = np.frombuffer(body, dtype="<f8")
    return SampledSignal(data[0::2], fs), SampledSignal(data[1::2], fs)


def _read_csv(path: Path):
    try:
        table = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from None
    with path.open() as fh:
        header = tuple(h.strip() for h in fh.readline().split(","))
    if header != CSV_HEADER:
        raise FormatError(f"{path}: header {header} != {CSV_HEADER}")
    if table.shape[1] != 3 or table.shape[0] < 2:
        raise FormatError(f"{path}: need at least two rows of three columns")
    t = table[:, 0]
    steps = np.diff(t)
    dt = (t[-1] - t[0]) / (t.size - 1)
    if not dt > 0 or np.max(np.abs(steps - dt)) > 1e-6 * dt:
        raise FormatError(f"{path}: time column is not uniformly increasing")
    fs = float(f"{1.0 / dt:.9g}")
    return SampledSignal(table[:, 1], fs, t[0]), SampledSignal(table[:, 2], fs, t[0])


def write_curve(path, curve: ShiftCurve):
    """Write ``tau_s,value`` CSV plus ``<path>.json`` metadata; returns both paths."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(("tau_s", "value"))
        for t, v in zip(curve.taus_s, curve.values):
            w.writerow((_fmt(t), _fmt(v)))
    meta = {
        "method": curve.method.value,
        "fs": curve.sample_rate_hz,
        "window": None if curve.window is None else
        {"t0_s": curve.window.t0_s, "tw_s": curve.window.tw_s},
        "tau_range": None if curve.tau_range_s is None else list(curve.tau_range_s),
    }
    side = path.with_name(path.name + ".json")
    side.write_text(json.dumps(meta, indent=2) + "\n")
    return path, side


def read_curve(path) -> ShiftCurve:
    path = Path(path)
    table = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    meta = json.loads(path.with_name(path.name + ".json").read_text())
    win = meta.get("window")
    rng = meta.get("tau_range")
    return ShiftCurve(table[:, 0], table[:, 1], Method.parse(meta["method"]), meta["fs"],
                      None if win is None else Window(win["t0_s"], win["tw_s"]),
                      None if rng is None else tuple(rng))
