"""Command line front end: ``tde sweep|estimate|localize|gen``.

Exit codes: 0 success, 2 invalid config/flags/file, 3 I/O failure,
4 estimator coverage error, 5 delay maps outside the link.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import jsonschema
import numpy as np

from . import experiments as ex
from .errors import CoverageError, OutOfLinkError
from .estimators import EstimatorInput, Method, estimate_delay, shift_curves
from .fileio import FormatError, read_two_channel, write_curve, write_two_channel
from .localization import (FiberLink, FieldEmulation, build_field_trial, link_tau_range, localize,
                           run_field_emulation)
from .signals import (NoiseSpec, SampledSignal, Window, channel_pair, gen_noise, gen_sine,
                      snr_scale)

EXIT_OK, EXIT_CONFIG, EXIT_IO, EXIT_COVERAGE, EXIT_OUT_OF_LINK = 0, 2, 3, 4, 5

SWEEP_DEFAULTS = {
    "snr": [45.0, 40.0, 35.0, 30.0, 25.0, 20.0, 15.0, 10.0, 5.0, 0.0],
    "window": [0.2, 0.2125, 0.225, 0.2375, 0.25],
    "drift": [-100.0, -50.0, -10.0, 0.0, 10.0, 50.0, 100.0],
    "lowfreq": [0.01, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5],
    "commonnoise": None,
}

_NUM = {"type": "number"}
_POS = {"type": "number", "exclusiveMinimum": 0}
CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "seed": {"type": "integer", "minimum": 0, "maximum": 2 ** 64 - 1},
        "trials": {"type": "integer", "minimum": 2},
        "workers": {"type": "integer", "minimum": 1},
        "out_dir": {"type": "string"},
        "values": {"type": "array", "items": _NUM, "minItems": 1},
        "methods": {"type": "array", "items": {"type": "string"}, "minItems": 1},
        "trial": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "freq_hz": _POS, "amplitude": _NUM, "tau0_s": _NUM, "tw_s": _POS,
                "snr_db": _NUM, "fs": _POS, "random_t0": {"type": "boolean"},
                "tau_range_s": {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2},
            },
        },
        "lowfreq_amplitude_rad": {"type": "number", "minimum": 0},
        "common_noise": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"center_hz": _POS, "bandwidth_hz": _POS,
                           "power_rad2": {"type": "number", "minimum": 0}},
        },
        "link": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"length_m": _POS, "refractive_index": {"type": "number", "minimum": 1}},
        },
    },
}


class CliError(Exception):
    def __init__(self, message, code=EXIT_CONFIG):
        super().__init__(message)
        self.code = code


def _default_seed():
    raw = os.environ.get("TDE_SEED")
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise CliError(f"TDE_SEED must be an integer, got {raw!r}") from None


def load_config(path) -> dict:
    if path is None:
        return {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise CliError(f"cannot read config {path}: {exc}", EXIT_IO) from None
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CliError(f"config {path} is not valid JSON: {exc}") from None
    validate_config(cfg)
    return cfg


def validate_config(cfg: dict):
    try:
        jsonschema.validate(cfg, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise CliError(f"invalid config field {where}: {exc.message}") from None


def _trial_base(cfg: dict) -> ex.TrialSpec:
    t = cfg.get("trial", {})
    base = ex.TrialSpec()
    sig = ex.SineSource(t.get("freq_hz", 20.0), t.get("amplitude", 1.0))
    kw = {"signal": sig}
    for src, dst in (("tau0_s", "tau0_s"), ("tw_s", "tw_s"), ("fs", "sample_rate_hz"),
                     ("random_t0", "random_t0")):
        if src in t:
            kw[dst] = t[src]
    if "tau_range_s" in t:
        kw["tau_range_s"] = tuple(t["tau_range_s"])
    if "snr_db" in t:
        kw["noise"] = (ex.NoiseTerm(NoiseSpec.white(snr_db=t["snr_db"])),)
    try:
        return base.replace(**kw)
    except ValueError as exc:
        raise CliError(f"invalid config field trial: {exc}") from None


def cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    seed = args.seed if args.seed is not None else cfg.get("seed", _default_seed())
    trials = args.trials if args.trials is not None else cfg.get("trials", ex.DEFAULT_TRIALS)
    workers = args.workers if args.workers is not None else cfg.get("workers", 1)
    out_dir = Path(args.out or cfg.get("out_dir", "."))
    values = cfg.get("values", SWEEP_DEFAULTS[args.kind])
    base = _trial_base(cfg)
    kw = {"base": base, "workers": workers}
    if "methods" in cfg:
        try:
            kw["methods"] = tuple(Method.parse(m) for m in cfg["methods"])
        except ValueError as exc:
            raise CliError(f"invalid config field methods: {exc}") from None
    try:
        if args.kind == "snr":
            report = ex.run_snr_sweep(values, trials, seed, **kw)
        elif args.kind == "window":
            report = ex.run_window_sweep(values, trials, seed, **kw)
        elif args.kind == "drift":
            report = ex.run_drift_sweep(values, trials, seed, **kw)
        elif args.kind == "lowfreq":
            report = ex.run_lowfreq_sweep(
                values, trials, seed,
                amplitude_rad=cfg.get("lowfreq_amplitude_rad", ex.LOWFREQ_AMPLITUDE_RAD), **kw)
        else:
            report = ex.run_commonnoise_experiment(trials, seed, **cfg.get("common_noise", {}),
                                                   **kw)
    except (ValueError, TypeError) as exc:
        raise CliError(f"invalid sweep configuration: {exc}") from None
    try:
        csv_path, json_path = report.write(out_dir, ex.FIGURE_FILES[args.kind])
    except OSError as exc:
        raise CliError(f"cannot write report to {out_dir}: {exc}", EXIT_IO) from None
    print(json.dumps({"csv": str(csv_path), "summary": str(json_path)}))
    return EXIT_OK


def _read_channels(path, fmt):
    try:
        return read_two_channel(path, fmt)
    except FormatError as exc:
        raise CliError(str(exc)) from None
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc}", EXIT_IO) from None


def _tau_range(args, default):
    lo, hi = default
    if args.tau_max is not None:
        hi = args.tau_max
        lo = -args.tau_max if args.tau_min is None else lo
    if args.tau_min is not None:
        lo = args.tau_min
    if lo > hi:
        raise CliError(f"--tau-min {lo} exceeds --tau-max {hi}")
    return lo, hi


def _window(args, x: SampledSignal, tau_range) -> Window:
    fs = x.sample_rate_hz
    before = max(0, -math.floor(tau_range[0] * fs))
    after = max(0, math.ceil(tau_range[1] * fs))
    t0 = args.t0 if args.t0 is not None else x.start_time_s + before / fs
    if args.tw is not None:
        tw = args.tw
    else:
        tw = x.end_time_s - after / fs - t0
    if not tw > 0:
        raise CliError(f"analysis window length {tw} s is not positive")
    return Window(t0, tw)


def cmd_estimate(args) -> int:
    x1, x2 = _read_channels(args.file, args.format)
    method = _method(args.method)
    rng = _tau_range(args, (-5e-4, 5e-4))
    window = _window(args, x1, rng)
    noise = None
    if method is Method.TSDEV_COMP:
        if args.comp_t0 is None:
            raise CliError("--method tsdev_comp needs --comp-t0")
        noise = EstimatorInput(x1, x2, Window(args.comp_t0, window.tw_s), rng)
    try:
        curve = shift_curves(EstimatorInput(x1, x2, window, rng), [method], noise)[method]
    except CoverageError as exc:
        raise CliError(str(exc), EXIT_COVERAGE) from None
    except ValueError as exc:
        raise CliError(str(exc)) from None
    est = estimate_delay(curve)
    if args.curve:
        try:
            write_curve(args.curve, curve)
        except OSError as exc:
            raise CliError(f"cannot write curve: {exc}", EXIT_IO) from None
    print(json.dumps({"method": method.value, "tau_s": est.tau_s, "score": est.score}))
    return EXIT_OK


def _method(name) -> Method:
    try:
        return Method.parse(name)
    except ValueError as exc:
        raise CliError(str(exc)) from None


def _link(args, cfg=None) -> FiberLink:
    link_cfg = (cfg or {}).get("link", {})
    length = args.length_m if args.length_m is not None else link_cfg.get("length_m")
    n = args.refractive_index if args.refractive_index is not None else \
        link_cfg.get("refractive_index", 1.468)
    if length is None:
        raise CliError("link length is required (--length-m or config link.length_m)")
    try:
        return FiberLink(length, n)
    except ValueError as exc:
        raise CliError(str(exc)) from None


def cmd_localize(args) -> int:
    cfg = load_config(args.config)
    method = _method(args.method)
    if args.emulate:
        link = _link(args, cfg) if (args.length_m or cfg.get("link")) else FieldEmulation().link
        emu = FieldEmulation(link=link, methods=(method,))
        if args.position_m is not None:
            emu = emu.replace(position_m=args.position_m)
        seed = args.seed if args.seed is not None else cfg.get("seed", _default_seed())
        try:
            rep = run_field_emulation(args.trials, seed, emu, args.workers)
        except OutOfLinkError as exc:
            print(json.dumps({"error": str(exc), "tau_s": exc.tau_s}), file=sys.stderr)
            return EXIT_OUT_OF_LINK
        except ValueError as exc:
            raise CliError(str(exc)) from None
        pos = rep.positions_m[method]
        print(json.dumps({"method": method.value, "trials": args.trials, "seed": seed,
                          "true_position_m": emu.position_m,
                          "mean_position_m": float(np.mean(pos)),
                          "mean_error_m": rep.mean_error_m(method),
                          "std_m": rep.std_m(method)}))
        return EXIT_OK
    if args.file is None:
        raise CliError("localize needs a FILE or --emulate")
    link = _link(args, cfg)
    x_ccw, x_cw = _read_channels(args.file, args.format)
    rng = _tau_range(args, link_tau_range(link))
    window = _window(args, x_ccw, rng)
    comp = None
    if method is Method.TSDEV_COMP:
        if args.comp_t0 is None:
            raise CliError("--method tsdev_comp needs --comp-t0")
        comp = Window(args.comp_t0, window.tw_s)
    try:
        loc = localize(x_cw, x_ccw, link, method, window, rng, comp)
    except OutOfLinkError as exc:
        print(json.dumps({"error": str(exc), "tau_s": exc.tau_s,
                          "position_m": exc.position_m}), file=sys.stderr)
        return EXIT_OUT_OF_LINK
    except CoverageError as exc:
        raise CliError(str(exc), EXIT_COVERAGE) from None
    except ValueError as exc:
        raise CliError(str(exc)) from None
    print(json.dumps({"position_m": loc.position_m, "tau_s": loc.estimate.tau_s,
                      "method": method.value}))
    return EXIT_OK


def cmd_gen(args) -> int:
    seed = args.seed if args.seed is not None else _default_seed()
    if args.kind == "sine":
        fs = args.fs
        span = Window(0.0, args.duration)
        try:
            margin = abs(args.tau0) + 1 / fs
            src = gen_sine(args.freq, args.amplitude, 0.0, args.duration + 2 * margin, fs, -margin)
            x1, x2 = channel_pair(src, args.tau0, span)
            if args.snr_db is not None:
                chans = []
                for clean, stream in ((x1, 0), (x2, 1)):
                    w = gen_noise(NoiseSpec.white(), args.duration, fs, seed, stream=stream)
                    chans.append(clean.with_samples(
                        clean.samples + snr_scale(clean, w, args.snr_db) * w.samples))
                x1, x2 = chans
        except ValueError as exc:
            raise CliError(str(exc)) from None
    else:
        emu = FieldEmulation()
        if args.length_m is not None:
            emu = emu.replace(link=FiberLink(args.length_m, args.refractive_index or 1.468))
        if args.position_m is not None:
            emu = emu.replace(position_m=args.position_m)
        ft = build_field_trial(emu, seed, 0)
        x1, x2 = ft.channels.x_ccw, ft.channels.x_cw
        # files start at t = 0; windows printed below are in file time
        shift = x1.start_time_s
        x1 = SampledSignal(x1.samples, x1.sample_rate_hz, 0.0)
        x2 = SampledSignal(x2.samples, x2.sample_rate_hz, 0.0)
        print(json.dumps({"window_t0_s": ft.window.t0_s - shift, "window_tw_s": ft.window.tw_s,
                          "comp_t0_s": ft.noise_window.t0_s - shift,
                          "tau0_grid_s": ft.channels.tau0_grid_s,
                          "position_grid_m": ft.channels.position_grid_m}))
    try:
        write_two_channel(args.out, x1, x2, args.format)
    except OSError as exc:
        raise CliError(f"cannot write {args.out}: {exc}", EXIT_IO) from None
    return EXIT_OK


def _add_window_flags(p):
    p.add_argument("--t0", type=float, help="analysis window start (s), default: earliest valid")
    p.add_argument("--tw", type=float, help="analysis window length (s), default: longest valid")
    p.add_argument("--tau-min", type=float, help="smallest candidate shift (s)")
    p.add_argument("--tau-max", type=float, help="largest candidate shift (s)")
    p.add_argument("--comp-t0", type=float,
                   help="start (s) of the noise-only segment for tsdev_comp")
    p.add_argument("--format", choices=("csv", "bin"), help="file format (default from suffix)")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="tde",
        description="Time delay estimation with CC, PNCC, TSDEV and compensated TSDEV.",
        epilog="Two-channel CSV columns: time_s,ch1_rad,ch2_rad. Sweep CSV columns: "
               "param,method,trial,error_s (error = estimate - tau0). Curve CSV columns: "
               "tau_s,value. TDE_SEED sets the default seed.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("sweep", help="run a Monte Carlo sweep and write figN_*.csv + .json",
                       description="Writes <out>/figN_<kind>.csv with columns "
                                   "param,method,trial,error_s and a JSON summary.")
    s.add_argument("kind", choices=sorted(SWEEP_DEFAULTS))
    s.add_argument("--config", help="JSON run configuration")
    s.add_argument("--out", help="output directory (overrides config out_dir)")
    s.add_argument("--seed", type=int)
    s.add_argument("--trials", type=int)
    s.add_argument("--workers", type=int)
    s.set_defaults(func=cmd_sweep)

    e = sub.add_parser("estimate", help="estimate the delay of ch2 relative to ch1",
                       description="Prints JSON {method, tau_s, score}; --curve writes "
                                   "tau_s,value CSV plus a JSON sidecar.")
    e.add_argument("file")
    e.add_argument("--method", default="tsdev")
    e.add_argument("--curve", help="write the full shift curve to this CSV")
    _add_window_flags(e)
    e.set_defaults(func=cmd_estimate)

    lo = sub.add_parser("localize", help="locate a vibration from CCW (ch1) and CW (ch2) channels",
                        description="Prints JSON {position_m, tau_s, method}. With --emulate, "
                                    "repeats the synthetic field run --trials times and prints "
                                    "mean/std of the position.")
    lo.add_argument("file", nargs="?")
    lo.add_argument("--method", default="tsdev")
    lo.add_argument("--config", help="JSON configuration with a link section")
    lo.add_argument("--length-m", type=float)
    lo.add_argument("--refractive-index", type=float)
    lo.add_argument("--emulate", action="store_true", help="use synthetic field channels")
    lo.add_argument("--position-m", type=float, help="true event position for --emulate")
    lo.add_argument("--trials", type=int, default=10, help="emulation trials (>= 2)")
    lo.add_argument("--seed", type=int)
    lo.add_argument("--workers", type=int, default=1)
    _add_window_flags(lo)
    lo.set_defaults(func=cmd_localize)

    g = sub.add_parser("gen", help="write a synthetic two-channel file")
    g.add_argument("out")
    g.add_argument("--kind", choices=("sine", "field"), default="sine")
    g.add_argument("--freq", type=float, default=20.0)
    g.add_argument("--amplitude", type=float, default=1.0)
    g.add_argument("--tau0", type=float, default=100e-6)
    g.add_argument("--duration", type=float, default=0.3)
    g.add_argument("--fs", type=float, default=100_000.0)
    g.add_argument("--snr-db", type=float)
    g.add_argument("--length-m", type=float)
    g.add_argument("--refractive-index", type=float)
    g.add_argument("--position-m", type=float)
    g.add_argument("--seed", type=int)
    g.add_argument("--format", choices=("csv", "bin"))
    g.set_defaults(func=cmd_gen)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"tde: error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
