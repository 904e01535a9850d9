"""Command-line front end for the experiment harness.

Subcommands: ``sweep-t`` and ``sweep-snr`` run the calibration MSE sweeps,
``doa`` runs the post-calibration SS-MUSIC sweep, ``bench`` times the solver,
and ``calibrate`` runs a one-shot calibration on a binary snapshot file.
Exit codes: 0 on success, 1 on configuration errors, 2 on runtime errors.
"""

import argparse
import json
import sys
from dataclasses import fields, replace

import numpy as np

from . import logsys
from .covariance import sample_covariance
from .errors import ConfigError, NestcalError
from .estimator import solve_ls, solve_ml_owls
from .harness import (
    ExperimentConfig,
    benchmark_solver,
    emit_results,
    run_calibration_sweep,
    run_doa_sweep,
)
from .snapio import read_snapshots
from .weights import build_noise_model

MODE_ALIASES = {
    "proposed": logsys.PROPOSED,
    "conventional": logsys.CONVENTIONAL,
    "third-ref": logsys.CONVENTIONAL_THIRD_REF,
}

DEFAULT_T_GRID = (500, 1000, 2000, 4000, 8000)
DEFAULT_SNR_GRID = (0.0, 5.0, 10.0, 15.0, 20.0)


def load_config(path):
    """Reads an ExperimentConfig from a JSON file."""
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    known = {f.name for f in fields(ExperimentConfig)}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    for key in ("gains", "phases_deg", "source_angles_deg", "source_powers",
                "t_grid", "snr_grid"):
        if raw.get(key) is not None:
            raw[key] = tuple(raw[key])
    return ExperimentConfig(**raw)


def _add_common(parser):
    parser.add_argument("--config", help="JSON config file")
    parser.add_argument("--trials", type=int, help="Monte-Carlo trials per point")
    parser.add_argument("--seed", type=int, help="master RNG seed")
    parser.add_argument("--mode", choices=sorted(MODE_ALIASES))
    parser.add_argument("--workers", type=int, help="parallel trial workers")
    parser.add_argument("--out", default="out", help="output directory")
    parser.add_argument("--format", choices=("csv", "plot"), action="append",
                        help="output format (repeatable; default csv)")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="nestcal",
        description="Blind gain/phase calibration of 2-level nested arrays",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, desc in (
        ("sweep-t", "calibration MSE vs sample size"),
        ("sweep-snr", "calibration MSE vs SNR"),
        ("doa", "post-calibration SS-MUSIC DOA RMSE sweep"),
        ("bench", "time the assemble+solve path"),
    ):
        p = sub.add_parser(name, help=desc)
        _add_common(p)
        if name == "bench":
            p.add_argument("--repetitions", type=int, default=100)
    cal = sub.add_parser("calibrate", help="one-shot calibration of a snapshot file")
    _add_common(cal)
    cal.add_argument("snapshots", help="binary snapshot file (see snapio)")
    return parser


def _make_config(args):
    config = load_config(args.config) if args.config else ExperimentConfig()
    overrides = {}
    if args.trials is not None:
        overrides["trials"] = args.trials
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.mode is not None:
        overrides["mode"] = MODE_ALIASES[args.mode]
    if getattr(args, "workers", None) is not None:
        overrides["workers"] = args.workers
    if overrides:
        config = replace(config, **overrides)
    return config


def _calibrate_file(args, config):
    snaps = read_snapshots(args.snapshots)
    geom = config.geometry()
    if snaps.n_sensors != geom.n_sensors:
        raise ConfigError(
            f"snapshot file has {snaps.n_sensors} sensors, config {geom.n_sensors}"
        )
    cov = sample_covariance(snaps)
    system = logsys.assemble_system(cov, geom, config.mode, config.third_ref_sensor)
    est_ls = solve_ls(system)
    est = solve_ml_owls(system, build_noise_model(cov, system))
    out = {
        "gains": est.gains.tolist(),
        "phases_deg": np.rad2deg(est.phases).tolist(),
        "ls_gains": est_ls.gains.tolist(),
        "ls_phases_deg": np.rad2deg(est_ls.phases).tolist(),
        "diagnostics": {k: float(v) for k, v in est.diagnostics.items()},
    }
    json.dump(out, sys.stdout, indent=2)
    sys.stdout.write("\n")


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        config = _make_config(args)
        formats = tuple(args.format) if args.format else ("csv",)
        if args.command == "calibrate":
            _calibrate_file(args, config)
            return 0
        if args.command == "bench":
            timing = benchmark_solver(config, args.repetitions)
            json.dump(timing, sys.stdout, indent=2)
            sys.stdout.write("\n")
            return 0
        if args.command == "sweep-t":
            if config.t_grid is None:
                config = replace(config, t_grid=DEFAULT_T_GRID, snr_grid=None)
            result = run_calibration_sweep(config)
            stem = "sweep_t"
        elif args.command == "sweep-snr":
            if config.snr_grid is None:
                config = replace(config, snr_grid=DEFAULT_SNR_GRID, t_grid=None)
            result = run_calibration_sweep(config)
            stem = "sweep_snr"
        else:  # doa
            if config.snr_grid is None and config.t_grid is None:
                config = replace(config, snr_grid=DEFAULT_SNR_GRID)
            result = run_doa_sweep(config)
            stem = "doa"
        paths = emit_results(result, args.out, formats, stem=stem)
        for path in paths:
            print(path)
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except (NestcalError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
