"""Monte-Carlo experiment runner: calibration MSE sweeps, post-calibration
DOA sweeps, solver benchmarks, and CSV/plot emission."""

import csv
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import doa as doa_mod
from . import logsys
from .covariance import sample_covariance
from .errors import AllTrialsFailedError, ConfigError, NestcalError
from .estimator import apply_calibration, solve_ls, solve_ml_owls
from .geometry import build_geometry
from .synth import CalibrationParams, SourceScene, snr_to_noise_power, synthesize
from .weights import build_noise_model

CSV_HEADER = [
    "axis",
    "method",
    "mse_gain",
    "mse_phase_rad2",
    "doa_rmse_deg",
    "mean_solve_ms",
    "failures",
]

PAPER_GAINS = (1.0, 1.3, 1.1, 0.7, 2.2, 0.9, 1.2, 0.8)
PAPER_PHASES_DEG = (0.0, 0.0, 5.0, 11.0, -8.0, 3.0, -7.0, 9.0)


@dataclass(frozen=True)
class ExperimentConfig:
    """Full description of a Monte-Carlo sweep.

    Exactly one of ``t_grid`` (with fixed ``snr_db``) or ``snr_grid`` (with
    fixed ``t``) defines the sweep axis. The calibration truth must satisfy
    the reference convention (unit gain on sensor 1, zero phase on sensors
    1 and 2).
    """

    n1: int = 4
    n2: int = 4
    spacing_factor: int = 4
    unit_spacing: float = 0.5
    wavelength: float = 1.0
    mode: str = logsys.PROPOSED
    third_ref_sensor: int | None = None
    gains: tuple = PAPER_GAINS
    phases_deg: tuple = PAPER_PHASES_DEG
    source_angles_deg: tuple = tuple(np.linspace(20.0, 70.0, 15))
    source_powers: tuple | None = None
    t_grid: tuple | None = None
    snr_grid: tuple | None = None
    t: int = 2000
    snr_db: float = 10.0
    trials: int = 1000
    seed: int = 0
    workers: int = 1

    def validate(self):
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if (self.t_grid is None) == (self.snr_grid is None):
            raise ConfigError("exactly one of t_grid or snr_grid must be set")
        grid = self.t_grid if self.t_grid is not None else self.snr_grid
        if len(grid) == 0:
            raise ConfigError("sweep grid must be nonempty")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ConfigError("sweep grid must be strictly increasing")
        calib = self.calibration()
        if not calib.satisfies_references(atol=1e-12):
            raise ConfigError(
                "calibration truth must satisfy the reference convention"
            )

    def geometry(self):
        return build_geometry(
            self.n1, self.n2, self.spacing_factor, self.unit_spacing, self.wavelength
        )

    def calibration(self):
        return CalibrationParams(
            gains=np.asarray(self.gains, dtype=float),
            phases=np.deg2rad(self.phases_deg),
        )

    def scene(self, snr_db):
        angles = np.asarray(self.source_angles_deg, dtype=float)
        powers = (
            np.ones(angles.size)
            if self.source_powers is None
            else np.asarray(self.source_powers, dtype=float)
        )
        noise = snr_to_noise_power(snr_db, float(np.max(powers)))
        return SourceScene(angles_deg=angles, powers=powers, noise_power=noise)

    def grid_points(self):
        """(axis_value, t, snr_db) per sweep point."""
        if self.t_grid is not None:
            return [(float(t), int(t), self.snr_db) for t in self.t_grid]
        return [(float(s), self.t, float(s)) for s in self.snr_grid]


@dataclass(frozen=True)
class ExperimentResult:
    """Per-grid-point records; each record is a dict keyed by CSV_HEADER."""

    records: tuple
    kind: str = "calibration"


def calibration_mse(est, truth):
    """Gain and phase MSE under the reference convention.

    Gain MSE averages squared errors over sensors 2..N (the non-reference
    gains); phase MSE over sensors 3..N, in radians^2.
    """
    gain_err = est.gains[1:] - truth.gains[1:]
    phase_err = est.phases[2:] - truth.phases[2:]
    return float(np.mean(gain_err**2)), float(np.mean(phase_err**2))


def _trial_seed(master, point_index, trial):
    return [master, point_index, trial]


def _run_trials(config, point_index, trial_fn):
    """Runs trials (optionally threaded) and reduces in fixed trial order."""
    indices = range(config.trials)
    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            outcomes = list(pool.map(trial_fn, indices))
    else:
        outcomes = [trial_fn(i) for i in indices]
    results = [r for r in outcomes if r is not None]
    failures = config.trials - len(results)
    if not results:
        raise AllTrialsFailedError(f"all {config.trials} trials failed")
    if failures:
        warnings.warn(f"{failures} of {config.trials} trials failed", stacklevel=2)
    return results, failures


def run_calibration_sweep(config):
    """Average gain/phase MSE of ordinary LS and ML-weighted LS per point."""
    config.validate()
    geom = config.geometry()
    calib = config.calibration()
    records = []
    for point_index, (axis, t, snr_db) in enumerate(config.grid_points()):
        scene = config.scene(snr_db)

        def trial(trial_index, t=t, scene=scene, point_index=point_index):
            seed = _trial_seed(config.seed, point_index, trial_index)
            snaps = synthesize(geom, scene, calib, t, seed)
            cov = sample_covariance(snaps)
            try:
                tic = time.perf_counter()
                system = logsys.assemble_system(
                    cov, geom, config.mode, config.third_ref_sensor
                )
                est_ls = solve_ls(system)
                noise = build_noise_model(cov, system)
                est_owls = solve_ml_owls(system, noise)
                elapsed = time.perf_counter() - tic
            except NestcalError:
                return None
            return (
                calibration_mse(est_ls, calib),
                calibration_mse(est_owls, calib),
                elapsed,
            )

        results, failures = _run_trials(config, point_index, trial)
        ls_mse = np.mean([r[0] for r in results], axis=0)
        owls_mse = np.mean([r[1] for r in results], axis=0)
        mean_ms = 1e3 * float(np.mean([r[2] for r in results]))
        for method, (mg, mp) in (("ls", ls_mse), ("ml_owls", owls_mse)):
            records.append(
                {
                    "axis": axis,
                    "method": method,
                    "mse_gain": float(mg),
                    "mse_phase_rad2": float(mp),
                    "doa_rmse_deg": None,
                    "mean_solve_ms": mean_ms,
                    "failures": failures,
                }
            )
    return ExperimentResult(records=tuple(records), kind="calibration")


def run_doa_sweep(config, doa_angles_deg=(33.0, 45.0, 57.0), grid_step_deg=None):
    """Post-calibration SS-MUSIC DOA RMSE vs an uncalibrated baseline."""
    config = replace(config, source_angles_deg=tuple(doa_angles_deg))
    config.validate()
    geom = config.geometry()
    calib = config.calibration()
    truth = np.sort(np.asarray(doa_angles_deg, dtype=float))
    m = truth.size
    step = grid_step_deg if grid_step_deg is not None else doa_mod.DEFAULT_GRID_STEP_DEG
    records = []
    for point_index, (axis, t, snr_db) in enumerate(config.grid_points()):
        scene = config.scene(snr_db)

        def trial(trial_index, t=t, scene=scene, point_index=point_index):
            seed = _trial_seed(config.seed, point_index, trial_index)
            snaps = synthesize(geom, scene, calib, t, seed)
            cov = sample_covariance(snaps)
            try:
                tic = time.perf_counter()
                system = logsys.assemble_system(
                    cov, geom, config.mode, config.third_ref_sensor
                )
                noise = build_noise_model(cov, system)
                est = solve_ml_owls(system, noise)
                elapsed = time.perf_counter() - tic
                calibrated = apply_calibration(cov, est)
                rmse_cal = doa_mod.doa_rmse(
                    doa_mod.estimate_doas(calibrated, geom, m, step), truth
                )
                rmse_raw = doa_mod.doa_rmse(
                    doa_mod.estimate_doas(cov, geom, m, step), truth
                )
            except NestcalError:
                return None
            return rmse_cal, rmse_raw, elapsed

        results, failures = _run_trials(config, point_index, trial)
        rmse_cal = float(np.mean([r[0] for r in results]))
        rmse_raw = float(np.mean([r[1] for r in results]))
        mean_ms = 1e3 * float(np.mean([r[2] for r in results]))
        for method, rmse in (("ml_owls", rmse_cal), ("uncalibrated", rmse_raw)):
            records.append(
                {
                    "axis": axis,
                    "method": method,
                    "mse_gain": None,
                    "mse_phase_rad2": None,
                    "doa_rmse_deg": rmse,
                    "mean_solve_ms": mean_ms,
                    "failures": failures,
                }
            )
    return ExperimentResult(records=tuple(records), kind="doa")


def benchmark_solver(config, repetitions=100):
    """Median and mean wall time of assemble + ML-weighted solve."""
    if repetitions < 1:
        raise ValueError("repetitions must be >= 1")
    geom = config.geometry()
    calib = config.calibration()
    scene = config.scene(config.snr_db)
    snaps = synthesize(geom, scene, calib, config.t, config.seed)
    cov = sample_covariance(snaps)
    times = []
    for _ in range(repetitions):
        tic = time.perf_counter()
        system = logsys.assemble_system(cov, geom, config.mode, config.third_ref_sensor)
        noise = build_noise_model(cov, system)
        solve_ml_owls(system, noise)
        times.append(time.perf_counter() - tic)
    times = np.asarray(times)
    return {
        "median_ms": 1e3 * float(np.median(times)),
        "mean_ms": 1e3 * float(np.mean(times)),
        "repetitions": repetitions,
    }


def _csv_cell(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def emit_results(result, out_dir, formats=("csv",), stem="results"):
    """Writes the result as CSV and/or a log-scale plot; returns the paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    if "csv" in formats:
        path = out_dir / f"{stem}.csv"
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(CSV_HEADER)
            for rec in result.records:
                writer.writerow([_csv_cell(rec[k]) for k in CSV_HEADER])
        paths.append(path)
    if "plot" in formats:
        paths.append(_plot_results(result, out_dir / f"{stem}.png"))
    return paths


def _plot_results(result, path):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    methods = sorted({rec["method"] for rec in result.records})
    if result.kind == "doa":
        panels = [("doa_rmse_deg", "DOA RMSE [deg]")]
    else:
        panels = [("mse_gain", "gain MSE"), ("mse_phase_rad2", "phase MSE [rad^2]")]
    fig, axes = plt.subplots(1, len(panels), figsize=(6 * len(panels), 4.5))
    axes = np.atleast_1d(axes)
    for ax, (key, label) in zip(axes, panels):
        for method in methods:
            pts = [
                (rec["axis"], rec[key])
                for rec in result.records
                if rec["method"] == method and rec[key] is not None
            ]
            if pts:
                xs, ys = zip(*pts)
                ax.semilogy(xs, ys, marker="o", label=method)
        ax.set_xlabel("sweep axis")
        ax.set_ylabel(label)
        ax.grid(True, which="both", alpha=0.3)
        ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return path
