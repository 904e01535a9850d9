"""Blind gain/phase calibration of a 2-level nested array, end to end.

Walks through the core pipeline on a single synthetic dataset:

1. build a nested array whose second level is spaced by N1 (the geometry
   that makes fully blind calibration possible),
2. inject per-sensor gain and phase offsets and synthesize snapshots,
3. take the element-wise log of the sample covariance, which turns the
   multiplicative distortion into a sparse linear system,
4. solve it twice — ordinary least squares and noise-model-weighted least
   squares — and compare both against the injected truth.

Run:  python3 demos/01_blind_calibration.py
"""

import numpy as np

from nestcal import (
    PROPOSED,
    CalibrationParams,
    SourceScene,
    assemble_system,
    build_geometry,
    build_noise_model,
    sample_covariance,
    solve_ls,
    solve_ml_owls,
    synthesize,
)

# --- 1. geometry: 4 dense sensors at d, 4 sparse sensors at 4d -------------
geom = build_geometry(n1=4, n2=4, spacing_factor=4)
print(f"sensor positions (units of d): {geom.positions.tolist()}")

# --- 2. truth: gains/phases to recover, 15 far-field sources ---------------
calib = CalibrationParams(
    gains=np.array([1.0, 1.3, 1.1, 0.7, 2.2, 0.9, 1.2, 0.8]),
    phases=np.deg2rad([0.0, 0.0, 5.0, 11.0, -8.0, 3.0, -7.0, 9.0]),
)
scene = SourceScene(
    angles_deg=np.linspace(20.0, 70.0, 15),
    powers=np.ones(15),
    noise_power=0.1,  # 10 dB SNR
)
t = 2000
snaps = synthesize(geom, scene, calib, t, seed=0)
print(f"synthesized {snaps.sample_count} snapshots on {snaps.n_sensors} sensors")

# --- 3. log-linearize the sample covariance ---------------------------------
cov = sample_covariance(snaps)
system = assemble_system(cov, geom, PROPOSED)
rows, cols = system.design.shape
print(f"log-domain linear system: {rows} measurements x {cols} unknowns "
      f"(rank {np.linalg.matrix_rank(system.design)})")

# --- 4. solve, unweighted and weighted --------------------------------------
est_ls = solve_ls(system)
noise = build_noise_model(cov, system)  # finite-sample mean + covariance
est_owls = solve_ml_owls(system, noise)

header = f"{'sensor':>6} {'gain true':>10} {'LS':>8} {'OWLS':>8} " \
         f"{'phase true':>11} {'LS':>8} {'OWLS':>8}"
print("\n" + header)
for n in range(geom.n_sensors):
    print(f"{n + 1:>6} {calib.gains[n]:>10.3f} {est_ls.gains[n]:>8.3f} "
          f"{est_owls.gains[n]:>8.3f} "
          f"{np.rad2deg(calib.phases[n]):>10.2f}d "
          f"{np.rad2deg(est_ls.phases[n]):>7.2f}d "
          f"{np.rad2deg(est_owls.phases[n]):>7.2f}d")

for name, est in (("LS  ", est_ls), ("OWLS", est_owls)):
    mse_g = np.mean((est.gains[1:] - calib.gains[1:]) ** 2)
    mse_p = np.mean((est.phases[2:] - calib.phases[2:]) ** 2)
    print(f"{name} gain MSE {mse_g:.3e}   phase MSE {mse_p:.3e} rad^2")
print("\nthe weighted solve typically cuts both MSEs by an order of magnitude")
