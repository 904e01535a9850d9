import numpy as np
import pytest

from nestcal import (
    CONVENTIONAL,
    PROPOSED,
    CalibrationParams,
    RankDeficientDesignError,
    apply_calibration,
    assemble_system,
    build_noise_model,
    model_covariance,
    sample_covariance,
    solve_ls,
    solve_ml_owls,
    synthesize,
)
from nestcal.harness import calibration_mse
from nestcal.weights import NoiseModel, noise_covariance

from conftest import wrap_safe_scene


def toeplitz_deviation(block):
    n = block.shape[0]
    dev = 0.0
    for k in range(n):
        diag = np.diagonal(block, offset=k)
        dev = max(dev, float(np.max(np.abs(diag - diag.mean()))))
    return dev


class TestSolveLs:
    def test_exact_system_recovers_truth(self, geom_proposed, paper_scene,
                                         paper_calib):
        cov = model_covariance(geom_proposed, paper_scene, paper_calib)
        system = assemble_system(cov, geom_proposed, PROPOSED)
        est = solve_ls(system)
        assert np.max(np.abs(est.gains - paper_calib.gains)) < 1e-10
        assert np.max(np.abs(est.phases - paper_calib.phases)) < 1e-10
        assert est.gains[0] == 1.0
        assert est.phases[0] == 0.0 and est.phases[1] == 0.0

    def test_identity_calibration(self, geom_proposed, paper_scene):
        cov = model_covariance(geom_proposed, paper_scene)
        est = solve_ls(assemble_system(cov, geom_proposed, PROPOSED))
        assert np.allclose(est.gains, 1.0)
        assert np.allclose(est.phases, 0.0, atol=1e-12)

    def test_conventional_mode_is_rank_deficient(self, geom_conventional,
                                                 paper_scene, paper_calib):
        cov = model_covariance(geom_conventional, paper_scene, paper_calib)
        system = assemble_system(cov, geom_conventional, CONVENTIONAL)
        with pytest.raises(RankDeficientDesignError):
            solve_ls(system)


class TestSolveMlOwls:
    def test_identity_weights_match_ls(self, geom_proposed, paper_scene,
                                       paper_calib):
        snaps = synthesize(geom_proposed, paper_scene, paper_calib, 500, seed=0)
        cov = sample_covariance(snaps)
        system = assemble_system(cov, geom_proposed, PROPOSED)
        rows = system.measurements.size
        noise = NoiseModel(mean=np.zeros(rows), covariance=np.eye(rows),
                           source_sample_count=500)
        est_owls = solve_ml_owls(system, noise)
        est_ls = solve_ls(system)
        assert np.max(np.abs(est_owls.theta - est_ls.theta)) < 1e-10

    def test_model_covariance_input_recovers_truth(self, geom_proposed,
                                                   paper_scene, paper_calib):
        cov = model_covariance(geom_proposed, paper_scene, paper_calib)
        system = assemble_system(cov, geom_proposed, PROPOSED)
        noise = build_noise_model(cov, system)
        assert np.all(noise.mean == 0.0)  # asymptotic flag
        est = solve_ml_owls(system, noise)
        assert np.max(np.abs(est.gains - paper_calib.gains)) < 1e-8
        assert np.max(np.abs(est.phases - paper_calib.phases)) < 1e-8

    def test_beats_ls_on_sampled_data(self, geom_proposed, paper_scene,
                                      paper_calib):
        snaps = synthesize(geom_proposed, paper_scene, paper_calib, 2000, seed=42)
        cov = sample_covariance(snaps)
        system = assemble_system(cov, geom_proposed, PROPOSED)
        est_ls = solve_ls(system)
        est_owls = solve_ml_owls(system, build_noise_model(cov, system))
        ls_g, ls_p = calibration_mse(est_ls, paper_calib)
        ow_g, ow_p = calibration_mse(est_owls, paper_calib)
        assert ow_g < ls_g
        assert ow_p < ls_p

    def test_diagnostics_populated(self, geom_proposed, paper_scene, paper_calib):
        snaps = synthesize(geom_proposed, paper_scene, paper_calib, 1000, seed=1)
        cov = sample_covariance(snaps)
        system = assemble_system(cov, geom_proposed, PROPOSED)
        est = solve_ml_owls(system, build_noise_model(cov, system))
        assert est.method == "ml_owls"
        assert est.diagnostics["design_rank"] == 46
        assert est.diagnostics["weight_condition"] > 0
        assert "residual_norm" in est.diagnostics

    def test_gauss_markov_ordering_with_oracle_weights(self, geom_proposed,
                                                       paper_calib):
        # With the true noise covariance supplied, weighted LS cannot lose
        # to ordinary LS on average (BLUE property).
        scene = wrap_safe_scene()
        t = 1000
        r_true = model_covariance(geom_proposed, scene, paper_calib)
        trials = 200
        err_ls = np.zeros(2)
        err_owls = np.zeros(2)
        oracle = None
        for trial in range(trials):
            snaps = synthesize(geom_proposed, scene, paper_calib, t,
                               seed=[99, trial])
            cov = sample_covariance(snaps)
            system = assemble_system(cov, geom_proposed, PROPOSED)
            if oracle is None:
                from nestcal.weights import noise_mean, regularize

                lam = noise_covariance(r_true, t, system.row_index)
                oracle = NoiseModel(
                    mean=noise_mean(t, 8),
                    covariance=regularize(lam),
                    source_sample_count=t,
                )
            est_ls = solve_ls(system)
            est_owls = solve_ml_owls(system, oracle)
            err_ls += calibration_mse(est_ls, paper_calib)
            err_owls += calibration_mse(est_owls, paper_calib)
        assert err_owls[0] <= err_ls[0]
        assert err_owls[1] <= err_ls[1]


class TestApplyCalibration:
    def test_truth_recovers_nominal(self, geom_proposed, paper_scene,
                                    paper_calib):
        r = model_covariance(geom_proposed, paper_scene, paper_calib)
        system = assemble_system(r, geom_proposed, PROPOSED)
        est = solve_ls(system)
        recovered = apply_calibration(r, est)
        nominal = model_covariance(geom_proposed, paper_scene)
        assert np.max(np.abs(recovered.matrix - nominal.matrix)) < 1e-9

    def test_identity_estimate_is_noop(self, geom_proposed, paper_scene,
                                       paper_calib):
        r = model_covariance(geom_proposed, paper_scene, paper_calib)
        system = assemble_system(r, geom_proposed, PROPOSED)
        est = solve_ls(system)
        ident = est.__class__(
            gains=np.ones(8), phases=np.zeros(8), theta=est.theta,
            method="ls", diagnostics={},
        )
        out = apply_calibration(r, ident)
        assert np.allclose(out.matrix, r.matrix)

    def test_calibration_restores_toeplitz_blocks(self, geom_proposed,
                                                  paper_scene, paper_calib):
        snaps = synthesize(geom_proposed, paper_scene, paper_calib, 4000, seed=8)
        cov = sample_covariance(snaps)
        system = assemble_system(cov, geom_proposed, PROPOSED)
        est = solve_ml_owls(system, build_noise_model(cov, system))
        calibrated = apply_calibration(cov, est)
        n1 = geom_proposed.n1
        for block in (slice(0, n1 + 1), slice(n1, None)):
            raw_dev = toeplitz_deviation(cov.matrix[block, block])
            cal_dev = toeplitz_deviation(calibrated.matrix[block, block])
            assert cal_dev < raw_dev
