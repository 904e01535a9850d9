import numpy as np
import pytest

from nestcal import (
    CONVENTIONAL,
    CONVENTIONAL_THIRD_REF,
    PROPOSED,
    CalibrationParams,
    CovarianceEstimate,
    ZeroCovarianceEntryError,
    assemble_system,
    build_design_matrix,
    build_geometry,
    log_transform,
    model_covariance,
)
from nestcal.logsys import mu_pairs, nu_pairs, true_theta

from conftest import wrap_safe_scene


class TestLogTransform:
    def test_all_ones_matrix_gives_zero_logs(self):
        cov = CovarianceEstimate(matrix=np.ones((4, 4), dtype=complex),
                                 sample_count=10)
        meas = log_transform(cov)
        assert np.allclose(meas.mu, 0.0)
        assert np.allclose(meas.nu, 0.0)
        assert not np.any(meas.wrap_flags)

    def test_identity_has_zero_off_diagonals(self):
        # log of a zero entry is undefined: identity input is an error, with
        # the offending index reported.
        cov = CovarianceEstimate(matrix=np.eye(3, dtype=complex), sample_count=10)
        with pytest.raises(ZeroCovarianceEntryError) as exc:
            log_transform(cov)
        assert (exc.value.i, exc.value.j) == (0, 1)

    def test_single_entry_value(self):
        m = np.eye(2, dtype=complex)
        m[0, 1] = 2.0 * np.exp(1j * np.pi / 6)
        m[1, 0] = np.conj(m[0, 1])
        meas = log_transform(CovarianceEstimate(matrix=m, sample_count=10))
        # mu rows: (0,0), (0,1), (1,1); nu rows: (0,1)
        assert meas.mu[1] == pytest.approx(np.log(2.0))
        assert meas.nu[0] == pytest.approx(np.pi / 6)

    def test_wrap_flags_near_pi(self):
        m = np.eye(2, dtype=complex)
        m[0, 1] = np.exp(1j * (np.pi - 0.1))
        m[1, 0] = np.conj(m[0, 1])
        meas = log_transform(CovarianceEstimate(matrix=m, sample_count=10))
        assert meas.wrap_flags.tolist() == [True]

    def test_log_relations_on_model_covariance(
        self, geom_proposed, paper_scene, paper_calib
    ):
        c = model_covariance(geom_proposed, paper_scene)
        r = model_covariance(geom_proposed, paper_scene, paper_calib)
        meas_c = log_transform(c)
        meas_r = log_transform(r)
        psi_t = np.log(paper_calib.gains)
        phi = paper_calib.phases
        for row, (i, j) in enumerate(mu_pairs(8)):
            assert meas_r.mu[row] - meas_c.mu[row] == pytest.approx(
                psi_t[i] + psi_t[j], abs=1e-12
            )
        for row, (i, j) in enumerate(nu_pairs(8)):
            assert meas_r.nu[row] - meas_c.nu[row] == pytest.approx(
                phi[i] - phi[j], abs=1e-12
            )


class TestDesignMatrix:
    def test_proposed_columns_and_rank(self, geom_proposed):
        h, layout = build_design_matrix(geom_proposed, PROPOSED)
        assert layout.n_columns == 46
        assert h.shape == (64, 46)
        assert np.linalg.matrix_rank(h) == 46

    def test_conventional_rank_deficiency(self, geom_conventional):
        h, layout = build_design_matrix(geom_conventional, CONVENTIONAL)
        assert layout.n_columns == 52
        assert np.linalg.matrix_rank(h) == 51

    def test_third_reference_restores_full_rank(self, geom_conventional):
        h, layout = build_design_matrix(geom_conventional, CONVENTIONAL_THIRD_REF)
        assert layout.n_columns == 51
        assert np.linalg.matrix_rank(h) == 51

    def test_first_level_third_reference_does_not_fix_rank(
        self, geom_conventional
    ):
        # The deficiency lives on the phases of second-level sensors beyond
        # the first; referencing a first-level phase removes an independent
        # column instead.
        h, layout = build_design_matrix(
            geom_conventional, CONVENTIONAL_THIRD_REF, third_ref_sensor=2
        )
        assert layout.n_columns == 51
        assert np.linalg.matrix_rank(h) == 50

    @pytest.mark.parametrize("n", [2, 3, 4, 5])
    def test_rank_claims_all_sizes(self, n):
        k_conv = 4 * 2 * n + 2 * n * (n - 1) - 4
        h, layout = build_design_matrix(build_geometry(n, n, n + 1), CONVENTIONAL)
        assert layout.n_columns == k_conv
        assert np.linalg.matrix_rank(h) == k_conv - 1
        h, layout = build_design_matrix(build_geometry(n, n, n), PROPOSED)
        assert layout.n_columns == k_conv - 2 * (n - 1)
        assert np.linalg.matrix_rank(h) == layout.n_columns

    def test_entries_are_small_integers(self, geom_proposed, geom_conventional):
        for geom, mode in [
            (geom_proposed, PROPOSED),
            (geom_conventional, CONVENTIONAL),
        ]:
            h, _ = build_design_matrix(geom, mode)
            assert set(np.unique(h)).issubset({-1.0, 0.0, 1.0, 2.0})

    def test_gain_phase_decoupling(self, geom_proposed):
        h, layout = build_design_matrix(geom_proposed, PROPOSED)
        n_mu = len(mu_pairs(8))
        gain_cols = [k for k, nm in enumerate(layout.names) if nm[0] == "psi"]
        phase_cols = [k for k, nm in enumerate(layout.names) if nm[0] == "phi"]
        assert np.all(h[:n_mu][:, phase_cols] == 0)
        assert np.all(h[n_mu:][:, gain_cols] == 0)

    def test_mode_geometry_mismatch(self, geom_proposed, geom_conventional):
        with pytest.raises(ValueError):
            build_design_matrix(geom_conventional, PROPOSED)
        with pytest.raises(ValueError):
            build_design_matrix(geom_proposed, CONVENTIONAL)
        with pytest.raises(ValueError):
            build_design_matrix(geom_proposed, "bogus")


class TestAssembleSystem:
    def test_wrap_safe_scene_has_margin(self, geom_proposed):
        cov = model_covariance(geom_proposed, wrap_safe_scene())
        off = cov.matrix[np.triu_indices(8, 1)]
        assert np.pi - np.max(np.abs(np.angle(off))) > 0.6
        assert np.min(np.abs(off)) > 0.2

    def test_identity_calibration_solves_to_zero_offsets(
        self, geom_proposed, paper_scene
    ):
        cov = model_covariance(geom_proposed, paper_scene)
        system = assemble_system(cov, geom_proposed, PROPOSED)
        theta, *_ = np.linalg.lstsq(system.design, system.measurements, rcond=None)
        for k, name in enumerate(system.layout.names):
            if name[0] in ("psi", "phi"):
                assert theta[k] == pytest.approx(0.0, abs=1e-10)

    def test_paper_calibration_recovered_exactly(
        self, geom_proposed, paper_scene, paper_calib
    ):
        cov = model_covariance(geom_proposed, paper_scene, paper_calib)
        system = assemble_system(cov, geom_proposed, PROPOSED)
        theta, *_ = np.linalg.lstsq(system.design, system.measurements, rcond=None)
        expected = true_theta(
            system.layout, model_covariance(geom_proposed, paper_scene), paper_calib
        )
        assert np.max(np.abs(theta - expected)) < 1e-10

    def test_zero_entry_raises(self, geom_proposed, paper_scene):
        cov = model_covariance(geom_proposed, paper_scene)
        m = cov.matrix.copy()
        m[0, 5] = 0.0
        m[5, 0] = 0.0
        broken = CovarianceEstimate(matrix=m, sample_count=0)
        with pytest.raises(ZeroCovarianceEntryError):
            assemble_system(broken, geom_proposed, PROPOSED)

    def test_exactness_for_random_reference_consistent_calibrations(
        self, geom_proposed
    ):
        scene = wrap_safe_scene()
        c = model_covariance(geom_proposed, scene)
        rng = np.random.default_rng(21)
        for _ in range(20):
            gains = rng.uniform(0.5, 2.5, 8)
            phases = np.deg2rad(rng.uniform(-15, 15, 8))
            gains[0] = 1.0
            phases[:2] = 0.0
            calib = CalibrationParams(gains=gains, phases=phases)
            cov = model_covariance(geom_proposed, scene, calib)
            system = assemble_system(cov, geom_proposed, PROPOSED)
            theta = true_theta(system.layout, c, calib)
            resid = system.measurements - system.design @ theta
            assert np.max(np.abs(resid)) < 1e-12
