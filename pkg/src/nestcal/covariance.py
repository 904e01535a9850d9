"""Sample and model covariance matrices of the snapshot process."""

from dataclasses import dataclass

import numpy as np

from .geometry import manifold_matrix


@dataclass(frozen=True)
class CovarianceEstimate:
    """Hermitian N x N covariance with sample-size metadata.

    ``sample_count`` is the number of snapshots behind a sample covariance;
    0 marks an exact model covariance (the asymptotic T -> infinity case).
    """

    matrix: np.ndarray
    sample_count: int

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("covariance must be a square matrix")
        object.__setattr__(self, "matrix", m)

    @property
    def n_sensors(self):
        return self.matrix.shape[0]

    @property
    def is_model(self):
        return self.sample_count == 0


def sample_covariance(snapshots):
    """Sample covariance (1/T) * sum_t r(t) r(t)^H, Hermitian-symmetrized.

    Symmetrization with the conjugate transpose kills floating-point
    asymmetry; the downstream log transform assumes exact conjugate symmetry.
    """
    x = snapshots.data
    t = snapshots.sample_count
    if t < 1:
        raise ValueError("at least one snapshot is required")
    r = (x @ x.conj().T) / t
    r = 0.5 * (r + r.conj().T)
    return CovarianceEstimate(matrix=r, sample_count=t)


def model_covariance(geom, scene, calib=None):
    """Exact covariance Psi Phi (A R_s A^H + sigma_v^2 I) Phi^* Psi.

    With ``calib`` None (or identity) this is the nominal covariance of the
    perfectly calibrated array.
    """
    n = geom.n_sensors
    a = manifold_matrix(geom, scene.angles_deg)
    c = a @ np.diag(scene.powers.astype(complex)) @ a.conj().T
    c += scene.noise_power * np.eye(n)
    if calib is not None:
        if calib.gains.size != n:
            raise ValueError(
                f"calibration length {calib.gains.size} does not match {n} sensors"
            )
        d = calib.diag
        c = d[:, None] * c * d.conj()[None, :]
    c = 0.5 * (c + c.conj().T)
    return CovarianceEstimate(matrix=c, sample_count=0)
