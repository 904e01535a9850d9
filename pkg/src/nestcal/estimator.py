"""Ordinary and optimally-weighted LS solves of the log-linear system,
and extraction of the calibrated gains and phases."""

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .covariance import CovarianceEstimate
from .errors import RankDeficientDesignError, SingularWeightsError


@dataclass(frozen=True)
class CalibrationEstimate:
    """Estimated gains and phases plus solver diagnostics.

    The reference convention is baked in: gains[0] = 1 and
    phases[0] = phases[1] = 0 exactly (plus the third reference phase in
    that mode). ``theta`` is the full solution vector in layout order.
    """

    gains: np.ndarray
    phases: np.ndarray
    theta: np.ndarray
    method: str
    diagnostics: dict = field(default_factory=dict)


def _check_rank(h):
    rank = np.linalg.matrix_rank(h)
    if rank < h.shape[1]:
        raise RankDeficientDesignError(
            f"design rank {rank} < {h.shape[1]} columns; the conventional "
            "design needs a third phase reference for unique phase recovery"
        )
    return rank


def _extract(theta, layout, method, diagnostics):
    n = layout.n_sensors
    gains = np.ones(n)
    phases = np.zeros(n)
    for k, name in enumerate(layout.names):
        if name[0] == "psi":
            gains[name[1]] = np.exp(theta[k])
        elif name[0] == "phi":
            phases[name[1]] = theta[k]
    return CalibrationEstimate(
        gains=gains,
        phases=phases,
        theta=theta,
        method=method,
        diagnostics=diagnostics,
    )


def solve_ls(system):
    """Ordinary least-squares estimate of theta via QR.

    Raises:
        RankDeficientDesignError: if the design lacks full column rank.
    """
    h = system.design
    rank = _check_rank(h)
    theta, res, _, _ = np.linalg.lstsq(h, system.measurements, rcond=None)
    residual = float(np.linalg.norm(system.measurements - h @ theta))
    diagnostics = {
        "residual_norm": residual,
        "design_rank": rank,
        "wrap_warnings": int(np.count_nonzero(system.wrap_flags)),
    }
    return _extract(theta, system.layout, "ls", diagnostics)


def solve_ml_owls(system, noise):
    """Optimally-weighted LS with plug-in noise moments.

    Solves argmin (y - eta - H theta)^T Lambda^{-1} (y - eta - H theta) by
    whitening with the Cholesky factor of Lambda and running an ordinary
    QR-based LS on the whitened system; no explicit inverse is formed.

    Raises:
        RankDeficientDesignError: if the design lacks full column rank.
        SingularWeightsError: if the (regularized) noise covariance is not
            positive definite, which signals a too-small sample size.
    """
    h = system.design
    rank = _check_rank(h)
    lam = noise.covariance
    try:
        chol = np.linalg.cholesky(lam)
    except np.linalg.LinAlgError as exc:
        raise SingularWeightsError(
            "noise covariance is not positive definite after regularization; "
            "increase the sample size or the regularization floor"
        ) from exc
    y = system.measurements - noise.mean
    hw = scipy.linalg.solve_triangular(chol, h, lower=True)
    yw = scipy.linalg.solve_triangular(chol, y, lower=True)
    theta, _, _, _ = np.linalg.lstsq(hw, yw, rcond=None)
    residual = float(np.linalg.norm(yw - hw @ theta))
    diagnostics = {
        "residual_norm": residual,
        "design_rank": rank,
        "weight_condition": float(np.linalg.cond(lam)),
        "wrap_warnings": int(np.count_nonzero(system.wrap_flags)),
    }
    return _extract(theta, system.layout, "ml_owls", diagnostics)


def apply_calibration(cov, est):
    """Undoes the estimated gain/phase distortion on a covariance.

    Returns the estimate of the nominal covariance C: element (i, j) is
    R_ij / (gains_i * gains_j) * exp(-j*(phases_i - phases_j)).
    """
    if est.gains.size != cov.n_sensors:
        raise ValueError(
            f"estimate length {est.gains.size} does not match "
            f"{cov.n_sensors} sensors"
        )
    if np.any(est.gains <= 0):
        raise ValueError("gains must be strictly positive")
    d_inv = np.exp(-1j * est.phases) / est.gains
    c = d_inv[:, None] * cov.matrix * d_inv.conj()[None, :]
    c = 0.5 * (c + c.conj().T)
    return CovarianceEstimate(matrix=c, sample_count=cov.sample_count)
