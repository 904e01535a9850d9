"""Asymptotic mean and covariance of the log-domain measurement noise.

For a sample covariance built from T snapshots, the errors in the element-wise
log transform have, to first order in 1/T, a mean of -0.5/T on the real
(magnitude) entries and zero on the imaginary (argument) entries, and a
covariance that depends only on the covariance matrix itself. Plugging the
sample covariance into these formulas gives the (approximate) ML estimate of
the weight matrix used by the optimally-weighted LS solve.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ZeroCovarianceEntryError

WRAP_VARIANCE_INFLATION = 100.0
DEFAULT_REGULARIZATION_FLOOR = 1e-10


@dataclass(frozen=True)
class NoiseModel:
    """First-order moments of the log-domain noise, in system row order."""

    mean: np.ndarray
    covariance: np.ndarray
    source_sample_count: int


def noise_mean(t, n):
    """Mean of the log-domain noise: -0.5/T on mu rows, 0 on nu rows.

    ``t = 0`` marks the asymptotic (exact model covariance) case and yields
    a zero vector.
    """
    if t < 0:
        raise ValueError("sample count must be nonnegative")
    n_mu = n * (n + 1) // 2
    n_nu = n * (n - 1) // 2
    mean = np.zeros(n_mu + n_nu)
    if t > 0:
        mean[:n_mu] = -0.5 / t
    return mean


def noise_covariance(cov, t, row_index):
    """Covariance of the log-domain noise for the given row ordering.

    For rows r = (i, j) and s = (k, l), with term1 = R_ik R*_jl / (R_ij R*_kl)
    and term2 = R_il R*_jk / (R_ij R_kl), the second moments are
    (0.5/T) * Re{term1 + term2} between two mu rows, (0.5/T) * Re{term1 - term2}
    between two nu rows, and (0.5/T) * Im{term2 - term1} between a mu row and
    a nu row. ``t = 0`` (model covariance) uses a unit 1/T scale; only the
    relative weighting matters to the solver then.

    Raises:
        ZeroCovarianceEntryError: if any entry appearing in a denominator
            is zero.
    """
    r = cov.matrix
    rows = len(row_index)
    idx_i = np.array([i for _, i, _ in row_index])
    idx_j = np.array([j for _, _, j in row_index])
    is_mu = np.array([kind == "mu" for kind, _, _ in row_index])
    r_ij = r[idx_i, idx_j]
    zero = np.abs(r_ij) == 0.0
    if np.any(zero):
        bad = int(np.argmax(zero))
        raise ZeroCovarianceEntryError(int(idx_i[bad]), int(idx_j[bad]))
    scale = 0.5 / t if t > 0 else 0.5

    r_ik = r[np.ix_(idx_i, idx_i)]
    r_jl = r[np.ix_(idx_j, idx_j)]
    r_il = r[np.ix_(idx_i, idx_j)]
    r_jk = r[np.ix_(idx_j, idx_i)]
    denom = r_ij[:, None]
    term1 = (r_ik * r_jl.conj()) / (denom * r_ij.conj()[None, :])
    term2 = (r_il * r_jk.conj()) / (denom * r_ij[None, :])

    out = np.empty((rows, rows))
    mm = np.ix_(is_mu, is_mu)
    nn = np.ix_(~is_mu, ~is_mu)
    mn = np.ix_(is_mu, ~is_mu)
    out[mm] = np.real(term1[mm] + term2[mm])
    out[nn] = np.real(term1[nn] - term2[nn])
    out[mn] = np.imag(term2[mn] - term1[mn])
    out[np.ix_(~is_mu, is_mu)] = out[mn].T
    out *= scale
    return 0.5 * (out + out.T)


def inflate_wrapped_rows(noise_cov, wrap_flags, factor=WRAP_VARIANCE_INFLATION):
    """Down-weights wrap-flagged rows by inflating their variance.

    Scales flagged rows and columns by sqrt(factor), so flagged-row variances
    grow by ``factor`` while cross-correlations stay consistent.
    """
    if not np.any(wrap_flags):
        return noise_cov
    d = np.where(wrap_flags, np.sqrt(factor), 1.0)
    return noise_cov * np.outer(d, d)


def regularize(noise_cov, floor=DEFAULT_REGULARIZATION_FLOOR):
    """Adds floor * mean(diag) to the diagonal to bound the conditioning."""
    if floor < 0:
        raise ValueError("floor must be nonnegative")
    if floor == 0:
        return noise_cov
    bump = floor * float(np.mean(np.diag(noise_cov)))
    return noise_cov + bump * np.eye(noise_cov.shape[0])


def build_noise_model(cov, system, floor=DEFAULT_REGULARIZATION_FLOOR):
    """Assembles the complete NoiseModel for a system's row ordering.

    Applies wrap-row variance inflation and the regularization floor. The
    plug-in weights normally use the same sample covariance the system was
    assembled from; passing a model covariance (sample_count 0) gives the
    oracle weighting with zero mean.
    """
    t = cov.sample_count
    n = cov.n_sensors
    mean = noise_mean(t, n)
    lam = noise_covariance(cov, t, system.row_index)
    lam = inflate_wrapped_rows(lam, system.wrap_flags)
    lam = regularize(lam, floor)
    return NoiseModel(mean=mean, covariance=lam, source_sample_count=t)
