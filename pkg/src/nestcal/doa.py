"""Spatial-smoothing MUSIC on the difference coarray of a calibrated
covariance, for validating calibration quality through DOA accuracy."""

from dataclasses import dataclass

import numpy as np

from .errors import PeakSearchError, TooManySourcesError
from .geometry import difference_coarray

DEFAULT_GRID_STEP_DEG = 0.02
# Peaks closer than this many grid steps are merged before selection.
PEAK_MERGE_STEPS = 4


@dataclass(frozen=True)
class DoaEstimate:
    """Estimated DOAs (sorted, degrees) with the sampled pseudo-spectrum."""

    angles_deg: np.ndarray
    spectrum: np.ndarray
    grid_deg: np.ndarray


def coarray_vectorize(cov, geom):
    """Averages covariance entries onto the central contiguous coarray lags.

    Entry for lag k averages C_ij over all sensor pairs whose integer
    position difference is k (redundant-lag averaging); conjugate symmetry
    is enforced by construction.

    Accepts either a covariance estimate or a bare matrix.

    Returns:
        Complex vector of length 2Q+1 over lags -Q..Q.
    """
    c = np.asarray(getattr(cov, "matrix", cov))
    pos = geom.positions
    segment = difference_coarray(geom).central_segment
    q = (segment.size - 1) // 2
    diff = pos[:, None] - pos[None, :]
    z = np.zeros(segment.size, dtype=complex)
    for idx, k in enumerate(range(-q, q + 1)):
        mask = diff == k
        z[idx] = c[mask].mean()
    z = 0.5 * (z + z[::-1].conj())
    return z


def spatial_smoothing(z, subarray_size=None):
    """Averaged outer products of sliding subvectors of the coarray vector.

    For a coarray vector over lags -Q..Q, forms the Q+1 forward subvectors
    of length ``subarray_size`` (default Q+1) and averages their outer
    products into a Hermitian PSD matrix suitable for subspace methods.
    """
    z = np.asarray(z, dtype=complex)
    length = z.size
    if length % 2 == 0:
        raise ValueError("coarray vector must have odd length (lags -Q..Q)")
    q = (length - 1) // 2
    if subarray_size is None:
        subarray_size = q + 1
    n_sub = length - subarray_size + 1
    if subarray_size < 1 or n_sub < 1:
        raise ValueError(
            f"subarray size {subarray_size} too large for coarray length {length}"
        )
    r_ss = np.zeros((subarray_size, subarray_size), dtype=complex)
    for i in range(n_sub):
        zi = z[i : i + subarray_size]
        r_ss += np.outer(zi, zi.conj())
    r_ss /= n_sub
    return 0.5 * (r_ss + r_ss.conj().T)


def _subarray_manifold(subarray_size, unit_spacing, wavelength, grid_deg):
    """Virtual-ULA steering matrix over the search grid, one column per angle."""
    k = np.arange(subarray_size)
    omega = 2.0 * np.pi * unit_spacing / wavelength * np.cos(np.deg2rad(grid_deg))
    return np.exp(1j * np.outer(k, omega))


def music_spectrum(r_ss, m, geom, grid_step_deg=DEFAULT_GRID_STEP_DEG):
    """MUSIC pseudo-spectrum and peak extraction on the smoothed matrix.

    The noise subspace spans the eigenvectors of the smallest
    (subarray_size - m) eigenvalues; the pseudo-spectrum is
    1 / ||E_n^H a(angle)||^2 over a uniform grid in (0, 180) degrees. The
    m largest well-separated peaks are refined by 3-point quadratic
    interpolation.

    Raises:
        TooManySourcesError: if m >= subarray size.
        PeakSearchError: if fewer than m separated peaks exist.
    """
    sub = r_ss.shape[0]
    if m >= sub:
        raise TooManySourcesError(
            f"{m} sources with subarray size {sub}; need m < subarray size"
        )
    if m < 1:
        raise ValueError("source count must be >= 1")
    evals, evecs = np.linalg.eigh(r_ss)
    noise_space = evecs[:, : sub - m]
    grid = np.arange(grid_step_deg, 180.0, grid_step_deg)
    a = _subarray_manifold(sub, geom.unit_spacing, geom.wavelength, grid)
    proj = noise_space.conj().T @ a
    spectrum = 1.0 / np.sum(np.abs(proj) ** 2, axis=0)

    peaks = _find_peaks(spectrum)
    if len(peaks) < m:
        raise PeakSearchError(f"found {len(peaks)} peaks, need {m}")
    peaks = sorted(peaks, key=lambda i: spectrum[i], reverse=True)[:m]
    angles = np.sort([_refine_peak(grid, spectrum, i) for i in peaks])
    return DoaEstimate(angles_deg=angles, spectrum=spectrum, grid_deg=grid)


def _find_peaks(spectrum):
    """Indices of local maxima, with close-by peaks merged to the larger one."""
    interior = (spectrum[1:-1] > spectrum[:-2]) & (spectrum[1:-1] >= spectrum[2:])
    idx = np.flatnonzero(interior) + 1
    if idx.size == 0:
        return []
    merged = [int(idx[0])]
    for i in idx[1:]:
        if i - merged[-1] < PEAK_MERGE_STEPS:
            if spectrum[i] > spectrum[merged[-1]]:
                merged[-1] = int(i)
        else:
            merged.append(int(i))
    return merged


def _refine_peak(grid, spectrum, i):
    """3-point quadratic interpolation around grid index i."""
    if i == 0 or i == grid.size - 1:
        return float(grid[i])
    y0, y1, y2 = spectrum[i - 1], spectrum[i], spectrum[i + 1]
    denom = y0 - 2.0 * y1 + y2
    if denom == 0:
        return float(grid[i])
    shift = 0.5 * (y0 - y2) / denom
    shift = float(np.clip(shift, -1.0, 1.0))
    step = grid[1] - grid[0]
    return float(grid[i] + shift * step)


def estimate_doas(cov, geom, m, grid_step_deg=DEFAULT_GRID_STEP_DEG):
    """Full coarray SS-MUSIC pipeline on a (calibrated) covariance."""
    z = coarray_vectorize(cov, geom)
    r_ss = spatial_smoothing(z)
    return music_spectrum(r_ss, m, geom, grid_step_deg)


def doa_rmse(estimated, truth_deg):
    """Root mean squared error between sorted estimated and true DOAs."""
    est = np.sort(np.asarray(getattr(estimated, "angles_deg", estimated),
                             dtype=float))
    truth = np.sort(np.atleast_1d(np.asarray(truth_deg, dtype=float)))
    if est.size != truth.size:
        raise ValueError(f"count mismatch: {est.size} estimates vs {truth.size} truths")
    return float(np.sqrt(np.mean((est - truth) ** 2)))
