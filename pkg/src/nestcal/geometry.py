"""2-level nested array geometry, steering vectors, and difference coarray."""

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class ArrayGeometry:
    """A 2-level nested linear array.

    The first level is a dense ULA of ``n1`` sensors at spacing ``unit_spacing``;
    the second level is a sparse ULA of ``n2`` sensors at spacing
    ``spacing_factor * unit_spacing``. Sensor positions are stored as integer
    multipliers of the unit spacing so coarray arithmetic is exact.
    """

    n1: int
    n2: int
    spacing_factor: int
    unit_spacing: float
    wavelength: float
    positions: np.ndarray = field(repr=False)

    @property
    def n_sensors(self):
        return self.n1 + self.n2


@dataclass(frozen=True)
class Coarray:
    """Difference coarray of an array: all pairwise integer lags.

    ``central_segment`` is the maximal run of consecutive lags {-Q, ..., Q}
    around zero; its (odd) cardinality bounds the usable virtual ULA.
    """

    lags: np.ndarray
    central_segment: np.ndarray


def build_geometry(n1, n2, spacing_factor, unit_spacing=0.5, wavelength=1.0):
    """Constructs a 2-level nested array.

    Positions follow the nested indexing: sensors 1..n1 at 0, 1, ..., n1-1
    and sensors n1+1..n1+n2 at n1 + k*spacing_factor for k = 0..n2-1
    (all in units of ``unit_spacing``).

    Args:
        n1: Number of first-level (dense ULA) sensors, >= 1.
        n2: Number of second-level (sparse ULA) sensors, >= 1.
        spacing_factor: Integer L >= 1; second-level spacing is L*d.
        unit_spacing: First-level spacing d in the same units as wavelength.
        wavelength: Carrier wavelength.

    Returns:
        ArrayGeometry with integer positions of length n1 + n2.
    """
    if n1 < 1 or n2 < 1:
        raise ValueError(f"level sizes must be >= 1, got n1={n1}, n2={n2}")
    if spacing_factor < 1:
        raise ValueError(f"spacing_factor must be >= 1, got {spacing_factor}")
    if unit_spacing <= 0 or wavelength <= 0:
        raise ValueError("unit_spacing and wavelength must be positive")
    first = np.arange(n1)
    second = n1 + spacing_factor * np.arange(n2)
    positions = np.concatenate([first, second])
    return ArrayGeometry(
        n1=int(n1),
        n2=int(n2),
        spacing_factor=int(spacing_factor),
        unit_spacing=float(unit_spacing),
        wavelength=float(wavelength),
        positions=positions,
    )


def difference_coarray(geom):
    """Computes all pairwise position differences and the central segment.

    Returns:
        Coarray with sorted integer lags (symmetric about 0) and the largest
        contiguous run {-Q, ..., Q} contained in them.
    """
    pos = geom.positions
    lags = np.unique(pos[:, None] - pos[None, :])
    lag_set = set(int(k) for k in lags)
    q = 0
    while (q + 1) in lag_set and -(q + 1) in lag_set:
        q += 1
    central = np.arange(-q, q + 1)
    return Coarray(lags=lags, central_segment=central)


def steering_vector(geom, angle_deg):
    """Nominal steering vector for a source at ``angle_deg`` degrees.

    Element n is exp(j * (2*pi/wavelength) * d * i_n * cos(angle)), with i_n
    the integer position multiplier. Angles must lie in the open interval
    (0, 180) degrees.
    """
    angle_deg = float(angle_deg)
    if not 0.0 < angle_deg < 180.0:
        raise ValueError(f"angle must be in (0, 180) degrees, got {angle_deg}")
    phase = (
        2.0 * np.pi / geom.wavelength
        * geom.unit_spacing
        * geom.positions
        * np.cos(np.deg2rad(angle_deg))
    )
    return np.exp(1j * phase)


def manifold_matrix(geom, angles_deg):
    """Stacks steering vectors for each angle into an N x M matrix."""
    angles_deg = np.atleast_1d(np.asarray(angles_deg, dtype=float))
    if angles_deg.size == 0:
        return np.zeros((geom.n_sensors, 0), dtype=complex)
    return np.column_stack([steering_vector(geom, a) for a in angles_deg])
