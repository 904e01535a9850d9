"""Synthetic snapshot generation: CN sources through the nominal manifold,
additive CN sensor noise, then per-sensor gain/phase distortion."""

from dataclasses import dataclass

import numpy as np

from .geometry import manifold_matrix


@dataclass(frozen=True)
class CalibrationParams:
    """Per-sensor gain and phase offsets.

    Gains are strictly positive; phases are radians in [-pi, pi). When used
    as ground truth for blind estimation, the reference convention
    gains[0] = 1, phases[0] = phases[1] = 0 must hold.
    """

    gains: np.ndarray
    phases: np.ndarray

    def __post_init__(self):
        gains = np.asarray(self.gains, dtype=float)
        phases = np.asarray(self.phases, dtype=float)
        if gains.shape != phases.shape or gains.ndim != 1:
            raise ValueError("gains and phases must be 1-D vectors of equal length")
        if np.any(gains <= 0):
            raise ValueError("all gains must be strictly positive")
        object.__setattr__(self, "gains", gains)
        object.__setattr__(self, "phases", phases)

    @classmethod
    def identity(cls, n):
        return cls(gains=np.ones(n), phases=np.zeros(n))

    @property
    def diag(self):
        """Combined distortion diagonal: gains * exp(j*phases)."""
        return self.gains * np.exp(1j * self.phases)

    def satisfies_references(self, atol=0.0):
        return (
            abs(self.gains[0] - 1.0) <= atol
            and abs(self.phases[0]) <= atol
            and abs(self.phases[1]) <= atol
        )


@dataclass(frozen=True)
class SourceScene:
    """Uncorrelated far-field narrowband sources plus white sensor noise.

    angles_deg: source directions, each in (0, 180) degrees, distinct.
    powers: source variances (diagonal of the source covariance).
    noise_power: sensor noise variance, > 0 (0 allowed only for noiseless
    model-covariance studies).
    """

    angles_deg: np.ndarray
    powers: np.ndarray
    noise_power: float

    def __post_init__(self):
        angles = np.atleast_1d(np.asarray(self.angles_deg, dtype=float))
        powers = np.atleast_1d(np.asarray(self.powers, dtype=float))
        if angles.shape != powers.shape:
            raise ValueError("angles and powers must have equal length")
        if np.any(powers <= 0):
            raise ValueError("source powers must be strictly positive")
        if angles.size and (np.any(angles <= 0) or np.any(angles >= 180)):
            raise ValueError("angles must be in (0, 180) degrees")
        if angles.size != np.unique(angles).size:
            raise ValueError("angles must be distinct")
        if self.noise_power < 0:
            raise ValueError("noise_power must be nonnegative")
        object.__setattr__(self, "angles_deg", angles)
        object.__setattr__(self, "powers", powers)

    @property
    def n_sources(self):
        return self.angles_deg.size


@dataclass(frozen=True)
class SnapshotMatrix:
    """T complex snapshot vectors of length N, stored as an N x T matrix."""

    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data, dtype=complex)
        if data.ndim != 2 or data.shape[1] < 1:
            raise ValueError("snapshot data must be an N x T matrix with T >= 1")
        if not np.all(np.isfinite(data)):
            raise ValueError("snapshot data must be finite")
        object.__setattr__(self, "data", data)

    @property
    def n_sensors(self):
        return self.data.shape[0]

    @property
    def sample_count(self):
        return self.data.shape[1]


def _cn_draws(rng, shape, powers):
    """Circular complex normal draws: (g1 + j*g2) * sqrt(power/2)."""
    g = rng.standard_normal((2,) + shape)
    scale = np.sqrt(np.asarray(powers, dtype=float) / 2.0)
    if np.ndim(scale) == 1:
        scale = scale[:, None]
    return (g[0] + 1j * g[1]) * scale


def synthesize(geom, scene, calib, t, seed):
    """Draws T snapshots r(t) = Psi*Phi*(A(alpha) s(t) + v(t)).

    Sources and noise are i.i.d. zero-mean circular complex normal with
    covariances Diag(powers) and noise_power*I. Deterministic given the seed.

    Args:
        geom: ArrayGeometry.
        scene: SourceScene.
        calib: CalibrationParams of length geom.n_sensors.
        t: number of snapshots, >= 1.
        seed: int seed or anything np.random.default_rng accepts.

    Returns:
        SnapshotMatrix of shape (N, T).
    """
    n = geom.n_sensors
    if calib.gains.size != n:
        raise ValueError(
            f"calibration length {calib.gains.size} does not match {n} sensors"
        )
    if t < 1:
        raise ValueError(f"sample count must be >= 1, got {t}")
    rng = np.random.default_rng(seed)
    a = manifold_matrix(geom, scene.angles_deg)
    x = np.zeros((n, t), dtype=complex)
    if scene.n_sources:
        s = _cn_draws(rng, (scene.n_sources, t), scene.powers)
        x += a @ s
    if scene.noise_power > 0:
        x += _cn_draws(rng, (n, t), scene.noise_power)
    return SnapshotMatrix(data=calib.diag[:, None] * x)


def snr_to_noise_power(snr_db, source_power=1.0):
    """Noise variance giving the requested per-source SNR in dB."""
    if source_power <= 0:
        raise ValueError("source_power must be positive")
    return source_power / 10.0 ** (snr_db / 10.0)


def uniform_angle_grid(low_deg, high_deg, m):
    """M equally spaced angles on [low, high], endpoints included."""
    return np.linspace(low_deg, high_deg, m)
