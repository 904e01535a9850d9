import numpy as np
import pytest

from nestcal import CalibrationParams, SourceScene, build_geometry

PAPER_GAINS = np.array([1.0, 1.3, 1.1, 0.7, 2.2, 0.9, 1.2, 0.8])
PAPER_PHASES = np.deg2rad([0.0, 0.0, 5.0, 11.0, -8.0, 3.0, -7.0, 9.0])


@pytest.fixture
def geom_proposed():
    return build_geometry(4, 4, 4)


@pytest.fixture
def geom_conventional():
    return build_geometry(4, 4, 5)


@pytest.fixture
def paper_calib():
    return CalibrationParams(gains=PAPER_GAINS, phases=PAPER_PHASES)


@pytest.fixture
def paper_scene():
    return SourceScene(
        angles_deg=np.linspace(20.0, 70.0, 15),
        powers=np.ones(15),
        noise_power=0.1,
    )


def wrap_safe_scene():
    """A scene whose nominal covariance arguments stay far from +-pi.

    Phase offsets up to +-15 degrees then cannot wrap the covariance
    arguments, so the log-linear relations are exact.
    """
    return SourceScene(
        angles_deg=np.array([64.3, 76.35, 82.0, 90.15, 92.35]),
        powers=np.ones(5),
        noise_power=0.94,
    )
