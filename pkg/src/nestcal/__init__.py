"""Blind gain/phase calibration of 2-level nested sensor arrays.

Workflow: build a nested geometry, collect (or synthesize) snapshots, form
the sample covariance, assemble the log-domain linear system, solve it by
ordinary or optimally-weighted least squares, then validate the calibration
through coarray SS-MUSIC direction finding.
"""

from .covariance import CovarianceEstimate, model_covariance, sample_covariance
from .doa import (
    DoaEstimate,
    coarray_vectorize,
    doa_rmse,
    estimate_doas,
    music_spectrum,
    spatial_smoothing,
)
from .errors import (
    AllTrialsFailedError,
    ConfigError,
    NestcalError,
    PeakSearchError,
    RankDeficientDesignError,
    SingularWeightsError,
    TooManySourcesError,
    ZeroCovarianceEntryError,
)
from .estimator import CalibrationEstimate, apply_calibration, solve_ls, solve_ml_owls
from .geometry import (
    ArrayGeometry,
    Coarray,
    build_geometry,
    difference_coarray,
    manifold_matrix,
    steering_vector,
)
from .harness import (
    ExperimentConfig,
    ExperimentResult,
    benchmark_solver,
    emit_results,
    run_calibration_sweep,
    run_doa_sweep,
)
from .logsys import (
    CONVENTIONAL,
    CONVENTIONAL_THIRD_REF,
    PROPOSED,
    LogLinearSystem,
    LogMeasurements,
    ThetaLayout,
    assemble_system,
    build_design_matrix,
    log_transform,
)
from .snapio import read_snapshots, write_snapshots
from .synth import (
    CalibrationParams,
    SnapshotMatrix,
    SourceScene,
    snr_to_noise_power,
    synthesize,
    uniform_angle_grid,
)
from .weights import (
    NoiseModel,
    build_noise_model,
    noise_covariance,
    noise_mean,
    regularize,
)

__version__ = "0.1.0"
