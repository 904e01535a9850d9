"""Exception types shared across the package."""


class NestcalError(Exception):
    """Base class for all package-specific errors."""


class ZeroCovarianceEntryError(NestcalError):
    """A covariance entry needed by the log transform is zero.

    The element-wise log is undefined there; the caller must increase the
    sample size or change the scene.
    """

    def __init__(self, i, j):
        self.i = i
        self.j = j
        super().__init__(f"covariance entry ({i}, {j}) is zero; log transform undefined")


class RankDeficientDesignError(NestcalError):
    """The design matrix does not have full column rank.

    Typically raised for the conventional nested design (L = N1 + 1) without
    a third phase reference.
    """


class SingularWeightsError(NestcalError):
    """The noise covariance is singular even after regularization."""


class TooManySourcesError(NestcalError):
    """More sources requested than the subspace method can resolve."""


class PeakSearchError(NestcalError):
    """Fewer spectrum peaks were found than sources requested."""


class ConfigError(NestcalError):
    """Invalid experiment configuration."""


class AllTrialsFailedError(NestcalError):
    """Every Monte-Carlo trial at a grid point failed."""
