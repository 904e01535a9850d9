"""Log-covariance linear system construction.

Element-wise log of the covariance turns the multiplicative gain/phase
distortion into an additive linear model y = H theta, where theta stacks
log-gains, phases, and nuisance log-covariance parameters. For the proposed
nested design (L = N1) the second-level Toeplitz generators are replicated
copies of first-row covariance entries, so their columns can be merged away
and H becomes full column rank, enabling fully blind LS calibration.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ZeroCovarianceEntryError

PROPOSED = "proposed"
CONVENTIONAL = "conventional"
CONVENTIONAL_THIRD_REF = "conventional_third_ref"

# |imag(log R_ij)| within this margin of pi is flagged as wrap-prone.
WRAP_MARGIN_RAD = 0.3


@dataclass(frozen=True)
class ThetaLayout:
    """Column layout of the unknown vector theta.

    Slots (0-based sensor indices): log-gains for sensors 1..N-1, phases
    for sensors 2..N-1, first-block Toeplitz generators (real parts for lags
    0..N1, imaginary parts for lags 1..N1), second-block generators (lags
    1..N2-1, conventional mode only), then the cross-block real and imaginary
    log entries, row-major. Reference slots (log-gain of sensor 0, phases of
    sensors 0 and 1, lag-0 imaginary parts, the overlapping second-block
    lag 0) are eliminated and never appear.
    """

    mode: str
    n1: int
    n2: int
    third_ref_sensor: int | None
    names: tuple
    index: dict = field(repr=False)

    @property
    def n_sensors(self):
        return self.n1 + self.n2

    @property
    def n_columns(self):
        return len(self.names)

    def column(self, name):
        return self.index[name]

    def gain_column(self, sensor):
        """Column of the log-gain of ``sensor`` (0-based); None if reference."""
        if sensor == 0:
            return None
        return self.index[("psi", sensor)]

    def phase_column(self, sensor):
        """Column of the phase of ``sensor`` (0-based); None if eliminated."""
        if sensor in (0, 1) or sensor == self.third_ref_sensor:
            return None
        return self.index[("phi", sensor)]


@dataclass(frozen=True)
class LogMeasurements:
    """Element-wise log of a Hermitian covariance.

    mu: real parts log|R_ij| for i <= j, lexicographic.
    nu: principal-branch arguments of R_ij for i < j, lexicographic.
    wrap_flags: per nu entry, True where the argument is close enough to
    +-pi that phase wrapping may have corrupted the linear relation.
    """

    mu: np.ndarray
    nu: np.ndarray
    wrap_flags: np.ndarray


@dataclass(frozen=True)
class LogLinearSystem:
    """The assembled linear model: measurements = design @ theta + noise.

    Rows are all mu entries (i <= j) followed by all nu entries (i < j),
    both lexicographic; row_index maps each row to (kind, i, j) with kind
    in {"mu", "nu"}. wrap_flags are row-aligned (always False on mu rows).
    """

    design: np.ndarray
    measurements: np.ndarray
    layout: ThetaLayout
    row_index: tuple
    wrap_flags: np.ndarray
    sample_count: int


def mu_pairs(n):
    """Lexicographic (i, j) with i <= j."""
    return [(i, j) for i in range(n) for j in range(i, n)]


def nu_pairs(n):
    """Lexicographic (i, j) with i < j."""
    return [(i, j) for i in range(n) for j in range(i + 1, n)]


def log_transform(cov):
    """Element-wise complex log of the upper triangle of a covariance.

    Raises:
        ZeroCovarianceEntryError: if any required entry is exactly zero or
            the diagonal is not strictly positive.
    """
    r = cov.matrix
    n = cov.n_sensors
    diag = np.real(np.diag(r))
    if np.any(diag <= 0):
        bad = int(np.argmin(diag))
        raise ZeroCovarianceEntryError(bad, bad)
    mu = []
    for i, j in mu_pairs(n):
        mag = abs(r[i, j])
        if mag == 0.0:
            raise ZeroCovarianceEntryError(i, j)
        mu.append(np.log(mag))
    nu = []
    for i, j in nu_pairs(n):
        nu.append(np.angle(r[i, j]))
    nu = np.asarray(nu)
    flags = np.abs(nu) > np.pi - WRAP_MARGIN_RAD
    return LogMeasurements(mu=np.asarray(mu), nu=nu, wrap_flags=flags)


def _build_layout(geom, mode, third_ref_sensor=None):
    n1, n2 = geom.n1, geom.n2
    n = n1 + n2
    names = []
    names += [("psi", s) for s in range(1, n)]
    phase_sensors = [s for s in range(2, n) if s != third_ref_sensor]
    names += [("phi", s) for s in phase_sensors]
    names += [("rho1", m) for m in range(0, n1 + 1)]
    names += [("iota1", m) for m in range(1, n1 + 1)]
    if mode in (CONVENTIONAL, CONVENTIONAL_THIRD_REF):
        names += [("rho2", m) for m in range(1, n2)]
        names += [("iota2", m) for m in range(1, n2)]
    names += [("reP", i, j) for i in range(n1) for j in range(n2 - 1)]
    names += [("imP", i, j) for i in range(n1) for j in range(n2 - 1)]
    index = {name: k for k, name in enumerate(names)}
    return ThetaLayout(
        mode=mode,
        n1=n1,
        n2=n2,
        third_ref_sensor=third_ref_sensor,
        names=tuple(names),
        index=index,
    )


def _mu_nuisance(layout, i, j):
    """Nuisance column for the mu (gain) equation of entry (i, j), i <= j."""
    n1 = layout.n1
    if j <= n1:
        return layout.column(("rho1", j - i))
    if i >= n1:
        m = j - i
        if m == 0:
            # Overlap of the two Toeplitz blocks: shared lag-0 element.
            return layout.column(("rho1", 0))
        if layout.mode == PROPOSED:
            if m == 1:
                return layout.column(("rho1", n1))
            return layout.column(("reP", 0, m - 2))
        return layout.column(("rho2", m))
    return layout.column(("reP", i, j - n1 - 1))


def _nu_nuisance(layout, i, j):
    """Nuisance column for the nu (phase) equation of entry (i, j), i < j."""
    n1 = layout.n1
    if j <= n1:
        return layout.column(("iota1", j - i))
    if i >= n1:
        m = j - i
        if layout.mode == PROPOSED:
            if m == 1:
                return layout.column(("iota1", n1))
            return layout.column(("imP", 0, m - 2))
        return layout.column(("iota2", m))
    return layout.column(("imP", i, j - n1 - 1))


def build_design_matrix(geom, mode, third_ref_sensor=None):
    """Builds the coefficient matrix H and its column layout.

    Args:
        geom: ArrayGeometry. The proposed mode requires L = N1 (the
            replication-based column merging is only exact then); the
            conventional modes require L = N1 + 1.
        mode: "proposed", "conventional", or "conventional_third_ref".
        third_ref_sensor: 0-based index (>= 2) of the extra phase-reference
            sensor; required for (and only valid in) conventional_third_ref.

    Returns:
        (design, layout): an N^2 x K_theta real matrix with entries in
        {-1, 0, +1, +2}, and the ThetaLayout describing its columns.
    """
    n1 = geom.n1
    if mode == PROPOSED:
        if geom.spacing_factor != n1:
            raise ValueError(
                f"proposed mode requires L = N1, got L={geom.spacing_factor}, N1={n1}"
            )
        if third_ref_sensor is not None:
            raise ValueError("third_ref_sensor only applies to conventional_third_ref")
    elif mode in (CONVENTIONAL, CONVENTIONAL_THIRD_REF):
        if geom.spacing_factor != n1 + 1:
            raise ValueError(
                f"conventional mode requires L = N1 + 1, got L={geom.spacing_factor}"
            )
        if mode == CONVENTIONAL_THIRD_REF:
            # The rank deficiency of the conventional design lives on the
            # phases of the second-level sensors beyond the first; only a
            # reference there restores full column rank.
            if third_ref_sensor is None:
                third_ref_sensor = geom.n_sensors - 1
            if not 2 <= third_ref_sensor < geom.n_sensors:
                raise ValueError(
                    "conventional_third_ref requires a third_ref_sensor in [2, N)"
                )
        elif third_ref_sensor is not None:
            raise ValueError("third_ref_sensor only applies to conventional_third_ref")
    else:
        raise ValueError(f"unknown mode {mode!r}")

    layout = _build_layout(
        geom, mode, third_ref_sensor if mode == CONVENTIONAL_THIRD_REF else None
    )
    n = geom.n_sensors
    mus = mu_pairs(n)
    nus = nu_pairs(n)
    h = np.zeros((len(mus) + len(nus), layout.n_columns))
    for row, (i, j) in enumerate(mus):
        for s in (i, j):
            col = layout.gain_column(s)
            if col is not None:
                h[row, col] += 1.0
        h[row, _mu_nuisance(layout, i, j)] += 1.0
    offset = len(mus)
    for row, (i, j) in enumerate(nus):
        ci = layout.phase_column(i)
        if ci is not None:
            h[offset + row, ci] += 1.0
        cj = layout.phase_column(j)
        if cj is not None:
            h[offset + row, cj] -= 1.0
        h[offset + row, _nu_nuisance(layout, i, j)] += 1.0
    return h, layout


def assemble_system(cov, geom, mode, third_ref_sensor=None):
    """Log-transforms a covariance and pairs it with the design matrix."""
    if cov.n_sensors != geom.n_sensors:
        raise ValueError(
            f"covariance size {cov.n_sensors} does not match {geom.n_sensors} sensors"
        )
    meas = log_transform(cov)
    design, layout = build_design_matrix(geom, mode, third_ref_sensor)
    n = geom.n_sensors
    row_index = tuple(
        [("mu", i, j) for i, j in mu_pairs(n)] + [("nu", i, j) for i, j in nu_pairs(n)]
    )
    y = np.concatenate([meas.mu, meas.nu])
    flags = np.concatenate([np.zeros(meas.mu.size, dtype=bool), meas.wrap_flags])
    return LogLinearSystem(
        design=design,
        measurements=y,
        layout=layout,
        row_index=row_index,
        wrap_flags=flags,
        sample_count=cov.sample_count,
    )


def true_theta(layout, cov_nominal, calib):
    """Ground-truth theta for a known nominal covariance and calibration.

    Test helper: evaluates the log-domain parameters directly from the
    nominal (perfectly calibrated) covariance C and the injected gains and
    phases. Only valid when the calibration satisfies the reference
    convention (gain 1 and zero phases on the reference sensors).
    """
    c = cov_nominal.matrix
    n1 = layout.n1
    theta = np.zeros(layout.n_columns)
    for k, name in enumerate(layout.names):
        kind = name[0]
        if kind == "psi":
            theta[k] = np.log(calib.gains[name[1]])
        elif kind == "phi":
            theta[k] = calib.phases[name[1]]
        elif kind == "rho1":
            theta[k] = np.log(abs(c[0, name[1]]))
        elif kind == "iota1":
            theta[k] = np.angle(c[0, name[1]])
        elif kind == "rho2":
            theta[k] = np.log(abs(c[n1, n1 + name[1]]))
        elif kind == "iota2":
            theta[k] = np.angle(c[n1, n1 + name[1]])
        elif kind == "reP":
            theta[k] = np.log(abs(c[name[1], n1 + 1 + name[2]]))
        elif kind == "imP":
            theta[k] = np.angle(c[name[1], n1 + 1 + name[2]])
    return theta
