"""
All-optical readout of the mechanical second moments.

A second cavity, driven on its red sideband (detuning = omega_m) and in the
bad-cavity limit kappa2 >> G2, adiabatically follows the mechanics. Its
output field is

    c_out = i g b + c_in,    g = G2 / sqrt(2 kappa2),

with vacuum input noise. In quadratures the factor i is the quarter turn
R = [[0, -1], [1, 0]] acting on (q, p), so V_out = g^2 R V_mec R^T + I.

Only the mechanical block is handled here; reconstructing the
optomechanical cross-correlations from joint records of both cavities is
not implemented. First moments are left out, the scheme acts on
fluctuations.
"""

import csv
import io
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import InconsistentMeasurementError, PhysicalityError, ValidityWarning

ROTATION = np.array([[0.0, -1.0], [1.0, 0.0]])
RATIO_THRESHOLD = 10.0


@dataclass(frozen=True)
class DetectionParams:
    """Readout cavity parameters in units of omega_m.

    ``validity_issues()`` lists the approximations whose ratio thresholds
    are violated; the transforms warn with ValidityWarning for each.
    """

    kappa2: float = 0.1
    g2: float = 0.01
    delta2: float = 1.0
    omega_m: float = 1.0

    def __post_init__(self):
        for name in ("kappa2", "g2", "delta2", "omega_m"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite")
        if self.kappa2 <= 0:
            raise ValueError(f"kappa2 must be > 0, got {self.kappa2}")
        if self.omega_m <= 0:
            raise ValueError(f"omega_m must be > 0, got {self.omega_m}")

    @property
    def gain(self):
        return self.g2 / math.sqrt(2.0 * self.kappa2)

    def validity_issues(self):
        issues = []
        if self.delta2 != self.omega_m:
            issues.append(f"readout detuning {self.delta2:g} differs from omega_m {self.omega_m:g}")
        if self.omega_m < RATIO_THRESHOLD * self.kappa2:
            issues.append(f"omega_m/kappa2 = {self.omega_m / self.kappa2:.3g} < {RATIO_THRESHOLD:g}")
        if self.g2 > 0 and self.kappa2 < RATIO_THRESHOLD * self.g2:
            issues.append(f"kappa2/G2 = {self.kappa2 / self.g2:.3g} < {RATIO_THRESHOLD:g}")
        return issues

    def warn(self):
        for issue in self.validity_issues():
            warnings.warn(issue, ValidityWarning, stacklevel=3)


@dataclass(frozen=True, eq=False)
class OutputModel:
    """Output covariance ``v_out = signal + I``.

    ``signal`` is g^2 R V_mec R^T kept apart from the vacuum term, so the
    inversion does not lose the ~log10(1/g^2) digits that cancel in
    ``v_out - I`` when the gain is small.
    """

    gain: float
    rotation: np.ndarray
    v_out: np.ndarray
    signal: np.ndarray


def output_covariance(v_mec, det):
    """Covariance of the readout output quadratures for mechanical block ``v_mec``."""
    det.warn()
    v_mec = np.asarray(v_mec, dtype=float)
    g = det.gain
    signal = g * g * ROTATION @ v_mec @ ROTATION.T
    signal = 0.5 * (signal + signal.T)
    return OutputModel(g, ROTATION.copy(), signal + np.eye(2), signal)


def _check_above_vacuum(v_out, tol):
    excess = np.linalg.eigvalsh(0.5 * (v_out + v_out.T) - np.eye(2))
    if excess.min() < -tol:
        raise InconsistentMeasurementError(
            f"output covariance lies below the vacuum floor (eigenvalue {excess.min():.3e})"
        )


def reconstruct_mechanical(v_out, det, floor_tol=1e-6):
    """Invert :func:`output_covariance`: R^T (V_out - I) R / g^2.

    Parameters
    ----------
    v_out : ndarray or OutputModel
        Measured output covariance. Given an :class:`OutputModel` the
        stored signal part is inverted directly and the round trip is exact
        to rounding. A bare 2 x 2 array carries an absolute error of about
        eps * |V_out| / g^2 from the subtraction of the vacuum term.
    det : DetectionParams
    floor_tol : float
        How far an eigenvalue of V_out may fall below the vacuum value 1
        before InconsistentMeasurementError is raised.
    """
    det.warn()
    g = det.gain
    if not g > 0:
        raise ValueError(f"readout gain must be positive, got {g}")
    if isinstance(v_out, OutputModel):
        excess = v_out.signal
    else:
        v_out = np.asarray(v_out, dtype=float)
        excess = v_out - np.eye(2)
    _check_above_vacuum(excess + np.eye(2), floor_tol)
    v = ROTATION.T @ excess @ ROTATION / (g * g)
    return 0.5 * (v + v.T)


def sample_output_records(v_out, m, seed):
    """Draw ``m`` zero-mean Gaussian quadrature pairs with covariance ``v_out``.

    Standard normals from ``numpy.random.default_rng(seed)`` are mapped
    through the Cholesky factor, so the records are reproducible per seed.
    """
    if m < 2:
        raise ValueError("need at least two records")
    v_out = np.asarray(v_out, dtype=float)
    try:
        chol = np.linalg.cholesky(0.5 * (v_out + v_out.T))
    except np.linalg.LinAlgError as exc:
        raise PhysicalityError("output covariance is not positive definite") from exc
    rng = np.random.default_rng(seed)
    return rng.standard_normal((int(m), 2)) @ chol.T


@dataclass(frozen=True, eq=False)
class CovarianceEstimate:
    cov: np.ndarray
    stderr: np.ndarray
    m: int
    degenerate: bool


def estimate_covariance(records):
    """Unbiased sample covariance of ``records`` (shape (m, 2)).

    Standard errors use the Gaussian result
    var(S_ij) = (S_ij^2 + S_ii S_jj) / (m - 1).
    """
    x = np.asarray(records, dtype=float)
    if x.ndim != 2 or x.shape[0] < 2:
        raise ValueError("need at least two records")
    m = x.shape[0]
    centered = x - x.mean(axis=0)
    cov = centered.T @ centered / (m - 1)
    diag = np.diag(cov)
    stderr = np.sqrt((cov ** 2 + np.outer(diag, diag)) / (m - 1))
    degenerate = bool(np.linalg.det(cov) <= 1e-12 * max(1.0, float(np.max(np.abs(cov)))) ** 2)
    return CovarianceEstimate(cov, stderr, m, degenerate)


def reconstruct_estimate(estimate, det):
    """Mechanical block and its standard errors from an output estimate.

    The vacuum-floor check allows five standard errors, since with few
    records the sampling noise can exceed the signal g^2 V_mec.
    """
    v_mec = reconstruct_mechanical(estimate.cov, det, floor_tol=max(1e-6, 5 * float(estimate.stderr.max())))
    # entrywise |R^T S R| permutes (11) <-> (22) and keeps the off-diagonal
    err = np.abs(ROTATION.T @ estimate.stderr @ ROTATION) / det.gain ** 2
    return v_mec, err


def records_to_csv(records):
    """CSV text with header ``x,p`` and 12 significant digits per value."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["x", "p"])
    for x, p in np.asarray(records, dtype=float):
        writer.writerow([f"{x:.12g}", f"{p:.12g}"])
    return buf.getvalue()


def records_from_csv(text):
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or rows[0] != ["x", "p"]:
        raise ValueError("record CSV must start with the header x,p")
    return np.array([[float(a), float(b)] for a, b in rows[1:]])
