"""Steady-state Gaussian coherence of a driven cavity-optomechanical system."""

from .config import SweepAxis, SweepSpec, load_config
from .detect import DetectionParams, output_covariance, reconstruct_mechanical
from .errors import (
    ConfigError,
    ConvergenceError,
    InconsistentMeasurementError,
    MarginalStabilityError,
    MultistabilityWarning,
    NumericalError,
    OptoCoherenceError,
    PhysicalityError,
    StabilityError,
    ValidityWarning,
)
from .gaussian import (
    CoherenceReport,
    GaussianState,
    coherence,
    coherence_difference,
    coherence_one_mode,
    coherence_two_mode,
    f_entropy,
    mutual_information,
    symplectic_eigenvalues,
    von_neumann_entropy,
)
from .model import (
    SteadyState,
    SystemParams,
    build_diffusion,
    build_drift,
    solve_steady_state,
    stability_routh_hurwitz,
    stability_spectral,
)
from .steady import solve_lyapunov, steady_covariance
from .sweep import evaluate_point, run_sweep

__version__ = "0.1.0"
