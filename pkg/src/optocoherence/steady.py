"""
Steady-state covariance of the linearized fluctuations.

The canonical route solves A V + V A^T = -D as a dense 16 x 16 linear
system. ``integrate_covariance_ode`` integrates dV/dt = A V + V A^T + D
with classical RK4 and serves as an independent check.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import (
    ConvergenceError,
    MarginalStabilityError,
    NumericalError,
    PhysicalityError,
    StabilityError,
    ValidityWarning,
)
from .gaussian import GaussianState, symplectic_eigenvalues
from .model import (
    build_diffusion,
    build_drift,
    solve_steady_state,
    stability_routh_hurwitz,
    stability_spectral,
)

LYAPUNOV_RTOL = 1e-9
ODE_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class CovarianceSolution:
    """Covariance of (dq, dp, dX, dY).

    ``residual`` is the Frobenius norm of A V + V A^T + D. ``method`` is
    ``"lyapunov"`` or ``"ode-integration"``. ``d`` holds the working-point
    first moments when the solution came from :func:`steady_covariance`.
    """

    v: np.ndarray
    residual: float
    method: str
    d: np.ndarray = None

    @property
    def v_mec(self):
        return self.v[0:2, 0:2]

    @property
    def v_opt(self):
        return self.v[2:4, 2:4]

    @property
    def v_cor(self):
        return self.v[0:2, 2:4]

    def gaussian_state(self):
        return GaussianState(self.v, self.d)


def lyapunov_residual(a, v, d):
    return float(np.linalg.norm(a @ v + v @ a.T + d))


def solve_lyapunov(a, d):
    """Solve A V + V A^T = -D for a strictly stable A.

    Row-major vectorization turns the equation into
    (A (x) I + I (x) A) vec(V) = -vec(D). The result is symmetrized.
    """
    a = np.asarray(a, dtype=float)
    d = np.asarray(d, dtype=float)
    spec = stability_spectral(a)
    if not spec.stable:
        raise StabilityError(
            f"drift matrix is not strictly stable (spectral abscissa {spec.abscissa:.3e})",
            abscissa=spec.abscissa,
        )
    n = a.shape[0]
    eye = np.eye(n)
    lhs = np.kron(a, eye) + np.kron(eye, a)
    try:
        vec = np.linalg.solve(lhs, -d.reshape(-1))
    except np.linalg.LinAlgError as exc:
        raise NumericalError("Lyapunov linear system is singular") from exc
    v = vec.reshape(n, n)
    v = 0.5 * (v + v.T)
    if not np.all(np.isfinite(v)):
        raise NumericalError("Lyapunov solution is not finite")
    return CovarianceSolution(v, lyapunov_residual(a, v, d), "lyapunov")


def _rk4_affine(lmat, b, h):
    """One RK4 step of x' = L x + b written as x -> T x + c."""
    n = lmat.shape[0]
    hl = h * lmat
    hl2 = hl @ hl
    hl3 = hl2 @ hl
    s = np.eye(n) + hl / 2.0 + hl2 / 6.0 + hl3 / 24.0
    return np.eye(n) + hl @ s, h * (s @ b)


def integrate_covariance_ode(a, d, v0, dt=None, t_end=None):
    """Integrate dV/dt = A V + V A^T + D from ``v0`` with classical RK4.

    Parameters
    ----------
    a, d : ndarray, shape (4, 4)
        Drift and diffusion matrices.
    v0 : ndarray
        Initial covariance.
    dt : float, optional
        Step size, at most ``0.01 / max|A_ij|``. Default is 1e-3 or that
        bound, whichever is smaller.
    t_end : float, optional
        Integration time. Default ``50 / min(gamma_m, kappa)`` read off the
        damping entries of ``a``.

    A fixed-step RK4 step on a linear autonomous system is an affine map,
    so ``N`` steps are applied by repeated squaring of that map; the
    arithmetic is that of ``N`` successive RK4 steps.

    Raises ConvergenceError when |dV/dt| at ``t_end`` exceeds 1e-10.
    """
    a = np.asarray(a, dtype=float)
    d = np.asarray(d, dtype=float)
    v0 = np.asarray(v0, dtype=float)
    n = a.shape[0]
    max_rate = float(np.max(np.abs(a)))
    dt_max = 0.01 / max_rate if max_rate > 0 else np.inf
    if dt is None:
        dt = min(1e-3, dt_max)
    if not dt > 0:
        raise ValueError("dt must be positive")
    if dt > dt_max * (1 + 1e-12):
        raise ValueError(f"dt={dt:g} exceeds the accuracy bound {dt_max:g}")
    if t_end is None:
        damping = [-a[i, i] for i in range(n) if a[i, i] < 0]
        if not damping:
            raise ValueError("cannot infer t_end without damping on the diagonal")
        t_end = 50.0 / min(damping)
    steps = int(math.ceil(t_end / dt))

    eye = np.eye(n)
    lmat = np.kron(a, eye) + np.kron(eye, a)
    t_step, c_step = _rk4_affine(lmat, d.reshape(-1), dt)
    x = v0.reshape(-1).copy()
    # binary powers of the affine map (T, c): (T, c)^2 = (T T, T c + c)
    while steps:
        if steps & 1:
            x = t_step @ x + c_step
        steps >>= 1
        if steps:
            c_step = t_step @ c_step + c_step
            t_step = t_step @ t_step
    v = x.reshape(n, n)
    v = 0.5 * (v + v.T)
    deriv = lyapunov_residual(a, v, d)
    if not np.isfinite(deriv) or deriv > ODE_TOL:
        raise ConvergenceError(
            f"covariance ODE not converged at t={t_end:g}: |dV/dt| = {deriv:.3e}",
            derivative_norm=deriv,
        )
    return CovarianceSolution(v, deriv, "ode-integration")


def steady_covariance(params):
    """Working point and steady covariance for ``params``.

    Returns ``(steady_state, solution)``; ``solution.d`` carries the first
    moments (q_s, 0, 2 alpha_s, 0). Raises MarginalStabilityError or
    StabilityError (with the Routh-Hurwitz margins) when the principal
    branch is not stable, and PhysicalityError when the covariance breaks
    the uncertainty bound. The Markovian Brownian noise only acts on the
    momentum and can do that for baths near the ground state (n_th < 1).
    """
    steady = solve_steady_state(params)
    rh = stability_routh_hurwitz(params, steady)
    if rh.verdict == "marginal":
        raise MarginalStabilityError(
            f"marginally stable working point, margins {rh.margin1:.3e}, {rh.margin2:.3e}",
            margins=rh.margins,
        )
    if rh.verdict == "unstable":
        raise StabilityError(
            f"unstable working point, margins {rh.margin1:.3e}, {rh.margin2:.3e}",
            margins=rh.margins,
        )
    a = build_drift(params, steady)
    d = build_diffusion(params)
    sol = solve_lyapunov(a, d)
    scale = max(1.0, float(np.linalg.norm(sol.v)))
    if sol.residual > LYAPUNOV_RTOL * scale:
        raise NumericalError(f"Lyapunov residual {sol.residual:.3e} above tolerance")
    try:
        symplectic_eigenvalues(GaussianState(sol.v))
    except PhysicalityError as exc:
        raise PhysicalityError(f"steady covariance is unphysical at n_th={params.n_th:g}: {exc}") from exc
    return steady, CovarianceSolution(sol.v, sol.residual, sol.method, steady.displacement)


def rwa_mechanical_variance(params, steady):
    """Resolved-sideband estimate of the mechanical variance.

    n_th + 1/2 - 2 G^2 kappa (1/2 - n_th) / ((gamma_m + 2 kappa)(2 gamma_m kappa + G^2))

    Diagnostic only: its G -> 0 limit is n_th + 1/2, half the thermal
    variance 2 n_th + 1 of the convention used elsewhere, so compare it with
    the Lyapunov value as a ratio rather than expecting equality. Warns when
    omega_m is not at least ten times G and kappa.
    """
    g, k, gm, nth = steady.g_eff, params.kappa, params.gamma_m, params.n_th
    if params.omega_m < 10.0 * max(g, k):
        warnings.warn(
            f"resolved-sideband estimate outside its regime (G={g:.3g}, kappa={k:.3g})",
            ValidityWarning,
            stacklevel=2,
        )
    return nth + 0.5 - 2.0 * g * g * k * (0.5 - nth) / ((gm + 2.0 * k) * (2.0 * gm * k + g * g))
