"""
Driven optomechanical cavity: working point, drift and diffusion matrices,
stability.

All rates are in units of the mechanical frequency. Fluctuations are
ordered (dq, dp, dX, dY): mechanical position and momentum first, then the
cavity amplitude and phase quadratures.
"""

import math
import warnings
from dataclasses import dataclass, field, fields

import numpy as np

from .errors import MultistabilityWarning, NumericalError

MARGINAL_BAND = 1e-8
SPECTRAL_TOL = 1e-12


@dataclass(frozen=True)
class SystemParams:
    """Physical parameters of the optomechanical system.

    Parameters
    ----------
    gamma_m : float
        Mechanical damping rate, > 0.
    kappa : float
        Cavity decay rate, > 0.
    delta0 : float
        Bare detuning between cavity and drive (positive = red detuned).
    g0 : float
        Single-photon optomechanical coupling, >= 0.
    drive_e : float
        Drive amplitude, >= 0.
    n_th : float
        Mean thermal phonon number of the mechanical bath, >= 0.
    omega_m : float
        Mechanical frequency; the unit of every other rate.
    lock_detuning : bool
        If True the effective detuning is held at ``delta0`` (the drive is
        assumed retuned to cancel the radiation-pressure shift). The default
        solves the self-consistent working point.
    """

    gamma_m: float = 0.01
    kappa: float = 0.1
    delta0: float = 1.0
    g0: float = 1e-4
    drive_e: float = 0.0
    n_th: float = 10.0
    omega_m: float = 1.0
    lock_detuning: bool = False

    def __post_init__(self):
        for f in fields(self):
            if f.name == "lock_detuning":
                continue
            value = getattr(self, f.name)
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise TypeError(f"{f.name} must be a real number, got {value!r}")
            if not math.isfinite(value):
                raise ValueError(f"{f.name} must be finite, got {value}")
            object.__setattr__(self, f.name, float(value))
        for name in ("omega_m", "gamma_m", "kappa"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0, got {getattr(self, name)}")
        for name in ("g0", "drive_e", "n_th"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0, got {getattr(self, name)}")
        if not isinstance(self.lock_detuning, bool):
            raise TypeError("lock_detuning must be a bool")

    def replace(self, **changes):
        values = {f.name: getattr(self, f.name) for f in fields(self)}
        values.update(changes)
        return SystemParams(**values)


@dataclass(frozen=True)
class SteadyState:
    """Classical working point of the driven system.

    ``branches`` lists every admissible ``(n_c, delta_eff)`` pair in
    ascending photon number; the principal solution is the first one.
    """

    q_s: float
    p_s: float
    alpha_s: float
    n_c: float
    delta_eff: float
    g_eff: float
    branches: tuple = field(default=())

    @property
    def multistable(self):
        return len(self.branches) > 1

    @property
    def displacement(self):
        """First moments of (q, p, X, Y) at the working point."""
        return np.array([self.q_s, self.p_s, 2.0 * self.alpha_s, 0.0])


def _cubic_real_roots(a, b, c):
    """Real roots of y^3 + a y^2 + b y + c, closed form plus Newton polish."""
    shift = a / 3.0
    p = b - a * a / 3.0
    q = 2.0 * a ** 3 / 27.0 - a * b / 3.0 + c
    disc = (q / 2.0) ** 2 + (p / 3.0) ** 3
    if disc < 0.0:
        r = 2.0 * math.sqrt(-p / 3.0)
        arg = (3.0 * q / (p * r)) if p != 0 else 0.0
        phi = math.acos(max(-1.0, min(1.0, arg)))
        ts = [r * math.cos((phi - 2.0 * math.pi * k) / 3.0) for k in range(3)]
    else:
        s = math.sqrt(disc)
        ts = [float(np.cbrt(-q / 2.0 + s) + np.cbrt(-q / 2.0 - s))]
    roots = []
    for t in ts:
        y = t - shift
        res = ((y + a) * y + b) * y + c
        for _ in range(3):
            deriv = (3.0 * y + 2.0 * a) * y + b
            if deriv == 0.0:
                break
            y_new = y - res / deriv
            res_new = ((y_new + a) * y_new + b) * y_new + c
            if abs(res_new) >= abs(res):
                break
            y, res = y_new, res_new
        roots.append(y)
    return sorted(roots)


def solve_steady_state(params):
    """Self-consistent working point.

    With y = g0^2 n_c / omega_m the photon number solves the cubic
    y [kappa^2 + (delta0 - y)^2] = g0^2 E^2 / omega_m, and then
    q_s = sqrt(2) g0 n_c / omega_m, delta_eff = delta0 - y and
    g_eff = sqrt(2) g0 alpha_s with alpha_s = sqrt(n_c) real.

    Every non-negative real root is kept in ``branches``; the smallest one is
    the principal solution. A MultistabilityWarning is emitted when there is
    more than one.
    """
    prm = params
    k2 = prm.kappa ** 2
    e2 = prm.drive_e ** 2
    if prm.lock_detuning or prm.g0 == 0.0 or prm.drive_e == 0.0:
        n_c = e2 / (k2 + prm.delta0 ** 2)
        delta = prm.delta0 if prm.lock_detuning else prm.delta0 - prm.g0 ** 2 * n_c / prm.omega_m
        branches = [(n_c, delta)]
    else:
        s = prm.g0 ** 2 / prm.omega_m
        ys = _cubic_real_roots(-2.0 * prm.delta0, k2 + prm.delta0 ** 2, -s * e2)
        ys = [y for y in ys if y >= 0.0]
        uniq = []
        for y in ys:
            if not uniq or abs(y - uniq[-1]) > 1e-12 * max(1.0, abs(y)):
                uniq.append(y)
        branches = [(y / s, prm.delta0 - y) for y in uniq]
    if not branches:
        raise NumericalError("steady-state cubic has no non-negative real root")
    if len(branches) > 1:
        warnings.warn(
            f"{len(branches)} steady-state branches at E={prm.drive_e:g}, g0={prm.g0:g}; "
            "using the lowest photon number",
            MultistabilityWarning,
            stacklevel=2,
        )
    n_c, delta = branches[0]
    alpha = math.sqrt(n_c)
    return SteadyState(
        q_s=math.sqrt(2.0) * prm.g0 * n_c / prm.omega_m,
        p_s=0.0,
        alpha_s=alpha,
        n_c=n_c,
        delta_eff=delta,
        g_eff=math.sqrt(2.0) * prm.g0 * alpha,
        branches=tuple(branches),
    )


def build_drift(params, steady):
    """Drift matrix A of d/dt u = A u + noise, u = (dq, dp, dX, dY)."""
    w, g, k = params.omega_m, steady.g_eff, params.kappa
    dlt = steady.delta_eff
    return np.array([
        [0.0, w, 0.0, 0.0],
        [-w, -params.gamma_m, g, 0.0],
        [0.0, 0.0, -k, dlt],
        [g, 0.0, -dlt, -k],
    ])


def build_diffusion(params):
    """diag(0, 2 gamma_m (2 n_th + 1), 2 kappa, 2 kappa)."""
    return np.diag([
        0.0,
        2.0 * params.gamma_m * (2.0 * params.n_th + 1.0),
        2.0 * params.kappa,
        2.0 * params.kappa,
    ])


def _verdict(values, band):
    if any(m < -band for m in values):
        return "unstable"
    if any(abs(m) <= band for m in values):
        return "marginal"
    return "stable"


@dataclass(frozen=True)
class RouthHurwitz:
    margin1: float
    margin2: float
    verdict: str

    @property
    def stable(self):
        return self.verdict == "stable"

    @property
    def margins(self):
        return (self.margin1, self.margin2)


def stability_routh_hurwitz(params, steady):
    """Routh-Hurwitz margins of the drift matrix.

    margin1 = w (D^2 + k^2) - G^2 D
    margin2 = 2 g k {s+ s- + g [v (D^2 + k^2) + 2 k w^2]} + D w G^2 v^2

    with s+- = k^2 + (w +- D)^2 and v = g + 2k (g the mechanical damping, k
    the cavity decay, D the effective detuning, G the effective coupling).
    The first is det(A)/w and the second the third Hurwitz determinant of
    the characteristic quartic; the remaining Hurwitz conditions hold
    identically for positive damping. Margins within 1e-8 of zero give the
    verdict "marginal".
    """
    w, gm, k = params.omega_m, params.gamma_m, params.kappa
    d, g = steady.delta_eff, steady.g_eff
    v = gm + 2.0 * k
    s_plus = k * k + (w + d) ** 2
    s_minus = k * k + (w - d) ** 2
    m1 = w * (d * d + k * k) - g * g * d
    m2 = (2.0 * gm * k * (s_plus * s_minus + gm * (v * (d * d + k * k) + 2.0 * k * w * w))
          + d * w * g * g * v * v)
    return RouthHurwitz(m1, m2, _verdict((m1, m2), MARGINAL_BAND))


@dataclass(frozen=True)
class Spectral:
    abscissa: float
    stable: bool


def stability_spectral(a):
    """Stable iff every eigenvalue of ``a`` has real part below -1e-12."""
    a = np.asarray(a, dtype=float)
    if not np.all(np.isfinite(a)):
        raise NumericalError("drift matrix has non-finite entries")
    try:
        ev = np.linalg.eigvals(a)
    except np.linalg.LinAlgError as exc:
        raise NumericalError("eigenvalue computation failed") from exc
    abscissa = float(np.max(ev.real))
    return Spectral(abscissa, abscissa < -SPECTRAL_TOL)
