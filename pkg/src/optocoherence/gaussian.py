"""
Gaussian-state toolkit: symplectic spectra, entropies and coherence.

Conventions
-----------
Quadratures are q = b + b^dag and p = i(b^dag - b), so the vacuum covariance
is the identity and the uncertainty bound reads nu >= 1. Modes are ordered
mode-major, (q1, p1, q2, p2, ...). All logarithms are natural (nats).

For a two-mode state the first mode is the mechanical resonator and the
second the cavity field.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import PhysicalityError

PHYS_TOL = 1e-9
SYM_RTOL = 1e-12


def symplectic_form(n_modes):
    """Block-diagonal symplectic form with [[0, 1], [-1, 0]] per mode."""
    return np.kron(np.eye(n_modes), np.array([[0.0, 1.0], [-1.0, 0.0]]))


@dataclass(frozen=True, eq=False)
class GaussianState:
    """N-mode Gaussian state.

    Parameters
    ----------
    v : array_like, shape (2N, 2N)
        Symmetric covariance matrix, vacuum = identity.
    d : array_like, shape (2N,), optional
        First moments. Defaults to zero.

    Symmetry and finiteness are checked on construction. The uncertainty
    bound is checked whenever the symplectic spectrum is computed.
    """

    v: np.ndarray
    d: np.ndarray = None
    n_modes: int = field(init=False)

    def __post_init__(self):
        v = np.array(self.v, dtype=float)
        if v.ndim != 2 or v.shape[0] != v.shape[1] or v.shape[0] % 2:
            raise ValueError(f"covariance must be 2N x 2N, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("covariance contains non-finite entries")
        scale = max(1.0, np.max(np.abs(v)))
        if np.max(np.abs(v - v.T)) > SYM_RTOL * scale:
            raise ValueError("covariance is not symmetric")
        v = 0.5 * (v + v.T)
        n = v.shape[0] // 2
        d = np.zeros(2 * n) if self.d is None else np.array(self.d, dtype=float).reshape(-1)
        if d.shape != (2 * n,):
            raise ValueError(f"displacement must have length {2 * n}, got {d.shape}")
        if not np.all(np.isfinite(d)):
            raise ValueError("displacement contains non-finite entries")
        v.setflags(write=False)
        d.setflags(write=False)
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "n_modes", n)

    def mode(self, i):
        """Reduced covariance block and displacement of mode ``i``."""
        s = slice(2 * i, 2 * i + 2)
        return self.v[s, s], self.d[s]

    @property
    def correlation_block(self):
        """Off-diagonal 2x2 block between modes 0 and 1."""
        return self.v[0:2, 2:4]


def _snap_nu(nu):
    nu = np.asarray(nu, dtype=float)
    low = nu < 1.0 - PHYS_TOL
    if np.any(low):
        raise PhysicalityError(
            f"symplectic eigenvalue {nu[low].min():.12g} below the vacuum bound 1"
        )
    return np.where(nu < 1.0, 1.0, nu)


def f_entropy(x):
    """Entropy of a thermal mode whose symplectic eigenvalue is ``x``.

    F(x) = (x+1)/2 log((x+1)/2) - (x-1)/2 log((x-1)/2), with F(1) = 0.
    Evaluated as log(u) + w log1p(1/w), u = (x+1)/2, w = (x-1)/2, which does
    not cancel catastrophically at large x.
    """
    x = float(x)
    if not np.isfinite(x):
        raise PhysicalityError(f"F(x) needs a finite argument, got {x}")
    if x < 1.0 - PHYS_TOL:
        raise PhysicalityError(f"F(x) needs x >= 1, got {x:.12g}")
    w = 0.5 * (x - 1.0)
    if w <= 0.0:
        return 0.0
    return float(np.log1p(w) + w * np.log1p(1.0 / w))


def symplectic_eigenvalues(state):
    """Symplectic spectrum of ``state.v``, sorted descending.

    The moduli of the eigenvalues of i*Omega*V, obtained as the positive
    half of the spectrum of the Hermitian matrix L^T (i Omega) L where
    V = L L^T. A covariance that is not positive definite is unphysical.
    """
    if not isinstance(state, GaussianState):
        state = GaussianState(state)
    try:
        chol = np.linalg.cholesky(state.v)
    except np.linalg.LinAlgError as exc:
        raise PhysicalityError("covariance is not positive definite") from exc
    h = chol.T @ (1j * symplectic_form(state.n_modes)) @ chol
    ev = np.linalg.eigvalsh(h)
    nus = np.sort(np.abs(ev[state.n_modes:]))[::-1]
    return _snap_nu(nus)


def symplectic_eigenvalues_closed_form(v):
    """Two-mode symplectic eigenvalues from block determinants.

    Returns ``(nu1, nu2)`` with nu1 >= nu2, from
    nu^2 = [Gamma +- sqrt(Gamma^2 - 4 det V)] / 2,
    Gamma = det V_mec + det V_opt + 2 det V_cor.
    """
    v = np.asarray(v, dtype=float)
    if v.shape != (4, 4):
        raise ValueError(f"expected a 4x4 covariance, got shape {v.shape}")
    gamma = (np.linalg.det(v[0:2, 0:2]) + np.linalg.det(v[2:4, 2:4])
             + 2.0 * np.linalg.det(v[0:2, 2:4]))
    det_v = np.linalg.det(v)
    disc = gamma * gamma - 4.0 * det_v
    # relative clamp: Gamma^2 carries round-off proportional to its size
    if disc < 0.0:
        if disc < -PHYS_TOL * max(1.0, gamma * gamma):
            raise PhysicalityError(f"negative discriminant {disc:.6g} in symplectic spectrum")
        disc = 0.0
    root = np.sqrt(disc)
    nu1 = np.sqrt(max(0.5 * (gamma + root), 0.0))
    nu2 = np.sqrt(max(0.5 * (gamma - root), 0.0))
    return float(nu1), float(nu2)


def von_neumann_entropy(state):
    """Entropy in nats, sum of F over the symplectic spectrum."""
    return float(sum(f_entropy(nu) for nu in symplectic_eigenvalues(state)))


def mean_occupation(v_block, d_block):
    """Mean excitation number (V11 + V22 + d1^2 + d2^2 - 2) / 4 of one mode."""
    v_block = np.asarray(v_block, dtype=float)
    d_block = np.asarray(d_block, dtype=float)
    n = (v_block[0, 0] + v_block[1, 1] + d_block[0] ** 2 + d_block[1] ** 2 - 2.0) / 4.0
    if n < -PHYS_TOL:
        raise PhysicalityError(f"negative mean occupation {n:.6g}")
    return max(float(n), 0.0)


def _block_nu(v_block):
    """sqrt(det) of a one-mode block, checked against the vacuum bound."""
    det = float(np.linalg.det(np.asarray(v_block, dtype=float)))
    if det < 0.0:
        raise PhysicalityError(f"one-mode covariance has negative determinant {det:.6g}")
    return float(_snap_nu(np.sqrt(det)))


def _clamp_nonneg(value, what):
    if value < -PHYS_TOL:
        raise PhysicalityError(f"{what} is negative ({value:.6g})")
    return max(value, 0.0)


def coherence_one_mode(v_block, d_block):
    """Relative-entropy coherence of a one-mode Gaussian state, in nats.

    The closest incoherent Gaussian state is thermal with the same mean
    occupation, so C = F(2 n + 1) - F(nu) with nu = sqrt(det V).
    """
    nu = _block_nu(v_block)
    nbar = mean_occupation(v_block, d_block)
    return _clamp_nonneg(f_entropy(2.0 * nbar + 1.0) - f_entropy(nu), "coherence")


def coherence(state):
    """Coherence of an N-mode Gaussian state.

    Sum over modes of F(2 n_i + 1) minus the sum of F over the symplectic
    spectrum, with n_i the occupation of the i-th reduced mode.
    """
    nus = symplectic_eigenvalues(state)
    occ = sum(f_entropy(2.0 * mean_occupation(*state.mode(i)) + 1.0)
              for i in range(state.n_modes))
    return _clamp_nonneg(occ - sum(f_entropy(nu) for nu in nus), "coherence")


def _require_two_modes(state):
    if not isinstance(state, GaussianState):
        raise TypeError("expected a GaussianState")
    if state.n_modes != 2:
        raise ValueError(f"expected a two-mode state, got {state.n_modes} modes")


def coherence_two_mode(state):
    _require_two_modes(state)
    return coherence(state)


def mutual_information(state):
    """F(a) + F(b) - F(nu1) - F(nu2), a and b the reduced-block sqrt(det)."""
    _require_two_modes(state)
    a = _block_nu(state.v[0:2, 0:2])
    b = _block_nu(state.v[2:4, 2:4])
    nu1, nu2 = symplectic_eigenvalues(state)
    info = f_entropy(a) + f_entropy(b) - f_entropy(nu1) - f_entropy(nu2)
    return _clamp_nonneg(info, "mutual information")


@dataclass(frozen=True)
class CoherenceReport:
    c_mec: float
    c_opt: float
    c_tot: float
    delta_c: float
    mutual_info: float
    nu1: float
    nu2: float
    a: float
    b: float


def coherence_difference(state):
    """Subsystem and total coherence of a two-mode state plus their gap.

    ``delta_c = c_tot - c_mec - c_opt``; it coincides with the mutual
    information for every physical state.
    """
    _require_two_modes(state)
    c_mec = coherence_one_mode(*state.mode(0))
    c_opt = coherence_one_mode(*state.mode(1))
    c_tot = coherence(state)
    nu1, nu2 = symplectic_eigenvalues(state)
    return CoherenceReport(
        c_mec=c_mec,
        c_opt=c_opt,
        c_tot=c_tot,
        delta_c=c_tot - c_mec - c_opt,
        mutual_info=mutual_information(state),
        nu1=float(nu1),
        nu2=float(nu2),
        a=_block_nu(state.v[0:2, 0:2]),
        b=_block_nu(state.v[2:4, 2:4]),
    )


def passive_symplectic(unitary):
    """Orthogonal symplectic matrix (mode-major) for an N x N unitary."""
    u = np.asarray(unitary)
    n = u.shape[0]
    x, y = u.real, u.imag
    block = np.block([[x, -y], [y, x]])
    perm = np.ravel(np.column_stack([np.arange(n), np.arange(n) + n]))
    return block[np.ix_(perm, perm)]


def random_symplectic(n_modes, rng, max_squeeze=1.0):
    """Random symplectic matrix: passive * single-mode squeezing * passive."""
    def haar(n):
        z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
        q, r = np.linalg.qr(z)
        return q * (np.diag(r) / np.abs(np.diag(r)))

    r = rng.uniform(-max_squeeze, max_squeeze, n_modes)
    squeeze = np.diag(np.ravel(np.column_stack([np.exp(r), np.exp(-r)])))
    return passive_symplectic(haar(n_modes)) @ squeeze @ passive_symplectic(haar(n_modes))


def random_state(n_modes, rng, max_thermal=20.0, max_squeeze=1.0, max_displacement=5.0):
    """Random physical Gaussian state S diag(nu) S^T with a random displacement."""
    nus = 1.0 + rng.uniform(0.0, max_thermal, n_modes)
    s = random_symplectic(n_modes, rng, max_squeeze)
    v = s @ np.diag(np.repeat(nus, 2)) @ s.T
    d = rng.uniform(-max_displacement, max_displacement, 2 * n_modes)
    return GaussianState(0.5 * (v + v.T), d)
