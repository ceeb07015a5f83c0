"""Scenario description and random channel generation.

Arrays are vertical uniform rectangular arrays in the y-z plane. Element
``p * n_z + q`` sits at ``(p, q) * spacing`` (z index fastest), matching
the Kronecker order ``a_y (x) a_z`` of the steering vectors.
"""
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import brentq

from .errors import DomainError
from .pdl import LossParams

# RIS spacing (wavelengths) used when full correlation is requested
MIN_SPACING = 1e-4


def db_to_linear(db):
    return 10.0 ** (np.asarray(db, dtype=float) / 10.0)


def linear_to_db(x):
    return 10.0 * np.log10(x)


def dbm_to_watt(dbm):
    return 10.0 ** ((dbm - 30.0) / 10.0)


@dataclass(frozen=True)
class ArrayGeometry:
    """BS and RIS layouts plus the angles of the RIS-BS line-of-sight link.

    Angles are radians; spacings are in wavelengths. The defaults are the
    single angle draw used throughout the reference results.
    """
    m_y: int = 4
    m_z: int = 4
    n_y: int = 4
    n_z: int = 4
    d_b: float = 0.5
    d_r: float = 0.5
    theta_A: float = math.radians(109.9)
    omega_A: float = math.radians(-29.9)
    theta_D: float = math.radians(77.1)
    omega_D: float = math.radians(19.95)

    def __post_init__(self):
        for name in ("m_y", "m_z", "n_y", "n_z"):
            if int(getattr(self, name)) < 1:
                raise DomainError(f"{name} must be a positive integer")
        if not (self.d_b > 0 and self.d_r > 0):
            raise DomainError("element spacings must be positive")
        angles = (self.theta_A, self.omega_A, self.theta_D, self.omega_D)
        if not all(math.isfinite(a) for a in angles):
            raise DomainError("angles must be finite")

    @property
    def M(self):
        return self.m_y * self.m_z

    @property
    def N(self):
        return self.n_y * self.n_z


@dataclass(frozen=True)
class CorrelationSpec:
    rho_d: float = 0.7
    rho_ru: float = 0.95

    def __post_init__(self):
        if not (0.0 <= self.rho_d <= 1.0 and 0.0 <= self.rho_ru <= 1.0):
            raise DomainError("nearest-neighbour correlations must lie in [0, 1]")


@dataclass(frozen=True)
class LinkGains:
    """Linear power gains of the UE-BS, UE-RIS and RIS-BS links."""
    beta_d: float
    beta_ru: float
    beta_br: float

    def __post_init__(self):
        if not (self.beta_d > 0 and self.beta_ru > 0 and self.beta_br > 0):
            raise DomainError("link gains must be positive")


@dataclass
class ChannelSample:
    h_d: np.ndarray
    h_ru: np.ndarray


def link_gains_from_geometry(d=30.0, d_v=1.0, d_br=51.0, C0_db=-30.0,
                             alpha_ru=2.8, alpha_d=3.5):
    """Path gains for the reference deployment.

    The BS and RIS share a line at height offset ``d_v`` and are ``d_br``
    apart; the UE is on the ground line at horizontal distance ``d`` from the
    BS. The RIS-BS link is free-space (``d_br**-2``), the others follow
    ``C0 * dist**-exponent``.
    """
    if min(d, d_v, d_br) <= 0:
        raise DomainError("distances must be positive")
    d_d, d_ru = deployment_distances(d, d_v, d_br)
    c0 = 10.0 ** (C0_db / 10.0)
    return LinkGains(beta_d=c0 * d_d ** -alpha_d,
                     beta_ru=c0 * d_ru ** -alpha_ru,
                     beta_br=d_br ** -2.0)


def deployment_distances(d=30.0, d_v=1.0, d_br=51.0):
    """UE-BS and UE-RIS distances ``(d_d, d_ru)`` in metres."""
    return math.hypot(d, d_v), math.hypot(d_br - d, d_v)


def default_tau_bar(es=1.0, noise_dbm=-65.0):
    """E_s / sigma^2 with E_s in watts and the noise power in dBm."""
    return es / dbm_to_watt(noise_dbm)


@dataclass(frozen=True)
class Scenario:
    geometry: ArrayGeometry = field(default_factory=ArrayGeometry)
    correlation: CorrelationSpec = field(default_factory=CorrelationSpec)
    gains: LinkGains = field(default_factory=link_gains_from_geometry)
    loss: LossParams = field(default_factory=LossParams)
    tau_bar: float = field(default_factory=default_tau_bar)

    def __post_init__(self):
        if not self.tau_bar > 0:
            raise DomainError("tau_bar must be positive")

    def with_loss(self, **changes):
        return replace(self, loss=self.loss.replace(**changes))

    @property
    def fully_correlated(self):
        return self.correlation.rho_ru >= 1.0

    @property
    def uncorrelated(self):
        return self.correlation.rho_ru == 0.0


def sinc(x):
    """Normalised sinc, sin(pi x)/(pi x)."""
    return np.sinc(x)


def grid_positions(n_y, n_z, spacing):
    """(n_y*n_z, 2) array of element coordinates, z index fastest."""
    p, q = np.meshgrid(np.arange(n_y), np.arange(n_z), indexing="ij")
    return spacing * np.column_stack([p.ravel(), q.ravel()]).astype(float)


def _distances(n_y, n_z, spacing):
    pos = grid_positions(n_y, n_z, spacing)
    diff = pos[:, None, :] - pos[None, :, :]
    return np.sqrt(np.sum(diff ** 2, axis=-1))


def ris_correlation_matrix(n_y, n_z, d_r):
    """Sinc model: entry (i, k) is sinc(2 d_ik), d_ik in wavelengths."""
    if d_r <= 0:
        raise DomainError("RIS spacing must be positive")
    return sinc(2.0 * _distances(n_y, n_z, d_r))


def bs_correlation_matrix(m_y, m_z, rho_d, d_b):
    """Exponential model: entry (i, k) is rho_d ** (d_ik / d_b)."""
    if not 0.0 <= rho_d <= 1.0:
        raise DomainError("rho_d must lie in [0, 1]")
    # 0**0 = 1 keeps the diagonal at one when rho_d = 0
    return np.power(rho_d, _distances(m_y, m_z, d_b) / d_b)


def spacing_from_correlation(rho_ru):
    """Smallest RIS spacing d_r with sinc(2 d_r) = rho_ru."""
    if not 0.0 <= rho_ru <= 1.0:
        raise DomainError("rho_ru must lie in [0, 1]")
    # sinc(1) evaluates to ~4e-17, not 0
    if rho_ru <= sinc(1.0):
        return 0.5
    if rho_ru >= 1.0 or sinc(2 * MIN_SPACING) <= rho_ru:
        return MIN_SPACING
    return brentq(lambda d: sinc(2 * d) - rho_ru, MIN_SPACING, 0.5,
                  xtol=1e-15, rtol=4 * np.finfo(float).eps)


def _ula(n, spacing, direction_cosine):
    return np.exp(2j * np.pi * spacing * np.arange(n) * direction_cosine)


def steering_vectors(g):
    """(a_b, a_r): unit-modulus BS and RIS array responses."""
    a_b = np.kron(_ula(g.m_y, g.d_b, math.sin(g.theta_A) * math.sin(g.omega_A)),
                  _ula(g.m_z, g.d_b, math.cos(g.theta_A)))
    a_r = np.kron(_ula(g.n_y, g.d_r, math.sin(g.theta_D) * math.sin(g.omega_D)),
                  _ula(g.n_z, g.d_r, math.cos(g.theta_D)))
    return a_b, a_r


def sample_angles(rng):
    """Draw LOS angles from the reference ranges; returns a dict of radians."""
    theta_D = math.radians(rng.uniform(70.0, 90.0))
    return {
        "theta_D": theta_D,
        "omega_D": math.radians(rng.uniform(-30.0, 30.0)),
        "theta_A": math.pi - theta_D,
        "omega_A": math.radians(rng.uniform(-30.0, 30.0)),
    }


def psd_sqrt(R, tol=1e-6):
    """Symmetric square root of a (numerically) positive semidefinite matrix.

    Small negative eigenvalues from round-off are set to zero; anything below
    ``-tol * max eigenvalue`` is an error.
    """
    R = np.asarray(R)
    if R.ndim != 2 or R.shape[0] != R.shape[1]:
        raise DomainError("expected a square matrix")
    if not np.allclose(R, R.conj().T, atol=1e-12, rtol=0):
        raise DomainError("matrix is not symmetric")
    w, V = np.linalg.eigh(R)
    top = max(w.max(), 0.0)
    if w.min() < -tol * top:
        raise DomainError(
            f"matrix is not positive semidefinite (eigenvalue {w.min():.3e})")
    w = np.clip(w, 0.0, None)
    S = (V * np.sqrt(w)) @ V.conj().T
    return S.real if np.isrealobj(R) else S


@dataclass(frozen=True)
class ScenarioMatrices:
    """Deterministic arrays derived once from a scenario."""
    a_b: np.ndarray
    a_r: np.ndarray
    R_d: np.ndarray
    R_ru: np.ndarray
    sqrt_Rd: np.ndarray
    sqrt_Rru: np.ndarray


def effective_geometry(s):
    """Geometry with the RIS spacing tied to the requested rho_ru."""
    return replace(s.geometry, d_r=spacing_from_correlation(s.correlation.rho_ru))


def scenario_matrices(s):
    """Steering vectors, correlation matrices and their square roots."""
    g = effective_geometry(s)
    a_b, a_r = steering_vectors(g)
    R_d = bs_correlation_matrix(g.m_y, g.m_z, s.correlation.rho_d, g.d_b)
    # the two correlation extremes are imposed exactly rather than through
    # the sinc model (a 2-D grid at half-wavelength spacing is not white)
    if s.fully_correlated:
        R_ru = np.ones((g.N, g.N))
    elif s.uncorrelated:
        R_ru = np.eye(g.N)
    else:
        R_ru = ris_correlation_matrix(g.n_y, g.n_z, g.d_r)
    return ScenarioMatrices(a_b, a_r, R_d, R_ru, psd_sqrt(R_d), psd_sqrt(R_ru))


def complex_normal(rng, shape):
    """i.i.d. CN(0, 1) entries (real and imaginary parts of variance 1/2)."""
    z = rng.standard_normal(tuple(shape) + (2,))
    return (z[..., 0] + 1j * z[..., 1]) * math.sqrt(0.5)


def sample_channels(s, sqrt_Rd, sqrt_Rru, rng, size=None):
    """Draw h_d and h_ru.

    With ``size=None`` a single :class:`ChannelSample` of vectors is returned;
    otherwise the arrays carry a leading batch axis of length ``size``.
    """
    M, N = s.geometry.M, s.geometry.N
    if sqrt_Rd.shape != (M, M) or sqrt_Rru.shape != (N, N):
        raise DomainError(
            f"square roots have shapes {sqrt_Rd.shape}, {sqrt_Rru.shape}; "
            f"scenario needs ({M}, {M}) and ({N}, {N})")
    batch = () if size is None else (int(size),)
    u_d = complex_normal(rng, batch + (M,))
    u_ru = complex_normal(rng, batch + (N,))
    h_d = math.sqrt(s.gains.beta_d) * u_d @ sqrt_Rd.T
    h_ru = math.sqrt(s.gains.beta_ru) * u_ru @ sqrt_Rru.T
    return ChannelSample(h_d=h_d, h_ru=h_ru)
