"""Closed-form mean SNR of the RIS-aided SIMO uplink with phase-dependent loss.

The mean SNR splits into a direct-path term, a direct/RIS cross term and a
RIS term::

    E{SNR} = tau * (beta_d M
                    + sqrt(beta_br beta_d beta_ru) |R_d^1/2 a_b| N mu1 pi/2
                    + beta_ru beta_br M (N mu2 + F))

where F couples element pairs through their magnitude cross-moment and the
pairwise loss expectation.
"""
import math
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from . import pdl, specfun
from .channel import scenario_matrices
from .errors import DomainError

ROUTE_UNCORRELATED = "uncorrelated"
ROUTE_FULL = "fully_correlated"
ROUTE_GENERAL = "general"


@dataclass(frozen=True)
class MeanSnrBreakdown:
    term_direct: float
    term_cross: float
    term_ris: float
    coupling_F: float
    route: str

    @property
    def total(self):
        return self.term_direct + self.term_cross + self.term_ris

    def as_dict(self):
        return {"term_direct": self.term_direct, "term_cross": self.term_cross,
                "term_ris": self.term_ris, "coupling_F": self.coupling_F,
                "total": self.total, "route": self.route}


def pair_magnitude_moment(rho_sq):
    """E{|h_r||h_s|} for unit-variance complex Gaussians with |rho|**2 = rho_sq."""
    if not 0.0 <= rho_sq <= 1.0:
        raise DomainError(f"rho_sq must lie in [0, 1], got {rho_sq!r}")
    return 0.25 * math.pi * specfun.gauss_2f1_pair_moment(rho_sq)


def F_uncorrelated(N, mu1_val):
    return mu1_val ** 2 * N * (N - 1) * math.pi / 4.0


def _off_diagonal(N):
    r, s = np.nonzero(~np.eye(N, dtype=bool))
    return r, s


def coupling_sum_F(R_ru, a_r, p):
    """Sum over r != s of E{|h_r||h_s|} * E{L(phi_r) L(phi_s)}.

    Pairs sharing a correlation magnitude share one set of phase-lag moments,
    so the work scales with the number of distinct |rho| values rather than
    with N**2.
    """
    R_ru = np.asarray(R_ru)
    N = R_ru.shape[0]
    if N < 2:
        return 0.0
    angles = np.angle(np.asarray(a_r))
    r_idx, s_idx = _off_diagonal(N)
    rho = R_ru[r_idx, s_idx].astype(complex)
    mag = np.abs(rho)
    if mag.max() > 1.0 - pdl.RHO_CUTOFF:
        raise DomainError(
            f"correlation magnitude {mag.max():.6g} is above 1 - "
            f"{pdl.RHO_CUTOFF}; use F_fully_correlated")
    lag = angles[r_idx] - angles[s_idx] - np.angle(rho)
    moments = np.array([pair_magnitude_moment(min(m * m, 1.0)) for m in mag])
    if p.lossless:
        return float(np.sum(moments))

    total = 0.0
    keys, inverse = np.unique(np.round(mag, 14), return_inverse=True)
    for j, r in enumerate(keys):
        sel = inverse == j
        if r == 0.0:
            total += pdl.mu1(p) ** 2 * np.sum(moments[sel])
            continue
        m = pdl.phase_difference_moments(float(r))
        power = pdl.loss_fourier_power(p, m.size - 1)
        weights = power[1:] * m[1:]
        k = np.arange(1, m.size)
        l_rs = power[0] + 2.0 * np.cos(np.outer(lag[sel], k)) @ weights
        total += float(np.sum(moments[sel] * l_rs))
    return total


@lru_cache(maxsize=256)
def magnitude_weighted_lag_moments(r):
    """W_k = E{|h_r||h_s| cos(k (psi_r - psi_s - angle(rho)))} for |rho| = r.

    The coupling term above treats magnitudes and phases as independent, i.e.
    replaces W_k by W_0 * m_k. For 0 < r < 1 they are not: large magnitudes
    favour phase lags near angle(rho). Here the magnitude-weighted lag density
    ``(1-r^2)^2/(4 pi) * int_0^pi sin^2 t / (1 - r cos(lag) sin t)^3 dt`` is
    integrated against cos(k lag) with the periodic trapezoid rule.
    """
    if not 0.0 <= r < 1.0:
        raise DomainError(f"need 0 <= |rho| < 1, got {r!r}")
    if r == 0.0:
        return np.array([math.pi / 4.0])
    width = math.acosh(1.0 / r)
    n = 256
    while n * width < 2 * 45.0:
        n *= 2
    lag = 2.0 * math.pi * np.arange(n) / n
    beta = r * np.cos(lag)
    # Gauss-Legendre on [0, pi/2] and [pi/2, pi]; the peak sits at t = pi/2
    nodes = max(200, int(40.0 / math.sqrt(1.0 - r)))
    x, wts = np.polynomial.legendre.leggauss(nodes)
    t = np.concatenate([(x + 1) * math.pi / 4, (x + 3) * math.pi / 4])
    wt = np.concatenate([wts, wts]) * math.pi / 4
    sin_t = np.sin(t)
    inner = (sin_t ** 2 / (1.0 - np.outer(beta, sin_t)) ** 3) @ wt
    density = (1.0 - r * r) ** 2 / (4.0 * math.pi) * inner
    W = (2.0 * math.pi / n) * np.fft.rfft(density).real
    W.flags.writeable = False
    keep = np.nonzero(np.abs(W) > 1e-17)[0]
    return W[: keep[-1] + 1]


def coupling_sum_F_joint(R_ru, a_r, p):
    """Coupling sum with the magnitude/phase dependence kept.

    Evaluates sum_{r != s} E{|h_r||h_s| L(phi_r) L(phi_s)} without splitting
    it into E{|h_r||h_s|} E{L L}. Agrees with :func:`coupling_sum_F` when
    the loss is absent or the pair is uncorrelated.
    """
    R_ru = np.asarray(R_ru)
    N = R_ru.shape[0]
    if N < 2:
        return 0.0
    angles = np.angle(np.asarray(a_r))
    r_idx, s_idx = _off_diagonal(N)
    rho = R_ru[r_idx, s_idx].astype(complex)
    mag = np.abs(rho)
    if mag.max() > 1.0 - pdl.RHO_CUTOFF:
        raise DomainError(
            f"correlation magnitude {mag.max():.6g} is above 1 - {pdl.RHO_CUTOFF}")
    lag = angles[r_idx] - angles[s_idx] - np.angle(rho)
    total = 0.0
    keys, inverse = np.unique(np.round(mag, 14), return_inverse=True)
    for j, r in enumerate(keys):
        sel = inverse == j
        W = magnitude_weighted_lag_moments(float(r))
        power = pdl.loss_fourier_power(p, W.size - 1)
        k = np.arange(1, W.size)
        pair = power[0] * W[0] + 2.0 * np.cos(np.outer(lag[sel], k)) @ (power[1:] * W[1:])
        total += float(np.sum(pair))
    return total


def F_fully_correlated(a_r, p):
    """Coupling sum when every element pair is perfectly correlated.

    Each ordered pair contributes (1/2pi) * int L(w + a_r) L(w + a_s) dw. The
    integral depends on the pair only through |cos((a_r - a_s)/2)|, so equal
    lags are evaluated once.
    """
    angles = np.angle(np.asarray(a_r))
    N = angles.size
    if N < 2:
        return 0.0
    if p.lossless:
        return float(N * (N - 1))
    r_idx, s_idx = _off_diagonal(N)
    lag = np.abs(np.angle(np.exp(1j * (angles[r_idx] - angles[s_idx]))))
    keys, counts = np.unique(np.round(lag, 12), return_counts=True)
    total = 0.0
    for key, count in zip(keys, counts):
        total += count * pdl.loss_product_integral(float(key), 0.0, p)
    return total / (2.0 * math.pi)


def _route(R_ru):
    off = ~np.eye(R_ru.shape[0], dtype=bool)
    vals = np.abs(R_ru[off])
    if vals.size == 0 or np.all(vals == 0.0):
        return ROUTE_UNCORRELATED
    if np.all(np.abs(R_ru[off] - 1.0) < 1e-12):
        return ROUTE_FULL
    return ROUTE_GENERAL


def mean_snr(s, matrices=None, coupling="theorem"):
    """Mean SNR of scenario ``s`` as a :class:`MeanSnrBreakdown`.

    The coupling term is routed by the RIS correlation matrix: identity uses
    the uncorrelated closed form, all-ones the fully correlated one, and
    anything else the general pairwise sum (which requires every |rho_rs|
    to stay below 1 - 1e-3). ``coupling="joint"`` swaps the general sum for
    :func:`coupling_sum_F_joint`; the two extremes are unaffected.
    """
    if coupling not in ("theorem", "joint"):
        raise ValueError(f"unknown coupling {coupling!r}")
    mats = matrices if matrices is not None else scenario_matrices(s)
    g, gains, p = s.geometry, s.gains, s.loss
    M, N = g.M, g.N
    m1, m2 = pdl.mu1(p), pdl.mu2(p)

    route = _route(mats.R_ru)
    if route == ROUTE_UNCORRELATED:
        F = F_uncorrelated(N, m1)
    elif route == ROUTE_FULL:
        F = F_fully_correlated(mats.a_r, p)
    elif coupling == "joint":
        F = coupling_sum_F_joint(mats.R_ru, mats.a_r, p)
    else:
        F = coupling_sum_F(mats.R_ru, mats.a_r, p)

    norm = float(np.linalg.norm(mats.sqrt_Rd @ mats.a_b))
    tau = s.tau_bar
    direct = tau * gains.beta_d * M
    cross = tau * math.sqrt(gains.beta_br * gains.beta_d * gains.beta_ru) * \
        norm * N * m1 * math.pi / 2.0
    ris = tau * gains.beta_ru * gains.beta_br * M * (N * m2 + F)
    return MeanSnrBreakdown(direct, cross, ris, F, route)


def lossless(s):
    return replace(s, loss=s.loss.replace(l_min=1.0))


def mu1_scaling_approximation(s, matrices=None):
    """Rule of thumb: lossless mean SNR with every L(phi_n) replaced by mu1.

    The cross term scales with mu1 and the RIS term with mu1**2.
    """
    base = mean_snr(lossless(s), matrices)
    m1 = pdl.mu1(s.loss)
    return base.term_direct + m1 * base.term_cross + m1 * m1 * base.term_ris


def pdl_penalty(s, matrices=None):
    """Fractional mean-SNR loss caused by PDL, 1 - E{SNR} / E{SNR | lossless}."""
    with_loss = mean_snr(s, matrices).total
    without = mean_snr(lossless(s), matrices).total
    return 1.0 - with_loss / without
