"""Phase-dependent reflection loss of RIS elements.

The amplitude of the wave reflected by an element depends on the phase shift
``phi`` it applies::

    L(phi) = (1 - l_min) * ((sin(phi + theta) + 1) / 2)**alpha + l_min

This module provides the loss itself, its first two moments under a uniform
phase, the joint density of two correlated Rayleigh phases, and the pairwise
expectation E{L(phi_r) L(phi_s)}.
"""
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import specfun
from .errors import DomainError
from .quadrature import periodic_quad, periodic_quad_2d

TWO_PI = 2.0 * math.pi

# |rho| above which the pair expectation is not evaluated (use the
# fully-correlated closed form instead)
RHO_CUTOFF = 1e-3
# |sin(2 pi alpha)| below which the closed-form product integral is singular
SINGULAR_ALPHA_TOL = 1e-6
# 1 - gamma**2 below which the Legendre closed form loses its meaning
GAMMA_EDGE_TOL = 1e-10


@dataclass(frozen=True)
class LossParams:
    """Parameters of the phase-dependent loss model.

    l_min is the smallest reflection amplitude, alpha the steepness of the
    loss dip and theta its phase offset in radians (stored modulo 2*pi).
    """
    l_min: float = 0.5
    alpha: float = 1.2
    theta: float = 0.2

    def __post_init__(self):
        if not 0.0 <= self.l_min <= 1.0:
            raise DomainError(f"l_min must lie in [0, 1], got {self.l_min!r}")
        if not (self.alpha >= 0.0 and math.isfinite(self.alpha)):
            raise DomainError(f"alpha must be finite and >= 0, got {self.alpha!r}")
        if not math.isfinite(self.theta):
            raise DomainError(f"theta must be finite, got {self.theta!r}")
        object.__setattr__(self, "l_min", float(self.l_min))
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "theta", float(math.fmod(self.theta, TWO_PI) % TWO_PI))

    def replace(self, **changes):
        fields = {"l_min": self.l_min, "alpha": self.alpha, "theta": self.theta}
        fields.update(changes)
        return LossParams(**fields)

    @property
    def lossless(self):
        return self.l_min == 1.0 or self.alpha == 0.0


def loss(phi, p):
    """Reflection amplitude L(phi) in [l_min, 1]; accepts scalars or arrays."""
    if p.lossless:
        return np.ones_like(phi, dtype=float) if np.ndim(phi) else 1.0
    # scalars go through the array path too, so both agree to the last bit
    x = np.atleast_1d(np.asarray(phi, dtype=float))
    base = 0.5 * (np.sin(x + p.theta) + 1.0)
    # sin can overshoot -1 by an ulp
    base = np.clip(base, 0.0, 1.0)
    out = (1.0 - p.l_min) * base ** p.alpha + p.l_min
    return out.reshape(np.shape(phi)) if np.ndim(phi) else float(out[0])


def loss_vector(phases, p):
    """Diagonal of the loss matrix for a vector of element phases."""
    return np.asarray(loss(np.asarray(phases, dtype=float), p), dtype=float)


def kink_points(p, shift=0.0):
    """Phases x where L(x + shift) hits its minimum (non-smooth for alpha < 1)."""
    return [(-0.5 * math.pi - p.theta - shift) % TWO_PI]


def c1_c2(alpha):
    """Scaled Beta factors (c1, c2) entering the loss moments.

    ``c1 = 4**a B(a+1/2, a+1/2)/pi`` and ``c2 = 16**a B(2a+1/2, 2a+1/2)/pi``.
    Both equal 1 at alpha = 0 and decrease towards 0.
    """
    return (specfun.scaled_beta(alpha, 1) / math.pi,
            specfun.scaled_beta(alpha, 2) / math.pi)


def mu1(p):
    """E{L(phi)} for phi uniform on [0, 2*pi)."""
    if p.lossless:
        return 1.0
    c1, _ = c1_c2(p.alpha)
    return (1.0 - p.l_min) * c1 + p.l_min


def mu2(p):
    """E{L(phi)**2} for phi uniform on [0, 2*pi)."""
    if p.lossless:
        return 1.0
    c1, c2 = c1_c2(p.alpha)
    a1, a2 = 1.0 - p.l_min, p.l_min
    return 2.0 * a1 * a2 * c1 + a2 * a2 + a1 * a1 * c2


def loss_fourier_power(p, kmax):
    """|l_k|**2 for k = 0..kmax, where L(x) = sum_k l_k exp(i k x).

    Uses ``|sin(v/2)|**(2a) = sum_k b_k exp(i k v)`` with
    ``b_0 = c1`` and ``b_{k+1} = -b_k (a - k)/(a + k + 1)``. The phase offset
    only rotates the coefficients, so it never enters.
    """
    power = np.zeros(kmax + 1)
    if p.lossless:
        power[0] = 1.0
        return power
    a = p.alpha
    k = np.arange(kmax)
    ratios = -(a - k) / (a + k + 1.0)
    b = np.empty(kmax + 1)
    b[0] = specfun.scaled_beta(a, 1) / math.pi
    b[1:] = b[0] * np.cumprod(ratios)
    a1 = 1.0 - p.l_min
    power[:] = (a1 * b) ** 2
    power[0] = (a1 * b[0] + p.l_min) ** 2
    return power


def _check_rho(rho):
    rho = complex(rho)
    if abs(rho) >= 1.0:
        raise DomainError(f"phase density needs |rho| < 1, got |rho|={abs(rho)!r}")
    return rho


def phase_pair_density(x, rho):
    """Joint density g(x) of two Rayleigh phases at lag x = angle_r - angle_s.

    ``rho`` is the normalised correlation E{h_r conj(h_s)}. The density
    integrates to 1 over [0, 2*pi]^2 and is nonnegative.
    """
    rho = _check_rho(rho)
    r = abs(rho)
    v = r * np.cos(np.asarray(x, dtype=float) - np.angle(-rho))
    one_m_v2 = 1.0 - v * v
    g = (1.0 - r * r) / (4 * math.pi ** 2) * (
        1.0 / one_m_v2 - v * np.arccos(v) / one_m_v2 ** 1.5)
    return g if np.ndim(g) else float(g)


@lru_cache(maxsize=256)
def phase_difference_moments(r):
    """Real trigonometric moments m_k = E{cos(k (psi_r - psi_s - angle(rho)))}.

    ``r = |rho|``. Computed by the periodic trapezoid rule (spectrally
    accurate, the density being analytic in a strip of half-width
    ~sqrt(2(1-r))) and truncated once the moments fall below 1e-17.
    """
    if not 0.0 <= r < 1.0:
        raise DomainError(f"need 0 <= |rho| < 1, got {r!r}")
    if r == 0.0:
        return np.ones(1)
    width = math.acosh(1.0 / r) if r > 1e-12 else 10.0
    n = 256
    while n * width < 2 * 45.0:
        n *= 2
    d = TWO_PI * np.arange(n) / n
    g = phase_pair_density(d, r)        # real positive rho peaks at lag 0
    m = (4 * math.pi ** 2 / n) * np.fft.rfft(g).real
    m.flags.writeable = False
    keep = np.nonzero(np.abs(m) > 1e-17)[0]
    return m[: keep[-1] + 1] if keep.size else m[:1]


def _pair_expectation_spectral(delta, rho, p):
    r = abs(rho)
    if r == 0.0:
        return mu1(p) ** 2
    m = phase_difference_moments(r)
    power = loss_fourier_power(p, m.size - 1)
    k = np.arange(1, m.size)
    lag = delta - np.angle(rho)
    return float(power[0] + 2.0 * np.sum(power[1:] * m[1:] * np.cos(k * lag)))


def _pair_expectation_quadrature(angle_r, angle_s, rho, p, abs_tol=1e-7):
    peak = np.angle(rho)

    def integrand(s, t):
        return loss(s + angle_r, p) * loss(t + angle_s, p) * \
            phase_pair_density(t - s, rho)

    return periodic_quad_2d(
        integrand, abs_tol=abs_tol,
        inner_points=lambda t: kink_points(p, angle_r) + [t - peak, t - peak + math.pi],
        outer_points=kink_points(p, angle_s))


def loss_pair_expectation(angle_r, angle_s, rho, p, method="spectral"):
    """E{L(phi_r) L(phi_s)} under the optimal lossless RIS phases.

    ``angle_r``/``angle_s`` are the RIS steering-vector phases of the two
    elements and ``rho = (R_ru)_rs``. ``method="spectral"`` sums the Fourier
    series of the loss against the trigonometric moments of the phase-lag
    density; ``method="quadrature"`` integrates the joint density directly
    on [0, 2*pi]^2 (slow, tolerance 1e-7).
    """
    rho = complex(rho)
    if abs(rho) > 1.0 - RHO_CUTOFF:
        raise DomainError(
            f"|rho|={abs(rho):.6g} exceeds 1 - {RHO_CUTOFF}; use the fully "
            "correlated closed form")
    if p.lossless:
        return 1.0
    if method == "spectral":
        return _pair_expectation_spectral(angle_r - angle_s, rho, p)
    if method == "quadrature":
        return _pair_expectation_quadrature(angle_r, angle_s, rho, p)
    raise ValueError(f"unknown method {method!r}")


def _dip_power_product_quad(a, b, p):
    """Integral over a period of ((1+sin(x+a+theta))/2)**alpha * (same with b)."""
    def f(x):
        return (0.5 * (math.sin(x + a + p.theta) + 1.0)) ** p.alpha * \
            (0.5 * (math.sin(x + b + p.theta) + 1.0)) ** p.alpha
    return periodic_quad(f, kink_points(p, a) + kink_points(p, b))


def loss_product_integral(a, b, p):
    """Integral of L(x + a) L(x + b) over x in [0, 2*pi].

    Split into the cross terms (closed form through c1), the constant term and
    the product of the two dips. The latter reduces to
    ``4**-alpha * int |gamma - cos u|**(2 alpha) du`` with
    ``gamma = cos((a - b)/2)``, obtained from the real and imaginary parts of
    the principal-branch Legendre integral. Near half-integer alpha (where
    that linear system is singular) and at |gamma| = 1 the dip product is
    integrated numerically instead.
    """
    if p.lossless:
        return TWO_PI
    a1, a2 = 1.0 - p.l_min, p.l_min
    c1, _ = c1_c2(p.alpha)
    cross = 2.0 * a1 * a2 * TWO_PI * c1
    const = TWO_PI * a2 * a2
    if a1 == 0.0:
        return const
    gamma = math.cos(0.5 * (a - b))
    if abs(math.sin(TWO_PI * p.alpha)) < SINGULAR_ALPHA_TOL or \
            1.0 - gamma * gamma < GAMMA_EDGE_TOL:
        dip = _dip_power_product_quad(a, b, p)
    else:
        # the integral is even in gamma, so |gamma| makes a better cache key
        dip = _dip_power_product_closed(round(abs(gamma), 15), p.alpha)
    return cross + const + a1 * a1 * dip


@lru_cache(maxsize=8192)
def _dip_power_product_closed(gamma, alpha):
    big_i = specfun.legendre_closed_form(gamma, alpha)
    s2, c2 = math.sin(TWO_PI * alpha), math.cos(TWO_PI * alpha)
    return 4.0 ** -alpha * (big_i.real + big_i.imag * (1.0 - c2) / s2)
