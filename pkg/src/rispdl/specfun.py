"""Special functions: log-gamma, Beta, Gauss hypergeometric 2F1, sine-power integral.

Everything here is a pure function of its arguments.
"""
import math
from functools import lru_cache

import numpy as np
from scipy.integrate import solve_ivp
from scipy.special import ellipe, ellipk

from .errors import ConvergenceError, DomainError
from .quadrature import adaptive_quad_complex

TWO_PI = 2.0 * math.pi

# |z| below which the 2F1 power series is summed directly
SERIES_RADIUS = 0.7


def ln_gamma(x):
    """Natural log of the gamma function for x > 0."""
    if not x > 0 or not math.isfinite(x):
        raise DomainError(f"ln_gamma requires finite x > 0, got {x!r}")
    return math.lgamma(x)


def ln_beta(z, w):
    if not (z > 0 and w > 0):
        raise DomainError(f"beta requires z, w > 0, got ({z!r}, {w!r})")
    return ln_gamma(z) + ln_gamma(w) - ln_gamma(z + w)


def beta(z, w):
    """Euler Beta function B(z, w) = Gamma(z) Gamma(w) / Gamma(z + w)."""
    return math.exp(ln_beta(z, w))


def scaled_beta(alpha, power=1):
    """Return ``4**(power*alpha) * B((2*power*alpha+1)/2, (2*power*alpha+1)/2)``.

    ``power=1`` gives the factor inside the first loss moment, ``power=2`` the
    one inside the second. Evaluated in the log domain so alpha can be large.
    The value tends to pi as alpha -> 0 and decays like sqrt(pi/(power*alpha)).
    """
    if alpha < 0:
        raise DomainError(f"alpha must be >= 0, got {alpha!r}")
    x = power * alpha + 0.5
    return math.exp(2 * power * alpha * math.log(2.0) + ln_beta(x, x))


def sine_power_integral(a, b):
    """Closed form of the integral of (1 + sin(x + a))**b over one period.

    Equals ``2**(3b+1) * B((2b+1)/2, (2b+1)/2)``; the phase ``a`` drops out.
    """
    if b < 0:
        raise DomainError(f"exponent b must be >= 0, got {b!r}")
    x = b + 0.5
    return math.exp((3 * b + 1) * math.log(2.0) + ln_beta(x, x))


def gauss_2f1_pair_moment(z):
    """(1 - z)**2 * 2F1(3/2, 3/2; 1; z) on 0 <= z <= 1.

    By Euler's transformation this is 2F1(-1/2, -1/2; 1; z), which is
    finite up to z = 1 where it equals 4/pi. It is evaluated through the
    complete elliptic integrals (parameter m = z):
    ``(2/pi) * (2 E(z) - (1 - z) K(z))``.
    """
    z = float(z)
    if not 0.0 <= z <= 1.0:
        raise DomainError(f"argument must lie in [0, 1], got {z!r}")
    if z == 1.0:
        return 4.0 / math.pi
    return (2.0 / math.pi) * (2.0 * ellipe(z) - (1.0 - z) * ellipk(z))


def _series_2f1(a, b, c, z, tol=1e-15, max_terms=5000):
    """Direct Gauss series plus its derivative, for |z| < 1."""
    term = 1.0 + 0j
    total = term
    dterm = 0j
    dtotal = 0j
    for k in range(max_terms):
        ratio = (a + k) * (b + k) / ((c + k) * (k + 1))
        # derivative of z^(k+1) term: (k+1) z^k * coefficient
        dterm = term * ratio * (k + 1)
        term = term * ratio * z
        total += term
        dtotal += dterm
        if term == 0 or (abs(term) < tol * abs(total) and
                         abs(dterm) < tol * max(abs(dtotal), 1e-300)):
            return total, dtotal
    raise ConvergenceError("2F1 power series did not converge", abs(term))


def _continue_2f1(a, b, c, z, rtol):
    """Integrate the hypergeometric ODE from a point inside the disc out to z."""
    direction = z / abs(z)
    z0 = 0.5 * direction
    w0, dw0 = _series_2f1(a, b, c, z0)
    delta = z - z0

    def rhs(t, y):
        s = z0 + t * delta
        w, dw = y
        d2w = (a * b * w - (c - (a + b + 1) * s) * dw) / (s * (1 - s))
        return [dw * delta, d2w * delta]

    def run(tol):
        sol = solve_ivp(rhs, (0.0, 1.0), [w0, dw0], method="DOP853",
                        rtol=tol, atol=tol * 1e-3 * max(abs(w0), 1.0))
        if not sol.success:
            raise ConvergenceError(f"2F1 continuation failed: {sol.message}")
        return sol.y[0, -1]

    fine = run(rtol)
    coarse = run(rtol * 100)
    residual = abs(fine - coarse) / max(abs(fine), 1e-300)
    return fine, residual


def gauss_2f1_complex(a, b, c, z, tol=1e-9):
    """Gauss hypergeometric function 2F1(a, b; c; z) for complex z.

    The series is summed directly for |z| <= 0.7. Outside that disc the
    function is continued numerically along the ray from 0.5*z/|z| to z by
    integrating the hypergeometric differential equation; the principal
    branch (cut along [1, inf)) is used. A ``ConvergenceError`` carries the
    residual estimate when the continuation cannot meet ``tol``.
    """
    z = complex(z)
    if c <= 0 and float(c).is_integer():
        raise DomainError(f"c must not be a non-positive integer, got {c!r}")
    if z == 0 or a == 0 or b == 0:
        return 1.0 + 0j
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise DomainError(f"non-finite argument {z!r}")
    if abs(z) <= SERIES_RADIUS:
        return _series_2f1(a, b, c, z)[0]
    if z.imag == 0 and z.real >= 1:
        raise DomainError("real z >= 1 lies on the branch cut")
    value, residual = _continue_2f1(a, b, c, z, rtol=1e-12)
    if residual > tol:
        raise ConvergenceError("2F1 continuation missed tolerance", residual)
    return value


def legendre_closed_form(gamma, alpha):
    """Closed form of the integral of (gamma - cos u)**(2*alpha) over a period.

    ``2*pi*(gamma**2 - 1)**alpha * 2F1(-2a, 2a+1; 1; (1 - g1)/2)`` with
    ``g1 = gamma/sqrt(gamma**2 - 1)``; all powers on the principal branch.
    Undefined for |gamma| = 1.
    """
    if not -1.0 < gamma < 1.0:
        raise DomainError(f"closed form needs |gamma| < 1, got {gamma!r}")
    g2m1 = complex(gamma * gamma - 1.0)
    g1 = gamma / np.sqrt(g2m1)
    hyp = gauss_2f1_complex(-2 * alpha, 2 * alpha + 1, 1.0, (1 - g1) / 2)
    return TWO_PI * g2m1 ** alpha * hyp


@lru_cache(maxsize=4096)
def legendre_integral_oracle(gamma, alpha):
    """Integral of (gamma - cos u)**(2*alpha) over [0, 2*pi] by quadrature.

    Negative bases use the principal branch of the complex power, so the
    result is complex for non-integer 2*alpha.
    """
    if not -1.0 <= gamma <= 1.0:
        raise DomainError(f"gamma must lie in [-1, 1], got {gamma!r}")
    if alpha < 0:
        raise DomainError(f"alpha must be >= 0, got {alpha!r}")
    if alpha == 0:
        return complex(TWO_PI)
    p = 2.0 * alpha
    root = math.acos(gamma)
    return adaptive_quad_complex(
        lambda u: complex(gamma - math.cos(u)) ** p, 0.0, TWO_PI,
        points=[root, TWO_PI - root])
