"""Thin wrappers around QUADPACK adaptive Gauss-Kronrod integration."""
import warnings

import numpy as np
from scipy import integrate

from .errors import QuadratureError

ABS_TOL = 1e-9
MAX_SUBDIVISIONS = 500


def adaptive_quad(func, a, b, points=None, abs_tol=ABS_TOL, rel_tol=1e-12,
                  limit=MAX_SUBDIVISIONS):
    """Integrate a real scalar function over [a, b].

    ``points`` are interior break points (kinks, peaks) that the subdivision
    should start from. Raises :class:`QuadratureError` when QUADPACK reports
    that the tolerance was not met within ``limit`` subintervals.
    """
    if points is not None:
        points = sorted(p for p in points if a < p < b)
        if not points:
            points = None
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        value, err, info, *msg = integrate.quad(
            func, a, b, points=points, epsabs=abs_tol, epsrel=rel_tol,
            limit=limit, full_output=1)
    # QUADPACK only appends a message when it stopped abnormally
    if msg and err > abs_tol and err > rel_tol * abs(value):
        raise QuadratureError(
            f"quadrature on [{a}, {b}] failed: {msg[0]!s:.80} "
            f"(error estimate {err:.3e}, {info['last']} subintervals)")
    return value


def adaptive_quad_complex(func, a, b, points=None, abs_tol=ABS_TOL, **kw):
    """Integrate a complex-valued function by splitting real and imaginary parts."""
    re = adaptive_quad(lambda x: func(x).real, a, b, points, abs_tol, **kw)
    im = adaptive_quad(lambda x: func(x).imag, a, b, points, abs_tol, **kw)
    return complex(re, im)


def periodic_quad(func, points=(), abs_tol=ABS_TOL, **kw):
    """Integrate a 2*pi-periodic function over one period.

    Break points are reduced into [0, 2*pi) first.
    """
    pts = {float(np.mod(p, 2 * np.pi)) for p in points}
    return adaptive_quad(func, 0.0, 2 * np.pi, sorted(pts), abs_tol, **kw)


def periodic_quad_2d(func, abs_tol=1e-7, inner_points=(), outer_points=(),
                     **kw):
    """Tensor-product adaptive rule for ``func(s, t)`` over [0, 2*pi]^2.

    ``inner_points`` may be a callable ``t -> sequence`` giving break points
    in ``s`` that depend on the outer variable.
    """
    def inner(t):
        pts = inner_points(t) if callable(inner_points) else inner_points
        return periodic_quad(lambda s: func(s, t), pts, abs_tol / (4 * np.pi),
                             **kw)
    return periodic_quad(inner, outer_points, abs_tol, **kw)
