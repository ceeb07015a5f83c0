import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from rispdl import specfun
from rispdl.errors import ConvergenceError, DomainError


# ---------------------------------------------------------------- ln_gamma, beta

@pytest.mark.parametrize("x, expected", [(1.0, 0.0), (2.0, 0.0),
                                         (0.5, 0.5 * math.log(math.pi))])
def test_ln_gamma_examples(x, expected):
    assert specfun.ln_gamma(x) == pytest.approx(expected, abs=1e-14)


def test_ln_gamma_half_against_gamma_integral():
    val, _ = quad(lambda t: t ** -0.5 * math.exp(-t), 0, np.inf)
    assert math.log(val) == pytest.approx(specfun.ln_gamma(0.5), rel=1e-10)


@pytest.mark.parametrize("x", np.geomspace(1e-3, 1e4, 25))
def test_ln_gamma_against_mpmath(x):
    ref = float(mpmath.loggamma(mpmath.mpf(x)))
    assert specfun.ln_gamma(x) == pytest.approx(ref, rel=1e-12, abs=1e-14)


@pytest.mark.parametrize("bad", [0.0, -1.0, math.inf, math.nan])
def test_ln_gamma_domain(bad):
    with pytest.raises(DomainError):
        specfun.ln_gamma(bad)


def _beta_quad(z, w):
    return quad(lambda t: t ** (z - 1) * (1 - t) ** (w - 1), 0, 1, limit=200)[0]


@pytest.mark.parametrize("z, w, expected", [(0.5, 0.5, math.pi), (1.0, 1.0, 1.0),
                                            (1.5, 1.5, math.pi / 8)])
def test_beta_examples(z, w, expected):
    assert specfun.beta(z, w) == pytest.approx(expected, rel=1e-12)
    assert _beta_quad(z, w) == pytest.approx(expected, rel=1e-8)


@pytest.mark.parametrize("z, w", [(0.0, 1.0), (1.0, -2.0)])
def test_beta_domain(z, w):
    with pytest.raises(DomainError):
        specfun.beta(z, w)


@given(st.floats(0.01, 50), st.floats(0.01, 50))
def test_beta_symmetric(z, w):
    assert specfun.beta(z, w) == specfun.beta(w, z)


@given(st.floats(0.05, 30), st.floats(0.05, 30))
def test_beta_against_mpmath(z, w):
    assert specfun.beta(z, w) == pytest.approx(float(mpmath.beta(z, w)), rel=1e-10)


@pytest.mark.parametrize("x", [0.5, 1.0, 1.7, 3.2])
def test_beta_duplication_identity(x):
    lhs = specfun.beta(x, x)
    rhs = 2.0 ** (1 - 2 * x) * specfun.beta(0.5, x)
    assert lhs == pytest.approx(rhs, rel=1e-10)


# ---------------------------------------------------------------- scaled beta limits

@pytest.mark.parametrize("power", [1, 2])
def test_scaled_beta_small_alpha_limit(power):
    assert abs(specfun.scaled_beta(1e-6, power) - math.pi) < 1e-4


def test_scaled_beta_large_alpha_first_moment():
    a = 1e4
    assert specfun.scaled_beta(a, 1) == pytest.approx(math.sqrt(math.pi / a), rel=0.01)


def test_scaled_beta_large_alpha_second_moment():
    # 16**a B(2a+1/2, 2a+1/2) is the first-moment factor at 2a
    a = 1e4
    assert specfun.scaled_beta(a, 2) == pytest.approx(
        math.sqrt(math.pi / (2 * a)), rel=0.01)


def test_scaled_beta_large_alpha_second_moment_literal_rate():
    # the literal sqrt(pi/a) rate for the 16**a factor: off by sqrt(2)
    a = 1e4
    assert specfun.scaled_beta(a, 2) == pytest.approx(math.sqrt(math.pi / a), rel=0.01)


@given(st.floats(0, 40))
def test_scaled_beta_decreasing(a):
    assert specfun.scaled_beta(a + 0.1, 1) < specfun.scaled_beta(a, 1)
    assert specfun.scaled_beta(a, 2) <= specfun.scaled_beta(a, 1)


# ---------------------------------------------------------------- sine power integral

def _sine_power_quad(a, b):
    kink = (-0.5 * math.pi - a) % (2 * math.pi)
    return quad(lambda x: (1 + math.sin(x + a)) ** b, 0, 2 * math.pi,
                points=[kink], epsabs=1e-12, epsrel=1e-13, limit=200)[0]


@pytest.mark.parametrize("b", [0.3, 1.2, 2.4, 5.0])
@pytest.mark.parametrize("a", [0.0, 1.0, 2.5])
def test_sine_power_integral_vs_quadrature(a, b):
    assert abs(specfun.sine_power_integral(a, b) - _sine_power_quad(a, b)) < 1e-8


def test_sine_power_integral_examples():
    assert specfun.sine_power_integral(0.7, 0.0) == pytest.approx(2 * math.pi, rel=1e-14)
    assert specfun.sine_power_integral(0.0, 1.0) == pytest.approx(2 * math.pi, rel=1e-14)
    assert specfun.sine_power_integral(1.3, 1.7) == specfun.sine_power_integral(0.0, 1.7)


def test_sine_power_integral_domain():
    with pytest.raises(DomainError):
        specfun.sine_power_integral(0.0, -0.1)


# ---------------------------------------------------------------- pair moment

def _pair_moment_series(z, terms=10_000):
    k = np.arange(terms - 1, dtype=float)
    ratio = ((1.5 + k) / (1.0 + k)) ** 2 * z
    coef = np.concatenate([[1.0], np.cumprod(ratio)])
    return (1 - z) ** 2 * math.fsum(coef)


def test_pair_moment_examples():
    assert specfun.gauss_2f1_pair_moment(0.0) == pytest.approx(1.0, abs=1e-15)
    assert specfun.gauss_2f1_pair_moment(1.0) == pytest.approx(4 / math.pi, rel=1e-15)
    assert specfun.gauss_2f1_pair_moment(0.49) == pytest.approx(
        _pair_moment_series(0.49), rel=1e-12)


@pytest.mark.parametrize("z", [0.01, 0.3, 0.7, 0.9, 0.99, 0.9999])
def test_pair_moment_against_mpmath(z):
    ref = float(mpmath.hyp2f1(-0.5, -0.5, 1, z))
    assert specfun.gauss_2f1_pair_moment(z) == pytest.approx(ref, rel=1e-12)


def test_pair_moment_continuous_at_one():
    assert specfun.gauss_2f1_pair_moment(1 - 1e-12) == pytest.approx(4 / math.pi, rel=1e-9)


@given(st.floats(0, 1), st.floats(0, 1))
def test_pair_moment_bounds_and_monotone(z1, z2):
    lo, hi = sorted((z1, z2))
    f_lo, f_hi = specfun.gauss_2f1_pair_moment(lo), specfun.gauss_2f1_pair_moment(hi)
    assert 1.0 - 1e-14 <= f_lo <= f_hi + 1e-14
    assert f_hi <= 4 / math.pi + 1e-14


@pytest.mark.parametrize("z", [-0.1, 1.01])
def test_pair_moment_domain(z):
    with pytest.raises(DomainError):
        specfun.gauss_2f1_pair_moment(z)


# ---------------------------------------------------------------- complex 2F1

def test_2f1_trivial_cases():
    assert specfun.gauss_2f1_complex(1.3, 2.1, 0.7, 0) == 1
    assert specfun.gauss_2f1_complex(0.0, 2.1, 0.7, 3 + 4j) == 1


@pytest.mark.parametrize("a, b, c, z", [
    (-2.4, 3.4, 1.0, 0.3 + 0.4j),
    (-2.4, 3.4, 1.0, 0.5 + 1.2j),
    (-3.2, 4.2, 1.0, 0.5 - 2.5j),
    (0.7, 1.3, 2.2, -3.0 + 0.5j),
    (1.5, 1.5, 1.0, 0.95 + 0.1j),
    (-0.6, 1.6, 1.0, -0.9),
])
def test_2f1_against_mpmath(a, b, c, z):
    ref = complex(mpmath.hyp2f1(a, b, c, z))
    got = specfun.gauss_2f1_complex(a, b, c, z)
    assert abs(got - ref) <= 1e-8 * abs(ref)


def test_2f1_branch_cut_rejected():
    with pytest.raises(DomainError):
        specfun.gauss_2f1_complex(0.5, 0.5, 1.0, 1.5)


def test_2f1_convergence_error_carries_residual():
    with pytest.raises(ConvergenceError) as info:
        specfun.gauss_2f1_complex(-2.4, 3.4, 1.0, 0.5 + 1.2j, tol=1e-30)
    assert info.value.residual >= 0


def test_2f1_matches_legendre_oracle():
    alpha, gamma = 1.2, math.cos(0.4)
    g2m1 = complex(gamma ** 2 - 1)
    z = (1 - gamma / np.sqrt(g2m1)) / 2
    oracle = specfun.legendre_integral_oracle(gamma, alpha) / (2 * math.pi * g2m1 ** alpha)
    got = specfun.gauss_2f1_complex(-2 * alpha, 2 * alpha + 1, 1.0, z)
    assert abs(got - oracle) <= 1e-6 * abs(oracle)


# ---------------------------------------------------------------- Legendre integral

def test_legendre_oracle_examples():
    assert specfun.legendre_integral_oracle(0.3, 0.0) == pytest.approx(2 * math.pi)
    assert specfun.legendre_integral_oracle(1.0, 1.0) == pytest.approx(3 * math.pi, abs=1e-9)
    assert specfun.legendre_integral_oracle(0.0, 1.0) == pytest.approx(math.pi, abs=1e-9)


@pytest.mark.parametrize("gamma", [-0.8, 0.0, 0.35, 0.99])
@pytest.mark.parametrize("alpha", [1.0, 2.0])
def test_legendre_oracle_real_for_even_powers(gamma, alpha):
    val = specfun.legendre_integral_oracle(gamma, alpha)
    assert abs(val.imag) < 1e-9
    assert val.real >= 0


@pytest.mark.parametrize("gamma", [-0.7, -0.1, 0.2, math.cos(0.4), 0.97])
@pytest.mark.parametrize("alpha", [0.3, 1.2, 1.6, 2.7])
def test_legendre_closed_form_matches_oracle(gamma, alpha):
    closed = specfun.legendre_closed_form(gamma, alpha)
    oracle = specfun.legendre_integral_oracle(gamma, alpha)
    assert abs(closed - oracle) <= 1e-6 * abs(oracle)


def test_legendre_closed_form_edge_rejected():
    with pytest.raises(DomainError):
        specfun.legendre_closed_form(1.0, 1.2)


@settings(max_examples=25, deadline=None)
@given(st.floats(-0.95, 0.95), st.floats(0.05, 3.0))
def test_legendre_closed_form_property(gamma, alpha):
    closed = specfun.legendre_closed_form(gamma, alpha)
    oracle = specfun.legendre_integral_oracle(gamma, alpha)
    assert abs(closed - oracle) <= 1e-6 * max(abs(oracle), 1e-3)
