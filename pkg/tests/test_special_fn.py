"""E1, its scaled form and eta, each checked against an independent oracle:
adaptive quadrature of the defining integral, mpmath at 30 digits, or the
asymptotic series."""

import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from pjblowup.errors import DomainError
from pjblowup.special_fn import (
    QuadratureSpec,
    e1,
    e1_quadrature,
    e1_scaled,
    eta,
    eta_scaled,
)

mpmath.mp.dps = 30

XS = np.logspace(-6, math.log10(700.0), 60)


def mp_e1(x):
    return float(mpmath.e1(mpmath.mpf(x)))


def test_e1_at_one_matches_quadrature_oracle():
    assert e1(1.0) == pytest.approx(0.21938393439552, abs=1e-12)
    assert e1(1.0) == pytest.approx(e1_quadrature(1.0), abs=1e-12)


@pytest.mark.parametrize("x", XS)
def test_e1_against_quadrature_oracle(x):
    assert e1(x) == pytest.approx(e1_quadrature(x), rel=1e-10)


@pytest.mark.parametrize("x", XS)
def test_e1_against_mpmath(x):
    assert e1(x) == pytest.approx(mp_e1(x), rel=1e-12)


def test_quadrature_oracle_plain_integral():
    # direct quad of e^{-t}/t on [x, inf) as a second opinion on the oracle
    for x in (0.3, 1.0, 4.0):
        direct, _ = integrate.quad(lambda t: math.exp(-t) / t, x, math.inf, epsabs=1e-14, epsrel=1e-13)
        assert e1_quadrature(x) == pytest.approx(direct, rel=1e-10)


@settings(max_examples=200, deadline=None)
@given(st.floats(min_value=1e-6, max_value=700.0))
def test_e1_bracketing(x):
    # 1/2 e^{-x} ln(1 + 2/x) < E1(x) < e^{-x} ln(1 + 1/x) <= e^{-x}/x
    lower = 0.5 * math.exp(-x) * math.log1p(2.0 / x)
    upper = math.exp(-x) * math.log1p(1.0 / x)
    val = e1(x)
    assert val > 0
    assert lower <= val <= upper <= math.exp(-x) / x
    if upper - lower > 1e-12 * upper:
        assert lower < val < upper


def test_naive_lower_bracket_is_actually_an_upper_bound():
    # e^{-x} ln(1 + 1/x) sits above E1, not below it
    assert math.exp(-1.0) * math.log(2.0) > e1(1.0)


def test_e1_decreasing():
    assert e1(2.0) / e1(1.0) < 1.0
    vals = [e1(x) for x in XS]
    assert all(b < a for a, b in zip(vals, vals[1:]))


@pytest.mark.parametrize("bad", [0.0, -1.0, -1e-300, math.nan])
def test_domain_errors(bad):
    with pytest.raises(DomainError):
        e1(bad)
    with pytest.raises(DomainError):
        e1_scaled(bad)


def test_e1_scaled_at_100():
    # asymptotic series 1/x - 1/x^2 + 2/x^3 - 6/x^4 + ... truncated early
    x = 100.0
    asym = sum((-1) ** k * math.factorial(k) / x ** (k + 1) for k in range(8))
    assert e1_scaled(x) == pytest.approx(0.009901942, abs=1e-8)
    assert e1_scaled(x) == pytest.approx(asym, abs=1e-12)
    assert e1_scaled(x) == pytest.approx(float(mpmath.exp(x) * mpmath.e1(x)), rel=1e-13)


def test_e1_scaled_at_one_is_product():
    assert e1_scaled(1.0) == pytest.approx(math.e * e1_quadrature(1.0), abs=1e-9)
    assert e1_scaled(1.0) == pytest.approx(0.596347, abs=1e-6)


@pytest.mark.parametrize("x", [10.0, 30.0, 1e2, 1e3, 1e4, 1e6])
def test_e1_scaled_leading_asymptotics(x):
    assert abs(x * e1_scaled(x) - 1.0) <= 2.0 / x


def test_e1_scaled_agrees_with_unscaled_where_computable():
    for x in XS:
        assert e1_scaled(x) == pytest.approx(math.exp(x) * e1(x), rel=1e-10)


def test_e1_scaled_no_overflow_and_monotone():
    xs = np.logspace(-6, 6, 200)
    vals = [e1_scaled(x) for x in xs]
    assert all(math.isfinite(v) and v > 0 for v in vals)
    assert all(b < a for a, b in zip(vals, vals[1:]))
    for x, v in zip(xs, vals):
        assert 1.0 / (x + 1.0) < v < 1.0 / x


def test_eta_zero_time():
    for c in (0.01, 0.5, 1.0, 7.0):
        assert eta(0.0, c) == 0.0


def test_eta_at_ln2_against_quadrature():
    want = e1_quadrature(1.0) - e1_quadrature(2.0)
    assert eta(math.log(2.0), 1.0) == pytest.approx(want, abs=1e-12)
    # and against the moving-limit definition, integrated directly
    direct, _ = integrate.quad(lambda u: math.exp(-u) / u, 1.0, 2.0, epsabs=1e-15)
    assert eta(math.log(2.0), 1.0) == pytest.approx(direct, abs=1e-12)


def test_eta_limit():
    assert abs(eta(50.0, 1.0) - e1(1.0)) <= 1e-12


def test_eta_identity_grid():
    for t in np.linspace(0.0, 3.0, 10):
        for c in np.linspace(0.05, 4.0, 10):
            lhs = eta(t, c) + e1(math.exp(c * t) / c)
            assert lhs == pytest.approx(e1(1.0 / c), abs=1e-12)


def test_eta_monotone_and_concave():
    for c in (0.1, 1.0, 3.0):
        t = np.linspace(0.0, 4.0, 81)
        y = np.array([eta(s, c) for s in t])
        assert np.all(np.diff(y) >= 0)
        assert np.all(np.diff(y, 2) <= 1e-15)


def test_eta_scaled_small_c():
    # e^{1/c} eta for c = 0.01 would overflow if formed as a product
    c = 0.01
    val = eta_scaled(1.0, c)
    assert math.isfinite(val)
    want = float(mpmath.exp(1 / mpmath.mpf(c)) * (mpmath.e1(1 / mpmath.mpf(c)) - mpmath.e1(mpmath.exp(c) / c)))
    assert val == pytest.approx(want, rel=1e-10)


@pytest.mark.parametrize("t, c", [(-0.1, 1.0), (1.0, 0.0), (1.0, -2.0)])
def test_eta_domain_errors(t, c):
    with pytest.raises(DomainError):
        eta(t, c)


def test_quadrature_spec_validation():
    QuadratureSpec(1e-12, 1e-12, 10)
    with pytest.raises(DomainError):
        QuadratureSpec(abs_tol=0.0)
    with pytest.raises(DomainError):
        QuadratureSpec(rel_tol=-1.0)
    with pytest.raises(DomainError):
        QuadratureSpec(max_subdivisions=0)
