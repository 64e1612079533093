"""Exponential integral E1 and the moving-limit integral eta(t; c).

E1 uses the power series for x <= 1 and a modified Lentz evaluation of the
continued fraction for x > 1. The continued fraction directly yields
e^x E1(x), which is what the threshold for exponential damping needs when
1/c is large.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy import integrate

from .errors import DomainError

EULER_GAMMA = 0.57721566490153286061

_MAXITER = 10_000
_EPS = 1e-16
_CF_EPS = 4e-16
_TINY = 1e-300


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances for the adaptive-quadrature reference evaluations."""

    abs_tol: float = 1e-14
    rel_tol: float = 1e-13
    max_subdivisions: int = 200

    def __post_init__(self):
        if self.abs_tol <= 0 or self.rel_tol <= 0:
            raise DomainError("quadrature tolerances must be positive")
        if self.max_subdivisions < 1:
            raise DomainError("max_subdivisions must be >= 1")


def _check_positive(x: float) -> float:
    x = float(x)
    if not x > 0:
        raise DomainError(f"argument must be positive, got {x!r}")
    return x


def _series(x: float) -> float:
    # E1(x) = -gamma - ln x - sum_{k>=1} (-x)^k / (k k!)
    total = 0.0
    term = 1.0
    for k in range(1, _MAXITER):
        term *= -x / k
        contrib = term / k
        total += contrib
        if abs(contrib) < _EPS * abs(total):
            break
    return -EULER_GAMMA - math.log(x) - total


def _continued_fraction(x: float) -> float:
    """e^x E1(x) for x > 1 by modified Lentz."""
    b = x + 1.0
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, _MAXITER):
        a = -float(i * i)
        b += 2.0
        d = 1.0 / (a * d + b)
        c = b + a / c
        delta = c * d
        h *= delta
        if abs(delta - 1.0) < _CF_EPS:
            return h
    raise RuntimeError(f"continued fraction for E1({x}) did not converge")


def e1(x: float) -> float:
    """Exponential integral E1(x) = int_x^inf e^{-t}/t dt for x > 0."""
    x = _check_positive(x)
    if x <= 1.0:
        return _series(x)
    return math.exp(-x) * _continued_fraction(x)


def e1_scaled(x: float) -> float:
    """e^x E1(x), finite for arbitrarily large x."""
    x = _check_positive(x)
    if x <= 1.0:
        return math.exp(x) * _series(x)
    return _continued_fraction(x)


def eta(t: float, c: float) -> float:
    """int_{1/c}^{e^{ct}/c} e^{-u}/u du, evaluated as E1(1/c) - E1(e^{ct}/c).

    Both terms are carried in scaled form so that c -> 0 does not overflow:
    eta = e^{-1/c} [e1_scaled(1/c) - e^{(1 - e^{ct})/c} e1_scaled(e^{ct}/c)].
    The returned value itself may underflow to 0 when 1/c exceeds ~745; use
    :func:`eta_scaled` for the factor e^{1/c} eta.
    """
    return math.exp(-1.0 / _check_positive(c)) * eta_scaled(t, c)


def eta_scaled(t: float, c: float) -> float:
    """e^{1/c} * eta(t, c)."""
    c = _check_positive(c)
    t = float(t)
    if t < 0:
        raise DomainError(f"t must be nonnegative, got {t!r}")
    if t == 0.0:
        return 0.0
    lo = 1.0 / c
    growth = math.expm1(c * t)  # e^{ct} - 1
    hi = lo + growth / c
    if not math.isfinite(hi):
        return e1_scaled(lo)
    # e^{lo - hi} underflows cleanly to zero once the upper limit dominates
    return e1_scaled(lo) - math.exp(-growth / c) * e1_scaled(hi)


def e1_quadrature(x: float, spec: QuadratureSpec = QuadratureSpec()) -> float:
    """Reference E1 by adaptive quadrature of the defining integral.

    Independent of the series/continued-fraction path. Substituting
    t = x e^w gives E1(x) = e^{-x} int_0^inf exp(-x (e^w - 1)) dw, a smooth
    integrand with double-exponential decay.
    """
    x = _check_positive(x)

    def f(w):
        return math.exp(-x * math.expm1(w))

    # beyond w_end the integrand is below e^{-60}
    w_end = math.log1p(60.0 / x)
    knee = math.log1p(1.0 / x)
    val, _ = integrate.quad(
        f, 0.0, w_end, points=[knee], epsabs=spec.abs_tol, epsrel=spec.rel_tol,
        limit=spec.max_subdivisions,
    )
    return math.exp(-x) * val
