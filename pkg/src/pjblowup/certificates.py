"""Blowup certificates for H(t) = u(0, t).

Every certificate carries an upper bound ``t_star`` on the breakdown time;
none of them claims the bound is sharp.

Comparison machinery (k = n/(n-1)):

    g(t)   = k int_0^t exp(-int_0^s alpha) ds
    1/H(t) >= (1 + H0 g(t)) / (H0 g'(t))        while H < 0

so H escapes to -inf no later than the root of 1 + H0 g(t) = 0. The
Riccati oracle integrates h' = -alpha h - k h^2 numerically and hits the
same root.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np
from scipy import integrate

from . import rk
from .damping import DampingProfile
from .errors import DomainError
from .special_fn import e1_scaled, eta_scaled

THEOREM_IDS = ("yuen_2_1", "bounded_3_1", "unbounded_4_1", "riccati_numeric")


class NoBlowupDetected(RuntimeError):
    """The Riccati comparison ODE stayed bounded up to the horizon."""


@dataclass(frozen=True)
class BlowupCertificate:
    theorem_id: str
    applicable: bool
    h0: float
    threshold: float
    t_star: Optional[float] = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.theorem_id not in THEOREM_IDS:
            raise ValueError(f"unknown theorem id {self.theorem_id!r}")
        if self.applicable != (self.t_star is not None):
            raise ValueError("t_star must be present exactly when the certificate applies")
        if self.t_star is not None and not self.t_star > 0:
            raise ValueError(f"t_star must be positive, got {self.t_star}")

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


@dataclass(frozen=True)
class ComparisonContext:
    n: int
    h0: float
    profile: DampingProfile

    def __post_init__(self):
        _check_n(self.n)
        if not self.h0 < 0:
            raise DomainError(f"comparison needs h0 < 0, got {self.h0}")

    @property
    def k(self) -> float:
        return self.n / (self.n - 1)


def _check_n(n) -> int:
    if int(n) != n or n < 2:
        raise DomainError(f"n must be an integer >= 2, got {n!r}")
    return int(n)


# theorems -----------------------------------------------------------------


def certify_yuen(u0_at_0: float) -> BlowupCertificate:
    """Undamped n = 2 case: blowup no later than 1/(2 U0), U0 = -u0(0) > 0."""
    h0 = float(u0_at_0)
    U0 = -h0
    ok = U0 > 0
    return BlowupCertificate(
        "yuen_2_1", ok, h0, 0.0, 1.0 / (2.0 * U0) if ok else None,
        {"n": 2, "damping": "zero", "U0": U0},
    )


def bounded_threshold(M: float, n: int) -> float:
    return M * (1 - n) / n


def certify_bounded(h0: float, M: float, n: int) -> BlowupCertificate:
    """Damping bounded by M: blowup if h0 < M(1-n)/n, no later than
    t* = -(1/M) ln(1 - M(1-n)/(n h0))."""
    n = _check_n(n)
    M = float(M)
    if not M > 0:
        raise DomainError(f"M must be positive, got {M}")
    h0 = float(h0)
    threshold = bounded_threshold(M, n)
    params = {"n": n, "M": M}
    if not h0 < threshold:
        return BlowupCertificate("bounded_3_1", False, h0, threshold, None, params)
    shift = M * (n - 1) / (n * h0)  # = -M(1-n)/(n h0), in (-1, 0)
    assert -1.0 < shift < 0.0, shift
    t_star = -math.log1p(shift) / M
    return BlowupCertificate("bounded_3_1", True, h0, threshold, t_star, params)


def unbounded_threshold(c: float, n: int) -> float:
    # -c(n-1) / (n e^{1/c} E1(1/c)), with the product taken in scaled form
    return -c * (n - 1) / (n * e1_scaled(1.0 / c))


def phi_eta(t: float, c: float, n: int) -> float:
    """phi(n) eta(t) = n e^{1/c} eta(t) / (c (n-1)), overflow-free."""
    return n * eta_scaled(t, c) / (c * (n - 1))


def unbounded_bound_function(t: float, h0: float, c: float, n: int) -> float:
    """1 + h0 phi(n) eta(t); the certified bound on 1/H vanishes at its root."""
    return 1.0 + h0 * phi_eta(t, c, n)


def certify_unbounded(h0: float, c: float, n: int, tol: float = 1e-12) -> BlowupCertificate:
    """Damping alpha = e^{ct}: blowup if h0 < -c(n-1)/(n e^{1/c} E1(1/c)).

    t_star is the unique root of 1 + h0 phi(n) eta(t) = 0, found by
    bisection on a doubling bracket.
    """
    n = _check_n(n)
    c = float(c)
    if not c > 0:
        raise DomainError(f"c must be positive, got {c}")
    h0 = float(h0)
    threshold = unbounded_threshold(c, n)
    params = {"n": n, "c": c}
    if not h0 < threshold:
        return BlowupCertificate("unbounded_4_1", False, h0, threshold, None, params)

    def F(t):
        return unbounded_bound_function(t, h0, c, n)

    lo, hi = 0.0, 1.0 / (c + abs(h0))
    while F(hi) > 0:
        lo, hi = hi, 2.0 * hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if F(mid) > 0:
            lo = mid
        else:
            hi = mid
    t_star = lo if abs(F(lo)) <= abs(F(hi)) else hi
    return BlowupCertificate("unbounded_4_1", True, h0, threshold, t_star, params)


# comparison functions -----------------------------------------------------


def g_of(ctx: ComparisonContext, t: float) -> float:
    """k int_0^t exp(-int_0^s alpha) ds by adaptive quadrature."""
    t = float(t)
    if t < 0:
        raise DomainError("t must be nonnegative")
    if t == 0.0:
        return 0.0
    prof = ctx.profile
    if prof.family == "zero":
        return ctx.k * t
    val, _ = integrate.quad(
        lambda s: math.exp(-prof.alpha_integral(s)), 0.0, t,
        epsabs=1e-14, epsrel=1e-12, limit=400,
    )
    return ctx.k * val


def g_limit(ctx: ComparisonContext) -> float:
    """lim_{t->inf} g(t); infinite when the damping tail is integrable-free."""
    prof = ctx.profile
    if prof.family == "zero":
        return math.inf
    if prof.family == "tabulated" and prof.params[1][-1] == 0.0:
        return math.inf
    val, _ = integrate.quad(
        lambda s: math.exp(-prof.alpha_integral(s)), 0.0, math.inf,
        epsabs=1e-14, epsrel=1e-12, limit=400,
    )
    return ctx.k * val


def N_of(h0: float, M: float, n: int, t: float) -> float:
    return M * (n - 1) + n * h0 * (-math.expm1(-M * t))


def lambda_of(h0: float, M: float, n: int, t: float) -> float:
    """Lambda(t) = n N(t) / ((n-1)^2 M h0 g'(t)), g'(t) = k e^{-Mt}."""
    n = _check_n(n)
    if not M > 0:
        raise DomainError("M must be positive")
    if t < 0:
        raise DomainError("t must be nonnegative")
    if not h0 < bounded_threshold(M, n):
        raise DomainError(
            f"h0={h0} does not satisfy h0 < M(1-n)/n = {bounded_threshold(M, n)}; N never vanishes"
        )
    g_prime = n / (n - 1) * math.exp(-M * t)
    return n * N_of(h0, M, n, t) / ((n - 1) ** 2 * M * h0 * g_prime)


# Riccati oracle -----------------------------------------------------------


def riccati_blowup_time(
    ctx: ComparisonContext,
    t_max: float = 1000.0,
    rtol: float = 1e-10,
    h_blowup: float = 1e12,
    dt_min: float = 1e-14,
    n_fit: int = 10,
) -> float:
    """Blowup time of h' = -alpha(t) h - k h^2, h(0) = h0 < 0.

    Integrated with the Dormand-Prince pair. Blowup is declared when
    |h| > h_blowup or the step collapses below dt_min; the returned time is
    the zero of a straight-line fit of 1/h over the last ``n_fit`` accepted
    steps. Raises :class:`NoBlowupDetected` if h stays bounded until t_max
    or decays below 1e-12 |h0|.
    """
    prof, k, h0 = ctx.profile, ctx.k, ctx.h0

    def f(t, h):
        return -prof.alpha(t) * h - k * h * h

    # h keeps its sign up to blowup, so control relative error only
    atol = 1e-14 * rtol * abs(h0)
    t, h = 0.0, h0
    dt = 1e-3 / (1.0 + abs(h0) + prof.alpha(0.0))
    ts, ws = [0.0], [1.0 / h0]
    while True:
        if t >= t_max:
            raise NoBlowupDetected(f"h bounded up to t_max={t_max}")
        dt = min(dt, t_max - t)
        h_new, err = rk.dp54_step(f, t, h, dt)
        en = rk.error_norm(err, h, h_new, rtol, atol) if math.isfinite(h_new) else math.inf
        if en <= 1.0:
            t += dt
            h = h_new
            ts.append(t)
            ws.append(1.0 / h)
            if abs(h) > h_blowup:
                break
            if abs(h) < 1e-12 * abs(h0):
                raise NoBlowupDetected(f"h decayed to {h:.3e} by t={t:.6g}")
            dt = rk.next_dt(dt, en)
        else:
            dt = rk.next_dt(dt, en) if math.isfinite(en) else 0.2 * dt
        if dt < dt_min:
            break
    m = min(n_fit, len(ts))
    slope, icept = np.polyfit(np.array(ts[-m:]) - ts[-1], np.array(ws[-m:]), 1)
    return float(ts[-1] - icept / slope)


def riccati_threshold(ctx: ComparisonContext) -> float:
    """h0 below -1/g(inf) makes 1 + h0 g(t) vanish in finite time."""
    g_inf = g_limit(ctx)
    return -1.0 / g_inf if math.isfinite(g_inf) else 0.0


def riccati_certificate(ctx: ComparisonContext, **kw) -> BlowupCertificate:
    threshold = riccati_threshold(ctx)
    params = {"n": ctx.n, "damping": str(ctx.profile)}
    try:
        t_star = riccati_blowup_time(ctx, **kw)
    except NoBlowupDetected:
        return BlowupCertificate("riccati_numeric", False, ctx.h0, threshold, None, params)
    return BlowupCertificate("riccati_numeric", True, ctx.h0, threshold, t_star, params)


def certify_all(h0: float, profile: DampingProfile, n: int, **riccati_kw) -> list[BlowupCertificate]:
    """Theorem certificates matching the damping family, then the Riccati bound."""
    n = _check_n(n)
    h0 = float(h0)
    certs = []
    fam = profile.family
    if fam == "zero" and n == 2:
        certs.append(certify_yuen(h0))
    elif fam == "exponential":
        certs.append(certify_unbounded(h0, profile.derivative_at_zero(), n))
    elif fam != "zero":
        sup = profile.sup_bound()
        if sup.is_finite:
            cert = certify_bounded(h0, sup.value, n)
            if sup.kind != "bounded":
                cert.params["sup_kind"] = sup.kind
            certs.append(cert)
    if h0 < 0:
        certs.append(riccati_certificate(ComparisonContext(n, h0, profile), **riccati_kw))
    else:
        threshold = riccati_threshold(ComparisonContext(n, -1.0, profile))
        certs.append(BlowupCertificate(
            "riccati_numeric", False, h0, threshold, None, {"n": n, "damping": str(profile)}
        ))
    return certs
