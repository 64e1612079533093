"""Functionals along a discrete trajectory and monitors for the identities
and inequalities satisfied by H(t) = u(0, t) = -int_0^1 v.

Identities checked (k = n/(n-1), v = u_x):

    H' + alpha H + k ||v||^2 = 0                       ("eq8")
    d/dt ||v||^2 = (2 - beta) int v^3 - 2 alpha ||v||^2  (energy)

Inequalities checked at every resolved record:

    H^2 <= ||v||^2                       Cauchy-Schwarz
    H(t) <= H0 exp(-int_0^t alpha)        decay bound, H0 < 0
    Lambda(t) <= 1/H(t) <= 0, t < t*      Riccati sandwich (bounded damping)
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from . import grid
from .certificates import bounded_threshold, certify_bounded, lambda_of
from .damping import DampingProfile

CSV_COLUMNS = ("t", "H", "l2vsq", "max_v", "min_u", "dt", "eq8_residual")

# tolerance classes
QUADRATURE_TOL = 1e-10
IDENTITY_TOL = 1e-3
CAUCHY_SCHWARZ_TOL = 1e-10
DECAY_TOL = 1e-6
LAMBDA_TOL = 1e-8
RESOLVE_CAP_FACTOR = 1e3


@dataclass(frozen=True)
class TimeSeriesRecord:
    t: float
    H: float
    l2vsq: float
    max_v: float
    min_u: float
    dt: float
    eq8_residual: float = math.nan
    int_v3: float = math.nan
    omega0: float = math.nan


def make_record(t: float, v: np.ndarray, dx: float, dt: float = 0.0) -> TimeSeriesRecord:
    u = grid.reconstruct_u(v, dx)
    return TimeSeriesRecord(
        t=float(t),
        H=float(u[0]),
        l2vsq=grid.simpson(v * v, dx),
        max_v=float(np.max(np.abs(v))),
        min_u=float(np.min(u)),
        dt=float(dt),
        int_v3=grid.simpson(v * v * v, dx),
        omega0=grid.edge_derivative(v, dx),
    )


class TimeSeries:
    """Column store of per-step records."""

    def __init__(self, records=()):
        self.records: list[TimeSeriesRecord] = list(records)

    def append(self, rec: TimeSeriesRecord) -> None:
        self.records.append(rec)

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def __getitem__(self, i):
        return self.records[i]

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records], dtype=float)

    def with_column(self, name: str, values) -> "TimeSeries":
        recs = [
            TimeSeriesRecord(**{**asdict(r), name: float(x)})
            for r, x in zip(self.records, values)
        ]
        return TimeSeries(recs)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in self.records:
            w.writerow([repr(float(getattr(r, c))) for c in CSV_COLUMNS])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "TimeSeries":
        rows = list(csv.DictReader(io.StringIO(text)))
        return cls(TimeSeriesRecord(**{c: float(row[c]) for c in CSV_COLUMNS}) for row in rows)


# time derivatives -----------------------------------------------------------


TIME_STENCIL = 5


def time_derivative(t: np.ndarray, f: np.ndarray, points: int = TIME_STENCIL) -> np.ndarray:
    """Lagrange derivative on nonuniform times.

    ``points = 5`` (default) differentiates the quartic through a centred
    five-record window, shifted inwards at the ends; ``points = 3`` is the
    classic three-point formula. Fewer than ``points`` records gives NaN.
    """
    if points == 5:
        return _lagrange_derivative(t, f, 5)
    if points != 3:
        raise ValueError("points must be 3 or 5")
    t = np.asarray(t, float)
    f = np.asarray(f, float)
    m = t.size
    d = np.full(m, np.nan)
    if m < 3:
        return d
    h1 = t[1:-1] - t[:-2]
    h2 = t[2:] - t[1:-1]
    d[1:-1] = (
        -h2 / (h1 * (h1 + h2)) * f[:-2]
        + (h2 - h1) / (h1 * h2) * f[1:-1]
        + h1 / (h2 * (h1 + h2)) * f[2:]
    )
    # one-sided three-point at both ends
    a, b = t[1] - t[0], t[2] - t[0]
    d[0] = -(a + b) / (a * b) * f[0] + b / (a * (b - a)) * f[1] - a / (b * (b - a)) * f[2]
    a, b = t[-1] - t[-2], t[-1] - t[-3]
    d[-1] = (a + b) / (a * b) * f[-1] - b / (a * (b - a)) * f[-2] + a / (b * (b - a)) * f[-3]
    return d


def _lagrange_derivative(t, f, points: int) -> np.ndarray:
    t = np.asarray(t, float)
    f = np.asarray(f, float)
    m = t.size
    if m < points:
        return np.full(m, np.nan)
    lo = np.clip(np.arange(m) - points // 2, 0, m - points)
    idx = lo[:, None] + np.arange(points)
    x = t[idx] - t[:, None]  # window offsets relative to the evaluation time
    d = np.zeros(m)
    for j in range(points):
        others = [k for k in range(points) if k != j]
        denom = np.prod([x[:, j] - x[:, k] for k in others], axis=0)
        # d/ds prod_{k != j} (s - x_k) at s = 0
        numer = np.zeros(m)
        for k in others:
            numer += np.prod([-x[:, q] for q in others if q != k], axis=0)
        d += numer / denom * f[idx[:, j]]
    return d


def _alpha_column(t: np.ndarray, profile: DampingProfile) -> np.ndarray:
    return np.array([profile.alpha(x) for x in t])


def eq8_residual(series: TimeSeries, profile: DampingProfile, n: int, coeff: Optional[float] = None) -> np.ndarray:
    """|H' + alpha H + k ||v||^2| / max(1, |H'|, |alpha H|, |k ||v||^2|).

    ``coeff`` overrides k = n/(n-1) (used for mutation testing).
    """
    t, H, L = series.column("t"), series.column("H"), series.column("l2vsq")
    if t.size < 3:
        return np.zeros(t.size) if np.all(H == 0) else np.full(t.size, np.nan)
    k = n / (n - 1) if coeff is None else coeff
    dH = time_derivative(t, H)
    aH = _alpha_column(t, profile) * H
    kL = k * L
    scale = np.maximum.reduce([np.ones_like(dH), np.abs(dH), np.abs(aH), np.abs(kL)])
    return np.abs(dH + aH + kL) / scale


def energy_identity_residual(series: TimeSeries, beta: float, profile: DampingProfile) -> np.ndarray:
    """|d/dt ||v||^2 - (2 - beta) int v^3 + 2 alpha ||v||^2|, normalized like eq8."""
    t, L, V3 = series.column("t"), series.column("l2vsq"), series.column("int_v3")
    if t.size < 3:
        return np.zeros(t.size) if np.all(L == 0) else np.full(t.size, np.nan)
    dL = time_derivative(t, L)
    cubic = (2.0 - beta) * V3
    damp = 2.0 * _alpha_column(t, profile) * L
    scale = np.maximum.reduce([np.ones_like(dL), np.abs(dL), np.abs(cubic), np.abs(damp)])
    return np.abs(dL - cubic + damp) / scale


# pointwise monitors ---------------------------------------------------------


def cauchy_schwarz_monitor(rec: TimeSeriesRecord) -> float:
    return max(0.0, rec.H**2 - rec.l2vsq)


def decay_bound_monitor(rec: TimeSeriesRecord, h0: float, profile: DampingProfile) -> float:
    return max(0.0, rec.H - h0 * math.exp(-profile.alpha_integral(rec.t)))


def lambda_monitor(rec: TimeSeriesRecord, h0: float, M: float, n: int) -> float:
    """Violation of Lambda(t) - LAMBDA_TOL <= 1/H <= 0; 0 for t >= t*."""
    cert = certify_bounded(h0, M, n)
    if not cert.applicable or rec.t >= cert.t_star:
        return 0.0
    if rec.H == 0.0:
        return math.inf
    inv = 1.0 / rec.H
    lam = lambda_of(h0, M, n, rec.t)
    return max(0.0, inv, (lam - LAMBDA_TOL) - inv)


# report --------------------------------------------------------------------


@dataclass
class MonitorResult:
    name: str
    tolerance: float
    worst: float = 0.0
    t_worst: Optional[float] = None
    checked: int = 0
    skipped: bool = False
    reason: str = ""

    @property
    def passed(self) -> bool:
        return self.skipped or self.worst <= self.tolerance

    def update(self, value: float, t: float) -> None:
        self.checked += 1
        if value > self.worst or (self.t_worst is None and value == self.worst):
            self.worst, self.t_worst = float(value), float(t)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["passed"] = self.passed
        return d


@dataclass
class MonitorReport:
    results: dict = field(default_factory=dict)
    resolved_records: int = 0
    under_resolved_records: int = 0
    resolve_cap: float = math.inf

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results.values())

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "resolve_cap": self.resolve_cap,
            "resolved_records": self.resolved_records,
            "under_resolved_records": self.under_resolved_records,
            "monitors": {k: r.to_dict() for k, r in self.results.items()},
        }


def resolved_mask(series: TimeSeries, v0_max: float, cap_factor: float = RESOLVE_CAP_FACTOR) -> np.ndarray:
    cap = cap_factor * max(v0_max, 1.0)
    return series.column("max_v") <= cap


def build_report(
    series: TimeSeries,
    h0: float,
    profile: DampingProfile,
    n: int,
    beta: float,
    v0_max: float,
    cap_factor: float = RESOLVE_CAP_FACTOR,
    identity_vmax: float = 100.0,
) -> MonitorReport:
    """Evaluate every monitor on the resolved part of a run."""
    cap = cap_factor * max(v0_max, 1.0)
    mask = resolved_mask(series, v0_max, cap_factor)
    report = MonitorReport(
        resolved_records=int(mask.sum()),
        under_resolved_records=int((~mask).sum()),
        resolve_cap=cap,
    )
    cs = MonitorResult("cauchy_schwarz", CAUCHY_SCHWARZ_TOL)
    neg = MonitorResult("h_negative", 0.0)
    decay = MonitorResult("decay_bound", DECAY_TOL * abs(h0))
    lam = MonitorResult("lambda_sandwich", 0.0)
    if not h0 < 0:
        decay.skipped, decay.reason = True, "h0 >= 0"
        neg.skipped, neg.reason = True, "h0 >= 0"
    sup = profile.sup_bound()
    lam_ok = h0 < 0 and sup.is_finite and h0 < bounded_threshold(sup.value, n)
    if not lam_ok:
        lam.skipped = True
        lam.reason = "bounded-damping condition not met or damping unbounded"
    for rec, ok in zip(series, mask):
        if not ok:
            continue
        cs.update(cauchy_schwarz_monitor(rec) / max(1.0, rec.l2vsq), rec.t)
        if not neg.skipped:
            neg.update(max(0.0, rec.H), rec.t)
        if not decay.skipped:
            decay.update(decay_bound_monitor(rec, h0, profile), rec.t)
        if not lam.skipped:
            lam.update(lambda_monitor(rec, h0, sup.value, n), rec.t)
    report.results = {m.name: m for m in (cs, neg, decay, lam)}

    ident_mask = series.column("max_v") <= identity_vmax
    for name, values in (
        ("eq8_identity", eq8_residual(series, profile, n)),
        ("energy_identity", energy_identity_residual(series, beta, profile)),
    ):
        res = MonitorResult(name, IDENTITY_TOL)
        for rec, val, ok in zip(series, values, ident_mask):
            if ok and math.isfinite(val):
                res.update(val, rec.t)
        if res.checked == 0:
            res.skipped, res.reason = True, "no records with max|v| <= identity cap"
        report.results[name] = res
    return report
