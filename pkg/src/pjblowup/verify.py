"""Acceptance checks, shared by ``pjblowup verify`` and the test suite.

Each check returns a :class:`CriterionResult`. The simulation runs are shared
through :class:`AcceptanceContext` so that every run executes once.
"""

from __future__ import annotations

import math
import tempfile
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import special_fn
from .certificates import (
    ComparisonContext,
    bounded_threshold,
    certify_bounded,
    certify_unbounded,
    riccati_blowup_time,
    unbounded_bound_function,
)
from .config import RunConfig, SweepSpec
from .damping import DampingProfile
from .diagnostics import build_report, energy_identity_residual, eq8_residual
from .harness import rows_to_csv, run_sweep, write_simulation
from .pde_solver import RunResult, run

ACCEPTANCE_CONFIGS = {
    "undamped": RunConfig(n=2, damping="zero", family="sin2", amplitude=2.0, N=1024),
    "bounded": RunConfig(n=2, damping="const:1", family="sin2", amplitude=2.0, N=1024),
    "unbounded": RunConfig(n=2, damping="exp:1", family="sin2", amplitude=2.0, N=1024),
}
IDENTITY_VMAX = 100.0


@dataclass(frozen=True)
class CriterionResult:
    number: int
    title: str
    passed: bool
    detail: str

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"[{tag}] {self.number:2d}. {self.title}: {self.detail}"


@dataclass
class AcceptanceContext:
    """Caches acceptance runs keyed by (name, N) together with wall time."""

    runs: dict = field(default_factory=dict)

    def get(self, name: str, N: int = 1024) -> tuple[RunConfig, RunResult, float]:
        key = (name, N)
        if key not in self.runs:
            cfg = replace(ACCEPTANCE_CONFIGS[name], N=N)
            initial = cfg.initial()
            start = time.perf_counter()
            result = run(initial, cfg.params(), cfg.profile(), cfg.solver())
            self.runs[key] = (cfg, result, time.perf_counter() - start)
        return self.runs[key]


def _fmt_event(result: RunResult) -> str:
    ev = result.event
    if ev.detected:
        return f"t_detect={ev.t_detect:.5f} ({ev.reason})"
    return f"no breakdown before t={ev.t_detect:g}, max|v|={ev.max_v:.3g}"


def criterion_1(ctx=None) -> CriterionResult:
    start = time.perf_counter()
    t1 = DampingProfile.exponential(1.0)
    t2 = DampingProfile.exponential(0.01)
    th1 = certify_unbounded(-1.0, t1.derivative_at_zero(), 2).threshold
    th2 = certify_unbounded(-1.0, t2.derivative_at_zero(), 2).threshold
    elapsed = time.perf_counter() - start
    ok = abs(th1 + 0.8385) <= 0.005 and abs(th2 + 0.505) <= 0.005 and elapsed < 1.0
    return CriterionResult(
        1, "threshold reproduction", ok,
        f"exp:1 -> {th1:.6f} (want -0.8385+-0.005), exp:0.01 -> {th2:.6f} "
        f"(want -0.505+-0.005), {elapsed:.3f}s (< 1s)",
    )


def criterion_2(ctx=None, count: int = 20, seed: int = 20240) -> CriterionResult:
    rng = np.random.default_rng(seed)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(count):
        M = float(rng.uniform(0.1, 5.0))
        n = int(rng.integers(2, 7))
        h0 = bounded_threshold(M, n) * float(1.0 + rng.uniform(0.05, 3.0))
        closed = certify_bounded(h0, M, n).t_star
        oracle = riccati_blowup_time(ComparisonContext(n, h0, DampingProfile.constant(M)))
        worst = max(worst, abs(closed - oracle) / closed)
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-4 and elapsed < 10.0
    return CriterionResult(
        2, "closed-form t* vs Riccati oracle", ok,
        f"worst relative gap {worst:.2e} over {count} triples (<= 1e-4), {elapsed:.2f}s (< 10s)",
    )


def criterion_3(ctx=None) -> CriterionResult:
    t_star = certify_bounded(-1.0, 1e-8, 2).t_star
    ok = abs(t_star - 0.5) <= 1e-6
    return CriterionResult(3, "small-M limit", ok, f"t*(M=1e-8) = {t_star:.12f} (want 0.5+-1e-6)")


def criterion_4(ctx: AcceptanceContext) -> CriterionResult:
    _, hi, secs = ctx.get("undamped", 1024)
    _, lo, _ = ctx.get("undamped", 512)
    ok_detect = hi.event.detected and hi.event.t_detect <= 0.52
    stable = (
        hi.event.detected and lo.event.detected
        and abs(hi.event.t_detect - lo.event.t_detect) / hi.event.t_detect <= 0.05
    )
    ok = ok_detect and stable and secs < 60.0
    detail = (
        f"N=1024 {_fmt_event(hi)} (want <= 0.52); N=512 {_fmt_event(lo)}; "
        f"N-stability {'ok' if stable else 'FAILED'} (5%); runtime {secs:.1f}s (< 60s)"
    )
    return CriterionResult(4, "undamped simulation bound", ok, detail)


def _report(cfg: RunConfig, result: RunResult):
    initial = cfg.initial()
    return build_report(
        result.series, initial.h0, cfg.profile(), cfg.n, cfg.params().beta,
        v0_max=float(np.max(np.abs(initial.v0))),
    )


def criterion_5(ctx: AcceptanceContext) -> CriterionResult:
    cfg, res, _ = ctx.get("bounded", 1024)
    bound = math.log(2.0) + 0.02
    ok_detect = res.event.detected and res.event.t_detect <= bound
    rep = _report(cfg, res)
    lam, decay = rep.results["lambda_sandwich"], rep.results["decay_bound"]
    ok_monitors = lam.passed and not lam.skipped and decay.passed and not decay.skipped
    detail = (
        f"{_fmt_event(res)} (want <= {bound:.4f}); lambda_sandwich worst {lam.worst:.3g}"
        f" at t={lam.t_worst}; decay_bound worst {decay.worst:.3g}"
    )
    return CriterionResult(5, "bounded-damping simulation bound", ok_detect and ok_monitors, detail)


def criterion_6(ctx: AcceptanceContext) -> CriterionResult:
    cfg, res, _ = ctx.get("unbounded", 1024)
    h0 = cfg.initial().h0
    cert = certify_unbounded(h0, 1.0, 2)
    resid = abs(unbounded_bound_function(cert.t_star, h0, 1.0, 2)) if cert.applicable else math.inf
    ok_cert = cert.applicable and resid <= 1e-10
    ok_detect = cert.applicable and res.event.detected and res.event.t_detect <= cert.t_star + 0.05
    t_star = cert.t_star if cert.applicable else math.nan
    detail = (
        f"h0={h0:.6f} vs threshold {cert.threshold:.6f}, t*={t_star:.6f}, residual {resid:.1e} "
        f"(<= 1e-10); {_fmt_event(res)} (want <= {t_star + 0.05:.4f})"
    )
    return CriterionResult(6, "unbounded-damping simulation bound", ok_cert and ok_detect, detail)


def _identity_max(cfg: RunConfig, result: RunResult) -> tuple[float, float]:
    s = result.series
    mask = s.column("max_v") <= IDENTITY_VMAX
    profile = cfg.profile()
    e8 = eq8_residual(s, profile, cfg.n)[mask]
    en = energy_identity_residual(s, cfg.params().beta, profile)[mask]
    return float(np.nanmax(e8)), float(np.nanmax(en))


def criterion_7(ctx: AcceptanceContext) -> CriterionResult:
    ok = True
    parts = []
    for name in ACCEPTANCE_CONFIGS:
        cfg, hi, _ = ctx.get(name, 1024)
        cfg_lo, lo, _ = ctx.get(name, 512)
        e8_hi, en_hi = _identity_max(cfg, hi)
        e8_lo, en_lo = _identity_max(cfg_lo, lo)
        r8, ren = e8_lo / e8_hi, en_lo / en_hi
        good = e8_hi <= 1e-3 and r8 >= 4.0 and ren >= 4.0
        ok &= good
        parts.append(f"{name}: eq8 {e8_hi:.2e} (ratio {r8:.2f}), energy {en_hi:.2e} (ratio {ren:.2f})")
    return CriterionResult(
        7, "identity suite", ok,
        "; ".join(parts) + " (want eq8 <= 1e-3, ratios >= 4)",
    )


def criterion_8(ctx: AcceptanceContext) -> CriterionResult:
    ok = True
    parts = []
    for (name, N), (cfg, res, _) in sorted(ctx.runs.items()):
        rep = _report(cfg, res)
        cs, neg = rep.results["cauchy_schwarz"], rep.results["h_negative"]
        ok &= cs.passed and neg.passed and cs.checked > 0 and neg.checked > 0
        parts.append(f"{name}/N={N}: CS {cs.worst:.1e}, max H {neg.worst:.1e}, {cs.checked} steps")
    if not parts:
        return CriterionResult(8, "inequality suite", False, "no acceptance runs available")
    return CriterionResult(8, "inequality suite", ok, "; ".join(parts))


def criterion_9(ctx=None) -> CriterionResult:
    e1_val = special_fn.e1(1.0)
    e1_oracle = special_fn.e1_quadrature(1.0)
    ok1 = abs(e1_val - 0.21938393) <= 1e-8 and abs(e1_val - e1_oracle) <= 1e-8
    x = 100.0
    # asymptotic series x e^x E1(x) ~ sum (-1)^k k! / x^k, truncated at its smallest term
    terms, term, k = [], 1.0, 0
    while abs(term) > 1e-18 and k < 60:
        terms.append(term)
        k += 1
        term *= -k / x
    asym = sum(terms) / x
    e1s = special_fn.e1_scaled(x)
    ok2 = abs(e1s - 0.0099019) <= 1e-6 and abs(e1s - asym) <= 1e-6
    worst = 0.0
    for t in np.linspace(0.05, 2.0, 10):
        for c in np.linspace(0.1, 3.0, 10):
            lhs = special_fn.eta(t, c) + special_fn.e1(math.exp(c * t) / c)
            worst = max(worst, abs(lhs - special_fn.e1(1.0 / c)))
    ok3 = worst <= 1e-12
    return CriterionResult(
        9, "special functions", ok1 and ok2 and ok3,
        f"e1(1)={e1_val:.10f} (oracle {e1_oracle:.10f}); e1_scaled(100)={e1s:.9f} "
        f"(asymptotic {asym:.9f}); eta identity worst {worst:.1e} (<= 1e-12)",
    )


def criterion_10(ctx: AcceptanceContext, workdir=None) -> CriterionResult:
    with tempfile.TemporaryDirectory(dir=workdir) as tmp:
        tmp = Path(tmp)
        same = []
        for name, cfg in ACCEPTANCE_CONFIGS.items():
            _, cached, _ = ctx.get(name, cfg.N)
            out, _ = write_simulation(cfg, tmp / name)
            same.append((out / "series.csv").read_bytes() == cached.series.to_csv().encode())
        spec = SweepSpec(
            n=(2, 3), damping=("zero",), amplitude=(1.0, 2.0),
            template=RunConfig(N=128, t_end=1.5),
        )
        csv1 = rows_to_csv(run_sweep(spec, workers=1))
        csv4 = rows_to_csv(run_sweep(spec, workers=4))
    ok = all(same) and csv1 == csv4
    return CriterionResult(
        10, "determinism", ok,
        f"simulate CSVs identical: {sum(same)}/{len(same)}; sweep workers 1 vs 4 identical: {csv1 == csv4}",
    )


CRITERIA = (
    criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
    criterion_6, criterion_7, criterion_8, criterion_9, criterion_10,
)


def run_all(ctx: AcceptanceContext | None = None, echo=None) -> list[CriterionResult]:
    """Evaluate every criterion in order, optionally echoing each line."""
    ctx = ctx or AcceptanceContext()
    # criterion 8 inspects every run, so make sure all of them exist first
    for name in ACCEPTANCE_CONFIGS:
        for N in (512, 1024):
            ctx.get(name, N)
    out = []
    for check in CRITERIA:
        res = check(ctx)
        if echo is not None:
            echo(res.line())
        out.append(res)
    return out
