"""Library side of the command line: simulations, sweeps and plot data.

Everything here is deterministic given its inputs. Output files contain no
timestamps or timings.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .certificates import THEOREM_IDS, certify_all, certify_bounded, lambda_of
from .config import RunConfig, SweepSpec
from .diagnostics import CSV_COLUMNS, TimeSeries, build_report
from .errors import DomainError
from .pde_solver import RunResult, compatibility_check, run

THEOREM_CERTS = THEOREM_IDS[:3]


def jsonable(obj):
    """Recursively replace non-finite floats so the output is strict JSON."""
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else repr(obj)
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return jsonable(obj.item())
    return obj


def dump_json(obj) -> str:
    return json.dumps(jsonable(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


# single runs -------------------------------------------------------------------


def simulate(cfg: RunConfig) -> tuple[RunResult, dict]:
    """Run one configuration and assemble its summary."""
    initial = cfg.initial()
    params, profile = cfg.params(), cfg.profile()
    result = run(initial, params, profile, cfg.solver())
    certs = certify_all(initial.h0, profile, cfg.n)
    report = build_report(
        result.series, initial.h0, profile, cfg.n, params.beta,
        v0_max=float(np.max(np.abs(initial.v0))),
    )
    compat = compatibility_check(initial)
    summary = {
        "config": cfg.to_dict(),
        "h0": initial.h0,
        "event": result.event.to_dict(),
        "steps": result.steps,
        "rejected_steps": result.rejected,
        "certificates": [c.to_dict() for c in certs],
        "monitors": report.to_dict(),
        "compatibility": {
            "u0_at_1": compat.u0_at_1,
            "v0_at_0": compat.v0_at_0,
            "v0_at_1": compat.v0_at_1,
            "omega0_at_0": compat.omega0_at_0,
            "warnings": list(compat.warnings),
        },
    }
    return result, summary


def write_simulation(cfg: RunConfig, outdir=None) -> tuple[Path, dict]:
    out = Path(outdir if outdir is not None else cfg.output)
    out.mkdir(parents=True, exist_ok=True)
    result, summary = simulate(cfg)
    (out / "series.csv").write_text(result.series.to_csv())
    (out / "summary.json").write_text(dump_json(summary))
    return out, summary


# sweeps ------------------------------------------------------------------------

SWEEP_COLUMNS = (
    "n", "damping", "amplitude", "h0", "regime", "status",
    "yuen_2_1", "bounded_3_1", "unbounded_4_1", "riccati_numeric",
    "t_star", "t_star_source", "t_detect", "reason", "t_extrapolated", "ratio", "error",
)


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(x)
    return str(x)


def classify(certs) -> tuple[str, dict, float | None, str]:
    """Regime label, per-certificate t_star column, best bound and its source.

    ``theorem``: a closed-form certificate applies. ``riccati_only``: only the
    numerical comparison bound applies. ``exploratory``: nothing applies.
    """
    cols = {tid: "n/a" for tid in THEOREM_IDS}
    best, source = None, ""
    for c in certs:
        cols[c.theorem_id] = repr(float(c.t_star)) if c.applicable else "inapplicable"
    theorem = [c for c in certs if c.applicable and c.theorem_id in THEOREM_CERTS]
    numeric = [c for c in certs if c.applicable and c.theorem_id == "riccati_numeric"]
    if theorem:
        c = min(theorem, key=lambda c: c.t_star)
        return "theorem", cols, c.t_star, c.theorem_id
    if numeric:
        return "riccati_only", cols, numeric[0].t_star, "riccati_numeric"
    return "exploratory", cols, best, source


def sweep_point(cfg: RunConfig, exploratory: bool = False) -> dict:
    """One row of the sweep table; failures are reported in the row."""
    row = {k: "" for k in SWEEP_COLUMNS}
    row.update(n=cfg.n, damping=cfg.damping, amplitude=_fmt(float(cfg.amplitude)))
    try:
        initial = cfg.initial()
        profile = cfg.profile()
        row["h0"] = _fmt(initial.h0)
        certs = certify_all(initial.h0, profile, cfg.n)
        regime, cols, t_star, source = classify(certs)
        row.update(cols)
        row.update(regime=regime, t_star=_fmt(t_star), t_star_source=source)
        if regime == "exploratory" and not exploratory:
            row["status"] = "skipped (pass --exploratory to simulate)"
            return row
        result = run(initial, cfg.params(), profile, cfg.solver())
        ev = result.event
        row.update(
            status="ok",
            t_detect=_fmt(ev.t_detect) if ev.detected else "",
            reason=ev.reason,
            t_extrapolated=_fmt(ev.t_extrapolated),
        )
        if ev.detected and t_star:
            row["ratio"] = _fmt(ev.t_detect / t_star)
    except Exception as exc:  # recorded per row, the sweep continues
        row["status"] = "error"
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


def _sort_key(row: dict):
    return (int(row["n"]), str(row["damping"]), float(row["amplitude"]))


def run_sweep(spec: SweepSpec, exploratory: bool = False, workers: int | None = None) -> list[dict]:
    points = spec.points()
    workers = spec.workers if workers is None else workers
    if workers < 1:
        raise DomainError("workers must be >= 1")
    if workers == 1 or len(points) <= 1:
        rows = [sweep_point(p, exploratory) for p in points]
    else:
        with ProcessPoolExecutor(max_workers=min(workers, len(points))) as pool:
            rows = list(pool.map(sweep_point, points, [exploratory] * len(points)))
    return sorted(rows, key=_sort_key)


def rows_to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=SWEEP_COLUMNS, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: _fmt(r.get(k, "")) for k in SWEEP_COLUMNS})
    return buf.getvalue()


# plots -------------------------------------------------------------------------

DERIVED_KEYS = ("inv_H", "decay_bound", "lambda")


def plot_series(series: TimeSeries, keys, profile=None, n: int | None = None) -> dict:
    """Map each key to (t, y). Raw CSV columns plus:

    inv_H        1/H
    decay_bound  h0 exp(-int_0^t alpha)              (needs ``profile``)
    lambda       Lambda(t) for t < t*, bounded damping (needs ``profile`` and ``n``)

    h0 is read from the first row.
    """
    t = series.column("t")
    h0 = float(series[0].H) if len(series) else math.nan
    out = {}
    for key in keys:
        if key in CSV_COLUMNS:
            out[key] = (t, series.column(key))
        elif key == "inv_H":
            H = series.column("H")
            with np.errstate(divide="ignore"):
                out[key] = (t, np.where(H != 0, 1.0 / H, np.nan))
        elif key == "decay_bound":
            if profile is None:
                raise KeyError("decay_bound needs --damping")
            out[key] = (t, np.array([h0 * math.exp(-profile.alpha_integral(s)) for s in t]))
        elif key == "lambda":
            if profile is None or n is None:
                raise KeyError("lambda needs --damping and --n")
            sup = profile.sup_bound()
            if not sup.is_finite:
                raise KeyError("lambda needs bounded damping")
            cert = certify_bounded(h0, sup.value, n)
            if not cert.applicable:
                raise KeyError(f"lambda undefined: h0={h0:.6g} is not below {cert.threshold:.6g}")
            y = [lambda_of(h0, sup.value, n, s) if s < cert.t_star else math.nan for s in t]
            out[key] = (t, np.array(y))
        else:
            raise KeyError(f"unknown column {key!r}")
    return out


def restricted(series_map: dict, t_max: float | None) -> dict:
    if t_max is None:
        return series_map
    return {k: (t[t <= t_max], y[t <= t_max]) for k, (t, y) in series_map.items()}

