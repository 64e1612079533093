"""Command line front end.

    pjblowup certify  --n 2 --damping exp:1 --h0 -1
    pjblowup simulate run.cfg [--out DIR] [--N 512 ...]
    pjblowup sweep    sweep.cfg [--workers 4] [--exploratory]
    pjblowup verify
    pjblowup plot     series.csv --keys H,decay_bound --damping const:1 --out h.svg

Exit codes: 0 success; 1 usage, config or I/O error; 2 ``certify`` found no
applicable certificate, or ``verify`` had a failing criterion.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .certificates import certify_all
from .config import ConfigError, RunConfig, SweepSpec, parse_kv
from .damping import parse_damping
from .diagnostics import TimeSeries
from .errors import DomainError
from .harness import dump_json, plot_series, restricted, rows_to_csv, run_sweep, write_simulation
from .pde_solver import build_initial
from .svg import line_chart

EXIT_OK, EXIT_USAGE, EXIT_NEGATIVE = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


# overrides shared by simulate and sweep; dest names match RunConfig fields
_RUN_FLAGS = (
    ("--n", "n", int),
    ("--damping", "damping", str),
    ("--family", "family", str),
    ("--amplitude", "amplitude", float),
    ("--samples", "samples", str),
    ("--N", "N", int),
    ("--cfl", "cfl", float),
    ("--dt-min", "dt_min", float),
    ("--v-max", "v_max", float),
    ("--t-end", "t_end", float),
    ("--rk-tol", "rk_tol", float),
    ("--out", "output", str),
)


def _add_run_flags(p, skip=()):
    for flag, dest, typ in _RUN_FLAGS:
        if dest not in skip:
            p.add_argument(flag, dest=dest, type=typ, default=None)


def _overrides(args, skip=()) -> dict:
    return {dest: getattr(args, dest) for _, dest, _ in _RUN_FLAGS if dest not in skip}


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="pjblowup", description=__doc__.split("\n\n")[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("certify", help="print blowup certificates as JSON")
    c.add_argument("--n", type=int, required=True)
    c.add_argument("--damping", required=True, help="zero | const:M | sat:M,r | exp:c | tab:path")
    src = c.add_mutually_exclusive_group(required=True)
    src.add_argument("--h0", type=float, help="u(0, 0) = -int v0")
    src.add_argument("--family", choices=("sin2", "poly_bump"))
    c.add_argument("--amplitude", type=float, default=1.0)
    c.add_argument("--N", type=int, default=1024, help="grid used to derive h0 from a family")
    c.add_argument("--t-max", type=float, default=1000.0, help="Riccati oracle horizon")

    s = sub.add_parser("simulate", help="run one configuration")
    s.add_argument("config", nargs="?", help="key = value file; flags override it")
    _add_run_flags(s)

    w = sub.add_parser("sweep", help="run a grid of configurations")
    w.add_argument("spec")
    w.add_argument("--workers", type=int, default=None)
    w.add_argument("--exploratory", action="store_true",
                   help="also simulate grid points that no certificate covers")
    w.add_argument("--out", default=None, help="results CSV (default: <output>/sweep.csv)")

    sub.add_parser("verify", help="run the acceptance checks")

    pl = sub.add_parser("plot", help="SVG line chart of series.csv columns against t")
    pl.add_argument("csv")
    pl.add_argument("--keys", required=True,
                    help="comma list of columns; also inv_H, decay_bound, lambda")
    pl.add_argument("--damping", default=None)
    pl.add_argument("--n", type=int, default=None)
    pl.add_argument("--t-max", type=float, default=None)
    pl.add_argument("--title", default="")
    pl.add_argument("--out", default=None, help="SVG path (default: next to the CSV)")
    return p


# commands ----------------------------------------------------------------------


def cmd_certify(args) -> int:
    profile = parse_damping(args.damping)
    if args.h0 is not None:
        h0 = args.h0
    else:
        h0 = build_initial(args.family, args.amplitude, args.N)[0].h0
    certs = certify_all(h0, profile, args.n, t_max=args.t_max)
    sys.stdout.write(dump_json([c.to_dict() for c in certs]))
    return EXIT_OK if any(c.applicable for c in certs) else EXIT_NEGATIVE


def _resolve_config(args) -> RunConfig:
    base = RunConfig.from_file(args.config) if args.config else RunConfig()
    return RunConfig.from_mapping(_overrides(args), base=base)


def cmd_simulate(args) -> int:
    cfg = _resolve_config(args)
    out, summary = write_simulation(cfg)
    ev = summary["event"]
    print(f"{out / 'series.csv'}: {ev['reason']} at t={ev['t_detect']:.6g}, "
          f"monitors {'pass' if summary['monitors']['passed'] else 'FAIL'}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    spec = SweepSpec.from_mapping(parse_kv(Path(args.spec).read_text()))
    rows = run_sweep(spec, exploratory=args.exploratory, workers=args.workers)
    out = Path(args.out) if args.out else Path(spec.template.output) / "sweep.csv"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(rows_to_csv(rows))
    errors = sum(r["status"] == "error" for r in rows)
    skipped = sum(r["status"].startswith("skipped") for r in rows)
    print(f"{out}: {len(rows)} rows, {errors} errors, {skipped} skipped")
    return EXIT_OK


def cmd_verify(args) -> int:
    from .verify import run_all

    results = run_all(echo=print)
    failed = [r.number for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} criteria pass"
          + (f"; failing: {failed}" if failed else ""))
    return EXIT_NEGATIVE if failed else EXIT_OK


def cmd_plot(args) -> int:
    keys = [k.strip() for k in args.keys.split(",") if k.strip()]
    if not keys:
        raise UsageError("plot: --keys needs at least one column")
    series = TimeSeries.from_csv(Path(args.csv).read_text())
    profile = parse_damping(args.damping) if args.damping else None
    try:
        data = plot_series(series, keys, profile, args.n)
    except KeyError as exc:
        print(f"plot: {exc.args[0]}", file=sys.stderr)
        return EXIT_USAGE
    svg = line_chart(restricted(data, args.t_max), title=args.title)
    out = Path(args.out) if args.out else Path(args.csv).with_suffix(".svg")
    out.write_text(svg)
    print(out)
    return EXIT_OK


COMMANDS = {
    "certify": cmd_certify,
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "verify": cmd_verify,
    "plot": cmd_plot,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = None
    try:
        args = parser.parse_args(argv)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except (ConfigError, DomainError, OSError, ValueError) as exc:
        print(f"pjblowup {getattr(args, 'command', '')}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
