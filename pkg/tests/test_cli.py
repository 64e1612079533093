import csv
import io
import json
import re

import pytest

from pjblowup.cli import main
from pjblowup.config import ConfigError, RunConfig, SweepSpec, parse_kv
from pjblowup.harness import rows_to_csv, run_sweep
from pjblowup.svg import line_chart


def run_cli(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


# config ---------------------------------------------------------------------------


def test_parse_kv_grammar():
    text = "# header\n\nn = 3   # trailing\ndamping=sat:1,2\n"
    assert parse_kv(text) == {"n": "3", "damping": "sat:1,2"}
    with pytest.raises(ConfigError):
        parse_kv("no equals sign")
    with pytest.raises(ConfigError):
        parse_kv(" = 3")


def test_run_config_defaults_and_overrides(tmp_path):
    cfg_file = tmp_path / "run.cfg"
    cfg_file.write_text("n = 3\nN = 256\n")
    cfg = RunConfig.from_file(cfg_file)
    assert cfg.n == 3 and cfg.N == 256 and cfg.damping == "zero"
    over = RunConfig.from_mapping({"N": "512", "damping": None}, base=cfg)
    assert over.N == 512 and over.n == 3
    with pytest.raises(ConfigError):
        RunConfig.from_mapping({"bogus": "1"})
    with pytest.raises(ConfigError):
        RunConfig.from_mapping({"N": "lots"})
    assert RunConfig.from_mapping(parse_kv(cfg.to_text())) == cfg


def test_sweep_spec_points():
    spec = SweepSpec.from_mapping(parse_kv("n = 3 2\ndamping = zero const:1\namplitude = 1 2\nN = 128\n"))
    pts = spec.points()
    assert len(pts) == 8
    assert {p.N for p in pts} == {128}
    h0 = SweepSpec.from_mapping(parse_kv("h0 = -0.3\nN = 128\n"))
    assert h0.points()[0].amplitude == pytest.approx(0.6, rel=1e-9)
    with pytest.raises(ConfigError):
        SweepSpec.from_mapping({"damping": "wobbly"})
    with pytest.raises(ConfigError):
        SweepSpec.from_mapping({"workers": "0"})


# svg ------------------------------------------------------------------------------


def test_line_chart_structure():
    svg = line_chart({"a": ([0, 1, 2], [0, 1, 4]), "b": ([0, 1, 2], [1, float("nan"), 3])}, title="t")
    assert svg.startswith("<svg") and svg.rstrip().endswith("</svg>")
    assert svg.count('class="series" data-label="a"') == 1
    # NaN splits b into two single-point runs
    assert svg.count('data-label="b"') == 2
    with pytest.raises(ValueError):
        line_chart({})


# certify --------------------------------------------------------------------------


def test_certify_unbounded(capsys):
    code, out, _ = run_cli(capsys, "certify", "--n", "2", "--damping", "exp:1", "--h0", "-1")
    certs = {c["theorem_id"]: c for c in json.loads(out)}
    assert code == 0
    assert certs["unbounded_4_1"]["applicable"]
    assert certs["unbounded_4_1"]["threshold"] == pytest.approx(-0.8385, abs=5e-3)


def test_certify_exit_two_when_nothing_applies(capsys):
    code, out, _ = run_cli(capsys, "certify", "--n", "2", "--damping", "const:1", "--h0", "-0.4")
    assert code == 2
    assert not any(c["applicable"] for c in json.loads(out))


def test_certify_yuen(capsys):
    code, out, _ = run_cli(capsys, "certify", "--n", "2", "--damping", "zero", "--h0", "-1")
    certs = {c["theorem_id"]: c for c in json.loads(out)}
    assert code == 0 and certs["yuen_2_1"]["t_star"] == 0.5


def test_certify_from_family(capsys):
    code, out, _ = run_cli(capsys, "certify", "--n", "2", "--damping", "const:1", "--family", "sin2", "--amplitude", "2")
    certs = {c["theorem_id"]: c for c in json.loads(out)}
    assert code == 0 and certs["bounded_3_1"]["h0"] == pytest.approx(-1.0, abs=1e-10)


@pytest.mark.parametrize(
    "argv",
    [
        ["certify", "--n", "2", "--damping", "zero"],
        ["certify", "--n", "two", "--damping", "zero", "--h0", "-1"],
        ["certify", "--n", "2", "--damping", "nonsense", "--h0", "-1"],
        ["certify", "--n", "1", "--damping", "zero", "--h0", "-1"],
        ["frobnicate"],
        [],
    ],
)
def test_malformed_flags_exit_one(capsys, argv):
    code, _, _ = run_cli(capsys, *argv)
    assert code == 1


# simulate -------------------------------------------------------------------------


def test_simulate_deterministic(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("damping = const:1\nN = 128\nt_end = 1.0\n")
    for name in ("a", "b"):
        assert run_cli(capsys, "simulate", str(cfg), "--out", str(tmp_path / name))[0] == 0
    assert (tmp_path / "a/series.csv").read_bytes() == (tmp_path / "b/series.csv").read_bytes()
    summary, other = (json.loads((tmp_path / f"{d}/summary.json").read_text()) for d in "ab")
    other["config"]["output"] = summary["config"]["output"]
    assert summary == other
    # full resolved config, defaults included, with the flag override applied
    assert summary["config"] == RunConfig(damping="const:1", N=128, t_end=1.0, output=str(tmp_path / "a")).to_dict()
    assert {"event", "certificates", "monitors", "compatibility", "h0"} <= set(summary)
    header = (tmp_path / "a/series.csv").read_text().splitlines()[0]
    assert header == "t,H,l2vsq,max_v,min_u,dt,eq8_residual"


def test_simulate_zero_amplitude(tmp_path, capsys):
    code, _, _ = run_cli(capsys, "simulate", "--amplitude", "0", "--N", "128", "--t-end", "0.5", "--out", str(tmp_path))
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert code == 0
    assert summary["event"]["reason"] == "horizon_reached"
    assert summary["monitors"]["passed"]
    assert all(m["worst"] == 0.0 for m in summary["monitors"]["monitors"].values())


def test_simulate_bad_config(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("colour = blue\n")
    assert run_cli(capsys, "simulate", str(cfg))[0] == 1
    assert run_cli(capsys, "simulate", str(tmp_path / "missing.cfg"))[0] == 1


# sweep -----------------------------------------------------------------------------


SWEEP_2X2 = "n = 2 3\namplitude = 1 2\ndamping = zero\nN = 128\nt_end = 1.5\n"


def read_rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_sweep_worker_count_independent(tmp_path, capsys):
    spec = tmp_path / "sweep.cfg"
    spec.write_text(SWEEP_2X2)
    outs = []
    for w in ("1", "4"):
        out = tmp_path / f"w{w}.csv"
        assert run_cli(capsys, "sweep", str(spec), "--workers", w, "--out", str(out))[0] == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
    rows = read_rows(outs[0].decode())
    assert len(rows) == 4
    assert [(r["n"], r["amplitude"]) for r in rows] == [("2", "1.0"), ("2", "2.0"), ("3", "1.0"), ("3", "2.0")]
    for r in rows:
        assert r["status"] == "ok"
        if r["n"] == "2":
            U0 = float(r["amplitude"]) / 2
            assert float(r["yuen_2_1"]) == pytest.approx(1 / (2 * U0))
            assert r["regime"] == "theorem"
        else:
            assert r["yuen_2_1"] == "n/a" and r["regime"] == "riccati_only"


def test_sweep_open_regime_needs_flag(tmp_path, capsys):
    spec = tmp_path / "open.cfg"
    spec.write_text("n = 2\ndamping = const:1\nh0 = -0.3\nN = 128\nt_end = 0.5\n")
    out = tmp_path / "open.csv"
    run_cli(capsys, "sweep", str(spec), "--out", str(out))
    (row,) = read_rows(out.read_text())
    assert row["regime"] == "exploratory"
    assert row["status"].startswith("skipped")
    assert row["bounded_3_1"] == "inapplicable" and row["riccati_numeric"] == "inapplicable"
    assert row["t_star"] == "" and row["t_detect"] == ""
    run_cli(capsys, "sweep", str(spec), "--exploratory", "--out", str(out))
    (row,) = read_rows(out.read_text())
    assert row["regime"] == "exploratory" and row["status"] == "ok" and row["t_star"] == ""


def test_sweep_records_row_errors():
    spec = SweepSpec.from_mapping(parse_kv("n = 2\namplitude = 1 2\nfamily = custom\nN = 128\n"))
    rows = run_sweep(spec)
    assert len(rows) == 2
    assert all(r["status"] == "error" and "samples" in r["error"] for r in rows)
    assert rows_to_csv(rows).count("\n") == 3


# plot ---------------------------------------------------------------------------------


@pytest.fixture(scope="module")
def damped_csv(tmp_path_factory):
    d = tmp_path_factory.mktemp("plot")
    assert main(["simulate", "--damping", "const:1", "--N", "128", "--out", str(d)]) == 0
    return d / "series.csv"


def polyline_points(svg, label):
    m = re.search(rf'data-label="{label}"[^>]*points="([^"]+)"', svg)
    return [tuple(map(float, p.split(","))) for p in m.group(1).split()]


def test_plot_decay_bound_above_H(damped_csv, tmp_path, capsys):
    out = tmp_path / "h.svg"
    code, _, _ = run_cli(capsys, "plot", str(damped_csv), "--keys", "H,decay_bound",
                         "--damping", "const:1", "--t-max", "0.6", "--out", str(out))
    assert code == 0
    svg = out.read_text()
    H, bound = polyline_points(svg, "H"), polyline_points(svg, "decay_bound")
    assert len(H) == len(bound) > 10
    # SVG y grows downwards: the bound is above H where its y is smaller or equal
    assert all(b[1] <= h[1] + 1e-9 for h, b in zip(H, bound))


def test_plot_lambda_sandwich(damped_csv, tmp_path, capsys):
    out = tmp_path / "l.svg"
    code, _, _ = run_cli(capsys, "plot", str(damped_csv), "--keys", "inv_H,lambda",
                         "--damping", "const:1", "--n", "2", "--out", str(out))
    assert code == 0
    assert out.read_text().count("<polyline") >= 2


@pytest.mark.parametrize(
    "keys, extra",
    [("", []), (" , ", []), ("H,nope", []), ("decay_bound", []), ("lambda", ["--damping", "exp:1", "--n", "2"])],
)
def test_plot_errors(damped_csv, tmp_path, capsys, keys, extra):
    code, _, _ = run_cli(capsys, "plot", str(damped_csv), "--keys", keys, "--out", str(tmp_path / "x.svg"), *extra)
    assert code == 1
