import json
import math

import numpy as np
import pytest

from pjblowup import grid, pde_solver
from pjblowup.certificates import certify_bounded
from pjblowup.damping import DampingProfile, parse_damping
from pjblowup.diagnostics import (
    CSV_COLUMNS,
    TimeSeries,
    TimeSeriesRecord,
    build_report,
    cauchy_schwarz_monitor,
    decay_bound_monitor,
    energy_identity_residual,
    eq8_residual,
    lambda_monitor,
    make_record,
    resolved_mask,
    time_derivative,
)
from pjblowup.pde_solver import ProblemParams, SolverConfig, build_initial, run

ZERO = DampingProfile.zero()


def bump_initial(N, A=4.0, p=8):
    x = grid.nodes(N)
    s = np.clip((x - 0.5) / 0.5, 0.0, 1.0)
    return build_initial("custom", 0.0, N, samples=A * 4.0**p * s**p * (1 - s) ** p)[0]


def rest_series(m=6):
    return TimeSeries(make_record(0.1 * i, np.zeros(129), 1 / 128, 0.1) for i in range(m))


# time derivative --------------------------------------------------------------


@pytest.mark.parametrize("points, expected_order", [(3, 2), (5, 4)])
def test_time_derivative_order(points, expected_order):
    rng = np.random.default_rng(11)
    t = np.concatenate([[0.0], np.cumsum(rng.uniform(0.5, 1.5, 40))])
    t /= t[-1]
    errs = []
    for _ in range(3):
        errs.append(np.max(np.abs(time_derivative(t, np.sin(3 * t), points) - 3 * np.cos(3 * t))))
        t = np.sort(np.concatenate([t, 0.5 * (t[1:] + t[:-1])]))  # bisect every step
    rates = [math.log2(a / b) for a, b in zip(errs, errs[1:])]
    assert min(rates) > expected_order - 0.5


def test_time_derivative_short_and_bad():
    assert np.all(np.isnan(time_derivative([0, 1], [0, 1], 3)))
    assert np.all(np.isnan(time_derivative([0, 1, 2, 3], [0, 1, 2, 3], 5)))
    with pytest.raises(ValueError):
        time_derivative([0, 1, 2], [0, 1, 2], 4)


# records and CSV ------------------------------------------------------------------


def test_record_H_is_minus_simpson():
    _, st = build_initial("poly_bump", 1.3, 512)
    rec = make_record(0.0, st.v, st.dx)
    assert abs(rec.H + grid.simpson(st.v, st.dx)) <= 1e-14
    assert rec.l2vsq >= 0


def test_csv_round_trip():
    _, st = build_initial("sin2", 2.0, 128)
    s = TimeSeries([make_record(0.0, st.v, st.dx), make_record(0.25, 0.5 * st.v, st.dx, 0.25)])
    text = s.to_csv()
    assert text.splitlines()[0] == ",".join(CSV_COLUMNS)
    back = TimeSeries.from_csv(text)
    for a, b in zip(s, back):
        for c in CSV_COLUMNS:
            assert getattr(a, c) == getattr(b, c) or (math.isnan(getattr(a, c)) and math.isnan(getattr(b, c)))


# identities -------------------------------------------------------------------------


def test_eq8_zero_on_rest_state():
    s = rest_series()
    assert np.all(eq8_residual(s, DampingProfile.constant(1.0), 2) == 0)
    assert np.all(energy_identity_residual(s, -1.0, ZERO) == 0)


def test_eq8_mutation_wrong_coefficient():
    data = bump_initial(256)
    res = run(data, ProblemParams(3), ZERO, SolverConfig(N=256, t_end=0.1))
    good = np.nanmax(eq8_residual(res.series, ZERO, 3))
    bad = np.nanmax(eq8_residual(res.series, ZERO, 3, coeff=1.0))
    assert good < 1e-5
    assert bad > 0.1


def test_energy_mutation_flipped_quadratic(monkeypatch):
    data = bump_initial(256)
    cfg = SolverConfig(N=256, t_end=0.1)
    honest = run(data, ProblemParams(2), ZERO, cfg)
    orig = pde_solver._rhs_parts

    def flipped(v, dx, beta):
        u, transport, quadratic = orig(v, dx, beta)
        return u, transport, -quadratic

    monkeypatch.setattr(pde_solver, "_rhs_parts", flipped)
    mutant = run(data, ProblemParams(2), ZERO, cfg)
    assert np.nanmax(energy_identity_residual(honest.series, -1.0, ZERO)) < 1e-5
    assert np.nanmax(energy_identity_residual(mutant.series, -1.0, ZERO)) > 0.1


# pointwise monitors ----------------------------------------------------------------


def test_cauchy_schwarz_sin2():
    A = 2.0
    _, st = build_initial("sin2", A, 1024)
    rec = make_record(0.0, st.v, st.dx)
    assert rec.H**2 == pytest.approx(A**2 / 4, rel=1e-12)
    assert rec.l2vsq == pytest.approx(3 * A**2 / 8, rel=1e-12)
    assert cauchy_schwarz_monitor(rec) == 0.0
    assert rec.H**2 < rec.l2vsq  # strict for a nonconstant state


def test_cauchy_schwarz_rest_and_strict():
    assert cauchy_schwarz_monitor(make_record(0.0, np.zeros(129), 1 / 128)) == 0.0
    rng = np.random.default_rng(5)
    for _ in range(20):
        v = rng.normal(size=129)
        v[0] = v[-1] = 0
        rec = make_record(0.0, v, 1 / 128)
        assert rec.H**2 < rec.l2vsq


def test_decay_bound_examples():
    _, st = build_initial("sin2", 2.0, 256)
    rec = make_record(0.0, st.v, st.dx)
    assert decay_bound_monitor(rec, rec.H, DampingProfile.constant(1.0)) == 0.0
    late = TimeSeriesRecord(t=0.5, H=-0.9, l2vsq=1.0, max_v=1.0, min_u=-1.0, dt=0.1)
    assert decay_bound_monitor(late, -1.0, ZERO) == pytest.approx(0.1)
    assert decay_bound_monitor(late, -1.0, DampingProfile.constant(1.0)) == 0.0


def test_lambda_monitor_examples():
    h0, M, n = -1.0, 1.0, 2
    at0 = TimeSeriesRecord(t=0.0, H=h0, l2vsq=1.0, max_v=1.0, min_u=-1.0, dt=0.0)
    assert lambda_monitor(at0, h0, M, n) == 0.0
    # 1/H above zero and below Lambda are both violations
    pos = TimeSeriesRecord(t=0.1, H=0.5, l2vsq=1.0, max_v=1.0, min_u=-1.0, dt=0.0)
    assert lambda_monitor(pos, h0, M, n) > 0
    too_slow = TimeSeriesRecord(t=0.6, H=-1.0, l2vsq=1.0, max_v=1.0, min_u=-1.0, dt=0.0)
    assert lambda_monitor(too_slow, h0, M, n) > 0
    after = TimeSeriesRecord(t=certify_bounded(h0, M, n).t_star, H=-1.0, l2vsq=1, max_v=1, min_u=-1, dt=0)
    assert lambda_monitor(after, h0, M, n) == 0.0
    assert lambda_monitor(at0, -0.4, M, n) == 0.0


# report ------------------------------------------------------------------------------


def test_report_on_damped_run():
    data, _ = build_initial("sin2", 2.0, 256)
    prof = parse_damping("const:1")
    res = run(data, ProblemParams(2), prof, SolverConfig(N=256))
    rep = build_report(res.series, data.h0, prof, 2, -1.0, v0_max=2.0)
    assert rep.results["decay_bound"].passed
    assert rep.results["cauchy_schwarz"].passed
    assert rep.results["h_negative"].passed
    assert not rep.results["lambda_sandwich"].skipped
    assert rep.resolved_records + rep.under_resolved_records == len(res.series)
    assert rep.under_resolved_records > 0
    json.dumps(rep.to_dict())


def test_report_gates():
    data, _ = build_initial("sin2", 0.8, 128)  # h0 = -0.4
    prof = parse_damping("const:1")
    res = run(data, ProblemParams(2), prof, SolverConfig(N=128, t_end=0.5))
    rep = build_report(res.series, data.h0, prof, 2, -1.0, v0_max=0.8)
    assert rep.results["lambda_sandwich"].skipped
    exp = parse_damping("exp:1")
    rep = build_report(res.series, data.h0, exp, 2, -1.0, v0_max=0.8)
    assert rep.results["lambda_sandwich"].skipped
    rest = rest_series()
    rep = build_report(rest, 0.0, ZERO, 2, -1.0, v0_max=0.0)
    assert rep.results["decay_bound"].skipped and rep.passed


def test_resolved_mask_cap():
    recs = [TimeSeriesRecord(t=i, H=-1, l2vsq=1, max_v=10.0**i, min_u=-1, dt=1) for i in range(6)]
    mask = resolved_mask(TimeSeries(recs), v0_max=2.0, cap_factor=1e3)
    assert mask.tolist() == [True, True, True, True, False, False]
