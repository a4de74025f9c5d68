import math

import numpy as np
import pytest
import sympy as sp

from semimplicit.core import ConfigurationError, discrete_norms
from semimplicit.harness import CASES, REFERENCE, TABLE_CASES, get_case, reference_row
from semimplicit.harness.cli import main
from semimplicit.harness.reference_tables import REFERENCE_SCALE, reference_orders, scheme_key
from semimplicit.harness.study import (
    ConvergenceTable,
    RunConfig,
    TableRow,
    emit_table,
    eval_number,
    parse_config_text,
    parse_table,
    run_case,
    run_convergence_study,
    sweep_configs,
    timestep_rule,
)

x, t = sp.symbols("x t", real=True)


def _sym_source(case_id):
    """f = u_t - (spatial operator) for the case's PDE and exact solution."""
    if case_id in ("R1_convdiff", "M2_convdiff"):
        u = sp.sin(x + t)
        return sp.diff(u, t) + sp.diff(u**2 / 2, x) - sp.diff((u**2 + 2) * sp.diff(u, x), x)
    if case_id == "M1_diffusion":
        u = sp.sin(x - t)
        return sp.diff(u, t) - sp.diff((u**2 + 1) * sp.diff(u, x), x)
    if case_id in ("R3_biharmonic", "M4_biharmonic"):
        u = sp.exp(-t) * sp.sin(x)
        return sp.diff(u, t) + sp.diff((u**2 + 2) * sp.diff(u, x, 2), x, 2)
    lam = get_case(case_id).params["lambda"]
    u = sp.sqrt(2 * lam) * sp.cos((x - lam * t) / 2)
    return sp.diff(u, t) + sp.diff(u**3, x) + sp.diff(u * sp.diff(u**2, x, 2), x)


@pytest.mark.parametrize("case_id", sorted(CASES))
def test_manufactured_sources(case_id):
    case = get_case(case_id)
    prob = case.problem(16)
    f = sp.lambdify((x, t), sp.simplify(_sym_source(case_id)), "numpy")
    for tv in (0.0, 0.37, 1.3):
        ref = np.broadcast_to(f(prob.grid.x, tv), prob.grid.x.shape)
        got = prob.source(prob.grid.x, tv) if prob.source is not None else np.zeros_like(prob.grid.x)
        assert np.allclose(got, ref, atol=1e-12)


def test_timestep_rule():
    assert timestep_rule(0.5, 0.1, 2.0) == pytest.approx(0.025)
    assert timestep_rule(0.5, 0.1, 0.0, fallback_c=1.0) == pytest.approx(0.1)
    with pytest.raises(ConfigurationError):
        timestep_rule(0.0, 0.1, 1.0)


def test_eval_number():
    assert eval_number("pi/4") == pytest.approx(math.pi / 4)
    assert eval_number("2*pi") == pytest.approx(2 * math.pi)
    assert eval_number("0.5") == 0.5


def test_parse_config_text():
    cfg = parse_config_text("integrator = si-pc-bdf  # comment\np = 4\nn_list = 40, 80\nfinal_time = pi/4\nexact_start = yes\n")
    assert cfg.integrator == "si-pc-bdf" and cfg.p == 4 and cfg.n_list == (40, 80)
    assert cfg.final_time == pytest.approx(math.pi / 4) and cfg.exact_start
    for bad in ("p 4", "colour = red"):
        with pytest.raises(ConfigurationError):
            parse_config_text(bad)


def test_run_config_validation():
    with pytest.raises(ConfigurationError):
        RunConfig(integrator="euler")
    with pytest.raises(ConfigurationError):
        RunConfig(n_list=(80, 40))
    with pytest.raises(ConfigurationError):
        RunConfig(weno="weno32")
    assert RunConfig(p=2, integrator="si-pc-bdf").label() == "SI-PC^2 BDF2"


def _table():
    rows = [TableRow(40, 1e-3, 2e-3, 3e-3), TableRow(80, 1.25e-4, 2.5e-4, 3.75e-4, 3.0, 3.0, 3.0)]
    return ConvergenceTable("SI-R gamma=3/4", rows)


@pytest.mark.parametrize("fmt", ["csv", "markdown"])
def test_emit_parse_round_trip(fmt, tmp_path):
    t = _table()
    text = emit_table([t, ConvergenceTable("other", [TableRow(40, 1.0, 2.0, math.nan, note="failed")])], fmt,
                      tmp_path / "t.txt")
    assert (tmp_path / "t.txt").read_text() == text
    back = parse_table(text)
    assert [b.label for b in back] == ["SI-R gamma=3/4", "other"]
    assert back[0].rows[1].l2 == 2.5e-4 and back[0].rows[1].order_l1 == 3.0
    assert back[0].rows[0].order_l2 is None and math.isnan(back[1].rows[0].linf)
    assert emit_table(back[0], fmt) == emit_table(t, fmt)


def test_emit_single_row_and_empty():
    text = emit_table(ConvergenceTable("x", [TableRow(40, 1.0, 1.0, 1.0)]))
    assert len(text.splitlines()) == 2 and ",-," in text
    with pytest.raises(ConfigurationError):
        emit_table(ConvergenceTable("x", []))


def test_final_time_landing_and_zero():
    case = get_case("M4")
    res, err = run_case(case, RunConfig("si-pc-bdf", p=2, final_time=0.3), 40)
    assert res.state.time == pytest.approx(0.3, abs=1e-15)
    assert res.steps * res.dt == pytest.approx(0.3, rel=1e-12)
    res, err = run_case(get_case("R1"), RunConfig(final_time=0.0), 40)
    assert res.steps == 0 and np.max(np.abs(err)) == 0


def test_convergence_study_deterministic():
    cfg = RunConfig("rosenbrock", gamma="3/4", n_list=(40, 80))
    a = run_convergence_study("R3", cfg)
    b = run_convergence_study("R3", cfg)
    assert emit_table(a) == emit_table(b)
    assert a.rows[1].order_l2 > 2.5


def test_mass_tracking_conservative():
    res, _ = run_case(get_case("R2"), RunConfig(final_time=0.5), 80, track_mass=True)
    m = np.array(res.history_mass)
    assert m.size == res.steps + 1
    assert np.max(np.abs(m - m[0])) < 1e-12


def test_reference_tables():
    assert set(REFERENCE) == set(TABLE_CASES)
    for tid, case_id in TABLE_CASES.items():
        assert case_id in CASES
        keys = [scheme_key(c) for c in sweep_configs(case_id)]
        for key in keys:
            assert key in REFERENCE[tid], (tid, key)
    row = reference_row("R1", "13/50", 640)
    assert row[0] * REFERENCE_SCALE[0] == pytest.approx(2.4342e-7)
    assert reference_row("R1", "13/50", 12345) is None
    orders = reference_orders("R1", "13/50")
    assert 2.5 < orders[640] < 3.1


def test_sine_norm_matches_reference_convention():
    g = get_case("R1").grid(64)
    e = discrete_norms(np.sin(g.x), g.dx, normalize_by=2 * math.pi)
    scaled = np.array([e.l2, e.l1, e.linf]) * np.array(REFERENCE_SCALE)
    assert np.allclose(scaled, 1.0, atol=1e-3)


# --- CLI --------------------------------------------------------------------


def test_cli_tableau_validate(capsys):
    assert main(["tableau", "--gamma", "3/4", "--validate"]) == 0
    out = capsys.readouterr().out
    assert "52/297" in out and "order 3: satisfied" in out
    assert "residuals exact: True" in out and "stiffly accurate: true" in out


def test_cli_tableau_infeasible(capsys):
    assert main(["tableau", "--gamma", "1/2"]) == 1
    assert "error" in capsys.readouterr().err


def test_cli_usage_errors(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["bogus"])
    assert exc.value.code == 1
    assert main(["run", "--case", "nope"]) == 1


def test_cli_run_byte_identical(tmp_path, capsys):
    args = ["run", "--case", "M4", "--integrator", "si-pc-bdf", "--p", "2", "--N", "20", "40", "--format", "csv"]
    assert main(args + ["--out", str(tmp_path / "a.csv")]) == 0
    assert main(args + ["--out", str(tmp_path / "b.csv")]) == 0
    a, b = (tmp_path / "a.csv").read_bytes(), (tmp_path / "b.csv").read_bytes()
    assert a == b and a.startswith(b"scheme,N,L2")
    (tmp_path / "c.cfg").write_text("integrator = si-pc-bdf\np = 2\nn_list = 20 40\n")
    assert main(["run", "--case", "M4", "--config", str(tmp_path / "c.cfg"), "--format", "csv",
                 "--out", str(tmp_path / "c.csv")]) == 0
    assert (tmp_path / "c.csv").read_bytes() == a


def test_cli_sweep(capsys):
    assert main(["sweep", "--table", "M4", "--N", "40", "80", "--format", "csv"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0].startswith("scheme,N,L2,order_L2,ref_L2,ratio_L2")
    assert len(out) == 1 + 3 * 2


def test_cli_stability(tmp_path, capsys):
    assert main(["stability", "--gamma", "13/50", "--resolution", "64", "--y-samples", "100",
                 "--out-dir", str(tmp_path)]) == 0
    assert any(tmp_path.iterdir())


def test_cli_verify(capsys):
    assert main(["verify"]) == 0
    out = capsys.readouterr().out
    assert "FAIL" not in out and out.count("PASS") >= 6
