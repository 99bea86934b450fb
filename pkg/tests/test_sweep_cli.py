import csv
import io
import math
import re
from dataclasses import replace

import numpy as np
import pytest

from pairlind.cli import main
from pairlind.config import ConfigError, SweepConfig, Tolerances, load_config, parse_config
from pairlind.errors import InvalidArgument
from pairlind.model import derive_rates, with_rates
from pairlind.output import emit_csv, emit_svg, read_csv, write_csv
from pairlind.sweep import ROW_FIELDS, SweepRow, cross_validate, evaluate_point, run_sweep, sweep_grid

MODEL = """
[model]
omega_c_hz = 27.5e6
delta_q_hz = 3e9
g_hz = 18e6
gamma0_hz = 0.5e6
kappa_hz = 2e3
n_bar = 2
delta_omega_hz = 50e6
"""


def write_cfg(tmp_path, extra="", model=MODEL, name="run.ini"):
    path = tmp_path / name
    path.write_text(model + extra, encoding="utf-8")
    return str(path)


def small_cfg(**kw):
    base = dict(js=(0.25, 0.75), points=41, n_bar_list=(2.0,),
                tolerances=Tolerances(tail=1e-12))
    base.update(kw)
    return SweepConfig(**base)


def row(**kw):
    base = dict(delta_omega_hz=1.0, n_bar=2.0, j=0.25, eta=3.0, n_mean=1.0, n_sat=2.0, g2=3.0,
                g4=5.0, sz0=-0.5, good_cavity=True, below_saturation=True, cooling_regime=True,
                mode="analytic")
    base.update(kw)
    return SweepRow(**base)


# --- config -------------------------------------------------------------------

def test_parse_config_defaults():
    cfg = parse_config(MODEL)
    assert cfg.model_hz["kappa"] == 2e3 and cfg.n_bar == 2.0 and cfg.delta_omega_hz == 50e6
    assert cfg.grid_bounds() == (-55e6, 55e6)
    assert cfg.mode == "analytic" and cfg.points == 401 and cfg.js == (0.25,)


def test_parse_config_sweep_and_bath():
    text = MODEL.replace("kappa_hz = 2e3\n", "") + """
[bath]
nu_hz = 56e6
chi_tilde_hz = 1e3
chi_hz = 1e6
[sweep]
j = both
n_bar_list = 1, 4
points = 11
mode = reduced-numeric
"""
    cfg = parse_config(text)
    assert cfg.js == (0.25, 0.75) and cfg.n_bar_list == (1.0, 4.0)
    assert cfg.model_hz["kappa"] == pytest.approx(4e6 / 2e6)
    assert cfg.chi_bar_hz == pytest.approx(4e6 / 2e6)


@pytest.mark.parametrize("extra, match", [
    ("[sweep]\npoints = 1\n", "points"),
    ("[sweep]\nmode = fast\n", "mode"),
    ("[sweep]\nj = 0.5\n", "j"),
    ("[sweep]\nn_bar_list = 1, -2\n", "n_bar_list"),
    ("[sweep]\ndelta_omega_min_hz = 5\ndelta_omega_max_hz = 1\n", "delta_omega_min_hz"),
    ("[sweep]\ncolour = red\n", "unknown key"),
    ("[plot]\nx = 1\n", "unknown section"),
    ("[tolerances]\ntail = abc\n", "tail"),
])
def test_parse_config_errors(extra, match):
    with pytest.raises(ConfigError, match=match):
        parse_config(MODEL + extra)


def test_parse_config_missing_model_key():
    with pytest.raises(ConfigError, match="g_hz"):
        parse_config(MODEL.replace("g_hz = 18e6\n", ""))


def test_load_config_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "absent.ini")


# --- sweep --------------------------------------------------------------------

def test_grid_contains_symmetry_point():
    grid = sweep_grid(small_cfg())
    assert len(grid) == 41 and 0.0 in grid
    assert grid[0] == -55e6 and grid[-1] == 55e6


def test_sweep_rows_and_order():
    rows = run_sweep(small_cfg())
    assert len(rows) == 82
    assert [r.j for r in rows[:41]] == [0.25] * 41
    assert all(a.delta_omega_hz < b.delta_omega_hz for a, b in zip(rows[:40], rows[1:41]))


def test_sweep_flag_consistency():
    for r in run_sweep(small_cfg()):
        if r.n_mean is not None and r.n_sat is not None:
            assert r.below_saturation == (r.n_mean < r.n_sat)
        if r.eta is not None:
            assert r.cooling_regime == (r.eta > 1)
        if not r.cooling_regime:
            assert r.n_mean is None and r.g2 is None
        for name in ("eta", "n_mean", "n_sat", "g2", "g4", "sz0"):
            v = getattr(r, name)
            assert v is None or math.isfinite(v)


def test_sweep_deterministic():
    cfg = small_cfg(points=21)
    assert run_sweep(cfg) == run_sweep(cfg)


def test_sweep_parallel_matches_serial():
    cfg = small_cfg(points=21)
    assert run_sweep(cfg, jobs=2) == run_sweep(cfg)


def test_failed_point_is_recorded_not_raised():
    r = evaluate_point(small_cfg(), -55e6, 2.0, 0.25)
    assert r.status != "ok" and r.n_mean is None and not r.cooling_regime


def test_reduced_numeric_matches_analytic_on_valid_points():
    cfg = small_cfg(points=21, js=(0.25,))
    ana = run_sweep(cfg)
    num = run_sweep(replace(cfg, mode="reduced-numeric"))
    checked = 0
    for a, n in zip(ana, num):
        if a.n_mean is not None and n.n_mean is not None and a.eta >= 1.5:
            assert n.n_mean == pytest.approx(a.n_mean, rel=1e-6)
            checked += 1
    assert checked > 5


def test_full_numeric_mode_runs():
    cfg = small_cfg(points=3, js=(0.25,), delta_omega_min_hz=40e6, delta_omega_max_hz=50e6,
                    mode="full-numeric", tolerances=Tolerances(tail=1e-8))
    rows = run_sweep(cfg)
    assert all(r.status == "ok" and r.n_mean > 0 for r in rows)


# --- output -------------------------------------------------------------------

def test_csv_two_rows_three_lines(tmp_path):
    path = emit_csv([row(), row(delta_omega_hz=2.0)], tmp_path / "a.csv")
    lines = path.read_text(encoding="utf-8").splitlines()
    assert len(lines) == 3
    assert lines[0] == ",".join(ROW_FIELDS)


def test_csv_undefined_is_empty(tmp_path):
    path = emit_csv([row(g2=None, g4=None)], tmp_path / "a.csv")
    text = path.read_text(encoding="utf-8")
    assert "nan" not in text.lower()
    rec = next(csv.DictReader(io.StringIO(text)))
    assert rec["g2"] == "" and rec["g4"] == "" and rec["good_cavity"] == "true"


def test_csv_roundtrip_bit_identical(tmp_path):
    rows = run_sweep(small_cfg(points=21))
    back = read_csv(emit_csv(rows, tmp_path / "s.csv"))
    assert back == rows


def test_write_csv_stream():
    buf = io.StringIO()
    write_csv([row()], buf)
    assert buf.getvalue().count("\n") == 2


def test_emit_csv_unwritable(tmp_path):
    with pytest.raises(OSError):
        emit_csv([row()], tmp_path / "missing" / "a.csv")


def test_svg_series_and_labels(tmp_path):
    rows = run_sweep(small_cfg(points=11, n_bar_list=(1.0, 2.0)))
    text = emit_svg(rows, tmp_path / "p.svg", y="g2").read_text(encoding="utf-8")
    assert text.count("<polyline") == 4
    assert 'class="xlabel"' in text and "delta_omega_hz" in text
    assert 'class="ylabel"' in text and ">g2<" in text
    assert "href" not in text  # self-contained
    assert text.startswith("<svg") and text.rstrip().endswith("</svg>")


def test_svg_errors(tmp_path):
    with pytest.raises(InvalidArgument):
        emit_svg([], tmp_path / "p.svg")
    with pytest.raises(InvalidArgument):
        emit_svg([row()], tmp_path / "p.svg", y="mode")


# --- cross validation ------------------------------------------------------------

def test_cross_validate_ref_point(ref_point):
    rep = cross_validate(ref_point, 0.25)
    assert rep.deviations[("analytic", "oracle")] < 1e-10
    assert rep.deviations[("analytic", "reduced")] < 1e-6


def test_cross_validate_kappa_only_point(ref_point):
    p = ref_point
    r = with_rates(derive_rates(replace(p, omega_r=2 * p.omega_c)), p.kappa, p.n_bar,
                   Gamma_up=0.0, Gamma_down=0.0)
    assert r.eta == pytest.approx((1 + p.n_bar) / p.n_bar)
    rep = cross_validate(p, 0.25, rates=r)
    for s in rep.stats.values():
        assert s.n_mean == pytest.approx(2 * p.n_bar, rel=1e-6)


def test_cross_validate_synthetic_eta_two(ref_point):
    p = replace(ref_point, kappa=0.0, n_bar=0.0, omega_r=2 * ref_point.omega_c)
    r = with_rates(derive_rates(p), 0.0, 0.0, Gamma_up=1e4, Gamma_down=2e4)
    assert r.eta == 2.0
    rep = cross_validate(p, 0.25, rates=r, include_full=False, tail=1e-14)
    want = 2.0 ** -(np.arange(20) + 1.0)
    for name, pops in rep.populations.items():
        np.testing.assert_allclose(pops[:20], want, rtol=0, atol=1e-12, err_msg=name)


def test_cross_validate_with_full(ref_point):
    rep = cross_validate(ref_point, 0.25, include_full=True, tail=1e-8)
    assert "full" in rep.stats and ("reduced", "full") in rep.deviations


# --- CLI ---------------------------------------------------------------------------

def test_cli_derive(tmp_path, capsys):
    assert main(["derive", "--config", write_cfg(tmp_path), "--omega-r-hz", "55e6"]) == 0
    out = capsys.readouterr().out
    g2 = float(re.search(r"^g2_hz = (\S+)$", out, re.M).group(1))
    assert g2 == pytest.approx(90.0e3, rel=1e-3)


def test_cli_bath_rates(capsys):
    args = ["bath-rates", "--nu-hz", "56e6", "--chi-hz", "1e6", "--chi-tilde-hz", "1e3",
            "--omega-c-hz", "27.5e6"]
    assert main(args) == 0
    out = capsys.readouterr().out
    assert float(re.search(r"kappa_hz = (\S+)", out).group(1)) == pytest.approx(2.0)


def test_cli_sweep_writes_files(tmp_path):
    cfg = write_cfg(tmp_path, "[sweep]\npoints = 11\nj = both\n")
    csv_path, svg_path = tmp_path / "o.csv", tmp_path / "o.svg"
    assert main(["sweep", "--config", cfg, "--csv", str(csv_path), "--svg", str(svg_path)]) == 0
    assert len(csv_path.read_text().splitlines()) == 23
    assert svg_path.read_text().count("<polyline") == 2


def test_cli_sweep_stdout_and_j_override(tmp_path, capsys):
    cfg = write_cfg(tmp_path, "[sweep]\npoints = 5\n")
    assert main(["sweep", "--config", cfg, "--j", "0.75"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 6 and all(",0.75," in ln for ln in lines[1:])


def test_cli_steady_report(tmp_path, capsys):
    assert main(["steady", "--config", write_cfg(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert "analytic vs oracle" in out and "reduced" in out


def test_cli_simulate(tmp_path):
    out = tmp_path / "t.csv"
    args = ["simulate", "--config", write_cfg(tmp_path), "--t-final-s", "1e-5",
            "--points", "5", "--csv", str(out)]
    assert main(args) == 0
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 5
    n = [float(r["n_mean"]) for r in rows]
    assert n[-1] < n[0]
    assert all(float(r["parity_even"]) == 1.0 for r in rows)


def test_cli_simulate_full_model(tmp_path):
    out = tmp_path / "t.csv"
    args = ["simulate", "--config", write_cfg(tmp_path), "--t-final-s", "1e-6", "--points", "3",
            "--model", "full", "--m-cutoff", "8", "--csv", str(out)]
    assert main(args) == 0
    rows = list(csv.DictReader(out.open()))
    assert float(rows[0]["sz"]) == pytest.approx(-1.0, abs=1e-14)


def test_cli_exit_code_config_error(tmp_path):
    bad = write_cfg(tmp_path, "[sweep]\nmode = nope\n")
    assert main(["sweep", "--config", bad]) == 2
    assert main(["derive", "--config", str(tmp_path / "absent.ini")]) == 2
    assert main(["derive", "--config", write_cfg(tmp_path), "--j", "0.5"]) == 2


def test_cli_exit_code_unwritable_output(tmp_path):
    cfg = write_cfg(tmp_path, "[sweep]\npoints = 3\n")
    assert main(["sweep", "--config", cfg, "--csv", str(tmp_path / "no" / "x.csv")]) == 2


def test_cli_exit_code_solver_failure(tmp_path):
    # eta <= 1 at negative detuning: no normalizable steady state
    cfg = write_cfg(tmp_path)
    assert main(["steady", "--config", cfg, "--delta-omega-hz=-30e6", "--omega-r-hz", "55e6"]) == 3
    assert main(["simulate", "--config", cfg, "--t-final-s", "1.0", "--model", "full",
                 "--m-cutoff", "8", "--omega-r-hz", "55e6", "--max-steps", "10"]) == 3
