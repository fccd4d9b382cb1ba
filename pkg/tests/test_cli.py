import math
import subprocess
import sys

import numpy as np
import pytest

from anyon_hbt.cli import UsageError, main, parse_config, read_scan_csv
from anyon_hbt.correlator import c2_closed_form, scan
from anyon_hbt.sources import RadialSource


def run_cli(*args):
    return main([str(a) for a in args])


def test_parse_example():
    cfg = parse_config("--alphas 0,0.5,1 --source gaussian --r0 1 --qmax 2.5 --npoints 200".split())
    assert cfg.alphas == [0.0, 0.5, 1.0]
    assert cfg.source_kind == "gaussian"
    assert cfg.q_r0_max == 2.5 and cfg.n_points == 200
    assert cfg.q_grid[0] == 0.0 and cfg.q_grid[-1] == 2.5


def test_defaults_span_boson_to_fermion():
    cfg = parse_config([])
    assert cfg.alphas == [round(0.1 * i, 1) for i in range(11)]
    assert (cfg.source_kind, cfg.q_r0_min, cfg.q_r0_max, cfg.n_points) == ("gaussian", 0, 2.5, 200)


def test_alpha_out_of_range():
    with pytest.raises(UsageError, match=r"alpha out of \[0,1\]"):
        parse_config(["--alphas", "1.5"])


@pytest.mark.parametrize("argv, pattern", [
    (["--npoints", "1"], "npoints"),
    (["--qmin", "-1"], "qmin"),
    (["--qmin", "2", "--qmax", "1"], "qmax"),
    (["--alphas", ""], "non-empty"),
    (["--alphas", "0.5,0.5"], "distinct"),
    (["--r0", "0"], "r0"),
    (["--source", "tabulated"], "--table"),
    (["--mc", "10"], "1000"),
    (["--npoints", "many"], "npoints"),
    (["--bogus", "1"], "bogus"),
    (["--term-tol", "0"], "term_tolerance"),
])
def test_validation_errors_name_the_problem(argv, pattern):
    with pytest.raises(UsageError, match=pattern):
        parse_config(argv)


def test_config_precedence(tmp_path):
    conf = tmp_path / "run.conf"
    conf.write_text("# scan settings\nsource = step\nnpoints = 7   # short\nr0 = 2\n")
    cfg = parse_config(["--config", str(conf), "--source", "gaussian"])
    assert cfg.source_kind == "gaussian"
    assert cfg.n_points == 7
    assert cfg.r0 == 2.0


def test_config_unknown_key(tmp_path):
    conf = tmp_path / "run.conf"
    conf.write_text("source = step\ncolour = blue\n")
    with pytest.raises(UsageError, match="colour"):
        parse_config(["--config", str(conf)])


def test_config_policy_overrides(tmp_path):
    conf = tmp_path / "run.conf"
    conf.write_text("l-margin = 60\nterm_tol = 1e-13\nrmax_mult = 14\nquad_tol = 1e-7\nmc = 5000\nseed = 4\n")
    cfg = parse_config(["--config", str(conf)])
    assert cfg.trunc.l_margin == 60 and cfg.trunc.term_tolerance == 1e-13
    assert cfg.quad.r_max_multiplier == 14.0
    assert cfg.quad.rel_tol == 1e-7 and cfg.quad.abs_tol == pytest.approx(1e-8)
    assert cfg.mc_check == (5000, 4)


def test_missing_config_file(tmp_path):
    assert run_cli("--config", tmp_path / "nope.conf") == 1


def test_invalid_grid_writes_nothing(tmp_path, capsys):
    out = tmp_path / "scan.csv"
    assert run_cli("--qmin", 1, "--qmax", 1, "--out", out) == 1
    assert not out.exists()
    assert "qmax" in capsys.readouterr().err


def test_small_default_run(tmp_path, capsys):
    out = tmp_path / "default.csv"
    assert run_cli("--npoints", 11, "--out", out) == 0
    header, cols = read_scan_csv(out)
    assert header == "# anyon-hbt scan: source=gaussian r0=1"
    assert list(cols)[:3] == ["q_r0", "alpha_0", "alpha_0.1"]
    assert len(cols) == 12 and cols["q_r0"].size == 11
    assert cols["alpha_0"][0] == 2.0
    assert cols["alpha_1"][0] <= 1e-6
    summary = capsys.readouterr().out
    assert "wall time" in summary


def test_summary_error_estimates_nonzero(tmp_path, capsys):
    assert run_cli("--alphas", "0,0.3,1", "--npoints", 6, "--out", tmp_path / "s.csv") == 0
    lines = capsys.readouterr().out.splitlines()
    rows = [ln.split() for ln in lines[2:5]]
    assert [r[0] for r in rows] == ["0", "0.3", "1"]
    assert all(float(r[1]) > 0.0 for r in rows)


def test_step_crossing(tmp_path):
    out = tmp_path / "step.csv"
    assert run_cli("--alphas", "0,1", "--source", "step", "--qmin", 1.5, "--qmax", 2.3,
                   "--npoints", 81, "--out", out) == 0
    _, cols = read_scan_csv(out)
    q = cols["q_r0"]
    excess = cols["alpha_0"] - 1.0
    flips = np.nonzero(np.diff(np.sign(excess)))[0]
    assert len(flips) == 1
    assert 1.8 <= q[flips[0]] and q[flips[0] + 1] <= 2.0


def test_csv_round_trip(tmp_path):
    out = tmp_path / "rt.csv"
    assert run_cli("--alphas", "0,0.25,1", "--source", "step", "--r0", 1.5, "--npoints", 9,
                   "--out", out) == 0
    _, cols = read_scan_csv(out)
    src = RadialSource.step(1.5)
    curves = scan([0.0, 0.25, 1.0], src, np.linspace(0.0, 2.5, 9))
    for c in curves:
        stored = cols[f"alpha_{c.alpha.alpha:g}"]
        assert np.array_equal(stored, [float(f"{v:.11e}") for v in c.c2])
        assert np.all(np.abs(stored - c.c2) <= 5e-12 * np.maximum(np.abs(c.c2), 1e-300))


def test_deterministic_bytes_with_mc(tmp_path):
    args = ["--alphas", "0,0.6", "--npoints", 5, "--mc", 2000, "--seed", 9]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run_cli(*args, "--out", a) == 0
    assert run_cli(*args, "--out", b, "--workers", 2) == 0
    assert a.read_bytes() == b.read_bytes()
    names = a.read_text().splitlines()[1].split(",")
    assert names == ["q_r0", "alpha_0", "alpha_0_mc", "alpha_0_mcerr",
                     "alpha_0.6", "alpha_0.6_mc", "alpha_0.6_mcerr"]


def test_tabulated_source(tmp_path):
    table = tmp_path / "disk.txt"
    table.write_text("# units: r0\n0 1\n1 1\n")
    out = tmp_path / "tab.csv"
    assert run_cli("--alphas", "1", "--source", "tabulated", "--table", table, "--r0", 2,
                   "--npoints", 6, "--out", out) == 0
    header, cols = read_scan_csv(out)
    assert header == "# anyon-hbt scan: source=tabulated r0=2"
    want = [c2_closed_form("fermion", "step", q / 2, 2.0) for q in cols["q_r0"]]
    assert np.allclose(cols["alpha_1"], want, atol=1e-8)


def test_bad_table_file(tmp_path, capsys):
    table = tmp_path / "bad.txt"
    table.write_text("0 1 2\n")
    assert run_cli("--source", "tabulated", "--table", table, "--out", tmp_path / "o.csv") == 1
    assert "source error" in capsys.readouterr().err


def test_numerical_failure_exit_code(tmp_path, capsys):
    out = tmp_path / "fail.csv"
    assert run_cli("--alphas", "0.5", "--npoints", 3, "--qmin", 0.5, "--quad-tol", 1e-30,
                   "--out", out) == 2
    err = capsys.readouterr().err
    assert "alpha=0.5 q_r0=0.5" in err
    assert not out.exists()


def test_module_entry_point(tmp_path):
    out = tmp_path / "m.csv"
    proc = subprocess.run([sys.executable, "-m", "anyon_hbt", "--alphas", "0", "--npoints", "3",
                           "--out", str(out)], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    _, cols = read_scan_csv(out)
    assert cols["alpha_0"][-1] == pytest.approx(1 + math.exp(-25.0), abs=1e-10)
