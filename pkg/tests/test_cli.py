"""Command line behavior: outputs, manifests, exit codes, determinism."""

import json

import numpy as np
import pytest

import coltrans
from coltrans.cli import main

BASE_INI = """\
[params]
D = 0.1
v = 1.0
ell = 1.0

[grid]
t_end = 1.5
nx = 21
nt = 17

[g]
kind = constant
value = 1.0

[exit]
kind = computed
n_grid = 64

[policy]
n_max = 40
tail_tol = 1e-8
"""


def write_ini(tmp_path, text, name="run.ini"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def read_rows(path):
    lines = path.read_text().splitlines()
    rows = [[float(c) for c in ln.split(",")] for ln in lines[1:]]
    return lines[0], rows


# -- solve --------------------------------------------------------------------

def test_solve_outputs_and_manifest(tmp_path):
    ini = write_ini(tmp_path, BASE_INI)
    out = tmp_path / "res"
    assert main(["solve", "--config", ini, "--out", str(out), "--quiet"]) == 0

    header, rows = read_rows(out / "profile.csv")
    assert header == "t,x,C"
    assert len(rows) == 17 * 21

    header, bt = read_rows(out / "breakthrough.csv")
    assert header == "t,C_exit,C_flux_exit"
    assert len(bt) == 17
    assert bt[0][0] == 0.0 and bt[-1][0] == 1.5

    man = json.loads((out / "manifest.json").read_text())
    assert man["command"] == "solve"
    assert man["version"] == coltrans.__version__
    assert man["config"] == BASE_INI
    assert man["params"] == {"R": 1.0, "D": 0.1, "v": 1.0, "mu": 0.0,
                             "gamma": 0.0, "ell": 1.0}
    assert man["grid"] == {"t0": 0.0, "t_end": 1.5, "nx": 21, "nt": 17}
    assert man["exit_n_grid"] == 64
    assert man["policy"]["n_max"] == 40
    assert man["series"]["kind"] == "robin"
    assert man["series"]["exit_computed"] is True
    assert 0 < man["series"]["n_used"] <= 40
    assert man["outputs"] == ["breakthrough.csv", "manifest.json",
                              "profile.csv"]


def test_solve_is_deterministic(tmp_path):
    ini = write_ini(tmp_path, BASE_INI)
    outs = []
    for name in ("a", "b"):
        out = tmp_path / name
        assert main(["solve", "--config", ini, "--out", str(out),
                     "--quiet"]) == 0
        outs.append(out)
    for fname in ("profile.csv", "breakthrough.csv", "manifest.json"):
        assert (outs[0] / fname).read_bytes() == (outs[1] / fname).read_bytes()


def test_flag_overrides_reach_manifest(tmp_path):
    ini = write_ini(tmp_path, BASE_INI)
    out = tmp_path / "res"
    assert main(["solve", "--config", ini, "--out", str(out), "--quiet",
                 "--nx", "7", "--nt", "5", "--modes", "12",
                 "--tail-tol", "1e-6"]) == 0
    man = json.loads((out / "manifest.json").read_text())
    assert man["grid"]["nx"] == 7 and man["grid"]["nt"] == 5
    assert man["policy"]["n_max"] == 12
    assert man["policy"]["tail_tol"] == 1e-6
    _, rows = read_rows(out / "profile.csv")
    assert len(rows) == 7 * 5


def test_solve_reports_progress(tmp_path, capsys):
    ini = write_ini(tmp_path, BASE_INI)
    out = tmp_path / "res"
    assert main(["solve", "--config", ini, "--out", str(out)]) == 0
    text = capsys.readouterr().out
    assert "kept modes" in text and "manifest.json" in text
    assert main(["solve", "--config", ini, "--out", str(out),
                 "--quiet"]) == 0
    assert capsys.readouterr().out == ""


# -- verify -------------------------------------------------------------------

VERIFY_INI = BASE_INI + """
[verify]
fd_nx = 61
fd_nt = 60
n_times = 9
"""


def test_verify_writes_summary(tmp_path):
    ini = write_ini(tmp_path, VERIFY_INI)
    out = tmp_path / "res"
    assert main(["verify", "--config", ini, "--out", str(out), "--quiet"]) == 0
    text = (out / "verify_summary.txt").read_text()
    lines = text.splitlines()
    verdicts = [ln for ln in lines if ln.startswith(("PASS", "FAIL"))]
    infos = [ln for ln in lines if ln.startswith("info")]
    assert len(verdicts) == 4
    assert len(infos) == 2
    assert any("refinement order" in ln for ln in infos)
    header, rows = read_rows(out / "balance.csv")
    assert header == "t,residual,relative"
    assert len(rows) == 9


def test_verify_failures_still_exit_zero(tmp_path):
    ini = write_ini(tmp_path, VERIFY_INI)
    out = tmp_path / "res"
    assert main(["verify", "--config", ini, "--out", str(out), "--quiet",
                 "--modes", "2"]) == 0
    text = (out / "verify_summary.txt").read_text()
    assert "FAIL" in text


# -- compare-danckwerts -------------------------------------------------------

def test_compare_outputs(tmp_path):
    ini = write_ini(tmp_path, BASE_INI)
    out = tmp_path / "res"
    assert main(["compare-danckwerts", "--config", ini, "--out", str(out),
                 "--quiet"]) == 0

    header, rows = read_rows(out / "exit_comparison.csv")
    assert header == "t,C_exit,C_exit_danckwerts,C_flux_exit,exit_gap"
    assert len(rows) == 17
    for t, cr, cd, ce, gap in rows:
        assert gap == pytest.approx(abs(cr - cd), rel=1e-12, abs=1e-15)

    header, eig = read_rows(out / "eigenvalues.csv")
    assert header == "n,lambda,lambda_danckwerts"
    n0 = eig[0]
    assert n0[0] == 0.0
    assert n0[1] == pytest.approx(-25.0)      # -r^2 with r = v/(2D) = 5
    assert np.isnan(n0[2])
    for n, lam, lam_d in eig[1:]:
        assert lam == pytest.approx((n * np.pi) ** 2, rel=1e-12)
        assert (n * np.pi) ** 2 < lam_d < ((n + 1) * np.pi) ** 2


# -- chain --------------------------------------------------------------------

CHAIN_INI = BASE_INI + """
[chain]
lengths = 1.0
n_grid = 64
"""


def test_single_segment_chain_matches_solve(tmp_path):
    ini = write_ini(tmp_path, CHAIN_INI)
    sv = tmp_path / "sv"
    ch = tmp_path / "ch"
    assert main(["solve", "--config", ini, "--out", str(sv), "--quiet"]) == 0
    assert main(["chain", "--config", ini, "--out", str(ch), "--quiet"]) == 0
    solo = (sv / "breakthrough.csv").read_bytes()
    assert (ch / "segment_1" / "breakthrough.csv").read_bytes() == solo
    assert (ch / "breakthrough.csv").read_bytes() == solo
    report = (ch / "chain_report.txt").read_text()
    assert "segments = 1" in report
    assert "defect" in report


def test_two_segment_chain_runs(tmp_path):
    ini = write_ini(tmp_path, CHAIN_INI.replace("lengths = 1.0",
                                                "lengths = 0.5 0.5"))
    out = tmp_path / "res"
    assert main(["chain", "--config", ini, "--out", str(out), "--quiet"]) == 0
    for seg in ("segment_1", "segment_2"):
        assert (out / seg / "breakthrough.csv").exists()
    _, rows = read_rows(out / "breakthrough.csv")
    assert len(rows) == 17
    assert all(np.isfinite(c) for row in rows for c in row)


def test_chain_needs_its_section(tmp_path, capsys):
    ini = write_ini(tmp_path, BASE_INI)
    assert main(["chain", "--config", ini, "--out",
                 str(tmp_path / "o"), "--quiet"]) == 2
    assert "chain" in capsys.readouterr().err


# -- failure modes ------------------------------------------------------------

def test_usage_errors_exit_one():
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == 1
    with pytest.raises(SystemExit) as exc:
        main(["solve"])
    assert exc.value.code == 1


def test_config_errors_exit_two(tmp_path, capsys):
    missing = str(tmp_path / "nope.ini")
    assert main(["solve", "--config", missing, "--quiet"]) == 2
    assert "config error" in capsys.readouterr().err

    bad_sec = write_ini(tmp_path, BASE_INI + "\n[wrong]\nx = 1\n", "s.ini")
    assert main(["solve", "--config", bad_sec, "--quiet"]) == 2

    bad_par = write_ini(tmp_path, BASE_INI.replace("D = 0.1", "D = -1.0"),
                        "p.ini")
    assert main(["solve", "--config", bad_par, "--quiet"]) == 2

    no_tend = write_ini(tmp_path, BASE_INI.replace("t_end = 1.5", ""),
                        "t.ini")
    assert main(["solve", "--config", no_tend, "--quiet"]) == 2
    out = tmp_path / "o"
    bad_flag = write_ini(tmp_path, BASE_INI, "f.ini")
    assert main(["solve", "--config", bad_flag, "--out", str(out),
                 "--nx", "1", "--quiet"]) == 2


def test_numeric_failures_exit_three(tmp_path, capsys):
    ini = write_ini(tmp_path, BASE_INI.replace("v = 1.0", "v = 60.0"))
    rc = main(["solve", "--config", ini, "--out", str(tmp_path / "o"),
               "--quiet"])
    assert rc == 3
    assert "numeric failure" in capsys.readouterr().err
