import io
import shlex
import subprocess
import sys

import numpy as np
import pytest

from fracdg.cli import main


def run_cli(args: str) -> tuple[int, str]:
    buf = io.StringIO()
    old = sys.stdout
    sys.stdout = buf
    try:
        code = main(shlex.split(args))
    finally:
        sys.stdout = old
    return code, buf.getvalue()


def test_hcoeffs_matches_printed_matrix():
    code, out = run_cli("hcoeffs --alpha 0.75 --r 4 --lbar 0")
    assert code == 0
    rows = [line for line in out.splitlines() if not line.startswith("#")]
    got = np.array([[float(v) for v in row.split(",")] for row in rows])
    assert abs(got[0, 0] - 1.08807) < 5e-6
    assert abs(got[3, 3] - 0.26319) < 5e-6


def test_hcoeffs_closed_form_r1():
    from math import gamma

    code, out = run_cli("hcoeffs --alpha 0.75 --r 1 --lbar 5")
    assert code == 0
    val = float(out.splitlines()[-1])
    want = (6.0 ** 0.75 - 2.0 * 5.0 ** 0.75 + 4.0 ** 0.75) / gamma(1.75)
    assert abs(val - want) < 1e-13


def test_hcoeffs_validation_error():
    code, _ = run_cli("hcoeffs --lbar -1")
    assert code == 2


def test_unknown_table_kind():
    code, _ = run_cli("ode --table nonsense --N 4")
    assert code == 2


def test_radau_csv():
    code, out = run_cli("radau --r 2")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[2] == "j,tau"
    taus = [float(line.split(",")[1]) for line in lines[3:]]
    assert np.allclose(taus, [-1.0, -1.0 / 3.0, 1.0], atol=1e-14)


def test_determinism_and_roundtrip():
    cmd = "gauss-points --r-max 2 --lbars 100,1000"
    code1, out1 = run_cli(cmd)
    code2, out2 = run_cli(cmd)
    assert code1 == code2 == 0 and out1 == out2
    args_line = next(l for l in out1.splitlines() if l.startswith("# args: "))
    code3, out3 = run_cli(args_line[len("# args: "):])
    assert code3 == 0 and out3 == out1


def test_header_has_version_and_config():
    code, out = run_cli("radau --r 4")
    lines = out.splitlines()
    assert lines[0].startswith("# fracdg ")
    assert lines[1].startswith("# args: radau")
    assert "--r 4" in lines[1]


def test_ode_table_small():
    code, out = run_cli("ode --table ej --N 8,16 --r 2")
    assert code == 0
    rows = [l for l in out.splitlines() if not l.startswith("#")]
    assert rows[0].startswith("N,Emax0,")
    first = rows[1].split(",")
    assert int(first[0]) == 8
    # rate column appears in the second data row
    assert rows[2].split(",")[3] != ""


def test_ode_recon_table_small():
    code, out = run_cli("ode --table recon --mesh graded --q 3 --N 8,16 --T 1.0")
    assert code == 0
    rows = [l for l in out.splitlines() if not l.startswith("#")]
    assert rows[0] == "N,maxerr,maxerr_2sig,rate"
    assert len(rows) == 3


def test_refsoln_ode():
    code, out = run_cli("refsoln --what ode --t 0.0,1.0")
    assert code == 0
    rows = [l for l in out.splitlines() if not l.startswith("#")]
    assert rows[0] == "t,u"
    assert float(rows[1].split(",")[1]) == 1.0


def test_refsoln_pde_symmetry():
    code, out = run_cli("refsoln --what pde --t 1.0 --x 0.5,1.5 --contour-K 16")
    assert code == 0
    rows = [l for l in out.splitlines() if not l.startswith("#")][1:]
    u1 = float(rows[0].split(",")[2])
    u2 = float(rows[1].split(",")[2])
    assert abs(u1 - u2) < 1e-9


def test_pde_subcommand_small():
    code, out = run_cli("pde --N 4 --r 2 --fem-degree 2 --fem-elements 6 --contour-K 16")
    assert code == 0
    rows = [l for l in out.splitlines() if not l.startswith("#")]
    assert rows[0] == "n,t_n,jump,sup_err,sup_recon_err"
    assert len(rows) == 5


def test_config_file_defaults(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("r=2\nlbar=1\nalpha=0.5\n")
    code, out = run_cli(f"hcoeffs --config {cfg} --lbar 0")
    assert code == 0
    rows = [l for l in out.splitlines() if not l.startswith("#")]
    assert len(rows) == 2  # r = 2 from config
    assert "--alpha 0.5" in out.splitlines()[1]  # config applied
    assert "--lbar 0" in out.splitlines()[1]  # flag wins over config
    cfg.write_text("bogus=1\n")
    code, _ = run_cli(f"hcoeffs --config {cfg}")
    assert code == 2


def test_out_file(tmp_path):
    path = tmp_path / "radau.csv"
    code, out = run_cli(f"radau --r 3 --out {path}")
    assert code == 0 and out == ""
    assert path.read_text().startswith("# fracdg ")


def test_console_script_entry_point():
    proc = subprocess.run([sys.executable, "-m", "fracdg.cli", "radau", "--r", "2"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.startswith("# fracdg ")
    proc = subprocess.run([sys.executable, "-m", "fracdg.cli", "hcoeffs", "--lbar", "-2"],
                          capture_output=True, text=True)
    assert proc.returncode == 2
