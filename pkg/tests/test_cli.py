from __future__ import annotations

import csv
import io
import json
import math
import subprocess
import sys

import mpmath as mp
import pytest

from pfq.cli import main
from pfq.sweep import CSV_COLUMNS, dumps_canonical, loads_canonical


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def _value(out):
    d = json.loads(out)
    return complex(float(d["value"][0]), float(d["value"][1]))


# ---------------------------------------------------------------------------
# eval
# ---------------------------------------------------------------------------


def test_eval_e(capsys):
    code, out, _ = run(capsys, "eval", "--num", "2.5", "--den", "2.5", "--x", "1")
    assert code == 0
    assert "2.7182818284590452354e+0" in out


def test_eval_log_json(capsys):
    code, out, _ = run(capsys, "eval", "--num", "1,1", "--den", "2", "--x", "0.5", "--format", "json")
    assert code == 0
    d = loads_canonical(out)
    assert abs(mp.mpf(str(d["value"][0])) - 2 * mp.log(2)) < 1e-19
    assert d["terms_used"] > 50
    assert dumps_canonical(d) == out


def test_eval_divergent_exit_2(capsys):
    code, _, err = run(capsys, "eval", "--num", "1,2,3", "--den", "1.5", "--x", "0.3")
    assert code == 2
    assert "diverges" in err


def test_eval_outside_disk_and_pole(capsys):
    assert run(capsys, "eval", "--num", "1,1", "--den", "2", "--x", "1.5")[0] == 2
    code, _, err = run(capsys, "eval", "--num", "1", "--den=-2", "--x", "0.5")
    assert code == 2 and "nonpositive integer" in err
    assert run(capsys, "eval", "--num", "abc", "--den", "2", "--x", "0.5")[0] == 2


def test_eval_nonconvergence_exit_3(capsys):
    code, _, err = run(capsys, "eval", "--num", "1", "--den", "2", "--x", "30", "--max-order", "10")
    assert code == 3
    assert "max_order" in err


def test_eval_complex_argument(capsys):
    code, out, _ = run(capsys, "eval", "--num", "0.5+0.2j", "--den", "1.5", "--x", "0.3,-1.2", "--format", "json")
    assert code == 0
    ref = mp.hyp1f1(mp.mpc(0.5, 0.2), 1.5, mp.mpc(0.3, -1.2))
    assert abs(_value(out) - complex(ref)) < 1e-14


@pytest.mark.parametrize(
    "via,num,den,x",
    [
        ("euler-integral", "1.1,1.5", "1.9,2.5", "0.7"),
        ("laplace-integral", "0.9,1.3", "2.1", "0.5"),
        ("kummer", "1.2,0.8", "2.3,1.7", "-40"),
        ("euler-transform", "0.9,1.3,0.7", "2.1,1.8", "0.4"),
    ],
)
def test_eval_routes(capsys, via, num, den, x):
    code, out, _ = run(capsys, "eval", "--num", num, "--den", den, f"--x={x}", "--via", via, "--format", "json")
    assert code == 0
    ref = mp.hyper([mp.mpf(v) for v in num.split(",")], [mp.mpf(v) for v in den.split(",")], mp.mpf(x))
    assert abs(_value(out) - complex(ref)) <= 1e-10 * abs(complex(ref))


def test_eval_csv(capsys):
    code, out, _ = run(capsys, "eval", "--num", "1,1", "--den", "2", "--x", "0.5", "--format", "csv")
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0][:3] == ["function", "via", "value"]
    assert rows[1][1] == "direct"


# ---------------------------------------------------------------------------
# check
# ---------------------------------------------------------------------------


def test_check_t1_x_zero_passes(capsys):
    code, out, _ = run(capsys, "check", "--theorem", "t1", "--p", "1", "--x", "0", "--y", "0.7")
    assert code == 0
    assert "PASS" in out


def test_check_t3_classical_kummer(capsys):
    code, out, _ = run(
        capsys, "check", "--theorem", "t3", "--num", "1.4,0.6", "--den", "1.4,2.2", "--x=-3.5", "--format", "json"
    )
    assert code == 0
    d = json.loads(out)
    assert d["passed"] and float(d["rel_diff"]) <= 1e-13


def test_check_t2_gate(capsys):
    code, out, err = run(capsys, "check", "--theorem", "t2", "--p", "1", "--x", "0.2", "--y", "0.3")
    assert code == 2
    assert "|y| < |x|" in err
    assert "FAIL" in out


def test_check_t2_relaxed_is_experimental_fail(capsys):
    code, out, _ = run(
        capsys, "check", "--theorem", "t2", "--p", "1", "--x", "0.2", "--y", "0.3", "--relaxed-domain"
    )
    assert code == 1
    assert "experimental" in out


def test_check_verification_failure_exit_1(capsys):
    # a loose series tolerance cannot meet a 1e-20 verification tolerance
    code, _, _ = run(
        capsys, "check", "--theorem", "t1", "--p", "2", "--x", "1.2", "--y=-0.4",
        "--series-tol", "1e-6", "--tol", "1e-20",
    )
    assert code == 1


def test_check_numeric_failure_exit_3(capsys):
    code, _, err = run(
        capsys, "check", "--theorem", "t1", "--p", "1", "--x", "1.5", "--y", "0.5", "--max-shell-order", "2"
    )
    assert code == 3
    assert "ConvergenceError" in err


def test_check_shape_errors(capsys):
    assert run(capsys, "check", "--theorem", "t1", "--num", "1,2", "--den", "3", "--x", "0.1", "--y", "0.1")[0] == 2
    assert run(capsys, "check", "--theorem", "t3", "--p", "1", "--x", "0.1", "--y", "0.1")[0] == 2
    assert run(capsys, "check", "--theorem", "t1", "--p", "1", "--x", "0.1")[0] == 2


def test_check_reproduces_sweep_draw(capsys, tmp_path):
    out_file = tmp_path / "s.json"
    assert main(["sweep", "--theorem", "t3", "--p", "2", "--draws", "3", "--seed", "99",
                 "--format", "json", "--output", str(out_file)]) == 0
    rec = json.loads(out_file.read_text())["records"][2]
    code, out, _ = run(capsys, "check", "--theorem", "t3", "--p", "2", "--seed", "99", "--draw", "2",
                       "--format", "json")
    assert code == 0
    d = json.loads(out)
    assert d["lhs"] == rec["lhs"] and d["rhs"] == rec["rhs"]


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------


def test_sweep_single_draw_reproducible(capsys):
    argv = ["sweep", "--theorem", "t1", "--p", "1", "--draws", "1", "--seed", "42", "--format", "json"]
    code1, out1, _ = run(capsys, *argv)
    code2, out2, _ = run(capsys, *argv)
    assert code1 == code2 == 0
    assert out1 == out2
    d = loads_canonical(out1)
    assert len(d["records"]) == 1
    assert dumps_canonical(d) == out1


def test_sweep_threads_byte_identical(capsys):
    base = ["sweep", "--theorem", "t2", "--p", "1,2", "--draws", "8", "--seed", "7", "--format", "json"]
    outs = {run(capsys, *base, "--threads", str(n))[1] for n in (1, 3)}
    assert len(outs) == 1


def test_sweep_csv_columns(capsys):
    code, out, _ = run(capsys, "sweep", "--theorem", "t4", "--p", "1", "--draws", "3", "--format", "csv")
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert tuple(rows[0]) == CSV_COLUMNS
    assert len(rows) == 4
    assert rows[1][3].startswith("a0=")
    assert float(rows[1][-1]) >= 0


def test_sweep_config_file(capsys, tmp_path):
    cfg = tmp_path / "sweep.cfg"
    cfg.write_text("# T3 run\ntheorem = t3\np = 1,2\ndraws = 4\nseed = 5\nformat = json\n")
    code, out, _ = run(capsys, "sweep", "--config", str(cfg))
    assert code == 0
    d = json.loads(out)
    assert d["config"]["theorem"] == "T3" and d["config"]["p"] == [1, 2]
    assert d["summary"]["draws"] == 4
    # flags override the file
    code, out, _ = run(capsys, "sweep", "--config", str(cfg), "--draws", "2")
    assert json.loads(out)["summary"]["draws"] == 2


def test_sweep_config_errors(capsys, tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("theorem = t1\ncolour = blue\n")
    code, _, err = run(capsys, "sweep", "--config", str(bad))
    assert code == 2 and "colour" in err
    assert run(capsys, "sweep", "--config", str(tmp_path / "missing.cfg"))[0] == 2
    assert run(capsys, "sweep", "--draws", "2")[0] == 2


def test_sweep_failure_exit_1(capsys):
    code, out, _ = run(capsys, "sweep", "--theorem", "t2", "--draws", "10", "--seed", "2", "--relaxed-domain")
    assert code == 1
    assert "[experimental]" in out


# ---------------------------------------------------------------------------
# rules and entry point
# ---------------------------------------------------------------------------


def test_rules_output(capsys):
    code, out, _ = run(capsys, "rules", "--kind", "legendre_01", "--order", "2", "--format", "json")
    assert code == 0
    d = json.loads(out)
    (x0, w0), (x1, w1) = d["nodes"]
    assert math.isclose(float(x0), 0.5 - 1 / (2 * math.sqrt(3)), rel_tol=1e-15)
    assert float(w0) == float(w1) == 0.5
    code, out, _ = run(capsys, "rules", "--kind", "laguerre_0inf", "--order", "5", "--format", "csv")
    assert out.splitlines()[0] == "index,abscissa,weight" and len(out.splitlines()) == 6
    assert run(capsys, "rules", "--order", "0")[0] == 2


def test_argparse_errors_exit_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["eval", "--num", "1"])
    assert exc.value.code == 2


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "pfq.cli", "eval", "--num", "2.5", "--den", "2.5", "--x", "1"],
        capture_output=True, text=True, timeout=300,
    )
    assert proc.returncode == 0
    assert "2.718281828459045235" in proc.stdout
