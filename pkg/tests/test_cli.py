import csv
import json
import math
import subprocess
import sys

import pytest

from gncert import cli


def run(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_solve_scalar_quadratic(capsys):
    code, out, _ = run(["solve", "--problem", "scalar_quadratic", "--x0", "1.3"], capsys)
    assert code == 0
    summary = json.loads(out)
    assert summary["status"] == "Converged" and summary["fitted_order"] >= 1.9
    assert set(summary) >= {"status", "iters", "final_error", "fitted_order"}


def test_solve_ds_large_lambda(capsys):
    code, out, _ = run(["solve", "--problem", "ds_family", "--param", "lambda=2", "--x0", "auto:0.1,1"], capsys)
    assert code == 2
    assert json.loads(out)["final_error"] > 1e-8


def test_solve_linear_one_step(capsys):
    code, out, _ = run(["solve", "--problem", "linear", "--x0=-7,12.5"], capsys)
    assert code == 0 and json.loads(out)["iters"] == 1


def test_solve_writes_trace_and_summary(tmp_path, capsys):
    out = tmp_path / "run.json"
    code, stdout, _ = run(["solve", "--problem", "rosenbrock", "--x0", "1.01,0.99", "--out", str(out)], capsys)
    assert code == 0
    assert json.loads(out.read_text())["status"] == "Converged"
    rows = list(csv.reader(open(tmp_path / "run.csv")))
    assert rows[0] == ["iter", "x_0", "x_1", "error", "residual_norm", "gradient_norm"]
    assert "Converged" in stdout


def test_solve_max_iters_and_tol(capsys):
    code, out, _ = run(["solve", "--problem", "scalar_quadratic", "--x0", "3", "--max-iters", "1"], capsys)
    assert code == 2 and json.loads(out)["status"] == "MaxIters"
    code, out, _ = run(["solve", "--problem", "scalar_quadratic", "--x0", "1.3", "--tol-grad", "1e-3"], capsys)
    assert code == 2 or json.loads(out)["final_error"] < 1e-8


@pytest.mark.parametrize("argv", [
    ["solve", "--problem", "scalar_quadratic"],
    ["solve", "--problem", "nope", "--x0", "1"],
    ["solve", "--problem", "scalar_quadratic", "--x0", "1,2"],
    ["solve", "--problem", "scalar_quadratic", "--x0", "abc"],
    ["solve", "--problem", "linear", "--param", "bogus=1", "--x0", "1,1"],
    ["certify", "--problem", "scalar_quadratic", "--majorant", "quartic:K=1"],
    ["certify", "--problem", "scalar_quadratic", "--majorant", "lipschitz:gamma=1"],
])
def test_usage_errors(argv, capsys):
    code, _, err = run(argv, capsys)
    assert code == 1 and "error" in err


def test_argparse_errors_exit_1(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["solve", "--bogus-flag"])
    assert exc.value.code == 1
    with pytest.raises(SystemExit) as exc:
        cli.main([])
    assert exc.value.code == 1


def test_certify_lipschitz(capsys):
    code, out, err = run(["certify", "--problem", "scalar_quadratic", "--majorant", "lipschitz:K=2"], capsys)
    assert code == 0
    d = json.loads(out)
    assert d["radii"]["r"] == pytest.approx(1 / 3)
    assert "rho" in err and "beta0" in err  # table goes to stderr when JSON is on stdout


def test_certify_smale(capsys):
    code, out, _ = run(["certify", "--problem", "scalar_quadratic", "--majorant", "smale:gamma=1"], capsys)
    assert code == 0
    assert json.loads(out)["radii"]["r"] == pytest.approx((5 - math.sqrt(17)) / 4)


def test_certify_h3_violation(capsys):
    code, _, err = run(["certify", "--problem", "ds_family", "--param", "lambda=2"], capsys)
    assert code == 3 and "h3 violated" in err and ">= 1" in err


def test_certify_out_file_and_table(tmp_path, capsys):
    out = tmp_path / "cert.json"
    code, stdout, _ = run(["certify", "--problem", "exp_fit", "--param", "noise=0.001", "--out", str(out)], capsys)
    assert code == 0
    d = json.loads(out.read_text())
    assert d["majorant"]["source"] == "estimated"
    assert d["validation"]["majorant_condition"]["pass"]
    assert "kappa" in stdout


def test_radius_worst_case_tight(capsys):
    code, out, _ = run(["radius", "--problem", "worst_case", "--majorant", "lipschitz:K=1", "--beta", "1"], capsys)
    assert code == 0
    assert json.loads(out)["ratio"] == pytest.approx(1.0, abs=1e-6)


def test_radius_scalar_and_linear(capsys):
    code, out, _ = run(["radius", "--problem", "scalar_quadratic"], capsys)
    assert code == 0 and json.loads(out)["ratio"] >= 1
    code, out, _ = run(["radius", "--problem", "linear", "--t-max", "4", "--directions", "3"], capsys)
    d = json.loads(out)
    assert code == 0 and d["empirical_radius"] == 4.0 == d["t_max"]


def test_radius_detects_unsound_certificate(capsys):
    # a deliberately huge supplied radius (K far too small) must trip the soundness check
    code, out, _ = run(["radius", "--problem", "ds_family", "--param", "lambda=0.45",
                        "--majorant", "lipschitz:K=0.01"], capsys)
    assert code == 4


def test_worst_case_cycles(capsys):
    code, out, _ = run(["worst-case", "--majorant", "lipschitz:K=1", "--beta", "1"], capsys)
    d = json.loads(out)
    assert code == 0 and d["cycle"]
    assert abs(d["iterates"][1] + 2 / 3) < 1e-12
    code, out, _ = run(["worst-case", "--majorant", "lipschitz:K=2", "--beta", "0.5"], capsys)
    assert code == 0 and json.loads(out)["rho"] == pytest.approx(2 / 3)


def test_worst_case_inside_override(capsys):
    code, out, _ = run(["worst-case", "--majorant", "lipschitz:K=1", "--beta", "1", "--x0", "0.3333333333"],
                       capsys)
    d = json.loads(out)
    assert code == 0 and not d["cycle"]


def test_worst_case_no_cycle_exit_5(capsys):
    # start outside the radius: no period-2 cycle, not converged
    code, _, _ = run(["worst-case", "--x0", "1.5"], capsys)
    assert code == 5


def test_seed_env_override(monkeypatch, capsys):
    argv = ["certify", "--problem", "exp_fit"]
    monkeypatch.setenv("GN_CERTIFY_SEED", "7")
    _, a, _ = run(argv, capsys)
    _, b, _ = run(argv + ["--seed", "7"], capsys)
    monkeypatch.delenv("GN_CERTIFY_SEED")
    _, c, _ = run(argv, capsys)
    assert a == b != c
    monkeypatch.setenv("GN_CERTIFY_SEED", "x")
    assert run(argv, capsys)[0] == 1


def test_suite_default_and_determinism(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert run(["suite", "--out", str(a)], capsys)[0] == 0
    assert run(["suite", "--out", str(b)], capsys)[0] == 0
    assert a.read_bytes() == b.read_bytes()


def test_suite_other_seed(tmp_path, capsys):
    a, b = tmp_path / "42.json", tmp_path / "7.json"
    assert run(["suite", "--out", str(a)], capsys)[0] == 0
    assert run(["suite", "--seed", "7", "--out", str(b)], capsys)[0] == 0
    ra, rb = json.loads(a.read_text()), json.loads(b.read_text())
    assert [c["name"] for c in ra["criteria"]] == [c["name"] for c in rb["criteria"]]
    assert ra != rb


def test_suite_broken_jacobian(capsys):
    code, out, err = run(["suite", "--problem", "broken_jacobian"], capsys)
    assert code == 6
    report = json.loads(out)
    assert "jacobian" in report["failures"]
    assert "FAIL  jacobian" in err


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "gncert", "worst-case"], capture_output=True, text=True)
    assert res.returncode == 0 and json.loads(res.stdout)["cycle"]
