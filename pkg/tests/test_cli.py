import json
import logging
import math
import subprocess
import sys
from pathlib import Path

import pandas as pd
import pytest

import cli

ROOT = Path(__file__).resolve().parents[1]


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    for name in ("HERMLAB_SEED", "HERMLAB_LOG_FILE", "HERMLAB_LOG_LEVEL"):
        monkeypatch.delenv(name, raising=False)
    yield
    # обработчики держат ссылку на перехваченный stderr
    root = logging.getLogger()
    for handler in list(root.handlers):
        if getattr(handler, "_hermlab", False):
            root.removeHandler(handler)
            handler.close()


def run(capsys, *argv):
    code = cli.main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_report_json(capsys):
    code, out, _ = run(capsys, "report", "--n", "2", "--p", "2", "--a", "0", "--c", "1")
    data = json.loads(out)

    assert code == 0
    assert data["scalar_closed_form"] == pytest.approx(40.0)
    assert data["einstein_constant"] == pytest.approx(4.0)
    assert len(data["ricci"]) == 10
    assert data["ricci"][0][0] == pytest.approx(4.0)


def test_report_scalar_both_routes(capsys):
    code, out, _ = run(capsys, "report", "--n", "1", "--p", "1")
    data = json.loads(out)

    assert code == 0
    assert data["scalar_trace"] == pytest.approx(12.0)
    assert data["scalar_closed_form"] == pytest.approx(12.0)


def test_report_csv(capsys):
    code, out, _ = run(capsys, "report", "--n", "1", "--p", "1", "--a", "1", "--c", "1", "--output", "csv")
    lines = out.splitlines()

    assert code == 0
    assert lines[0] == "field,i,j,value"
    assert any(line.startswith("scalar_closed_form,") for line in lines)
    assert "\r" not in out


def test_optimize_closed_form(capsys):
    code, out, _ = run(capsys, "optimize", "--n", "4", "--p", "1")
    data = json.loads(out)

    assert code == 0
    assert data["exists"] is True
    assert data["c_star"] == pytest.approx(2.0)
    assert data["s_star"] == pytest.approx(80.0)
    assert data["kind"] == "maximum"


def test_optimize_ascent(capsys):
    code, out, _ = run(capsys, "optimize", "--n", "1", "--p", "4", "--method", "ascent")
    data = json.loads(out)

    assert code == 0
    assert data["method"] == "ascent"
    assert data["c_star"] == pytest.approx(0.5, abs=1e-7)
    assert data["iterations"] > 0


def test_optimize_without_critical_points(capsys):
    code, out, err = run(capsys, "optimize", "--n", "0", "--p", "1")

    assert code == 1
    assert json.loads(out)["exists"] is False
    assert "no critical points" in err
    assert err.startswith("[WARN]")


@pytest.mark.parametrize(
    "argv",
    [
        ["verify", "--n", "0", "--p", "0"],
        ["sectional", "--n", "2", "--p", "1"],
        ["sectional", "--n", "0", "--p", "3"],
        ["report", "--n", "1", "--p", "1", "--c", "0"],
        ["report", "--n", "-1", "--p", "1"],
        ["report", "--n", "1"],
        ["scan", "--n", "1", "--p", "1", "--a-steps", "0"],
    ],
)
def test_parameter_errors(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == 2
    assert out == ""
    assert "[ERROR]" in err


@pytest.mark.parametrize("argv", [[], ["bogus"], ["optimize", "--method", "newton", "--n", "1", "--p", "1"]])
def test_usage_errors(capsys, argv):
    code, _, _ = run(capsys, *argv)
    assert code == 2


def test_invalid_seed_env(capsys, monkeypatch):
    monkeypatch.setenv("HERMLAB_SEED", "abc")
    code, _, err = run(capsys, "report", "--n", "1", "--p", "1")
    assert code == 2
    assert "HERMLAB_SEED" in err


def test_sectional_regime(capsys):
    code, out, _ = run(capsys, "sectional", "--n", "1", "--p", "4", "--samples", "300")
    data = json.loads(out)

    assert code == 0
    assert data["regime"] == 2
    assert data["bound_low"] == pytest.approx(-2.0)
    assert data["bound_high"] == pytest.approx(2.5)
    assert data["samples_in_bounds"] == 1.0
    assert data["argmin_bivector"] == "Y1_odd^Y1_even"


@pytest.mark.parametrize(
    "argv",
    [
        ["sectional", "--n", "1", "--p", "2", "--samples", "200", "--seed", "3"],
        ["verify", "--n", "1", "--p", "1", "--metrics", "2", "--samples", "200"],
        ["report", "--n", "1", "--p", "2", "--a", "0.3", "--c", "1.7"],
        ["report", "--n", "2", "--p", "1", "--a", "-0.4", "--c", "0.8", "--output", "csv"],
        ["optimize", "--n", "2", "--p", "3"],
        ["optimize", "--n", "2", "--p", "3", "--method", "ascent"],
    ],
)
def test_output_is_deterministic(capsys, argv):
    first = run(capsys, *argv)
    second = run(capsys, *argv)
    assert first[0] == 0
    assert first[1] == second[1]


def test_seed_env_overrides_flag(capsys, monkeypatch):
    _, expected, _ = run(capsys, "sectional", "--n", "1", "--p", "2", "--samples", "200", "--seed", "5")
    monkeypatch.setenv("HERMLAB_SEED", "5")
    _, out, _ = run(capsys, "sectional", "--n", "1", "--p", "2", "--samples", "200", "--seed", "1")

    assert out == expected
    assert json.loads(out)["seed"] == 5


def test_scan_csv_to_file(capsys, tmp_path):
    target = tmp_path / "out" / "scan.csv"
    code, out, _ = run(
        capsys, "scan", "--n", "1", "--p", "1",
        "--a-min", "0", "--a-max", "1", "--a-steps", "2",
        "--c-min", "1", "--c-max", "2", "--c-steps", "3",
        "--output", "csv", "--out", str(target),
    )
    table = pd.read_csv(target)

    assert code == 0
    assert out == ""
    assert list(table.columns) == ["a", "c", "s"]
    assert len(table) == 6
    assert table.loc[0, "s"] == pytest.approx(12.0)
    assert table["a"].tolist() == [0.0, 0.0, 0.0, 1.0, 1.0, 1.0]


def test_scan_json(capsys):
    code, out, _ = run(capsys, "scan", "--n", "2", "--p", "1", "--a-steps", "3", "--c-steps", "4")
    data = json.loads(out)

    assert code == 0
    assert len(data["rows"]) == 12
    assert all(math.isfinite(row["s"]) for row in data["rows"])


def test_verify_single_space(capsys):
    code, out, err = run(capsys, "verify", "--n", "1", "--p", "1", "--metrics", "2", "--samples", "200")
    data = json.loads(out)

    assert code == 0, err
    assert data["passed"] is True
    assert data["spaces"] == [[1, 1]]
    names = {check["name"] for check in data["checks"]}
    assert {"bracket_table", "u_tensor", "ricci_three_way", "critical_value", "sectional_bounds_achieved"} <= names


def test_verify_fails_with_tiny_tolerance(capsys):
    code, out, err = run(
        capsys, "verify", "--n", "1", "--p", "1", "--metrics", "1", "--samples", "50", "--tolerance", "1e-15",
    )
    data = json.loads(out)

    assert code == 1
    assert data["passed"] is False
    assert "gradient_finite_difference" in err


def test_log_file(capsys, monkeypatch, tmp_path):
    log_file = tmp_path / "logs" / "hermlab.log"
    monkeypatch.setenv("HERMLAB_LOG_FILE", str(log_file))
    code, _, _ = run(capsys, "optimize", "--n", "1", "--p", "1", "--log-level", "INFO")

    assert code == 0
    assert "Команда optimize" in log_file.read_text(encoding="utf-8")


def test_entry_point():
    completed = subprocess.run(
        [sys.executable, "cli.py", "optimize", "--n", "1", "--p", "1"],
        cwd=ROOT, capture_output=True, text=True, encoding="utf-8",
    )
    assert completed.returncode == 0
    assert json.loads(completed.stdout)["s_star"] == pytest.approx(12.0)


def test_verify_default_grid_residuals(capsys):
    code, out, err = run(capsys, "verify")
    data = json.loads(out)

    assert code == 0, err
    assert len(data["spaces"]) == 15
    worst = {check["name"]: check["residual"] for check in data["checks"]}
    assert max(worst.values()) < 1e-8, worst
    assert worst["gradient_finite_difference"] < 1e-9
