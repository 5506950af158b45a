import json
import math

import numpy as np
import pytest
from click.testing import CliRunner

from scopic.cli import main


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def squeezed_files(tmp_path):
    rng = np.random.default_rng(12)
    x = rng.normal(0.0, math.exp(1.0), 6000)
    p = rng.normal(0.0, math.exp(-1.0), 6000)
    xf, pf = tmp_path / "x.txt", tmp_path / "p.txt"
    xf.write_text("\n".join(str(v) for v in x) + "\n")
    pf.write_text("\n".join(str(v) for v in p) + "\n")
    return xf, pf


def test_analyze_writes_report(runner, tmp_path, squeezed_files):
    xf, pf = squeezed_files
    out = tmp_path / "report.json"
    result = runner.invoke(
        main,
        ["--out", str(out), "analyze", "--x", str(xf), "--p", str(pf),
         "--criteria", "theorem1-product,theorem4", "--s-grid", "0.5:6:12",
         "--replicas", "10"],
    )
    assert result.exit_code == 0, result.output
    report = json.loads(out.read_text())
    assert report["s_max"]["theorem4"] == pytest.approx(2.0 * math.e, rel=0.05)
    assert report["provenance"]["config"]["criteria"] == ["theorem1-product", "theorem4"]


def test_analyze_parse_error_exit_code(runner, tmp_path, squeezed_files):
    _, pf = squeezed_files
    bad = tmp_path / "bad.txt"
    bad.write_text("0.1\n0.2\nnot-a-number\n")
    result = runner.invoke(main, ["analyze", "--x", str(bad), "--p", str(pf)])
    assert result.exit_code == 3
    assert "line 3" in result.output


def test_analyze_mode_mismatch_exit_code(runner, squeezed_files):
    xf, _ = squeezed_files
    result = runner.invoke(
        main, ["analyze", "--x", str(xf), "--criteria", "theorem4"]
    )
    assert result.exit_code == 5


def test_analyze_degenerate_input_exit_code(runner, tmp_path, squeezed_files):
    _, pf = squeezed_files
    tiny = tmp_path / "tiny.txt"
    tiny.write_text("0.5\n")
    result = runner.invoke(main, ["analyze", "--x", str(tiny), "--p", str(pf)])
    assert result.exit_code == 4


def test_calibration_rescales(runner, tmp_path):
    rng = np.random.default_rng(4)
    scale = 7.3  # detector units
    vac = rng.normal(0.0, scale, 5000)
    p = rng.normal(0.0, scale * math.exp(-1.0), 5000)
    x = rng.normal(0.0, scale * math.exp(1.0), 5000)
    for name, data in (("vac", vac), ("p", p), ("x", x)):
        (tmp_path / f"{name}.txt").write_text("\n".join(str(v) for v in data) + "\n")
    out = tmp_path / "rep.json"
    result = runner.invoke(
        main,
        ["--out", str(out), "analyze",
         "--x", str(tmp_path / "x.txt"), "--p", str(tmp_path / "p.txt"),
         "--calibration", str(tmp_path / "vac.txt"),
         "--criteria", "theorem4", "--replicas", "0"],
    )
    assert result.exit_code == 0, result.output
    report = json.loads(out.read_text())
    # after calibration the p variance is ~ e^{-2} in vacuum units
    assert report["input_summary"]["var_p"] == pytest.approx(math.exp(-2.0), rel=0.05)


def test_simulate_with_config_file(runner, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({
        "mode": "single",
        "criteria": ["theorem4"],
        "bootstrap_replicas": 5,
        "s_values": [1.0, 2.0],
    }))
    out = tmp_path / "rep.json"
    result = runner.invoke(
        main,
        ["--seed", "9", "--out", str(out), "--config", str(cfg),
         "simulate", "--state", "squeezed", "--r", "1.0", "--n", "5000"],
    )
    assert result.exit_code == 0, result.output
    report = json.loads(out.read_text())
    assert report["provenance"]["seed"] == 9
    assert report["provenance"]["state"]["variant"] == "squeezed"


def test_smax_command(runner, tmp_path):
    out = tmp_path / "smax.json"
    result = runner.invoke(
        main, ["--out", str(out), "smax", "--state", "squeezed", "--r", "2.0"]
    )
    assert result.exit_code == 0, result.output
    body = json.loads(out.read_text())
    assert body["s_max"] / math.exp(2.0) == pytest.approx(0.5093, abs=1e-3)


def test_curve_csv(runner, tmp_path):
    out = tmp_path / "fig8.csv"
    result = runner.invoke(
        main, ["--out", str(out), "curve", "--task", "fig8", "--points", "13"]
    )
    assert result.exit_code == 0, result.output
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "alpha,var_p"
    assert len(lines) == 14


def test_curve_stdout(runner):
    result = runner.invoke(main, ["curve", "--task", "cat-smax", "--points", "5"])
    assert result.exit_code == 0
    assert result.output.splitlines()[0] == "alpha,s_certified"


def test_verify_command(runner, tmp_path):
    out = tmp_path / "verify.json"
    result = runner.invoke(
        main,
        ["--seed", "2", "--out", str(out), "verify", "--trials", "10",
         "--s-caps", "2", "--appendix-a-trials", "3", "--appendix-b-trials", "2"],
    )
    assert result.exit_code == 0, result.output
    assert json.loads(out.read_text())["sound"] is True


def test_missing_state_param_is_config_error(runner):
    result = runner.invoke(main, ["smax", "--state", "squeezed"])
    assert result.exit_code == 4  # missing r -> degenerate input category
