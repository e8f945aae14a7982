import json
from pathlib import Path

import jsonschema
import pytest

from abstract_intersection import cli

SCHEMA = json.loads((Path(__file__).parents[1] / "docs" / "run_report.schema.json").read_text())
OFFLINE = {"dim": 4, "spectral": [{"re": 0.4, "im": 1.0}, {"re": 0.4, "im": -1.0},
                                  {"re": 0.6, "im": 1.0}, {"re": 0.6, "im": -1.0}]}
FAST = ["--samples", "50", "--n-max", "20", "--lefschetz-n-max", "5", "--n-detect", "200"]


@pytest.fixture
def files(tmp_path):
    zeros = tmp_path / "zeros.txt"
    zeros.write_text("14.134725141734693\n21.022039638771555\n25.010857580145688\n")
    off = tmp_path / "off.json"
    off.write_text(json.dumps(OFFLINE))
    jordan = tmp_path / "jordan.json"
    jordan.write_text(json.dumps({"dense": [[[0.5, 0], [1, 0]], [[0, 0], [0.5, 0]]]}))
    bad = tmp_path / "bad.json"
    bad.write_text('{"spectral": [')
    return {"zeros": zeros, "off": off, "jordan": jordan, "bad": bad, "dir": tmp_path}


def run_cli(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_run_on_zero_table(capsys, files):
    code, out, err = run_cli(capsys, "run", files["zeros"], *FAST)
    report = json.loads(out)
    jsonschema.validate(report, SCHEMA)
    assert code == 0
    assert all(c["axioms_hold"] for c in report["cuts"])
    assert all(c["detection"]["verdict"] == "no-evidence" for c in report["cuts"])
    assert report["overall"] == {"rh_direct_check": True, "rh_in_covered_cuts": True,
                                 "axioms_hold_for_all_cuts": True, "equivalence_consistent": True}
    assert report["config"]["Y_grid"] == pytest.approx([17.5784, 23.0164, 26.0109], abs=1e-4)


def test_run_on_offline_fixture(capsys, files):
    code, out, err = run_cli(capsys, "run", files["off"], *FAST)
    report = json.loads(out)
    jsonschema.validate(report, SCHEMA)
    assert code == 0
    cut = report["cuts"][0]
    assert cut["detection"]["verdict"] == "violation"
    assert not cut["ip"]["ip_f_stable"]
    assert cut["int1"]["f_ratio_max"] > 10 * cut["int1"]["f_ratio_by_n"][1]
    assert report["overall"]["equivalence_consistent"] is True
    assert report["overall"]["rh_direct_check"] is False


@pytest.mark.parametrize("sub", ["validate", "calculus", "model", "axioms", "detect"])
def test_subcommands_emit_valid_reports(capsys, files, sub):
    code, out, err = run_cli(capsys, sub, files["zeros"], *FAST)
    assert code == 0
    report = json.loads(out)
    jsonschema.validate(report, SCHEMA)
    assert "overall" not in report
    if sub == "validate":
        assert report["cuts"] == []


def test_malformed_json_exits_one(capsys, files):
    code, out, err = run_cli(capsys, "run", files["bad"])
    assert code == 1 and "line 1" in err and out == ""


def test_invalid_operator_exits_one_and_lists_failures(capsys, files):
    code, out, err = run_cli(capsys, "run", files["jordan"])
    assert code == 1 and "OP3-b" in err
    report = json.loads(out)
    jsonschema.validate(report, SCHEMA)
    assert report["status"] == "invalid-operator" and "cuts" not in report


def test_allow_invalid_runs_anyway(capsys, files):
    code, out, err = run_cli(capsys, "detect", files["jordan"], "--allow-invalid", "--y-grid", "1")
    assert code == 0
    assert json.loads(out)["status"] == "ok"


def test_usage_errors_exit_one(capsys, files):
    with pytest.raises(SystemExit) as exc:
        cli.main(["run", str(files["zeros"]), "--bogus"])
    assert exc.value.code == 1
    with pytest.raises(SystemExit) as exc:
        cli.main(["run", str(files["zeros"]), "--tol", "nope=1"])
    assert exc.value.code == 1
    code, out, err = run_cli(capsys, "run", files["zeros"], "--q", "1")
    assert code == 1 and "q must" in err
    code, out, err = run_cli(capsys, "run")
    assert code == 1 and "input" in err
    code, out, err = run_cli(capsys, "run", files["dir"] / "missing.txt")
    assert code == 1


def test_inconsistency_exits_two(capsys, files):
    # an impossible quadrature tolerance makes a check fail on an RH-true input
    code, out, err = run_cli(capsys, "run", files["zeros"], *FAST, "--tol", "contour_agreement=1e-300")
    report = json.loads(out)
    assert code == 2
    assert report["overall"]["equivalence_consistent"] is False
    assert report["config"]["tolerances"]["contour_agreement"] == 1e-300


def test_markdown_and_output_file(capsys, files):
    target = files["dir"] / "report.md"
    code, out, err = run_cli(capsys, "run", files["off"], *FAST, "--format", "markdown", "--output", target)
    assert code == 0 and out == ""
    text = target.read_text()
    assert text.startswith("# Run report") and "violation (n=" in text and "Tolerances:" in text


def test_environment_overrides(capsys, files, monkeypatch):
    monkeypatch.setenv("ABSINT_Q", "2.5")
    monkeypatch.setenv("ABSINT_Y_GRID", "30")
    code, out, err = run_cli(capsys, "detect", files["zeros"])
    report = json.loads(out)
    assert report["config"]["q"] == 2.5 and report["config"]["Y_grid"] == [30.0]
    code, out, err = run_cli(capsys, "detect", files["zeros"], "--q", "3")
    assert json.loads(out)["config"]["q"] == 3.0


def test_identical_runs_are_byte_identical(capsys, files):
    outs = [run_cli(capsys, "run", files["zeros"], *FAST, "--seed", "5")[1] for _ in range(2)]
    assert outs[0] == outs[1]
    different = run_cli(capsys, "run", files["zeros"], *FAST, "--seed", "6")[1]
    assert different != outs[0]


def test_module_entry_point(files):
    import subprocess
    import sys

    proc = subprocess.run([sys.executable, "-m", "abstract_intersection", "validate", str(files["zeros"])],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["op_validation"]["passed"]
