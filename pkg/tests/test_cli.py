import io
import json
import subprocess
import sys

import pytest

from qsimpson.cli import run
from qsimpson.scenario_file import fixture_path


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def as_dict(csv_text):
    lines = csv_text.splitlines()
    assert lines[0] == "quantity,value"
    return dict(line.split(",", 1) for line in lines[1:])


def test_paper_q2():
    code, out, _ = call("paper", "--family", "q2", "--epsilon", "0.01")
    assert code == 0
    assert abs(float(as_dict(out)["s"]) - 1.98) <= 5e-4


def test_eval_q1_fixture():
    code, out, _ = call("eval", "--scenario", str(fixture_path("q1.scenario")))
    assert code == 0
    values = as_dict(out)
    assert values["r_t"] == "0"
    assert values["classical"] == "false"
    assert abs(float(values["s"]) - 1.8155704697986577) <= 1e-12


def test_eval_undefined_rates():
    code, out, _ = call("eval", "--scenario", str(fixture_path("uniform-classical.scenario")))
    values = as_dict(out)
    assert code == 0 and values["classical"] == "true" and values["s"] == "0"


def test_eval_complementarity_violation(tmp_path):
    text = json.loads(fixture_path("uniform-classical.scenario").read_text())
    text["measurements"]["result"]["second_span"] = text["measurements"]["result"]["span"]
    path = tmp_path / "bad.scenario"
    path.write_text(json.dumps(text))
    code, out, err = call("eval", "--scenario", str(path))
    assert code == 2 and out == ""
    assert "ValidationError" in err and "measurements.result" in err


def test_eval_parse_error(tmp_path):
    path = tmp_path / "bad.scenario"
    path.write_text("{\n  \"dim\": 2,\n  oops\n}")
    code, _, err = call("eval", "--scenario", str(path))
    assert code == 2 and "line 3" in err


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["frobnicate"],
        ["paper", "--family", "q3", "--epsilon", "0.1"],
        ["paper", "--family", "q1"],
        ["paper", "--family", "q1", "--epsilon", "0"],
        ["sweep", "--eps-start", "2"],
        ["optimize", "--ranks", "1,x,2"],
        ["optimize", "--dim", "40"],
        ["optimize", "--dim", "4", "--ranks", "1,5,1"],
        ["optimize", "--mode", "family", "--floor", "0"],
        ["bound", "--family", "q1"],
        ["bound", "--scenario", "x", "--family", "q1"],
        ["eval", "--scenario", "/nonexistent/file"],
        ["classical", "--samples", "0"],
    ],
)
def test_usage_errors_exit_one(argv):
    code, out, err = call(*argv)
    assert code == 1 and out == ""
    assert err.startswith("qsimpson: error:") and err.count("\n") == 1


def test_sweep_csv():
    code, out, _ = call("sweep", "--family", "q2", "--eps-start", "0.1", "--eps-end", "0.001", "--steps", "3")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "epsilon,s,two_minus_two_epsilon,margin"
    assert [line.split(",")[0] for line in lines[1:]] == ["0.10000000000000001", "0.01", "0.001"]


def test_table_format():
    code, out, _ = call("classical", "--samples", "20", "--seed", "1", "--format", "table")
    assert code == 0 and "," not in out and out.splitlines()[0].startswith("samples")


def test_optimize_general_reproducible():
    argv = ["optimize", "--dim", "3", "--restarts", "3", "--iters", "100", "--seed", "5"]
    first, second = call(*argv), call(*argv)
    assert first == second and first[0] == 0
    assert first[1].splitlines()[0] == "step,evaluations,best_so_far"
    assert "best |S|" in first[2]


def test_optimize_family():
    code, out, err = call("optimize", "--mode", "family", "--floor", "1e-4")
    assert code == 0 and float(out.splitlines()[-1].split(",")[2]) >= 1.9997


def test_bound_family():
    code, out, _ = call("bound", "--family", "q2", "--epsilon", "0.01")
    values = as_dict(out)
    assert code == 0
    assert values["holds"] == "true" and values["identities_ok"] == "true" and values["case"] == "u"
    assert abs(float(values["s_prime_minus_s"]) - 3) <= 1e-10


def test_bound_undefined_scenario():
    code, out, _ = call("bound", "--scenario", str(fixture_path("uniform-classical.scenario")))
    assert code == 0 and as_dict(out)["s"] == "0"


def test_out_writes_only_there(tmp_path):
    target = tmp_path / "s.csv"
    code, out, _ = call("paper", "--family", "q1", "--epsilon", "0.5", "--out", str(target))
    assert code == 0 and out == ""
    assert list(tmp_path.iterdir()) == [target]
    data = target.read_bytes()
    assert b"\r" not in data and data.endswith(b"\n")


def test_verbose_reports_residuals():
    code, _, err = call("eval", "--verbose", "--scenario", str(fixture_path("q2.scenario")))
    assert code == 0 and "complement residual" in err


def test_classical_large_sample():
    code, out, _ = call("classical", "--samples", "100000", "--seed", "7")
    assert code == 0
    assert float(out.splitlines()[1].split(",")[2]) <= 1 + 1e-12


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "qsimpson", "paper", "--family", "q2", "--epsilon", "0.1"],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0 and proc.stdout.startswith("quantity,value\n")
