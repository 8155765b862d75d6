import io
import json

import pytest

from icleda.cli import main

from helpers import F_TEXT, alias


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), out)
    return code, out.getvalue()


@pytest.fixture
def fjson(tmp_path):
    path = tmp_path / "f.json"
    assert run("compile", F_TEXT, "--and=two-region", "-o", str(path))[0] == 0
    return path


def test_compile_summary(tmp_path):
    code, out = run("compile", F_TEXT, "-o", str(tmp_path / "f.json"))
    assert code == 0
    assert out.startswith("4 AND, 2 OR, 0 buffer gates")


def test_compile_to_stdout():
    code, out = run("compile", "x1")
    assert code == 0
    assert json.loads(out)["outputs"] == {"true": "S3", "false": "S4"}


def test_compile_syntax_error(capsys):
    assert run("compile", "x1&")[0] == 2
    assert "position 4" in capsys.readouterr().err


def test_usage_errors():
    assert run()[0] == 2
    assert run("frobnicate")[0] == 2
    assert run("compile", "x1", "--and=three-region")[0] == 2


@pytest.mark.parametrize("inputs,verdict", [("x1=0,x2=1,x3=1", "true"), ("x1=1,x2=0,x3=0", "false")])
def test_simulate(fjson, inputs, verdict):
    code, out = run("simulate", str(fjson), "-i", inputs)
    assert code == 0
    assert f"verdict: {verdict}" in out


def test_simulate_partial_assignment(fjson, capsys):
    assert run("simulate", str(fjson), "-i", "x1=1")[0] == 2
    assert "x2, x3" in capsys.readouterr().err


def test_simulate_bad_inputs(fjson, tmp_path):
    assert run("simulate", str(fjson), "-i", "x1=maybe")[0] == 2
    assert run("simulate", str(tmp_path / "missing.json"), "-i", "x1=1")[0] == 2
    (tmp_path / "junk.json").write_text("not json")
    assert run("simulate", str(tmp_path / "junk.json"), "-i", "x1=1")[0] == 2
    assert run("simulate", str(fjson), "-i", "x1=1,x2=1,x3=1", "--max-steps", "0")[0] == 2


def test_simulate_json_and_trace(fjson, tmp_path):
    trace = tmp_path / "trace.txt"
    code, out = run("simulate", str(fjson), "-i", "x1=0", "-i", "x2=1,x3=1",
                    "--format=json", "--trace-file", str(trace))
    assert code == 0
    rep = json.loads(out)
    assert rep["verdict"] == "true" and rep["ok"] and "S11" in rep["signals"]
    lines = trace.read_text().splitlines()
    assert len(lines) == rep["steps"]
    assert lines[0].startswith("step 1: ")


def test_trace_is_deterministic(fjson):
    a = run("simulate", str(fjson), "-i", "x1=1,x2=1,x3=0", "--trace")[1]
    b = run("simulate", str(fjson), "-i", "x1=1,x2=1,x3=0", "--trace")[1]
    assert a == b and "step 1:" in a
    c = run("simulate", str(fjson), "-i", "x1=1,x2=1,x3=0", "--trace", "--seed", "7")[1]
    d = run("simulate", str(fjson), "-i", "x1=1,x2=1,x3=0", "--trace", "--seed", "7")[1]
    assert c == d


def test_step_limit_is_a_failure(fjson):
    code, out = run("simulate", str(fjson), "-i", "x1=1,x2=1,x3=0", "--max-steps", "1")
    assert code == 1 and "step-limit" in out


def test_truthtable_formula_and_file(fjson):
    code, out = run("truthtable", F_TEXT, "--and=single-region")
    assert code == 0 and "8/8 rows match" in out
    code, out = run("truthtable", str(fjson), "--format=json")
    rep = json.loads(out)
    assert code == 0 and rep["passed"] == rep["total"] == 8


def test_truthtable_constant():
    code, out = run("truthtable", "0")
    assert code == 0 and "1/1 rows match" in out


def test_truthtable_cap():
    assert run("truthtable", "a | b | c", "--max-vars", "2")[0] == 2


def test_check(fjson, tmp_path):
    code, out = run("check", str(fjson))
    assert code == 0 and out.strip() == "clean"
    from icleda.netlist import load, save
    bad = tmp_path / "bad.json"
    save(alias(load(fjson), "S10", "S7"), bad)
    code, out = run("check", str(bad), "--format=json")
    assert code == 1 and json.loads(out)["issues"]
    code, out = run("truthtable", str(bad))
    assert code == 1 and "both" in out
