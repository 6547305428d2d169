import csv
import io
import json
import subprocess
import sys

import jsonschema
import pytest

from spheremin import cli
from spheremin.pinching import cite
from spheremin.report import SWEEP_COLUMNS, parse_grid, parse_tolerance, schema


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv)
    doc = json.loads(out)
    jsonschema.validate(doc, schema())
    return code, doc


def sweep_table(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_list(capsys):
    code, out, _ = run(capsys, "list")
    assert code == 0
    assert "veronese, S⁴, s=2, K=1/3" in out
    assert "clifford_torus, S³, -, K=0" in out
    code2, out2, _ = run(capsys)
    assert code2 == 0 and out2 == out


def test_list_csv_and_json(capsys, tmp_path):
    code, out, _ = run(capsys, "list", "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and rows[2]["name"] == "veronese" and rows[2]["K"] == "1/3"
    path = tmp_path / "list.json"
    assert cli.main(["list", "--out", str(path)]) == 0
    doc = json.loads(path.read_text())
    jsonschema.validate(doc, schema())
    assert [r["name"] for r in doc["result"]["surfaces"]][:2] == ["equator", "clifford_torus"]


def test_eval_veronese(capsys):
    code, doc = run_json(capsys, "eval", "veronese", "0.8", "0.3")
    assert code == 0
    r = doc["result"]
    assert r["K"] == pytest.approx(1 / 3, abs=1e-12) and r["KN"] == pytest.approx(2 / 3, abs=1e-12)
    assert r["canonical"]["branch"] == "nowhere_flat"


def test_eval_equator_and_surface_flag(capsys):
    code, doc = run_json(capsys, "eval", "--surface", "equator", "0.8", "0.3")
    assert code == 0 and doc["result"]["S"] == 0.0
    assert '"S": 0.0' in json.dumps(doc)


def test_eval_pole_is_domain_error(capsys):
    code, out, err = run(capsys, "eval", "veronese", "0.0", "1.0")
    assert code == 2 and "exclusion band" in err and out == ""


def test_verify_veronese(capsys):
    code, doc = run_json(capsys, "verify", "veronese", "--tier", "1")
    assert code == 0 and doc["status"] == "pass"
    assert all(c["status"] in ("pass", "skipped") for c in doc["result"]["checks"])
    assert doc["config"]["tier"] == 1 and doc["tool"]["name"] == "spheremin"
    assert doc["tolerance_ladder"]["frame"] == 1e-9


def test_verify_generalized_veronese_tier2(capsys):
    code, out, _ = run(capsys, "verify", "generalized_veronese", "--tier", "2", "--grid", "4x4")
    assert code == 0
    assert '"P": 0.83333333333333' in out
    doc = json.loads(out)
    assert doc["result"]["means"]["P"] == pytest.approx(5 / 6, abs=1e-9)
    assert doc["result"]["gauge"]["passed"]


def test_verify_unattainable_tolerance_fails(capsys):
    code, doc = run_json(capsys, "verify", "veronese", "--grid", "3x3", "--tol", "all=1e-15")
    assert code == 1 and doc["status"] == "fail"
    failing = [c for c in doc["result"]["checks"] if c["status"] == "fail"]
    assert failing and all(c["max_residual"] is not None and c["first_failure"] for c in failing)


def test_verify_single_tolerance_override(capsys):
    code, doc = run_json(capsys, "verify", "veronese", "--grid", "3x3", "--tol", "codazzi=0.5", "--tol", "wintgen=0.25")
    checks = {c["name"]: c for c in doc["result"]["checks"]}
    assert code == 0 and checks["codazzi"]["tolerance"] == 0.5 and checks["wintgen"]["tolerance"] == 0.25
    assert doc["config"]["tolerances"] == {"codazzi": 0.5, "wintgen": 0.25}


def test_verify_csv(capsys):
    code, out, _ = run(capsys, "verify", "equator", "--grid", "3x3", "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and rows[0]["name"] == "unit_sphere" and "\r\n" in out


def test_classify_examples(capsys):
    code, doc = run_json(capsys, "classify", "clifford_torus")
    c = doc["result"]["classification"]
    assert code == 0 and c["verdict"] == "CliffordTorus" and c["theorem_used"] == cite("clifford_torus")
    _, doc = run_json(capsys, "classify", "calabi", "--s", "3")
    assert doc["result"]["classification"]["verdict"] == "GeneralizedVeroneseS6"
    _, doc = run_json(capsys, "classify", "--surface", "calabi", "--s", "5", "--grid", "5x5")
    assert doc["result"]["classification"]["verdict"] == "CalabiStandard(5)"
    assert doc["result"]["classification"]["paper_asserted"] is True


def test_sweep_examples(capsys):
    code, out, _ = run(capsys, "sweep", "1..4", "--grid", "4x4")
    rows = sweep_table(out)
    assert code == 0 and list(rows[0].keys()) == list(SWEEP_COLUMNS)
    assert [float(r["K"]) for r in rows] == pytest.approx([1, 1 / 3, 1 / 6, 1 / 10], abs=1e-12)
    _, out, _ = run(capsys, "sweep", "2..3", "--grid", "4x4")
    assert [float(r["P"]) for r in sweep_table(out)] == pytest.approx([0, 5 / 6], abs=1e-12)
    _, out, _ = run(capsys, "sweep", "1..1", "--grid", "4x4")
    assert [float(r["KN"]) for r in sweep_table(out)] == [0.0]


def test_sweep_json(capsys):
    code, doc = run_json(capsys, "sweep", "2..2", "--grid", "3x3", "--format", "json")
    assert code == 0 and doc["result"]["rows"][0]["s"] == 2


@pytest.mark.parametrize("argv", [
    ["verify", "veronese", "--grid", "1x4"],
    ["verify", "veronese", "--grid", "ten"],
    ["verify", "veronese", "--tol", "codazzi"],
    ["verify", "veronese", "--tol", "nonsense=1e-3"],
    ["verify", "veronese", "--tol", "codazzi=-1"],
    ["verify", "veronese", "--tier", "2", "--jet-order", "3"],
    ["verify", "no_such_surface"],
    ["classify", "calabi"],
    ["classify", "veronese", "--s", "3"],
    ["classify", "calabi", "--s", "9"],
    ["sweep", "0..3"],
    ["sweep", "5..2"],
    ["eval", "veronese", "1.0"],
    ["eval", "veronese", "x", "1.0"],
])
def test_usage_errors_exit_2(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == 2 and err.startswith("error:")


def test_argparse_errors_exit_2(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["verify", "--tier", "5"])
    assert exc.value.code == 2


def test_io_error_exit_3(capsys, tmp_path):
    code, out, err = run(capsys, "sweep", "1..1", "--grid", "3x3", "--out", str(tmp_path / "missing" / "x.csv"))
    assert code == 3 and "cannot write" in err


def test_reports_byte_identical(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    args = ["verify", "generalized_veronese", "--grid", "4x4", "--seed", "7"]
    assert cli.main(args + ["--out", str(a)]) == 0
    assert cli.main(args + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_parsers():
    assert parse_grid("8x6") == (8, 6) and parse_grid(" 3X3 ") == (3, 3)
    assert parse_tolerance("all=1e-6") == ("all", 1e-6)


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "spheremin", "list"], capture_output=True, text=True)
    assert res.returncode == 0 and "generalized_veronese" in res.stdout
