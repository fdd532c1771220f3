import csv
import io
import json
import math
import shutil
import subprocess

import pytest

from plyap import cli
from plyap.errors import DomainError, IntegrationError, SearchError
from plyap.shooting import ProblemSpec
from plyap.weights import PiecewiseWeight

SINE = PiecewiseWeight.sinusoid(1.0, 2 * math.pi, 0.0, 0.0, 1.0)


@pytest.fixture
def problem(tmp_path):
    def write(data, name="problem.json"):
        path = tmp_path / name
        path.write_text(json.dumps(data))
        return str(path)

    return write


def run(argv, capsys):
    code = cli.main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def table(text):
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(lines))))


def test_solve_table(problem, capsys):
    path = problem({"p": 2, "L": math.pi, "a": 1, "rho": 1})
    code, out, _ = run(["solve", "-i", path, "--k", "1..3"], capsys)
    assert code == 0
    assert out.startswith("# plyap ")
    rows = table(out)
    assert [float(r["lambda"]) for r in rows] == pytest.approx([1.0, 4.0, 9.0], rel=1e-8)
    assert [int(r["nodal_count"]) for r in rows] == [2, 3, 4]


def test_k_from_input_file(problem, capsys):
    path = problem({"p": 2, "L": math.pi, "k": "2..3"})
    code, out, _ = run(["solve", "-i", path, "--no-header"], capsys)
    assert code == 0
    assert [r["k"] for r in table(out)] == ["2", "3"]


def test_bounds_rows(problem, capsys):
    path = problem({"p": 2, "L": math.pi, "a": 1, "rho": 1})
    code, out, _ = run(["bounds", "-i", path, "--k", "1..3"], capsys)
    assert code == 0
    rows = [r for r in table(out) if r["name"] == "thm_lyapu"]
    assert len(rows) == 3
    assert all(r["satisfied"] == "true" and float(r["slack"]) > 0 for r in rows)


def test_bounds_json(problem, capsys):
    path = problem({"p": 2, "L": 1, "rho": SINE.to_dict()})
    code, out, _ = run(["bounds", "-i", path, "--format", "json", "--sign", "both"], capsys)
    assert code == 0
    data = json.loads(out)
    assert data["metadata"]["command"] == "bounds"
    names = {r["name"] for r in data["data"]["reports"]}
    assert {"thm_lyapu", "classical", "thm_lyapi", "harris_kong_left"} <= names


def test_homogenize_zero_mean(problem, capsys):
    path = problem({"p": 2, "L": 1, "rho": SINE.to_dict()})
    code, out, _ = run(["homogenize", "-i", path, "--eps", "0.25,0.125,0.0625"], capsys)
    assert code == 0
    lam = [float(r["lambda"]) for r in table(out)]
    assert lam == sorted(lam) and lam[0] < lam[-1]


def test_beam_json(problem, capsys):
    path = problem({"m": 2, "L": 1, "n": 100})
    code, out, _ = run(["beam", "-i", path, "--format", "json", "--no-header"], capsys)
    assert code == 0
    data = json.loads(out)
    assert data["lhs"] == 0.5 and data["satisfied"] is True
    assert data["lambda1"] == pytest.approx(500.564, rel=5e-3)
    assert data["das_vatsala_constant"] == 192.0


def test_ptrig(capsys):
    code, out, _ = run(["ptrig", "--p", "2,3", "--no-header"], capsys)
    assert code == 0
    rows = table(out)
    assert float(rows[0]["pi_p"]) == pytest.approx(math.pi, abs=1e-10)
    assert float(rows[1]["q"]) == pytest.approx(1.5)
    assert float(rows[1]["phi_p(-2)"]) == pytest.approx(-4.0)


def test_output_file_and_determinism(problem, tmp_path, capsys):
    path = problem({"p": 3, "L": 1, "rho": SINE.shift(0.3).to_dict()})
    outs = []
    for name in ("a.csv", "b.csv"):
        target = tmp_path / name
        assert run(["solve", "-i", path, "--k", "1..2", "--sign", "both", "--no-header", "-o", str(target)], capsys)[0] == 0
        outs.append(target.read_bytes())
    assert outs[0] == outs[1]
    assert not outs[0].startswith(b"#")


def test_round_trip_canonical(rng):
    from conftest import random_coefficient, random_sign_changing_weight

    for _ in range(10):
        spec = ProblemSpec(float(rng.uniform(1.2, 5.0)), 1.0, random_coefficient(rng), random_sign_changing_weight(rng))
        once = cli.canonical_json(spec.to_dict())
        again = cli.canonical_json(cli.load_problem(json.loads(once)).to_dict())
        assert once == again


def test_parse_k_range():
    assert cli.parse_k_range("3") == [3]
    assert cli.parse_k_range("2..4") == [2, 3, 4]
    assert cli.parse_k_range([1, 2]) == [1, 2]
    with pytest.raises(DomainError):
        cli.parse_k_range("0..2")


def test_exit_io(tmp_path, capsys):
    code, _, err = run(["solve", "-i", str(tmp_path / "missing.json")], capsys)
    assert code == 3 and "missing.json" in err
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(["solve", "-i", str(bad)], capsys)[0] == 3


def test_exit_domain(problem, capsys):
    path = problem({"p": 0.5, "L": 1})
    code, _, err = run(["solve", "-i", path], capsys)
    assert code == 1 and '"p": 0.5' in err
    path = problem({"p": 2, "L": 1, "rho": -1})
    assert run(["solve", "-i", path], capsys)[0] == 1
    assert run(["solve", "-i", path, "--tol", "0.5"], capsys)[0] == 1
    assert run(["frobnicate"], capsys)[0] == 1
    path = problem({"p": 2, "L": 1, "rho": {"L": 1, "segments": [{"kind": "constant", "end": 1, "params": [1]}]}})
    code, _, err = run(["solve", "-i", path], capsys)
    assert code == 1 and "malformed segment" in err


@pytest.mark.parametrize("exc", [IntegrationError("step size underflow", 0.3), SearchError("no bracket")])
def test_exit_solver(problem, capsys, monkeypatch, exc):
    def boom(*args, **kwargs):
        raise exc

    monkeypatch.setattr(cli, "eigenvalue", boom)
    code, _, err = run(["solve", "-i", problem({"p": 2, "L": 1})], capsys)
    assert code == 2 and "solver failure" in err


def test_help_exits_zero(capsys):
    assert run(["--help"], capsys)[0] == 0


@pytest.mark.skipif(shutil.which("plyap") is None, reason="console script not installed")
def test_console_script(problem):
    path = problem({"p": 2, "L": math.pi})
    proc = subprocess.run(["plyap", "solve", "-i", path, "--no-header"], capture_output=True, text=True, timeout=120)
    assert proc.returncode == 0
    assert float(table(proc.stdout)[0]["lambda"]) == pytest.approx(1.0, rel=1e-8)
