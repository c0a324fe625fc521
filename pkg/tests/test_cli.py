import csv
import io
import json
import math

import pytest

from rsa_kinetics.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_constants_renyi(capsys):
    code, out, _ = run(capsys, "constants", "renyi")
    assert code == 0
    assert json.loads(out)["value"] == pytest.approx(0.747598, abs=1e-6)


def test_constants_multi_report(capsys):
    code, out, _ = run(capsys, "constants", "multi", "--preset", "example3")
    body = json.loads(out)
    assert code == 0
    assert [r["quantity"] for r in body] == ["alpha_1", "alpha_2", "alpha_3", "coverage"]
    cover = sum(l * r["value"] for l, r in zip([1.0, 1.3, 1.5], body))
    assert body[-1]["value"] == pytest.approx(cover, rel=1e-14)


def test_constants_csv_quotes_commas(capsys):
    code, out, _ = run(capsys, "constants", "multi", "--preset", "example3", "--k", "2", "--format", "csv")
    rows = list(csv.reader(io.StringIO(out)))
    assert code == 0 and len(rows) == 2 and len(rows[1]) == 4


def test_constants_xi(capsys):
    code, out, _ = run(capsys, "constants", "xi", "--beta", "1")
    body = json.loads(out)
    assert body[0]["value"] == pytest.approx((math.sqrt(17) - 3) / 2, abs=1e-12)
    code, _, err = run(capsys, "constants", "xi")
    assert code == 2 and "beta" in err


def test_simulate_single_rep_marker(capsys):
    code, out, _ = run(capsys, "simulate", "--dist", "renyi", "--L", "30", "--reps", "1")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert all(r["stderr"] == "NA" for r in rows)
    code, out, _ = run(capsys, "simulate", "--dist", "renyi", "--L", "30", "--reps", "1", "--format", "json")
    assert all(e["stderr"] is None for e in json.loads(out)["estimates"])


def test_simulate_ghost_single_type(capsys):
    code, out, _ = run(capsys, "simulate", "--dist", "renyi", "--process", "ghost", "--L", "100", "--reps", "4000")
    row = {r["estimand"]: r for r in csv.DictReader(io.StringIO(out))}["N"]
    assert abs(float(row["mean"]) - 49.5) <= 4 * float(row["stderr"])


def test_simulate_json_file_distribution(tmp_path, capsys):
    path = tmp_path / "d.json"
    path.write_text(json.dumps({"kind": "discrete", "atoms": [[1.0, 1.0]]}))
    code, out, _ = run(capsys, "simulate", "--dist", str(path), "--L", "10", "--reps", "10")
    assert code == 0 and out.startswith("estimand,mean")


def test_solve_below_one(capsys):
    code, out, _ = run(capsys, "solve", "--dist", "uniform-ldf", "--Lmax", "0.5", "--h", "0.125")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0
    assert all(float(r["L"]) == float(r["value"]) for r in rows)


def test_solve_counts_and_moment(capsys):
    code, out, _ = run(capsys, "solve", "--dist", "fig4", "--Lmax", "2")
    assert code == 0
    code, out, _ = run(capsys, "solve", "--dist", "example3", "--Lmax", "3", "--k", "2", "--moment", "2")
    assert code == 0 and out.startswith("L,value,variance")


def test_exit_codes(capsys):
    assert run(capsys, "solve", "--dist", "no-such-preset")[0] == 2
    assert run(capsys, "solve", "--dist", "fig6a", "--h", "0.3")[0] == 2
    assert run(capsys, "solve", "--dist", "fig6a", "--k", "1")[0] == 2
    assert run(capsys, "simulate", "--dist", "fig6a", "--process", "ghost", "--L", "5")[0] == 2
    assert run(capsys, "constants", "alpha-nu", "--preset", "fig6a")[0] == 2
    assert run(capsys, "simulate", "--dist", "fig6a", "--process", "rejection", "--L", "50",
               "--reps", "3", "--attempt-cap", "2")[0] == 3


def test_numeric_overflow_exit(tmp_path, capsys):
    path = tmp_path / "d.json"
    path.write_text(json.dumps({"kind": "exponential", "rate": 2.0}))
    assert run(capsys, "solve", "--dist", str(path), "--Lmax", "400")[0] == 3


def test_compare_pass_and_fail(capsys):
    code, out, _ = run(capsys, "compare", "--dist", "renyi", "--L", "40", "--reps", "3000")
    assert code == 0
    code, out, _ = run(capsys, "compare", "--dist", "renyi", "--L", "40", "--reps", "3000", "--tol-scale", "0")
    assert code == 1 and ",fail" in out


def test_compare_ghost(capsys):
    code, out, _ = run(capsys, "compare", "--dist", "example3", "--process", "ghost", "--L", "200",
                       "--reps", "3000", "--format", "json")
    body = json.loads(out)
    assert code == 0 and body["passed"] and len(body["rows"]) == 3


def test_out_file_byte_identical(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for p in (a, b):
        assert main(["simulate", "--dist", "example3", "--L", "40", "--reps", "2500", "--seed", "7",
                     "--out", str(p)]) == 0
    assert a.read_bytes() == b.read_bytes()
