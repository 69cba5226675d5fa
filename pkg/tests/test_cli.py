import csv
import json

import pytest

from iac.cli import main

C8 = {"K": 3, "M": 4, "groups": [1, 1, 2], "dof": [[2], [2], [2, 2]]}
INFEASIBLE = {"K": 3, "M": 2, "groups": [1, 1, 1], "dof": [[2], [2], [2]]}


@pytest.fixture
def write_json(tmp_path):
    def write(name, obj):
        path = tmp_path / name
        path.write_text(obj if isinstance(obj, str) else json.dumps(obj))
        return str(path)

    return write


def test_feasibility_exit_codes(write_json, capsys):
    assert main(["feasibility", "--config", write_json("a.json", C8)]) == 0
    assert json.loads(capsys.readouterr().out)["verdict"] == "feasible"
    assert main(["feasibility", "--config", write_json("b.json", INFEASIBLE)]) == 1
    assert json.loads(capsys.readouterr().out)["verdict"] == "infeasible"


def test_feasibility_table_marks_failures(write_json, capsys):
    assert main(["feasibility", "--config", write_json("b.json", INFEASIBLE),
                 "--format", "table"]) == 1
    out = capsys.readouterr().out
    assert "FAIL" in out and out.rstrip().endswith("verdict: infeasible")


def test_solve_then_verify_round_trip(write_json, tmp_path, capsys):
    cfg = write_json("c8.json", C8)
    tx = tmp_path / "tx.json"
    assert main(["solve", "--config", cfg, "--seed", "7", "--out", str(tx)]) == 0
    solved = json.loads(tx.read_text())
    assert solved["verdict"] == "passed"
    assert main(["verify", "--tx", str(tx)]) == 0
    checked = json.loads(capsys.readouterr().out)
    assert checked["verdict"] == "passed"
    assert {k: v for k, v in checked.items() if k != "verdict"} == solved["verification"]


def test_solve_infeasible_reports_json(write_json, capsys):
    assert main(["solve", "--config", write_json("b.json", INFEASIBLE)]) == 1
    out = json.loads(capsys.readouterr().out)
    assert out["verdict"] == "failed" and out["error"] == "InfeasibleConfigError"


def test_identical_flags_identical_bytes(write_json, tmp_path):
    cfg = write_json("c8.json", C8)
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["solve", "--config", cfg, "--seed", "3", "--out", str(a)]) == 0
    assert main(["solve", "--config", cfg, "--seed", "3", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_seed_from_environment(write_json, tmp_path, monkeypatch):
    cfg = write_json("c8.json", C8)
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    monkeypatch.setenv("IAC_SEED", "11")
    assert main(["solve", "--config", cfg, "--out", str(a)]) == 0
    monkeypatch.delenv("IAC_SEED")
    assert main(["solve", "--config", cfg, "--seed", "11", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_bad_seed_environment(write_json, monkeypatch):
    monkeypatch.setenv("IAC_SEED", "eleven")
    assert main(["solve", "--config", write_json("c8.json", C8)]) == 2


@pytest.mark.parametrize("text", ['{"K": 3,', '{"K": 3, "M": 4}', '{"K": 3, "M": 4, "groups": [1], "dof": [[1]], "x": 1}'])
def test_config_errors_are_usage_errors(write_json, capsys, text):
    assert main(["feasibility", "--config", write_json("bad.json", text)]) == 2
    assert "iac: error" in capsys.readouterr().err


def test_missing_file_and_unknown_command(tmp_path):
    assert main(["feasibility", "--config", str(tmp_path / "nope.json")]) == 2
    assert main(["frobnicate"]) == 2
    assert main(["gap", "--K", "3"]) == 2


def test_verify_rejects_malformed_file(write_json):
    assert main(["verify", "--tx", write_json("tx.json", {"precoders": []})]) == 2
    assert main(["verify", "--tx", write_json("tx2.json", "[")]) == 2


def test_mc_upper_and_gap(capsys):
    assert main(["mc-upper", "--K", "3", "--M", "4", "--runs", "200"]) == 0
    mc = json.loads(capsys.readouterr().out)
    assert mc["runs"] == 200 and mc["upper_star"] == max(v for v, _ in mc["cdf"])
    assert main(["gap", "--K", "3", "--M", "4", "--runs", "200"]) == 0
    g = json.loads(capsys.readouterr().out)
    assert g["upper_star"] == mc["upper_star"] and g["dof_cs"] == 8


def test_gap_on_empty_cell_is_domain_failure(capsys):
    assert main(["gap", "--K", "5", "--M", "2", "--runs", "50"]) == 1
    assert json.loads(capsys.readouterr().out)["error"] == "EmptyResultError"


def test_sweep_writes_csv_and_script(tmp_path):
    out = tmp_path / "sweep"
    assert main(["sweep", "--kmin", "3", "--kmax", "5", "--m", "2,4", "--runs", "100",
                 "--gnuplot", "--out", str(out)]) == 0
    with open(out / "gap.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert [(r["K"], r["M"]) for r in rows] == [(str(K), str(M)) for K in (3, 4, 5) for M in (2, 4)]
    assert (out / "cdf.csv").exists() and (out / "plots.gp").exists()


def test_baselines(capsys):
    assert main(["baselines", "--K", "3", "--M", "4"]) == 0
    row = json.loads(capsys.readouterr().out)
    assert row["closed_form"] == 8 and row["ia_equal_dof"] == 6.0 and row["ia_general"] == 7.0


def test_help_exits_zero(capsys):
    assert main(["--help"]) == 0
