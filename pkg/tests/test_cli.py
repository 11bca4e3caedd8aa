import json
from importlib import resources

import pytest
from click.testing import CliRunner

from qcprog.cli import main

DATA = resources.files("qcprog") / "data"


def path(name):
    return str(DATA / f"{name}.qprog")


def run(*args):
    return CliRunner().invoke(main, [str(a) for a in args])


def run_json(*args):
    result = run(*args, "--json")
    assert result.exit_code == 0, result.output
    return json.loads(result.output)


COMMANDS = [
    ("validate",),
    ("reach",),
    ("reach", "--method", "all"),
    ("urr",),
    ("urr", "--method", "all"),
    ("terminate", "--schedule", "all"),
    ("terminate", "--schedule", "fair"),
    ("oracle", "reach"),
    ("oracle", "urr"),
    ("oracle", "terminate-all"),
    ("oracle", "terminate-fair"),
    ("oracle", "pi"),
]


def test_help_lists_commands():
    result = run("--help")
    assert result.exit_code == 0
    for name in ("validate", "reach", "urr", "terminate", "oracle", "example"):
        assert name in result.output


@pytest.mark.parametrize("cmd", COMMANDS, ids=lambda c: " ".join(c))
@pytest.mark.parametrize("name", ["walk", "flip", "identity"])
def test_commands_succeed(cmd, name):
    result = run(*cmd, path(name))
    assert result.exit_code == 0, result.output
    report = run_json(*cmd, path(name))
    assert report["command"] == cmd[0]
    assert report["timings"] is None
    assert report["tolerances"]["zero"] == 1e-9


def test_reach_identity():
    report = run_json("reach", path("identity"))
    entry = report["subspaces"]["reach"]
    assert entry["dimension"] == 1
    (v,) = entry["basis"]
    assert abs(complex(*v[0])) == pytest.approx(1.0)
    assert abs(complex(*v[1])) == pytest.approx(0.0)


def test_fair_walk_matches_oracle():
    verdict = run_json("terminate", "--schedule", "fair", path("walk"))["verdicts"]["terminates"]
    check = run_json("oracle", "terminate-fair", path("walk"))["verdicts"]
    assert check["agree"]
    assert verdict == check["oracle_terminates"] is False


def test_flip_terminates():
    v = run_json("terminate", "--schedule", "all", path("flip"))
    assert v["verdicts"]["terminates"] is True
    assert v["verdicts"]["output_bit"] == 0
    assert v["residuals"]["log10_survival"] == "-inf"


def test_all_methods_agree_on_walk():
    report = run_json("reach", "--method", "all", path("walk"))
    assert all(v for k, v in report["verdicts"].items() if k.startswith("agree"))
    report = run_json("urr", "--method", "all", path("walk"))
    assert all(report["verdicts"].values())


def test_human_output_six_digits():
    result = run("reach", path("walk"))
    assert "dimension 3" in result.output
    assert "0.973329" in result.output
    assert "0.9733285" not in result.output


def test_json_full_precision():
    report = run_json("reach", path("walk"))
    x = report["subspaces"]["reach"]["basis"][0][0][0]
    assert len(repr(x)) > 10


def test_pi_listing():
    report = run_json("oracle", "pi", path("walk"))
    assert report["verdicts"]["size"] == len(report["pieces"]) == 14
    assert "12" in report["pieces"]


@pytest.mark.parametrize("name", ["walk", "flip", "identity"])
def test_example_round_trip(name, tmp_path):
    out = tmp_path / f"{name}.qprog"
    assert run("example", name, "-o", out).exit_code == 0
    assert out.read_text() == (DATA / f"{name}.qprog").read_text()
    assert run("example", name).output == out.read_text()
    assert run("validate", out).exit_code == 0


def test_parse_error_exit_code(tmp_path):
    bad = tmp_path / "bad.qprog"
    bad.write_text((DATA / "walk.qprog").read_text()[:200])
    result = run("validate", bad)
    assert result.exit_code == 2
    result = run("reach", bad, "--json")
    assert result.exit_code == 2
    assert json.loads(result.output)["error"]["type"] == "ParseError"


def test_validation_error_exit_code(tmp_path):
    doc = json.loads((DATA / "flip.qprog").read_text())
    doc["measurement"]["m0"] = doc["measurement"]["m1"] = [[[1, 0], [0, 0]], [[0, 0], [1, 0]]]
    bad = tmp_path / "bad.qprog"
    bad.write_text(json.dumps(doc))
    result = run("validate", bad, "--json")
    assert result.exit_code == 2
    err = json.loads(result.output)["error"]
    assert err["type"] == "ValidationError"
    assert err["failures"][0]["check"] == "completeness"


def test_guard_exit_code():
    result = run("terminate", "--schedule", "fair", path("walk"), "--max-m-override", 1)
    assert result.exit_code == 3
    assert run("terminate", "--schedule", "fair", path("walk"), "--max-m-override", 2).exit_code == 0


def test_budget_exit_code():
    assert run("oracle", "pi", path("walk"), "--max-pi-size", 5).exit_code == 3


def test_tolerance_flags(tmp_path):
    report = run_json("reach", path("walk"), "--tolerance", "rank=1e-6", "--tolerance", "zero=1e-12")
    assert report["tolerances"]["rank"] == 1e-6
    assert report["tolerances"]["zero"] == 1e-12
    assert run("reach", path("walk"), "--tolerance", "nope=1").exit_code == 2
    assert run("reach", path("walk"), "--tolerance", "rank").exit_code == 2
    cfg = tmp_path / "tol.json"
    cfg.write_text(json.dumps({"tolerances": {"sub": 1e-6}}))
    report = run_json("reach", path("walk"), "--config", cfg, "--tolerance", "rank=1e-8")
    assert report["tolerances"]["sub"] == 1e-6
    assert report["tolerances"]["rank"] == 1e-8


def test_timings_only_on_request():
    report = run_json("reach", path("walk"), "--timings")
    assert set(report["timings"]) >= {"parse", "algorithm1"}


def test_precompute_cache(tmp_path):
    a = run_json("urr", path("walk"), "--precompute-cache", tmp_path)
    assert list(tmp_path.glob("*.npz"))
    b = run_json("urr", path("walk"), "--precompute-cache", tmp_path)
    assert a == b
    plain = run_json("urr", path("walk"))
    assert a["subspaces"]["urr"]["dimension"] == plain["subspaces"]["urr"]["dimension"]


def test_module_entry_point():
    import subprocess
    import sys

    out = subprocess.run([sys.executable, "-m", "qcprog", "reach", path("identity"), "--json"], capture_output=True, text=True, check=True)
    assert json.loads(out.stdout)["subspaces"]["reach"]["dimension"] == 1
