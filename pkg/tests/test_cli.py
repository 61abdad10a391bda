import csv
import io
import json
import subprocess
import sys
import textwrap

import pytest
from click.testing import CliRunner

from secagg.cli import main

HONEST = textwrap.dedent(
    """
    master_seed: cli
    params: {n: 40, k: 8, ell: 10, t: 6, c_tilde: 3, gamma: 0.1, delta: 0.25, m: 2}
    dropouts: {3: 2, 7: 4}
    """
)


@pytest.fixture
def runner():
    return CliRunner()


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def test_plan_outputs_json(runner):
    res = runner.invoke(main, ["plan", "--n", "10000", "--gamma", "0.1", "--delta", "0.1", "--eta", "20", "--lambda", "20"])
    assert res.exit_code == 0
    data = json.loads(res.stdout)
    assert set(data) == {"params", "report", "exact"}
    assert data["report"]["correctness_failure"] <= 2**-20
    exact = runner.invoke(main, ["plan", "--n", "10000", "--gamma", "0.1", "--delta", "0.1", "--eta", "20", "--lambda", "20", "--exact"])
    assert json.loads(exact.stdout)["params"]["k"] <= data["params"]["k"]


def test_plan_infeasible(runner):
    res = runner.invoke(main, ["plan", "--n", "100", "--gamma", "0.5", "--delta", "0.3"])
    assert res.exit_code == 1
    assert "infeasible" in res.stderr


def test_plan_semi_honest_large(runner):
    res = runner.invoke(
        main,
        ["plan", "--n", "1000000", "--gamma", "0.33", "--delta", "0.33", "--eta", "20", "--lambda", "40", "--mode", "semi-honest"],
    )
    k = json.loads(res.stdout)["params"]["k"]
    assert abs(k - 407) <= 0.15 * 407


def test_run_honest_and_replay(runner, tmp_path):
    cfg = write(tmp_path, "c.yaml", HONEST)
    tr = str(tmp_path / "t.ndjson")
    res = runner.invoke(main, ["run", "--config", cfg, "--transcript-out", tr])
    assert res.exit_code == 0
    out = json.loads(res.stdout)
    assert out["outcome"]["result"] == "output" and len(out["outcome"]["y"]) == 2
    lines = open(tr).read().splitlines()
    assert json.loads(lines[0])["type"] == "header" and json.loads(lines[-1])["type"] == "outcome"
    again = runner.invoke(main, ["run", "--config", cfg, "--replay", tr])
    assert again.exit_code == 0 and "identical" in again.stderr
    with open(tr, "a") as fh:
        fh.write("{}\n")
    bad = runner.invoke(main, ["run", "--config", cfg, "--replay", tr])
    assert bad.exit_code == 3


def test_run_shrink_aborts(runner, tmp_path):
    cfg = write(tmp_path, "c.yaml", HONEST)
    adv = write(tmp_path, "a.yaml", "adversary: {strategy: shrink_u2}\n")
    res = runner.invoke(main, ["run", "--config", cfg, "--scenario", adv])
    assert res.exit_code == 2
    assert "too-few-inputs" in res.stderr
    assert json.loads(res.stdout)["outcome"]["reason"] == "too-few-inputs"


def test_run_usage_errors(runner, tmp_path):
    assert runner.invoke(main, ["run"]).exit_code == 1
    cfg = write(tmp_path, "c.yaml", "params: {n: 3}\n")
    assert runner.invoke(main, ["run", "--config", cfg]).exit_code == 1
    junk = write(tmp_path, "j.yaml", ": : :\n  - [")
    assert runner.invoke(main, ["run", "--config", junk]).exit_code == 1


def test_run_mode_override(runner, tmp_path):
    cfg = write(tmp_path, "c.yaml", HONEST)
    res = runner.invoke(main, ["run", "--config", cfg, "--mode", "semi-honest"])
    assert res.exit_code == 0


def test_verify_roundtrip(runner, tmp_path):
    cfg = write(tmp_path, "c.yaml", HONEST.replace("m: 2}", "m: 2, modulus: group, mode: lisa-plus}"))
    result, keys = str(tmp_path / "r.json"), str(tmp_path / "k.json")
    res = runner.invoke(main, ["run", "--config", cfg, "--result-out", result, "--keys-out", keys])
    assert res.exit_code == 0, res.stderr
    ok = runner.invoke(main, ["verify", "--result", result, "--committee-keys", keys])
    assert ok.exit_code == 0 and json.loads(ok.stdout) == {"verdict": "accept"}

    tampered = str(tmp_path / "r2.json")
    adv = write(tmp_path, "a.yaml", "adversary: {strategy: tamper_output, delta: 1}\n")
    runner.invoke(main, ["run", "--config", cfg, "--scenario", adv, "--result-out", tampered])
    bad = runner.invoke(main, ["verify", "--result", tampered, "--committee-keys", keys])
    assert bad.exit_code == 2 and json.loads(bad.stdout) == {"verdict": "commitment-mismatch"}

    text = open(result).read()
    trunc = write(tmp_path, "t.json", text[: len(text) // 2])
    assert runner.invoke(main, ["verify", "--result", trunc, "--committee-keys", keys]).exit_code == 1
    doc = json.loads(text)
    doc["result"] = doc["result"][:40]
    short = write(tmp_path, "s.json", json.dumps(doc))
    assert runner.invoke(main, ["verify", "--result", short, "--committee-keys", keys]).exit_code == 1


def test_campaign_outputs(runner, tmp_path):
    csv_a, csv_b, js = (str(tmp_path / n) for n in ("a.csv", "b.csv", "a.json"))
    args = ["campaign", "--n", "1000", "--rounds", "1", "--eta", "20", "--lambda", "20"]
    res = runner.invoke(main, args + ["--csv-out", csv_a, "--json-out", js])
    assert res.exit_code == 0
    summary = json.loads(res.stdout)
    assert summary["rounds"] == 1 and summary["committee_mean"] > 0
    runner.invoke(main, args + ["--csv-out", csv_b])
    assert open(csv_a, "rb").read() == open(csv_b, "rb").read()
    rows = list(csv.reader(io.StringIO(open(csv_a).read())))
    assert rows[0] == ["round", "metric", "value"]
    assert json.load(open(js))["rounds"] == 1
    assert runner.invoke(main, ["campaign", "--rounds", "1"]).exit_code == 1
    assert runner.invoke(main, ["campaign", "--n", "100000", "--rounds", "1"]).exit_code == 1


def test_entry_point_subprocess():
    proc = subprocess.run(
        [sys.executable, "-m", "secagg.cli", "plan", "--n", "1000", "--gamma", "0.1", "--delta", "0.1", "--eta", "10", "--lambda", "10"],
        capture_output=True,
        text=True,
        env={"SECAGG_LOG_LEVEL": "DEBUG", "PATH": "/usr/bin:/bin"},
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["params"]["n"] == 1000
