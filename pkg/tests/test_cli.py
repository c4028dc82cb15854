import json
import subprocess
import sys

from multiregion.cli import EXIT_CONFIG, EXIT_OK, EXIT_VIOLATION, builtin_names, main

from scenario_util import single_cluster

BUILTINS = ["dlq-retry", "federation-growth", "payments-active-passive", "replicator-rebalance", "surge-active-active"]


def test_list_builtins(capsys):
    assert main(["list-builtins"]) == EXIT_OK
    assert capsys.readouterr().out.split() == BUILTINS
    assert builtin_names() == BUILTINS


def test_run_builtin_writes_report(tmp_path):
    out = tmp_path / "r.json"
    assert main(["run", "--builtin", "dlq-retry", "--report", str(out)]) == EXIT_OK
    report = json.loads(out.read_text())
    assert report["consumers"]["fulfillment"]["missing"] == 0


def test_run_scenario_file_with_seed(tmp_path, capsys):
    path = tmp_path / "s.json"
    path.write_text(json.dumps(single_cluster()))
    assert main(["run", "--scenario", str(path), "--seed", "99"]) == EXIT_OK
    assert json.loads(capsys.readouterr().out)["seed"] == 99


def test_validate(tmp_path, capsys):
    good = tmp_path / "good.json"
    good.write_text(json.dumps(single_cluster()))
    assert main(["validate", "--scenario", str(good)]) == EXIT_OK
    bad = tmp_path / "bad.json"
    raw = single_cluster()
    raw["extra"] = 1
    bad.write_text(json.dumps(raw))
    assert main(["validate", "--scenario", str(bad)]) == EXIT_CONFIG
    assert "extra" in capsys.readouterr().err


def test_unknown_builtin_is_config_error():
    assert main(["run", "--builtin", "nope"]) == EXIT_CONFIG


def test_bad_seed_is_config_error():
    assert main(["run", "--builtin", "dlq-retry", "--seed", "-1"]) == EXIT_CONFIG


def test_violation_exit_code(tmp_path, monkeypatch):
    from multiregion import harness

    monkeypatch.setattr(harness, "MAX_DRAIN_TICKS", 20)
    raw = single_cluster(run_until=10)
    raw["faults"] = [{"kind": "cluster_down", "target": "A/main", "window": [5, None]}]
    path = tmp_path / "s.json"
    path.write_text(json.dumps(raw))
    assert main(["run", "--scenario", str(path), "--report", str(tmp_path / "r.json")]) == EXIT_VIOLATION


def test_module_entry_point(tmp_path):
    out = tmp_path / "r.json"
    proc = subprocess.run(
        [sys.executable, "-m", "multiregion", "run", "--builtin", "federation-growth", "--report", str(out)],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert "missing=0" in proc.stderr
