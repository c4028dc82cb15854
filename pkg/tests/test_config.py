import json

import pytest

from multiregion.config import FaultSpec, check_fault_target, load_config, parse_config
from multiregion.core import ClusterId
from multiregion.errors import ConfigError

from scenario_util import builtin, single_cluster


def error_path(raw):
    with pytest.raises(ConfigError) as exc:
        parse_config(raw)
    return exc.value.path


def test_minimal_scenario_defaults():
    cfg = parse_config({"seed": 0, "run_until": 0})
    assert cfg.topics == [] and cfg.consumers == [] and cfg.faults == []
    assert cfg.workers.active == []


@pytest.mark.parametrize("missing", ["seed", "run_until"])
def test_required_top_level_keys(missing):
    raw = {"seed": 1, "run_until": 5}
    del raw[missing]
    assert error_path(raw) == missing


def test_unknown_top_level_key():
    assert error_path({"seed": 1, "run_until": 5, "name": "x"}) == "name"


def test_unknown_nested_key_has_full_path():
    raw = single_cluster()
    raw["topics"][0]["traffic"][0]["burst"] = 3
    assert error_path(raw) == "topics[0].traffic[0].burst"


def test_type_error_path():
    raw = single_cluster()
    raw["consumers"][0]["window"] = "three"
    assert error_path(raw) == "consumers[0].window"


def test_partition_count_checked():
    raw = single_cluster()
    raw["topics"][0]["partitions"] = 0
    assert error_path(raw) == "topics[0].partitions"


def test_unknown_cluster_reference():
    raw = single_cluster()
    raw["consumers"][0]["cluster"] = "A/other"
    assert error_path(raw) == "consumers[0].cluster"


def test_route_partition_mismatch():
    raw = builtin("payments-active-passive")
    raw["topics"].append({"name": "small", "partitions": 1, "clusters": ["B/aggregate"]})
    raw["routes"][0]["dst"] = "B/aggregate"
    raw["routes"][0]["dst_topic"] = "small"
    assert error_path(raw) == "routes[0]"


def test_routes_need_workers():
    raw = builtin("surge-active-active")
    raw["workers"] = {"active": []}
    assert error_path(raw) == "workers.active"


def test_failover_target_region_checked():
    raw = builtin("payments-active-passive")
    raw["consumers"][0]["failovers"][0]["to"] = "C"
    assert error_path(raw) == "consumers[0].failovers[0].to"


def test_topic_needs_placement():
    raw = single_cluster()
    raw["topics"][0]["clusters"] = []
    assert error_path(raw) == "topics[0]"


def test_reserved_dlq_suffix():
    raw = single_cluster()
    raw["topics"][0]["name"] = "t.dlq"
    raw["consumers"][0]["topic"] = "t.dlq"
    assert error_path(raw) == "topics[0].name"


def test_fault_window_order():
    raw = single_cluster()
    raw["faults"] = [{"kind": "cluster_down", "target": "A/main", "window": [5, 2]}]
    assert error_path(raw) == "faults[0].window"


@pytest.mark.parametrize(
    "kind,target",
    [
        ("cluster_down", "A/nope"),
        ("region_down", "Z"),
        ("worker_crash", "w9"),
        ("drop_message_ids", "no-route"),
        ("endpoint_behavior_change", "ghost"),
    ],
)
def test_unknown_fault_target(kind, target):
    raw = single_cluster()
    raw["faults"] = [{"kind": kind, "target": target, "window": [1, 2], "params": {"ids": [1], "rule": "always-ack"}}]
    assert error_path(raw) == "faults[0].target"


def test_fault_params_checked():
    cfg = parse_config(single_cluster())
    with pytest.raises(ConfigError) as exc:
        check_fault_target(FaultSpec("endpoint_behavior_change", "svc", 1, None, {"rule": "sometimes"}), cfg)
    assert exc.value.path == "fault.params.rule"


def test_parsed_structure():
    cfg = parse_config(builtin("payments-active-passive"))
    consumer = cfg.consumers[0]
    assert consumer.mode == "active-passive"
    assert consumer.clusters == {"A": ClusterId("A", "aggregate"), "B": ClusterId("B", "aggregate")}
    assert consumer.failovers == [(205, "B")]
    assert [r.checkpoint_interval for r in cfg.routes] == [100, 100, 100]
    assert cfg.faults[0].active(200) and not cfg.faults[0].active(300)


def test_load_config_reports_bad_json(tmp_path):
    path = tmp_path / "s.json"
    path.write_text("{not json")
    with pytest.raises(ConfigError) as exc:
        load_config(path)
    assert exc.value.path == "<file>"


def test_load_config_roundtrip(tmp_path):
    path = tmp_path / "s.json"
    path.write_text(json.dumps(single_cluster()))
    assert load_config(path).run_until == 20
