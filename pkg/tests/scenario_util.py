"""Small scenario builders shared by the harness, CLI and acceptance tests."""

import copy

from multiregion.cli import builtin_raw
from multiregion.config import parse_config
from multiregion.harness import Simulation, run_scenario


def single_cluster(run_until=20, rate=2, partitions=2, **consumer):
    c = {"name": "svc", "topic": "t", "cluster": "A/main"}
    c.update(consumer)
    return {
        "seed": 1,
        "run_until": run_until,
        "regions": [{"name": "A", "clusters": [{"name": "main"}]}],
        "topics": [
            {
                "name": "t",
                "partitions": partitions,
                "clusters": ["A/main"],
                "traffic": [{"cluster": "A/main", "rate": rate, "keys": 8}],
            }
        ],
        "consumers": [c],
    }


def builtin(name, **overrides):
    raw = copy.deepcopy(builtin_raw(name))
    raw.update(overrides)
    return raw


def run_raw(raw, seed=None):
    return run_scenario(parse_config(raw), seed)


def simulate(raw, seed=None):
    return Simulation(parse_config(raw), seed)
