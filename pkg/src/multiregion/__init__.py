"""Deterministic multi-region streaming platform simulator."""

from multiregion.core import (
    AuditMeta,
    ClusterId,
    Message,
    TopicPartition,
    fnv1a_64,
    partition_for_key,
)
from multiregion.config import SimConfig, load_config, parse_config
from multiregion.errors import ConfigError
from multiregion.harness import Simulation, report_json, run_scenario

__version__ = "0.1.0"

__all__ = [
    "AuditMeta",
    "ClusterId",
    "ConfigError",
    "Message",
    "SimConfig",
    "Simulation",
    "TopicPartition",
    "fnv1a_64",
    "load_config",
    "parse_config",
    "partition_for_key",
    "report_json",
    "run_scenario",
]
