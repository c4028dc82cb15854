"""Logical-cluster metadata service.

Producers and consumers name topics only; the federation resolves each name
to the physical cluster currently hosting it. A topic can be migrated to
another cluster while consumers keep running: produces switch immediately,
and each consumer group drains the old placement (up to the high watermarks
frozen when the migration started) before being redirected to the new one.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, List, Optional

from multiregion.broker import Cluster, TopicConfig
from multiregion.core import ClusterId, TopicPartition
from multiregion.errors import (
    FederationFull,
    MigrationInProgress,
    TopicExists,
    UnknownCluster,
    UnknownTopic,
)

logger = logging.getLogger(__name__)

DEFAULT_MAX_NODES = 150

DRAINING = "draining"
SWITCHED = "switched"


@dataclass
class ClusterMeta:
    cluster: Cluster
    node_count: int
    max_nodes: int = DEFAULT_MAX_NODES
    topics_hosted: set = field(default_factory=set)

    def __post_init__(self):
        if self.node_count <= 0:
            raise ValueError("node_count must be positive")

    @property
    def id(self) -> ClusterId:
        return self.cluster.id

    @property
    def placeable(self) -> bool:
        return self.node_count < self.max_nodes


@dataclass
class Migration:
    old_cluster: ClusterId
    frozen_high: Dict[int, int]
    groups: Dict[str, str]
    started: int


@dataclass
class LogicalTopicRecord:
    name: str
    config: TopicConfig
    current_cluster: ClusterId
    migration: Optional[Migration] = None


class Federation:
    """Routes topic names to physical clusters."""

    def __init__(self, on_switch: Optional[Callable[[str, str, ClusterId, ClusterId], None]] = None):
        self._clusters: Dict[ClusterId, ClusterMeta] = {}
        self._topics: Dict[str, LogicalTopicRecord] = {}
        self.on_switch = on_switch
        self.completed_migrations: List[dict] = []

    def add_cluster(self, cluster: Cluster, node_count: int, max_nodes: int = DEFAULT_MAX_NODES) -> ClusterMeta:
        meta = ClusterMeta(cluster, node_count, max_nodes)
        self._clusters[cluster.id] = meta
        return meta

    def cluster(self, cluster_id: ClusterId) -> Cluster:
        try:
            return self._clusters[cluster_id].cluster
        except KeyError:
            raise UnknownCluster(str(cluster_id)) from None

    def cluster_meta(self, cluster_id: ClusterId) -> ClusterMeta:
        try:
            return self._clusters[cluster_id]
        except KeyError:
            raise UnknownCluster(str(cluster_id)) from None

    def record(self, name: str) -> LogicalTopicRecord:
        try:
            return self._topics[name]
        except KeyError:
            raise UnknownTopic(name) from None

    def has_topic(self, name: str) -> bool:
        return name in self._topics

    def topics(self) -> List[str]:
        return sorted(self._topics)

    def placements(self) -> Dict[str, str]:
        return {name: str(rec.current_cluster) for name, rec in sorted(self._topics.items())}

    def create_logical_topic(self, name: str, config: TopicConfig) -> ClusterId:
        if name in self._topics:
            raise TopicExists(name)
        candidates = [m for m in self._clusters.values() if m.placeable]
        if not candidates:
            raise FederationFull(f"no cluster below its node limit for {name}")
        target = min(candidates, key=lambda m: (len(m.topics_hosted), str(m.id)))
        target.cluster.create_topic(name, config)
        target.topics_hosted.add(name)
        self._topics[name] = LogicalTopicRecord(name, config, target.id)
        logger.debug("placed %s on %s", name, target.id)
        return target.id

    def resolve_topic(self, name: str, group: Optional[str] = None) -> ClusterId:
        """Cluster to use for ``name``: producers pass no group."""
        rec = self.record(name)
        mig = rec.migration
        if group is None or mig is None or group not in mig.groups:
            return rec.current_cluster
        self._advance_group(rec, group)
        if rec.migration is not None and rec.migration.groups.get(group) == DRAINING:
            return rec.migration.old_cluster
        return rec.current_cluster

    def migrate_topic(self, name: str, to: ClusterId, groups: Iterable[str], now: int = 0) -> None:
        rec = self.record(name)
        if rec.migration is not None:
            raise MigrationInProgress(name)
        if to not in self._clusters:
            raise UnknownCluster(str(to))
        if to == rec.current_cluster:
            raise ValueError(f"{name} already on {to}")
        old = self._clusters[rec.current_cluster]
        new = self._clusters[to]
        new.cluster.create_topic(name, rec.config)
        frozen = {
            p: old.cluster.watermarks(TopicPartition(name, p))[1]
            for p in range(rec.config.partitions)
        }
        rec.migration = Migration(old.id, frozen, {g: DRAINING for g in sorted(groups)}, now)
        old.topics_hosted.discard(name)
        new.topics_hosted.add(name)
        rec.current_cluster = to
        for g in sorted(rec.migration.groups):
            self._advance_group(rec, g)

    def advance(self) -> None:
        """Re-check the drain condition of every draining group."""
        for name in sorted(self._topics):
            rec = self._topics[name]
            if rec.migration is not None:
                for g in sorted(rec.migration.groups):
                    self._advance_group(rec, g)

    def _advance_group(self, rec: LogicalTopicRecord, group: str) -> None:
        mig = rec.migration
        if mig is None or mig.groups.get(group) != DRAINING:
            return
        old = self._clusters[mig.old_cluster].cluster
        for p, high in mig.frozen_high.items():
            committed = old.committed(group, TopicPartition(rec.name, p)) or 0
            if committed < high:
                return
        mig.groups[group] = SWITCHED
        if self.on_switch is not None:
            self.on_switch(rec.name, group, mig.old_cluster, rec.current_cluster)
        if all(state == SWITCHED for state in mig.groups.values()):
            self.completed_migrations.append(
                {
                    "topic": rec.name,
                    "from": str(mig.old_cluster),
                    "to": str(rec.current_cluster),
                    "started": mig.started,
                }
            )
            rec.migration = None
