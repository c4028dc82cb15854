"""Offset translation, active-passive failover and active-active primaries.

Replicators record ``(source offset -> destination offset)`` checkpoints.
A committed source offset translates to the destination offset of the
latest checkpoint at or below it, so a failed-over consumer re-reads at most
one checkpoint interval instead of jumping to either watermark.
"""

from __future__ import annotations

import bisect
import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Mapping, Optional

from multiregion.core import ClusterId, TopicPartition
from multiregion.errors import (
    AlreadyInRegion,
    ClusterUnavailable,
    RegionUnavailable,
    UnknownConsumer,
    UnknownRoute,
)

logger = logging.getLogger(__name__)

ACTIVE_ACTIVE = "active-active"
ACTIVE_PASSIVE = "active-passive"


@dataclass(frozen=True)
class OffsetCheckpoint:
    route: str
    partition: int
    src_offset: int
    dst_offset: int
    tick: int


class OffsetMappingStore:
    """Per (route, partition) checkpoint lists, strictly increasing on both sides."""

    def __init__(self):
        self._routes: set = set()
        self._checkpoints: Dict[tuple, List[OffsetCheckpoint]] = {}
        self._src_index: Dict[tuple, List[int]] = {}

    def register_route(self, route: str) -> None:
        self._routes.add(route)

    def has_route(self, route: str) -> bool:
        return route in self._routes

    def add(self, ckpt: OffsetCheckpoint) -> bool:
        if ckpt.route not in self._routes:
            raise UnknownRoute(ckpt.route)
        key = (ckpt.route, ckpt.partition)
        entries = self._checkpoints.setdefault(key, [])
        if entries:
            last = entries[-1]
            if ckpt.src_offset <= last.src_offset or ckpt.dst_offset <= last.dst_offset:
                return False
        entries.append(ckpt)
        self._src_index.setdefault(key, []).append(ckpt.src_offset)
        return True

    def checkpoints(self, route: str, partition: int) -> List[OffsetCheckpoint]:
        if route not in self._routes:
            raise UnknownRoute(route)
        return list(self._checkpoints.get((route, partition), ()))

    def latest(self, route: str, partition: int) -> Optional[OffsetCheckpoint]:
        entries = self._checkpoints.get((route, partition))
        return entries[-1] if entries else None

    def floor(self, route: str, partition: int, src: int) -> Optional[OffsetCheckpoint]:
        if route not in self._routes:
            raise UnknownRoute(route)
        key = (route, partition)
        idx = bisect.bisect_right(self._src_index.get(key, []), src)
        return self._checkpoints[key][idx - 1] if idx else None

    def count(self) -> int:
        return sum(len(v) for v in self._checkpoints.values())


@dataclass
class ActivePassiveConsumer:
    name: str
    topic: str
    clusters: Dict[str, ClusterId]  # region -> cluster hosting the consumed topic
    region: str
    endpoint: object
    window: int
    policy: object
    sync_interval: int = 20
    last_sync_tick: Optional[int] = None
    acks_since_sync: Dict[int, int] = field(default_factory=dict)


@dataclass(frozen=True)
class PrimaryLabel:
    service: str
    primary_region: str
    epoch: int


class FailoverManager:
    """Offset sync job and failover execution for active-passive consumers.

    ``routes`` maps route id to an object exposing ``src``, ``src_topic``,
    ``dst``, ``dst_topic`` and ``checkpoint_interval``.
    """

    def __init__(self, store: OffsetMappingStore, routes: Mapping, clusters: Mapping, proxy, listener=None):
        self.store = store
        self.routes = routes
        self.clusters = clusters
        self.proxy = proxy
        self.listener = listener
        self.consumers: Dict[str, ActivePassiveConsumer] = {}
        self.failovers: List[dict] = []

    # -- translation ------------------------------------------------------

    def translate_offset(self, route_id: str, tp: TopicPartition, src: int) -> int:
        if route_id not in self.routes or not self.store.has_route(route_id):
            raise UnknownRoute(route_id)
        ckpt = self.store.floor(route_id, tp.partition, src)
        if ckpt is not None:
            return ckpt.dst_offset
        route = self.routes[route_id]
        dst = self.clusters[route.dst]
        return dst.watermarks(TopicPartition(route.dst_topic, tp.partition))[0]

    def route_path(self, src: ClusterId, topic: str, dst: ClusterId) -> Optional[List[str]]:
        """Shortest chain of routes from (src, topic) to (dst, topic), ties by route id."""
        start = (src, topic)
        goal = (dst, topic)
        prev = {start: None}
        queue = deque([start])
        while queue:
            node = queue.popleft()
            if node == goal:
                path = []
                while prev[node] is not None:
                    rid, node = prev[node]
                    path.append(rid)
                return path[::-1]
            for rid in sorted(self.routes):
                r = self.routes[rid]
                nxt = (r.dst, r.dst_topic)
                if (r.src, r.src_topic) == node and nxt not in prev:
                    prev[nxt] = (rid, node)
                    queue.append(nxt)
        return None

    def translate_path(self, path: List[str], partition: int, src: int) -> int:
        offset = src
        for rid in path:
            offset = self.translate_offset(rid, TopicPartition(self.routes[rid].src_topic, partition), offset)
        return offset

    def path_interval(self, path: List[str]) -> int:
        return sum(self.routes[rid].checkpoint_interval for rid in path)

    # -- consumers --------------------------------------------------------

    def add_consumer(self, consumer: ActivePassiveConsumer) -> None:
        self.consumers[consumer.name] = consumer
        self.proxy.register_consumer(
            consumer.name, consumer.topic, consumer.endpoint, consumer.window, consumer.policy
        )

    def resolve(self, topic: str, group: Optional[str]):
        consumer = self.consumers.get(group) if group else None
        if consumer is None or consumer.topic != topic:
            return None
        return self.clusters[consumer.clusters[consumer.region]]

    def observe(self, kind, sub, *details) -> None:
        """Proxy listener hook: count acks per partition since the last sync."""
        if kind != "ack":
            return
        consumer = self.consumers.get(sub.group)
        if consumer is None or consumer.topic != sub.topic:
            return
        tp = details[0]
        consumer.acks_since_sync[tp.partition] = consumer.acks_since_sync.get(tp.partition, 0) + 1

    def _consumer(self, name: str) -> ActivePassiveConsumer:
        try:
            return self.consumers[name]
        except KeyError:
            raise UnknownConsumer(name) from None

    def sync_offsets(self, now: int, force: bool = False) -> int:
        """Translate each consumer's primary commits into its standby regions."""
        synced = 0
        for name in sorted(self.consumers):
            c = self.consumers[name]
            if not force and now % c.sync_interval != 0:
                continue
            primary = self.clusters[c.clusters[c.region]]
            if not primary.available:
                continue
            partitions = primary.partition_count(c.topic)
            commits = {p: primary.committed(c.name, TopicPartition(c.topic, p)) for p in range(partitions)}
            for region in sorted(c.clusters):
                if region == c.region:
                    continue
                path = self.route_path(primary.id, c.topic, c.clusters[region])
                standby = self.clusters[c.clusters[region]]
                if path is None or not standby.available:
                    continue
                for p, committed in commits.items():
                    if committed is None:
                        continue
                    tp = TopicPartition(c.topic, p)
                    target = self.translate_path(path, p, committed)
                    current = standby.committed(c.name, tp)
                    if current is None or target > current:
                        standby.commit(c.name, tp, target)
                    synced += 1
            c.last_sync_tick = now
            c.acks_since_sync = {}
        return synced

    def failover_consumer(self, name: str, to: str, now: int) -> Dict[int, int]:
        c = self._consumer(name)
        if to == c.region:
            raise AlreadyInRegion(f"{name} already consumes in {to}")
        if to not in c.clusters:
            raise UnknownConsumer(f"{name} has no cluster in region {to}")
        old_region = c.region
        old = self.clusters[c.clusters[old_region]]
        target = self.clusters[c.clusters[to]]
        dropped = self.proxy.deregister(c.name, c.topic)
        resume = {}
        for p in range(target.partition_count(c.topic)):
            tp = TopicPartition(c.topic, p)
            committed = target.committed(c.name, tp)
            resume[p] = target.watermarks(tp)[0] if committed is None else committed
        path = self.route_path(old.id, c.topic, target.id)
        interval = self.path_interval(path) if path else None
        record = {
            "consumer": name,
            "from": old_region,
            "to": to,
            "tick": now,
            "last_sync_tick": c.last_sync_tick,
            "acks_since_sync": {p: c.acks_since_sync.get(p, 0) for p in resume},
            "resume_offsets": dict(resume),
            "checkpoint_interval": interval,
            "dropped_in_flight": len(dropped),
        }
        self.failovers.append(record)
        c.region = to
        c.acks_since_sync = {}
        self.proxy.register_consumer(c.name, c.topic, c.endpoint, c.window, c.policy)
        if self.listener is not None:
            self.listener("failover", record)
        return resume


class ResultsStore:
    """Key-value results map fenced by primary epoch."""

    def __init__(self):
        self.data: Dict[str, tuple] = {}
        self.epoch = 0
        self.accepted = 0
        self.rejected_stale = 0
        self.writers: Dict[str, int] = {}

    def write(self, key: str, value, epoch: int, region: str) -> bool:
        if epoch < self.epoch:
            self.rejected_stale += 1
            return False
        self.epoch = epoch
        self.data[key] = (value, epoch, region)
        self.accepted += 1
        self.writers[region] = self.writers.get(region, 0) + 1
        return True


class ActiveActiveCoordinator:
    """Labels one region per service as primary; only its writes are stored."""

    def __init__(self, region_up: Callable[[str], bool], store: Optional[ResultsStore] = None):
        self.region_up = region_up
        self.store = store if store is not None else ResultsStore()
        self.labels: Dict[str, PrimaryLabel] = {}
        self.history: List[dict] = []
        self.discarded = 0
        self.write_log: List[tuple] = []

    def primary(self, service: str) -> Optional[PrimaryLabel]:
        return self.labels.get(service)

    def set_primary(self, service: str, region: str, now: int) -> PrimaryLabel:
        if not self.region_up(region):
            raise RegionUnavailable(region)
        current = self.labels.get(service)
        if current is not None and current.primary_region == region:
            return current
        label = PrimaryLabel(service, region, (current.epoch if current else 0) + 1)
        self.labels[service] = label
        self.history.append({"service": service, "region": region, "epoch": label.epoch, "tick": now})
        return label

    def publish(self, service: str, region: str, key: str, value, now: int) -> bool:
        label = self.labels.get(service)
        if label is None or label.primary_region != region:
            self.discarded += 1
            return False
        ok = self.store.write(key, value, label.epoch, region)
        if ok:
            self.write_log.append((now, region, label.epoch, key))
        return ok
