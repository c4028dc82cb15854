"""Single-cluster partitioned commit log.

Each topic is a fixed set of append-only partition logs. Offsets are
contiguous per partition; ``high`` is the next offset to assign and ``low``
the oldest retained one. Consumer groups commit the *next* offset to consume.

Lossless topics never drop entries at or above the minimum offset committed
by the groups registered on them, whatever their retention says.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from multiregion.core import AuditMeta, ClusterId, Message, TopicPartition, partition_for_key
from multiregion.errors import (
    ClusterUnavailable,
    CommitRegression,
    InvalidCommit,
    InvalidPartitionCount,
    OffsetExpired,
    TopicExists,
    UnknownTopic,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TopicConfig:
    partitions: int
    retention_ticks: Optional[int] = None  # None means infinite
    lossless: bool = False

    def __post_init__(self):
        if self.partitions < 1:
            raise InvalidPartitionCount(f"partitions must be >= 1, got {self.partitions}")
        if self.retention_ticks is not None and self.retention_ticks <= 0:
            raise ValueError("retention_ticks must be positive or None")


class PartitionLog:
    __slots__ = ("low", "_entries")

    def __init__(self):
        self.low = 0
        self._entries: deque = deque()  # (append_tick, Message), offset = low + index

    @property
    def high(self) -> int:
        return self.low + len(self._entries)

    def append(self, message: Message, now: int) -> int:
        self._entries.append((now, message))
        return self.high - 1

    def read(self, start: int, stop: int) -> List[Tuple[int, Message]]:
        base = self.low
        return [(off, self._entries[off - base][1]) for off in range(start, stop)]

    def append_tick(self, offset: int) -> int:
        return self._entries[offset - self.low][0]

    def drop_before(self, offset: int) -> int:
        dropped = 0
        while self.low < offset and self._entries:
            self._entries.popleft()
            self.low += 1
            dropped += 1
        return dropped


class _Topic:
    def __init__(self, name: str, config: TopicConfig):
        self.name = name
        self.config = config
        self.logs = [PartitionLog() for _ in range(config.partitions)]
        self.rr_counter = 0
        self.groups: set = set()


class Cluster:
    """One physical log cluster. All calls are serialized by the caller."""

    def __init__(self, cluster_id: ClusterId):
        self.id = cluster_id
        self.available = True
        self.on_append = None  # called as (cluster, tp, offset, message, now)
        self._topics: Dict[str, _Topic] = {}
        self._committed: Dict[str, Dict[TopicPartition, int]] = {}

    def __repr__(self):
        return f"Cluster({self.id})"

    # -- topics -----------------------------------------------------------

    def create_topic(self, name: str, config: TopicConfig) -> None:
        if name in self._topics:
            raise TopicExists(f"{name} already exists on {self.id}")
        self._topics[name] = _Topic(name, config)

    def has_topic(self, name: str) -> bool:
        return name in self._topics

    def topics(self) -> List[str]:
        return sorted(self._topics)

    def topic_config(self, name: str) -> TopicConfig:
        return self._topic(name).config

    def partition_count(self, name: str) -> int:
        return self._topic(name).config.partitions

    def _topic(self, name: str) -> _Topic:
        try:
            return self._topics[name]
        except KeyError:
            raise UnknownTopic(f"{name} not on {self.id}") from None

    def _log(self, tp: TopicPartition) -> PartitionLog:
        topic = self._topic(tp.topic)
        if not 0 <= tp.partition < len(topic.logs):
            raise UnknownTopic(f"{tp} not on {self.id}")
        return topic.logs[tp.partition]

    def _check_up(self):
        if not self.available:
            raise ClusterUnavailable(str(self.id))

    # -- data path --------------------------------------------------------

    def produce(
        self,
        topic: str,
        key: Optional[bytes],
        payload: bytes,
        audit: AuditMeta,
        now: int,
    ) -> Tuple[TopicPartition, int]:
        return self.append(topic, Message(audit, key, payload), now)

    def append(
        self, topic: str, message: Message, now: int, partition: Optional[int] = None
    ) -> Tuple[TopicPartition, int]:
        """Append ``message``; the partition is chosen from the key unless given."""
        self._check_up()
        t = self._topic(topic)
        n = t.config.partitions
        if partition is None:
            if message.key is not None:
                partition = partition_for_key(message.key, n)
            else:
                partition = t.rr_counter % n
                t.rr_counter += 1
        elif not 0 <= partition < n:
            raise UnknownTopic(f"{topic}[{partition}] not on {self.id}")
        offset = t.logs[partition].append(message, now)
        tp = TopicPartition(topic, partition)
        if self.on_append is not None:
            self.on_append(self, tp, offset, message, now)
        return tp, offset

    def fetch(self, tp: TopicPartition, start: int, max_count: int) -> List[Tuple[int, Message]]:
        self._check_up()
        log = self._log(tp)
        if start < log.low:
            raise OffsetExpired(tp, start, log.low)
        stop = min(start + max_count, log.high)
        if start >= stop:
            return []
        return log.read(start, stop)

    def watermarks(self, tp: TopicPartition) -> Tuple[int, int]:
        log = self._log(tp)
        return log.low, log.high

    # -- consumer groups --------------------------------------------------

    def register_group(self, group: str, topic: str) -> None:
        """Make ``group`` count toward the lossless retention floor of ``topic``."""
        self._topic(topic).groups.add(group)

    def commit(self, group: str, tp: TopicPartition, next_offset: int) -> None:
        self._check_up()
        log = self._log(tp)
        if next_offset > log.high or next_offset < 0:
            raise InvalidCommit(f"{group} {tp}: commit {next_offset} outside [0, {log.high}]")
        offsets = self._committed.setdefault(group, {})
        current = offsets.get(tp)
        if current is not None and next_offset < current:
            raise CommitRegression(f"{group} {tp}: {next_offset} < {current}")
        offsets[tp] = next_offset
        self._topic(tp.topic).groups.add(group)

    def committed(self, group: str, tp: TopicPartition) -> Optional[int]:
        return self._committed.get(group, {}).get(tp)

    # -- retention --------------------------------------------------------

    def _lossless_floor(self, topic: _Topic, tp: TopicPartition) -> Optional[int]:
        if not topic.config.lossless or not topic.groups:
            return None
        return min(self._committed.get(g, {}).get(tp, 0) for g in topic.groups)

    def enforce_retention(self, now: int) -> int:
        dropped = 0
        for name in sorted(self._topics):
            topic = self._topics[name]
            retention = topic.config.retention_ticks
            if retention is None:
                continue
            for p, log in enumerate(topic.logs):
                tp = TopicPartition(name, p)
                cutoff = log.low
                while cutoff < log.high and log.append_tick(cutoff) + retention <= now:
                    cutoff += 1
                floor = self._lossless_floor(topic, tp)
                if floor is not None:
                    cutoff = min(cutoff, floor)
                dropped += log.drop_before(cutoff)
        return dropped

    def delete_records(self, tp: TopicPartition, before: int) -> int:
        """Advance the low watermark of ``tp`` to ``before`` (bounded by high)."""
        self._check_up()
        log = self._log(tp)
        return log.drop_before(min(before, log.high))
