"""Push-based consumer proxy with retries and dead-letter topics.

The proxy fetches on behalf of registered consumer groups and pushes each
message to the group's endpoint. Up to ``window`` messages per partition may
be unresolved at once, so a group's parallelism is not capped by its
partition count. A message is resolved when the endpoint acks it or when it
has failed ``max_retries + 1`` times and been produced to ``<topic>.dlq``.
Only the contiguous resolved prefix (the commit floor) is committed.
"""

from __future__ import annotations

import heapq
import itertools
import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, FrozenSet, List, Optional, Tuple

from multiregion.broker import Cluster, TopicConfig
from multiregion.core import Message, TopicPartition
from multiregion.errors import (
    ClusterUnavailable,
    DuplicateRegistration,
    OffsetExpired,
    ProtocolViolation,
    UnknownTopic,
)

logger = logging.getLogger(__name__)

ACK = "ack"
FAIL = "fail"

DISPATCHED = "dispatched"
RETRY_WAIT = "retry_wait"

RULES = ("always-ack", "always-fail", "fail-first-k", "fail-ids")


def dlq_topic(topic: str) -> str:
    return f"{topic}.dlq"


@dataclass(frozen=True)
class EndpointBehavior:
    """Deterministic handler outcome as a function of (message id, attempt)."""

    rule: str = "always-ack"
    k: int = 0
    ids: FrozenSet[int] = frozenset()

    def __post_init__(self):
        if self.rule not in RULES:
            raise ValueError(f"unknown endpoint rule {self.rule!r}")

    def outcome(self, message_id: int, attempt: int) -> str:
        if self.rule == "always-ack":
            return ACK
        if self.rule == "always-fail":
            return FAIL
        if self.rule == "fail-first-k":
            return FAIL if attempt <= self.k else ACK
        return FAIL if message_id in self.ids else ACK


@dataclass
class EndpointSpec:
    name: str
    behavior: EndpointBehavior = field(default_factory=EndpointBehavior)
    processing_delay: int = 1


@dataclass(frozen=True)
class RetryPolicy:
    max_retries: int = 2
    backoff_ticks: int = 1

    def __post_init__(self):
        if self.max_retries < 0 or self.backoff_ticks < 0:
            raise ValueError("retry policy values must be non-negative")


class _Pending:
    __slots__ = ("message", "attempts", "state", "due")

    def __init__(self, message: Message):
        self.message = message
        self.attempts = 0
        self.state = DISPATCHED
        self.due = 0


class _PartitionState:
    def __init__(self, start: int):
        self.next_fetch = start
        self.commit_floor = start
        self.committed = start
        self.pending: Dict[int, _Pending] = {}
        self.resolved: set = set()

    def unresolved(self) -> int:
        return len(self.pending)

    def in_flight(self) -> int:
        return sum(1 for e in self.pending.values() if e.state == DISPATCHED)

    def advance_floor(self) -> None:
        while self.commit_floor in self.resolved:
            self.resolved.discard(self.commit_floor)
            self.commit_floor += 1


class Subscription:
    """One consumer group's registration on one topic."""

    def __init__(self, proxy, group, topic, endpoint, window, policy, cluster):
        self.proxy = proxy
        self.group = group
        self.topic = topic
        self.endpoint = endpoint
        self.window = window
        self.policy = policy
        self.cluster: Cluster = cluster
        self.partitions: Dict[int, _PartitionState] = {}
        self.peak_in_flight = 0
        self.active = True
        self._attach(cluster)

    def _attach(self, cluster: Cluster) -> None:
        self.cluster = cluster
        cluster.register_group(self.group, self.topic)
        self.partitions = {}
        for p in range(cluster.partition_count(self.topic)):
            tp = TopicPartition(self.topic, p)
            low, _ = cluster.watermarks(tp)
            committed = cluster.committed(self.group, tp)
            start = low if committed is None else max(committed, low)
            if committed is not None and committed < low:
                self.proxy._emit("retention_loss", self, tp, committed, low)
            self.partitions[p] = _PartitionState(start)

    @property
    def key(self) -> Tuple[str, str]:
        return self.group, self.topic

    def in_flight(self) -> int:
        return sum(s.in_flight() for s in self.partitions.values())

    def unresolved(self) -> int:
        return sum(s.unresolved() for s in self.partitions.values())

    def pending_ids(self) -> List[int]:
        return sorted(e.message.id for s in self.partitions.values() for e in s.pending.values())

    def commit_floor(self, partition: int) -> int:
        return self.partitions[partition].commit_floor

    def idle(self) -> bool:
        if self.proxy.resolve(self.topic, self.group) is not self.cluster:
            return False
        for p, state in self.partitions.items():
            if state.pending or state.committed < state.commit_floor:
                return False
            _, high = self.cluster.watermarks(TopicPartition(self.topic, p))
            if state.next_fetch < high:
                return False
        return True

    # -- dispatch ---------------------------------------------------------

    def dispatch_step(self, now: int) -> int:
        if not self.active:
            return 0
        try:
            current = self.proxy.resolve(self.topic, self.group)
        except ClusterUnavailable:
            return 0
        if current is not self.cluster:
            if self.unresolved():
                return 0
            old = self.cluster
            self._attach(current)
            self.proxy._emit("redirected", self, old.id, current.id)
        pushed = 0
        for p in sorted(self.partitions):
            state = self.partitions[p]
            tp = TopicPartition(self.topic, p)
            self._flush_commit(tp, state)
            for offset in sorted(state.pending):
                entry = state.pending[offset]
                if entry.state == RETRY_WAIT and entry.due <= now:
                    self._push(tp, offset, entry, now)
                    pushed += 1
            room = self.window - state.unresolved()
            if room <= 0:
                continue
            try:
                batch = self.cluster.fetch(tp, state.next_fetch, room)
            except ClusterUnavailable:
                continue
            except OffsetExpired as exc:
                self.proxy._emit("retention_loss", self, tp, state.next_fetch, exc.low)
                state.next_fetch = state.commit_floor = exc.low
                continue
            for offset, message in batch:
                entry = _Pending(message)
                state.pending[offset] = entry
                self._push(tp, offset, entry, now)
                pushed += 1
                state.next_fetch = offset + 1
        self.peak_in_flight = max(self.peak_in_flight, self.in_flight())
        return pushed

    def _push(self, tp, offset, entry: _Pending, now: int) -> None:
        entry.attempts += 1
        entry.state = DISPATCHED
        self.proxy._schedule(now + self.endpoint.processing_delay, self, tp, offset, entry.attempts)

    # -- completion -------------------------------------------------------

    def complete(self, tp: TopicPartition, offset: int, attempt: int, now: int) -> Optional[str]:
        """Endpoint finished ``attempt``; evaluate its behaviour and resolve."""
        state = self.partitions.get(tp.partition)
        entry = state.pending.get(offset) if state else None
        if entry is None or entry.attempts != attempt or entry.state != DISPATCHED:
            return None  # stale completion (e.g. after redirect)
        outcome = self.endpoint.behavior.outcome(entry.message.id, attempt)
        return self.handle_result(tp, offset, outcome, now)

    def handle_result(self, tp: TopicPartition, offset: int, outcome: str, now: int) -> str:
        state = self.partitions.get(tp.partition) if tp.topic == self.topic else None
        entry = state.pending.get(offset) if state else None
        if entry is None or entry.state != DISPATCHED:
            raise ProtocolViolation(f"{self.group}: {tp}@{offset} is not in flight")
        if outcome == ACK:
            resolution = "acked"
            self.proxy._emit("ack", self, tp, offset, entry.message, now)
        elif outcome == FAIL:
            if entry.attempts < self.policy.max_retries + 1:
                entry.state = RETRY_WAIT
                entry.due = now + self.policy.backoff_ticks
                return "retry"
            self.proxy.dead_letter(self, tp, entry.message, now)
            resolution = "dead_lettered"
            self.proxy._emit("dead_letter", self, tp, offset, entry.message, now, entry.attempts)
        else:
            raise ProtocolViolation(f"unknown outcome {outcome!r}")
        del state.pending[offset]
        state.resolved.add(offset)
        state.advance_floor()
        self._flush_commit(tp, state)
        return resolution

    def _flush_commit(self, tp: TopicPartition, state: _PartitionState) -> None:
        if state.commit_floor <= state.committed:
            return
        try:
            self.cluster.commit(self.group, tp, state.commit_floor)
        except ClusterUnavailable:
            return
        state.committed = state.commit_floor


class ConsumerProxy:
    """Dispatches messages for every registered (group, topic).

    ``resolve(topic, group)`` returns the cluster to consume from;
    ``group=None`` asks where to produce. Event callbacks receive
    ``(kind, subscription, *details)``.
    """

    def __init__(self, resolve: Callable[[str, Optional[str]], Cluster], listener=None):
        self.resolve = resolve
        self.listener = listener
        self._subs: Dict[Tuple[str, str], Subscription] = {}
        self._dlq_cluster: Dict[str, Cluster] = {}
        self._queue: list = []
        self._seq = itertools.count()
        self.purged: Dict[str, List[int]] = {}
        self.peak_in_flight = 0

    def register_consumer(
        self,
        group: str,
        topic: str,
        endpoint: EndpointSpec,
        window: int,
        policy: RetryPolicy = RetryPolicy(),
    ) -> Subscription:
        if (group, topic) in self._subs:
            raise DuplicateRegistration(f"{group} already consumes {topic}")
        if window < 1:
            raise ValueError("window must be >= 1")
        cluster = self.resolve(topic, group)
        if not cluster.has_topic(topic):
            raise UnknownTopic(topic)
        dlq = dlq_topic(topic)
        if topic not in self._dlq_cluster:
            if not cluster.has_topic(dlq):
                cluster.create_topic(dlq, TopicConfig(cluster.partition_count(topic)))
            self._dlq_cluster[topic] = cluster
        sub = Subscription(self, group, topic, endpoint, window, policy, cluster)
        self._subs[sub.key] = sub
        self._emit("registered", sub, cluster.id)
        return sub

    def deregister(self, group: str, topic: str) -> List[int]:
        """Stop consuming; returns ids that were still unresolved."""
        sub = self._subs.pop((group, topic))
        sub.active = False
        dropped = sub.pending_ids()
        self._emit("halted", sub, dropped)
        return dropped

    def subscription(self, group: str, topic: str) -> Subscription:
        return self._subs[(group, topic)]

    def subscriptions(self) -> List[Subscription]:
        return [self._subs[k] for k in sorted(self._subs)]

    # -- scheduling -------------------------------------------------------

    def _schedule(self, due: int, sub: Subscription, tp, offset, attempt) -> None:
        heapq.heappush(self._queue, (due, next(self._seq), sub, tp, offset, attempt))

    def poll(self, now: int) -> int:
        done = 0
        while self._queue and self._queue[0][0] <= now:
            _, _, sub, tp, offset, attempt = heapq.heappop(self._queue)
            if sub.active and sub.complete(tp, offset, attempt, now) is not None:
                done += 1
        return done

    def dispatch_step(self, now: int) -> int:
        pushed = 0
        for sub in self.subscriptions():
            pushed += sub.dispatch_step(now)
        self.peak_in_flight = max(self.peak_in_flight, self.in_flight())
        return pushed

    def step(self, now: int) -> int:
        self.poll(now)
        return self.dispatch_step(now)

    def handle_result(self, group: str, tp: TopicPartition, offset: int, outcome: str, now: int) -> str:
        try:
            sub = self._subs[(group, tp.topic)]
        except KeyError:
            raise ProtocolViolation(f"{group} is not registered on {tp.topic}") from None
        return sub.handle_result(tp, offset, outcome, now)

    def in_flight(self) -> int:
        return sum(s.in_flight() for s in self._subs.values())

    def idle(self) -> bool:
        return all(s.idle() for s in self._subs.values())

    # -- dead letters -----------------------------------------------------

    def dead_letter(self, sub: Subscription, tp: TopicPartition, message: Message, now: int) -> None:
        cluster = self._dlq_cluster[sub.topic]
        cluster.append(dlq_topic(sub.topic), message, now, partition=tp.partition)

    def _dlq(self, topic: str) -> Cluster:
        try:
            return self._dlq_cluster[topic]
        except KeyError:
            raise UnknownTopic(dlq_topic(topic)) from None

    def dlq_contents(self, topic: str) -> List[Message]:
        cluster = self._dlq(topic)
        name = dlq_topic(topic)
        out = []
        for p in range(cluster.partition_count(name)):
            tp = TopicPartition(name, p)
            low, high = cluster.watermarks(tp)
            out.extend(m for _, m in cluster.fetch(tp, low, high - low))
        return out

    def _truncate_dlq(self, topic: str) -> None:
        cluster = self._dlq(topic)
        name = dlq_topic(topic)
        for p in range(cluster.partition_count(name)):
            tp = TopicPartition(name, p)
            cluster.delete_records(tp, cluster.watermarks(tp)[1])

    def dlq_merge(self, topic: str, now: int) -> int:
        messages = self.dlq_contents(topic)
        target = self.resolve(topic, None)
        for message in messages:
            target.append(topic, message, now)
        self._truncate_dlq(topic)
        return len(messages)

    def dlq_purge(self, topic: str) -> int:
        messages = self.dlq_contents(topic)
        self._truncate_dlq(topic)
        self.purged.setdefault(topic, []).extend(m.id for m in messages)
        return len(messages)

    def _emit(self, kind, sub, *details) -> None:
        if self.listener is not None:
            self.listener(kind, sub, *details)
