"""Cross-cluster replication over a pool of workers.

Each route copies partition ``p`` of a source topic to partition ``p`` of a
destination topic, keeping message ids and audit metadata. Partitions are
spread over active workers with a sticky assignment that moves as few
partitions as balance allows. Every ``checkpoint_interval`` messages, and
whenever a partition catches up, the (source, destination) offset pair is
checkpointed; a crashed worker's partitions resume from those checkpoints.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, Hashable, Iterable, List, Mapping, NamedTuple, Optional

from multiregion.core import ClusterId, TopicPartition
from multiregion.errors import ClusterUnavailable, NoWorkers, OffsetExpired
from multiregion.failover import OffsetCheckpoint, OffsetMappingStore

logger = logging.getLogger(__name__)

DEFAULT_CHECKPOINT_INTERVAL = 100


@dataclass(frozen=True)
class ReplicationRoute:
    id: str
    src: ClusterId
    src_topic: str
    dst: ClusterId
    dst_topic: str
    checkpoint_interval: int = DEFAULT_CHECKPOINT_INTERVAL

    def __post_init__(self):
        if (self.src, self.src_topic) == (self.dst, self.dst_topic):
            raise ValueError(f"route {self.id}: source and destination are the same")
        if self.checkpoint_interval < 1:
            raise ValueError("checkpoint_interval must be >= 1")


class RoutePartition(NamedTuple):
    route: str
    partition: int

    def __str__(self):
        return f"{self.route}[{self.partition}]"


@dataclass
class WorkerPool:
    active: set = field(default_factory=set)
    standby: set = field(default_factory=set)
    budget: Optional[int] = None  # messages per worker per tick; None = unbounded

    def __post_init__(self):
        self.active = set(self.active)
        self.standby = set(self.standby)
        if self.active & self.standby:
            raise ValueError("a worker cannot be both active and standby")


def balanced_quotas(counts: Mapping[str, int], total: int) -> Dict[str, int]:
    workers = sorted(counts)
    base, extra = divmod(total, len(workers))
    by_load = sorted(workers, key=lambda w: (-counts[w], w))
    return {w: base + (1 if i < extra else 0) for i, w in enumerate(by_load)}


def rebalance(current: Mapping[Hashable, Optional[str]], new_active: Iterable[str]) -> Dict[Hashable, str]:
    """Sticky balanced assignment of every key in ``current`` over ``new_active``.

    Values of ``current`` are the present owner (or None). Workers that stay
    active keep up to their quota of partitions; the extra ``+1`` slots go to
    the workers already holding the most, which maximizes what stays put.
    """
    workers = sorted(set(new_active))
    if not workers:
        raise NoWorkers("rebalance needs at least one active worker")
    owned = {w: [] for w in workers}
    free = []
    for key in sorted(current):
        owner = current[key]
        if owner in owned:
            owned[owner].append(key)
        else:
            free.append(key)
    quotas = balanced_quotas({w: len(owned[w]) for w in workers}, len(current))
    result = {}
    for w in workers:
        keep = owned[w][: quotas[w]]
        free.extend(owned[w][quotas[w]:])
        for key in keep:
            result[key] = w
    free.sort()
    i = 0
    for w in workers:
        need = quotas[w] - len(owned[w][: quotas[w]])
        for key in free[i:i + need]:
            result[key] = w
        i += need
    return result


def count_moves(before: Mapping, after: Mapping) -> int:
    return sum(1 for k, w in after.items() if before.get(k) != w)


class Replicator:
    """Runs every route's partitions on the worker pool.

    ``should_drop(route_id, message, now)`` lets the fault injector discard
    specific messages in transit. Listener events: ``checkpoint``,
    ``data_loss``, ``dropped``, ``rebalance``, ``burst_move``.
    """

    def __init__(
        self,
        clusters: Mapping[ClusterId, object],
        pool: WorkerPool,
        store: Optional[OffsetMappingStore] = None,
        listener: Optional[Callable] = None,
        should_drop: Optional[Callable] = None,
    ):
        self.clusters = clusters
        self.pool = pool
        self.store = store if store is not None else OffsetMappingStore()
        self.listener = listener
        self.should_drop = should_drop
        self.routes: Dict[str, ReplicationRoute] = {}
        self.assignment: Dict[RoutePartition, Optional[str]] = {}
        self.cursors: Dict[RoutePartition, int] = {}
        self.copied: Dict[str, int] = {}

    def add_route(self, route: ReplicationRoute, now: int = 0) -> None:
        src = self.clusters[route.src]
        dst = self.clusters[route.dst]
        n = src.partition_count(route.src_topic)
        if dst.partition_count(route.dst_topic) != n:
            raise ValueError(f"route {route.id}: partition counts differ")
        self.routes[route.id] = route
        self.store.register_route(route.id)
        self.copied[route.id] = 0
        for p in range(n):
            rp = RoutePartition(route.id, p)
            self.cursors[rp] = src.watermarks(TopicPartition(route.src_topic, p))[0]
            self.assignment[rp] = None
        self._rebalance("route_added", now)

    # -- assignment -------------------------------------------------------

    def _rebalance(self, reason: str, now: int) -> int:
        if not self.pool.active:
            self.assignment = {rp: None for rp in self.assignment}
            return 0
        new = rebalance(self.assignment, self.pool.active)
        moves = count_moves(self.assignment, new)
        self.assignment = new
        self._emit("rebalance", {"tick": now, "reason": reason, "moves": moves, "active": sorted(self.pool.active)})
        return moves

    def set_active(self, workers: Iterable[str], now: int, reason: str = "workers_changed") -> int:
        workers = set(workers)
        self.pool.standby = (self.pool.standby | (self.pool.active - workers)) - workers
        self.pool.active = workers
        return self._rebalance(reason, now)

    def crash_worker(self, worker: str, now: int) -> int:
        """Remove ``worker`` without handover: its partitions restart from checkpoints."""
        for rp, owner in self.assignment.items():
            if owner == worker:
                self.cursors[rp] = self._restart_point(rp)
        self.pool.active.discard(worker)
        self.pool.standby.discard(worker)
        return self._rebalance(f"crash:{worker}", now)

    def restore_worker(self, worker: str, now: int) -> int:
        self.pool.active.add(worker)
        return self._rebalance(f"restore:{worker}", now)

    def _restart_point(self, rp: RoutePartition) -> int:
        ckpt = self.store.latest(rp.route, rp.partition)
        if ckpt is not None:
            return ckpt.src_offset
        route = self.routes[rp.route]
        return self.clusters[route.src].watermarks(TopicPartition(route.src_topic, rp.partition))[0]

    # -- lag --------------------------------------------------------------

    def lag(self, rp: RoutePartition) -> int:
        route = self.routes[rp.route]
        high = self.clusters[route.src].watermarks(TopicPartition(route.src_topic, rp.partition))[1]
        return max(0, high - self.cursors[rp])

    def worker_lag(self, worker: str) -> int:
        return sum(self.lag(rp) for rp, w in self.assignment.items() if w == worker)

    def partitions_of(self, worker: str) -> List[RoutePartition]:
        return sorted(rp for rp, w in self.assignment.items() if w == worker)

    def idle(self) -> bool:
        return all(self.lag(rp) == 0 for rp in self.cursors)

    def redistribute_on_burst(self, lag_threshold: int, now: int) -> int:
        """Move largest-lag partitions off overloaded workers onto promoted standbys."""
        moves = 0
        for worker in sorted(self.pool.active):
            target = None
            while self.worker_lag(worker) > lag_threshold and len(self.partitions_of(worker)) > 1:
                if target is None or self.worker_lag(target) > lag_threshold:
                    if not self.pool.standby:
                        break
                    target = min(self.pool.standby)
                    self.pool.standby.discard(target)
                    self.pool.active.add(target)
                rp = min(self.partitions_of(worker), key=lambda r: (-self.lag(r), r))
                self.assignment[rp] = target
                moves += 1
                self._emit(
                    "burst_move",
                    {"tick": now, "partition": str(rp), "from": worker, "to": target, "lag": self.lag(rp)},
                )
        return moves

    # -- copying ----------------------------------------------------------

    def step(self, now: int, order: Optional[List[str]] = None) -> int:
        workers = order if order is not None else sorted(self.pool.active)
        return sum(self.replicate_step(w, now) for w in workers if w in self.pool.active)

    def replicate_step(self, worker: str, now: int) -> int:
        parts = self.partitions_of(worker)
        budget = self.pool.budget
        if budget is None:
            return sum(self._copy(rp, None, now) for rp in parts)
        remaining = budget
        live = parts
        copied = 0
        while remaining > 0 and live:
            quota = max(1, remaining // len(live))
            still = []
            for rp in live:
                take = min(quota, remaining)
                if take <= 0:
                    break
                n = self._copy(rp, take, now)
                remaining -= n
                copied += n
                if n == take:
                    still.append(rp)
            live = still
        return copied

    def _copy(self, rp: RoutePartition, max_count: Optional[int], now: int) -> int:
        route = self.routes[rp.route]
        src = self.clusters[route.src]
        dst = self.clusters[route.dst]
        if not src.available or not dst.available:
            return 0
        src_tp = TopicPartition(route.src_topic, rp.partition)
        low, high = src.watermarks(src_tp)
        cursor = self.cursors[rp]
        if cursor < low:
            self._emit(
                "data_loss",
                {"tick": now, "route": route.id, "partition": rp.partition, "from": cursor, "to": low},
            )
            cursor = self.cursors[rp] = low
        limit = high - cursor if max_count is None else max_count
        try:
            batch = src.fetch(src_tp, cursor, limit)
        except (ClusterUnavailable, OffsetExpired):
            return 0
        dst_tp = TopicPartition(route.dst_topic, rp.partition)
        interval = route.checkpoint_interval
        for offset, message in batch:
            if self.should_drop is not None and self.should_drop(route.id, message, now):
                self._emit("dropped", {"tick": now, "route": route.id, "id": message.id})
            else:
                dst.append(route.dst_topic, message, now, partition=rp.partition)
            cursor = offset + 1
            self.cursors[rp] = cursor
            if cursor % interval == 0:
                self._checkpoint(rp, cursor, dst.watermarks(dst_tp)[1], now)
        self.copied[route.id] += len(batch)
        if cursor == high and cursor > 0:
            self._checkpoint(rp, cursor, dst.watermarks(dst_tp)[1], now)
        return len(batch)

    def _checkpoint(self, rp: RoutePartition, src_offset: int, dst_offset: int, now: int) -> None:
        ckpt = OffsetCheckpoint(rp.route, rp.partition, src_offset, dst_offset, now)
        if self.store.add(ckpt):
            self._emit("checkpoint", ckpt)

    def _emit(self, kind, payload) -> None:
        if self.listener is not None:
            self.listener(kind, payload)
