"""Deterministic tick-driven simulation of a multi-region deployment.

``Simulation`` builds clusters, routes, consumers, pipelines and auditors
from a ``SimConfig``, then advances integer ticks. Each tick runs, in order:
scheduled events, producers, replication, federation bookkeeping, proxy
dispatch, pipelines, the offset sync job, audit sealing and retention.
Scheduled events are ordered by ``(tick, sequence)`` and every random draw
comes from one ``random.Random(seed)``, so the report is a pure function of
the config. After ``run_until`` producers stop and the loop keeps ticking
until everything is quiescent, or reports a stall.
"""

from __future__ import annotations

import heapq
import itertools
import json
import logging
import random
from collections import deque
from typing import Dict, List, Optional

from multiregion.audit import Auditor
from multiregion.broker import Cluster, TopicConfig
from multiregion.config import FaultSpec, SimConfig, check_fault_target
from multiregion.core import AuditMeta, ClusterId, Message, TopicPartition
from multiregion.errors import ClusterUnavailable, ConfigError, FederationFull, RegionUnavailable, UnknownTopic
from multiregion.failover import (
    ActiveActiveCoordinator,
    ActivePassiveConsumer,
    FailoverManager,
    OffsetMappingStore,
    ResultsStore,
)
from multiregion.federation import Federation
from multiregion.pipeline import DEMAND, SUPPLY, SurgePipeline, TripEvent
from multiregion.proxy import ConsumerProxy, EndpointBehavior, EndpointSpec, RetryPolicy
from multiregion.replicator import ReplicationRoute, Replicator, WorkerPool

logger = logging.getLogger(__name__)

MAX_DRAIN_TICKS = 10_000


def _behavior(rule: str, k: int = 0, ids=()) -> EndpointBehavior:
    return EndpointBehavior(rule, k, frozenset(ids))


class _Producer:
    def __init__(self, topic, spec):
        self.topic = topic
        self.spec = spec
        self.buffer: deque = deque()  # messages waiting for an unavailable cluster


class _PipelineUnit:
    """One region's copy of a pipeline, reading its cluster directly."""

    def __init__(self, spec, region: str, cluster: Cluster):
        self.spec = spec
        self.region = region
        self.cluster = cluster
        self.engine = SurgePipeline(spec.window)
        n = cluster.partition_count(spec.topic)
        self.cursors = {p: 0 for p in range(n)}
        self.read = 0

    def caught_up(self) -> bool:
        return all(
            self.cursors[p] >= self.cluster.watermarks(TopicPartition(self.spec.topic, p))[1]
            for p in self.cursors
        )


class _ConsumerLog:
    def __init__(self, spec):
        self.spec = spec
        self.deliveries = 0
        self.acked: set = set()
        self.dead_lettered: Dict[int, int] = {}  # id -> attempts
        self.ack_log: List[tuple] = []  # (tick, partition, id, cluster)
        self.lifecycle: List[dict] = []
        self.in_flight_timeline: List[list] = []
        self.retention_loss: List[dict] = []
        self.failover_marks: List[int] = []  # len(ack_log) at each failover


class Simulation:
    def __init__(self, config: SimConfig, seed: Optional[int] = None):
        self.cfg = config
        self.seed = config.seed if seed is None else seed
        self.rng = random.Random(self.seed)
        self.now = 0
        self._events: list = []
        self._seq = itertools.count()
        self._next_id = itertools.count(1)
        self.timeline: List[dict] = []
        self.violations: List[dict] = []

        self.cluster_specs = config.cluster_specs()
        self.clusters: Dict[ClusterId, Cluster] = {}
        for cid in sorted(self.cluster_specs):
            cluster = Cluster(cid)
            cluster.on_append = self._on_append
            self.clusters[cid] = cluster
        self._cluster_down: Dict[ClusterId, int] = {cid: 0 for cid in self.clusters}
        self._region_down: Dict[str, int] = {r: 0 for r in config.regions}

        self.federation = Federation(on_switch=self._on_switch)
        self.redirects: List[dict] = []
        self.topics = {t.name: t for t in config.topics}
        self.produced: Dict[str, set] = {t.name: set() for t in config.topics}

        self.auditor = Auditor()
        self._audit_points: Dict[tuple, List[tuple]] = {}
        self.store = OffsetMappingStore()
        self.replication_events: Dict[str, list] = {"data_loss": [], "dropped": [], "rebalances": [], "burst_moves": []}
        w = config.workers
        self.replicator = Replicator(
            self.clusters,
            WorkerPool(set(w.active), set(w.standby), w.budget),
            self.store,
            self._on_replication,
            self._should_drop,
        )
        self.proxy = ConsumerProxy(self._resolve, self._on_proxy_event)
        self.failover = FailoverManager(self.store, self.replicator.routes, self.clusters, self.proxy)
        self.coordinator = ActiveActiveCoordinator(self._region_up, ResultsStore())
        self.consumers: Dict[str, _ConsumerLog] = {}
        self._static: Dict[tuple, ClusterId] = {}
        self._endpoints: Dict[str, EndpointSpec] = {}
        self._saved_behavior: Dict[int, EndpointBehavior] = {}
        self._drop_faults: List[FaultSpec] = []
        self.pipeline_units: Dict[str, List[_PipelineUnit]] = {}
        self.in_flight_timeline: List[list] = []
        self.dlq_log: Dict[str, dict] = {}
        self.stalled = False
        self.final_tick = 0

        self._build()

    # -- construction ---------------------------------------------------------

    def _build(self) -> None:
        cfg = self.cfg
        for cid, spec in sorted(self.cluster_specs.items()):
            if spec.federated:
                if spec.added_at == 0:
                    self.federation.add_cluster(self.clusters[cid], spec.nodes, spec.max_nodes)
                else:
                    self._schedule(spec.added_at, "cluster_join", cid)
        for t in cfg.topics:
            if t.federated:
                self._schedule(t.created_at, "create_topic", t.name)
            else:
                for cid in t.clusters:
                    self.clusters[cid].create_topic(t.name, self._topic_config(t))
            for m in t.migrations:
                self._schedule(m.at, "migrate", (t.name, m))
            if t.audit is not None:
                for chain in t.audit.chains:
                    self.auditor.register(chain.name, [s for s, _ in chain.stages], t.audit.window, t.audit.grace)
                    for stage, points in chain.stages:
                        for point in points:
                            self._audit_points.setdefault((t.name, point), []).append((chain.name, stage))
        self.producers = [_Producer(t.name, spec) for t in cfg.topics for spec in t.traffic]

        for r in cfg.routes:
            route = ReplicationRoute(r.id, r.src, r.topic, r.dst, r.dst_topic, r.checkpoint_interval)
            self.replicator.add_route(route, 0)
        for at, active in cfg.workers.changes:
            self._schedule(at, "workers", active)

        for c in cfg.consumers:
            self.consumers[c.name] = _ConsumerLog(c)
            self._endpoints[c.name] = EndpointSpec(
                c.name, _behavior(c.endpoint.rule, c.endpoint.k, c.endpoint.ids), c.endpoint.delay
            )
            topic = self.topics[c.topic]
            start = max(c.start, topic.created_at) if topic.federated else c.start
            self._schedule(start, "register", c.name)
            for at, region in c.failovers:
                self._schedule(at, "failover", (c.name, region))
            for at, action in c.dlq_actions:
                self._schedule(at, "dlq", (c.name, action))

        for p in cfg.pipelines:
            self.pipeline_units[p.name] = [
                _PipelineUnit(p, region, self.clusters[cid]) for region, cid in sorted(p.clusters.items())
            ]
            self.coordinator.set_primary(p.name, p.primary, 0)
            for at, region in p.primary_changes:
                self._schedule(at, "primary", (p.name, region))

        for f in cfg.faults:
            self.inject_fault(f, 0)

    @staticmethod
    def _topic_config(t) -> TopicConfig:
        return TopicConfig(t.partitions, t.retention_ticks, t.lossless)

    def _schedule(self, tick: int, kind: str, payload) -> None:
        heapq.heappush(self._events, (tick, next(self._seq), kind, payload))

    def _log(self, kind: str, **fields) -> None:
        entry = {"tick": self.now, "kind": kind}
        entry.update(fields)
        self.timeline.append(entry)

    # -- faults ---------------------------------------------------------------

    def inject_fault(self, spec: FaultSpec, now: int) -> dict:
        """Register ``spec``; it takes effect over its window. Unknown targets raise ConfigError."""
        check_fault_target(spec, self.cfg)
        if spec.start < now:
            raise ConfigError("fault.window", f"window starts at {spec.start}, before now={now}")
        if spec.kind == "drop_message_ids":
            self._drop_faults.append(spec)
        else:
            self._schedule(spec.start, "fault_start", spec)
            if spec.end is not None:
                self._schedule(spec.end, "fault_end", spec)
        return {"kind": spec.kind, "target": spec.target, "window": [spec.start, spec.end]}

    def _should_drop(self, route_id: str, message: Message, now: int) -> bool:
        for f in self._drop_faults:
            if f.target == route_id and f.active(now) and message.id in f.params["ids"]:
                return True
        return False

    def _set_availability(self) -> None:
        for cid, cluster in self.clusters.items():
            cluster.available = self._cluster_down[cid] == 0 and self._region_down[cid.region] == 0

    def _region_up(self, region: str) -> bool:
        return self._region_down.get(region, 1) == 0

    def _apply_fault(self, spec: FaultSpec, starting: bool) -> None:
        delta = 1 if starting else -1
        self._log("fault_start" if starting else "fault_end", fault=spec.kind, target=spec.target)
        if spec.kind == "cluster_down":
            self._cluster_down[ClusterId.parse(spec.target)] += delta
            self._set_availability()
        elif spec.kind == "region_down":
            self._region_down[spec.target] += delta
            self._set_availability()
            if starting:
                for p in self.cfg.pipelines:
                    self._schedule(self.now + p.detection_ticks, "detect", (p.name, spec.target))
        elif spec.kind == "worker_crash":
            if starting:
                self.replicator.crash_worker(spec.target, self.now)
            else:
                self.replicator.restore_worker(spec.target, self.now)
        elif spec.kind == "endpoint_behavior_change":
            endpoint = self._endpoints[spec.target]
            if starting:
                self._saved_behavior[id(spec)] = endpoint.behavior
                prm = spec.params
                endpoint.behavior = _behavior(prm["rule"], prm.get("k", 0), prm.get("ids", ()))
            else:
                endpoint.behavior = self._saved_behavior.pop(id(spec))

    # -- callbacks ------------------------------------------------------------

    def _on_append(self, cluster: Cluster, tp: TopicPartition, offset: int, message: Message, now: int) -> None:
        for point in (str(cluster.id), f"{cluster.id}:{tp.topic}"):
            for chain, stage in self._audit_points.get((tp.topic, point), ()):
                self.auditor.record(stage, chain, message, now)

    def _audit(self, topic: str, point: str, message: Message) -> None:
        for chain, stage in self._audit_points.get((topic, point), ()):
            self.auditor.record(stage, chain, message, self.now)

    def _on_switch(self, topic, group, old, new) -> None:
        self._log("migration_switch", topic=topic, group=group, **{"from": str(old), "to": str(new)})

    def _on_replication(self, kind, payload) -> None:
        if kind == "checkpoint":
            return
        if kind == "rebalance":
            self.replication_events["rebalances"].append(payload)
            self._log("rebalance", reason=payload["reason"], moves=payload["moves"])
        elif kind == "burst_move":
            self.replication_events["burst_moves"].append(payload)
            self._log("burst_move", partition=payload["partition"], to=payload["to"])
        else:
            self.replication_events[kind].append(payload)

    def _on_proxy_event(self, kind, sub, *details) -> None:
        self.failover.observe(kind, sub, *details)
        log = self.consumers.get(sub.group)
        if log is None:
            return
        if kind == "ack":
            tp, offset, message, now = details
            log.deliveries += 1
            log.acked.add(message.id)
            log.ack_log.append((now, tp.partition, message.id, str(sub.cluster.id)))
            self._audit(sub.topic, f"consumed:{sub.group}", message)
        elif kind == "dead_letter":
            tp, offset, message, now, attempts = details
            log.dead_lettered[message.id] = attempts
        elif kind == "retention_loss":
            tp, start, low = details
            log.retention_loss.append({"tick": self.now, "partition": tp.partition, "from": start, "to": low})
        else:
            entry = {"tick": self.now, "event": kind}
            if kind in ("registered",):
                entry["cluster"] = str(details[0])
            elif kind == "redirected":
                entry["from"], entry["to"] = str(details[0]), str(details[1])
                self.redirects.append({"tick": self.now, "group": sub.group, "topic": sub.topic,
                                       "from": entry["from"], "to": entry["to"]})
            elif kind == "halted":
                entry["dropped_in_flight"] = len(details[0])
            log.lifecycle.append(entry)
            self._log(f"consumer_{kind}", consumer=sub.group)

    def _resolve(self, topic: str, group: Optional[str]) -> Cluster:
        if group is None:
            for name in sorted(self.consumers):
                if self.consumers[name].spec.topic == topic:
                    return self._resolve(topic, name)
        else:
            cluster = self.failover.resolve(topic, group)
            if cluster is not None:
                return cluster
            cid = self._static.get((group, topic))
            if cid is not None:
                return self.clusters[cid]
        if self.federation.has_topic(topic):
            return self.clusters[self.federation.resolve_topic(topic, group)]
        return self.clusters[self.topics[topic].clusters[0]]

    # -- scheduled events -----------------------------------------------------

    def _run_event(self, kind: str, payload) -> None:
        if kind == "fault_start":
            self._apply_fault(payload, True)
        elif kind == "fault_end":
            self._apply_fault(payload, False)
        elif kind == "cluster_join":
            spec = self.cluster_specs[payload]
            self.federation.add_cluster(self.clusters[payload], spec.nodes, spec.max_nodes)
            self._log("cluster_joined", cluster=str(payload))
        elif kind == "create_topic":
            t = self.topics[payload]
            try:
                placed = self.federation.create_logical_topic(t.name, self._topic_config(t))
            except FederationFull as exc:
                self._log("placement_failed", topic=t.name)
                self.violations.append({"kind": "placement_failed", "topic": t.name, "detail": str(exc)})
                return
            self._log("topic_created", topic=t.name, cluster=str(placed))
        elif kind == "migrate":
            name, m = payload
            self.federation.migrate_topic(name, m.to, m.groups, self.now)
            self._log("migration_start", topic=name, to=str(m.to), groups=list(m.groups))
        elif kind == "register":
            self._register(self.consumers[payload].spec)
        elif kind == "failover":
            name, region = payload
            self.failover.failover_consumer(name, region, self.now)
            log = self.consumers[name]
            log.failover_marks.append(len(log.ack_log))
            self._log("failover", consumer=name, to=region)
        elif kind == "dlq":
            name, action = payload
            topic = self.consumers[name].spec.topic
            stats = self.dlq_log.setdefault(topic, {"merges": [], "purges": []})
            if action == "merge":
                n = self.proxy.dlq_merge(topic, self.now)
                stats["merges"].append({"tick": self.now, "count": n})
            else:
                n = self.proxy.dlq_purge(topic)
                stats["purges"].append({"tick": self.now, "count": n})
            self._log(f"dlq_{action}", topic=topic, count=n)
        elif kind == "workers":
            moves = self.replicator.set_active(payload, self.now)
            self._log("workers_changed", active=sorted(payload), moves=moves)
        elif kind == "primary":
            name, region = payload
            self._set_primary(name, region)
        elif kind == "detect":
            name, region = payload
            label = self.coordinator.primary(name)
            if label is not None and label.primary_region == region and not self._region_up(region):
                for unit in self.pipeline_units[name]:
                    if unit.region != region and self._region_up(unit.region):
                        self._set_primary(name, unit.region)
                        break
        else:  # pragma: no cover
            raise ValueError(kind)

    def _set_primary(self, name: str, region: str) -> None:
        try:
            label = self.coordinator.set_primary(name, region, self.now)
        except RegionUnavailable:
            self._log("primary_change_refused", pipeline=name, region=region)
            return
        self._log("primary", pipeline=name, region=region, epoch=label.epoch)

    def _register(self, c) -> None:
        endpoint = self._endpoints[c.name]
        policy = RetryPolicy(c.max_retries, c.backoff)
        if c.mode == "active-passive":
            self.failover.add_consumer(
                ActivePassiveConsumer(
                    c.name, c.topic, dict(c.clusters), c.region, endpoint, c.window, policy, c.sync_interval
                )
            )
        else:
            if c.cluster is not None:
                self._static[(c.name, c.topic)] = c.cluster
            self.proxy.register_consumer(c.name, c.topic, endpoint, c.window, policy)

    # -- per-tick phases ------------------------------------------------------

    def _produce(self, producing: bool) -> None:
        for prod in self.producers:
            spec = prod.spec
            topic = self.topics[prod.topic]
            if topic.federated and not self.federation.has_topic(topic.name):
                continue
            end = self.cfg.run_until if spec.end is None else min(spec.end, self.cfg.run_until)
            if producing and spec.start <= self.now < end:
                n = spec.rate + (self.rng.randint(-spec.jitter, spec.jitter) if spec.jitter else 0)
                for _ in range(n):
                    prod.buffer.append(self._make_message(prod, topic))
            while prod.buffer:
                cid = spec.cluster if spec.cluster is not None else self.federation.resolve_topic(topic.name)
                cluster = self.clusters[cid]
                if not cluster.available:
                    break
                cluster.append(topic.name, prod.buffer.popleft(), self.now)

    def _make_message(self, prod: _Producer, topic) -> Message:
        spec = prod.spec
        mid = next(self._next_id)
        key = f"k{self.rng.randrange(spec.keys)}".encode() if spec.keys else None
        if spec.payload == "trip":
            origin = spec.cluster.region if spec.cluster is not None else ""
            event = TripEvent(
                f"g{self.rng.randrange(spec.geofences)}",
                self.rng.choice((DEMAND, SUPPLY)),
                self.now,
                origin,
            )
            payload = event.encode()
        else:
            payload = f"m{mid}".encode()
        message = Message(AuditMeta(mid, self.now, spec.service, spec.tier), key, payload)
        self.produced[topic.name].add(mid)
        self._audit(topic.name, "produced", message)
        return message

    def _replicate(self) -> None:
        threshold = self.cfg.workers.lag_threshold
        if threshold is not None:
            self.replicator.redistribute_on_burst(threshold, self.now)
        order = sorted(self.replicator.pool.active)
        self.rng.shuffle(order)
        self.replicator.step(self.now, order)

    def _run_pipelines(self) -> None:
        for name in sorted(self.pipeline_units):
            for unit in self.pipeline_units[name]:
                if not unit.cluster.available:
                    continue
                spec = unit.spec
                order = sorted(unit.cursors)
                self.rng.shuffle(order)
                budget = spec.budget
                for p in order:
                    tp = TopicPartition(spec.topic, p)
                    low, high = unit.cluster.watermarks(tp)
                    start = max(unit.cursors[p], low)
                    count = high - start if budget is None else min(budget, high - start)
                    if count <= 0:
                        continue
                    for _, message in unit.cluster.fetch(tp, start, count):
                        unit.engine.ingest(message)
                        self._audit(spec.topic, f"pipeline:{unit.region}", message)
                    unit.cursors[p] = start + count
                    unit.read += count
                    if budget is not None:
                        budget -= count
                        if budget <= 0:
                            break
                self._publish(unit, unit.engine.seal_due(self.now, spec.lateness))

    def _publish(self, unit: _PipelineUnit, aggregates) -> None:
        for agg in aggregates:
            self.coordinator.publish(
                unit.spec.name, unit.region, f"{agg.geofence}@{agg.window_start}", agg.canonical(), self.now
            )

    def _sample_in_flight(self) -> None:
        total = self.proxy.in_flight()
        if not self.in_flight_timeline or self.in_flight_timeline[-1][1] != total:
            self.in_flight_timeline.append([self.now, total])
        for sub in self.proxy.subscriptions():
            log = self.consumers.get(sub.group)
            if log is None:
                continue
            n = sub.in_flight()
            if not log.in_flight_timeline or log.in_flight_timeline[-1][1] != n:
                log.in_flight_timeline.append([self.now, n])

    def tick(self, producing: bool = True) -> None:
        while self._events and self._events[0][0] <= self.now:
            _, _, kind, payload = heapq.heappop(self._events)
            self._run_event(kind, payload)
        self._produce(producing)
        self._replicate()
        self.federation.advance()
        self.proxy.step(self.now)
        self._run_pipelines()
        self.failover.sync_offsets(self.now)
        self.auditor.seal_and_compare(self.now)
        for cid in sorted(self.clusters):
            if self.clusters[cid].available:
                self.clusters[cid].enforce_retention(self.now)
        self._sample_in_flight()

    def quiescent(self) -> bool:
        if self._events:
            return False
        if any(p.buffer for p in self.producers):
            return False
        if not self.replicator.idle():
            return False
        if any(self.federation.record(t).migration is not None for t in self.federation.topics()):
            return False
        if not self.proxy.idle():
            return False
        return all(u.caught_up() for units in self.pipeline_units.values() for u in units)

    def advance(self, until: int) -> None:
        """Run ticks up to (not including) ``until`` without draining."""
        while self.now < until:
            self.tick(producing=self.now < self.cfg.run_until)
            self.now += 1

    def run(self) -> dict:
        self.advance(self.cfg.run_until)
        limit = self.cfg.run_until + MAX_DRAIN_TICKS
        while not self.quiescent():
            if self.now >= limit:
                self.stalled = True
                self._log("stall")
                self.violations.append({"kind": "stall", "tick": self.now})
                break
            self.tick(producing=False)
            self.now += 1
        self.final_tick = self.now
        for name in sorted(self.pipeline_units):
            for unit in self.pipeline_units[name]:
                self._publish(unit, unit.engine.seal_open())
        self.auditor.seal_all()
        return self.report()

    # -- report ---------------------------------------------------------------

    def _consumer_report(self, name: str, violations: List[dict]) -> dict:
        log = self.consumers[name]
        topic = log.spec.topic
        produced = self.produced[topic]
        try:
            dlq_ids = {m.id for m in self.proxy.dlq_contents(topic)}
        except (UnknownTopic, ClusterUnavailable):  # never created, or its cluster is down
            dlq_ids = set()
        purged = set(self.proxy.purged.get(topic, ()))
        accounted = log.acked | dlq_ids | purged
        missing = sorted(produced - accounted)
        extra = sorted(accounted - produced)
        if extra:
            violations.append({"kind": "reconciliation", "consumer": name, "unknown_ids": extra})
        restarts = sum(1 for e in log.lifecycle if e["event"] == "halted")
        segments: List[list] = []
        for _, _, _, cluster in log.ack_log:
            if segments and segments[-1][0] == cluster:
                segments[-1][1] += 1
            else:
                segments.append([cluster, 1])
        seen = [s[0] for s in segments]
        return {
            "topic": topic,
            "produced": len(produced),
            "deliveries": log.deliveries,
            "consumed_unique": len(log.acked),
            "duplicates": log.deliveries - len(log.acked),
            "dlq": len(dlq_ids),
            "purged": len(purged),
            "missing": len(missing),
            "missing_ids": missing,
            "dead_lettered": {str(k): v for k, v in sorted(log.dead_lettered.items())},
            "peak_in_flight": max((n for _, n in log.in_flight_timeline), default=0),
            "in_flight_timeline": log.in_flight_timeline,
            "lifecycle": log.lifecycle,
            "restarts": restarts,
            "retention_loss": log.retention_loss,
            "delivery_segments": segments,
            "ordered_by_cluster": len(seen) == len(set(seen)),
        }

    def _failover_report(self, violations: List[dict]) -> List[dict]:
        out = []
        seen: Dict[str, int] = {}
        for rec in self.failover.failovers:
            log = self.consumers[rec["consumer"]]
            i = seen.get(rec["consumer"], 0)
            seen[rec["consumer"]] = i + 1
            mark = log.failover_marks[i]
            stop = log.failover_marks[i + 1] if i + 1 < len(log.failover_marks) else len(log.ack_log)
            before = {entry[2] for entry in log.ack_log[:mark]}
            dups: Dict[int, int] = {p: 0 for p in rec["resume_offsets"]}
            for _, p, mid, _ in log.ack_log[mark:stop]:
                if mid in before:
                    dups[p] += 1
            interval = rec["checkpoint_interval"]
            bound = {p: (None if interval is None else interval + rec["acks_since_sync"].get(p, 0)) for p in dups}
            within = all(dups[p] == 0 or (bound[p] is not None and dups[p] <= bound[p]) for p in dups)
            if not within:
                violations.append({"kind": "failover_bound", "consumer": rec["consumer"], "tick": rec["tick"]})
            out.append(
                {
                    "consumer": rec["consumer"],
                    "from": rec["from"],
                    "to": rec["to"],
                    "tick": rec["tick"],
                    "last_sync_tick": rec["last_sync_tick"],
                    "checkpoint_interval": interval,
                    "acks_since_sync": {str(p): n for p, n in sorted(rec["acks_since_sync"].items())},
                    "resume_offsets": {str(p): n for p, n in sorted(rec["resume_offsets"].items())},
                    "dropped_in_flight": rec["dropped_in_flight"],
                    "duplicates": {str(p): n for p, n in sorted(dups.items())},
                    "bound": {str(p): n for p, n in sorted(bound.items())},
                    "within_bound": within,
                }
            )
        return out

    def report(self) -> dict:
        violations = list(self.violations)
        consumers = {name: self._consumer_report(name, violations) for name in sorted(self.consumers)}
        failovers = self._failover_report(violations)
        dlq = {}
        for topic in sorted({c.spec.topic for c in self.consumers.values()}):
            try:
                contents = sorted(m.id for m in self.proxy.dlq_contents(topic))
            except (UnknownTopic, ClusterUnavailable):
                contents = []
            stats = self.dlq_log.get(topic, {"merges": [], "purges": []})
            dlq[topic] = {
                "contents": contents,
                "purged": sorted(self.proxy.purged.get(topic, ())),
                "merges": stats["merges"],
                "purges": stats["purges"],
            }
        routes = {}
        for rid in sorted(self.replicator.routes):
            route = self.replicator.routes[rid]
            n = self.clusters[route.src].partition_count(route.src_topic)
            routes[rid] = {
                "copied": self.replicator.copied[rid],
                "checkpoints": sum(len(self.store.checkpoints(rid, p)) for p in range(n)),
                "dropped_ids": sorted(e["id"] for e in self.replication_events["dropped"] if e["route"] == rid),
                "data_loss": [e for e in self.replication_events["data_loss"] if e["route"] == rid],
            }
        pipelines = {}
        for name in sorted(self.pipeline_units):
            units = self.pipeline_units[name]
            digests = {u.region: u.engine.state_digest() for u in units}
            pipelines[name] = {
                "digests": digests,
                "late": {u.region: u.engine.late for u in units},
                "read": {u.region: u.read for u in units},
                "aggregates": {u.region: len(u.engine.aggregates()) for u in units},
                "converged": len(set(digests.values())) <= 1,
            }
        rs = self.coordinator.store
        topics = {}
        for name in sorted(self.topics):
            hosts = {}
            for cid in sorted(self.clusters):
                cluster = self.clusters[cid]
                if cluster.has_topic(name):
                    hosts[str(cid)] = [
                        cluster.watermarks(TopicPartition(name, p))[1] for p in range(cluster.partition_count(name))
                    ]
            topics[name] = {"produced": len(self.produced[name]), "high_watermarks": hosts}
        alerts = [a.to_dict() for a in self.auditor.alerts]
        alerts.sort(key=lambda a: (a["topic"], a["window_start"], a["stage_a"], a["stage_b"]))
        counts = {
            "produced": sum(len(s) for s in self.produced.values()),
            "consumed_unique": sum(c["consumed_unique"] for c in consumers.values()),
            "deliveries": sum(c["deliveries"] for c in consumers.values()),
            "duplicates": sum(c["duplicates"] for c in consumers.values()),
            "dlq": sum(c["dlq"] for c in consumers.values()),
            "purged": sum(c["purged"] for c in consumers.values()),
            "missing": sum(c["missing"] for c in consumers.values()),
            "replicated": sum(r["copied"] for r in routes.values()),
            "alerts": len(alerts),
        }
        return {
            "seed": self.seed,
            "run_until": self.cfg.run_until,
            "final_tick": self.final_tick,
            "stalled": self.stalled,
            "counts": counts,
            "topics": topics,
            "consumers": consumers,
            "audit": {
                "alerts": alerts,
                "late_records": self.auditor.late_records,
                "windows_sealed": self.auditor.windows_sealed,
            },
            "dlq": dlq,
            "proxy": {
                "peak_in_flight": max((n for _, n in self.in_flight_timeline), default=0),
                "in_flight_timeline": self.in_flight_timeline,
            },
            "failovers": failovers,
            "replication": {
                "routes": routes,
                "rebalances": self.replication_events["rebalances"],
                "burst_moves": self.replication_events["burst_moves"],
                "checkpoints": self.store.count(),
            },
            "pipelines": pipelines,
            "results_store": {
                "accepted": rs.accepted,
                "discarded": self.coordinator.discarded,
                "rejected_stale": rs.rejected_stale,
                "writers": dict(sorted(rs.writers.items())),
                "primary_history": self.coordinator.history,
            },
            "federation": {
                "placements": self.federation.placements(),
                "migrations": self.federation.completed_migrations,
                "redirects": self.redirects,
            },
            "timeline": self.timeline,
            "invariant_violations": violations,
        }


def run_scenario(config: SimConfig, seed: Optional[int] = None) -> dict:
    return Simulation(config, seed).run()


def report_json(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2) + "\n"
