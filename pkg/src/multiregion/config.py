"""Scenario file schema, validation and parsing.

A scenario is a JSON object with exactly the top-level keys ``seed``,
``regions``, ``topics``, ``routes``, ``workers``, ``consumers``,
``pipelines``, ``faults`` and ``run_until`` (all but ``seed`` and
``run_until`` optional). Scheduled commands live on the entity they act on:
topic migrations under the topic, failovers and DLQ actions under the
consumer, primary changes under the pipeline, worker-set changes under
``workers``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import jsonschema

from multiregion.core import ClusterId
from multiregion.errors import ConfigError

FAULT_KINDS = ("cluster_down", "region_down", "worker_crash", "drop_message_ids", "endpoint_behavior_change")
ENDPOINT_RULES = ("always-ack", "always-fail", "fail-first-k", "fail-ids")

_tick = {"type": "integer", "minimum": 0}
_name = {"type": "string", "minLength": 1}
_cluster_ref = {"type": "string", "pattern": r"^[^/]+/[^/]+$"}
_ids = {"type": "array", "items": {"type": "integer", "minimum": 0}}


def _obj(props, required=()):
    return {"type": "object", "properties": props, "required": list(required), "additionalProperties": False}


_endpoint = _obj(
    {
        "rule": {"enum": list(ENDPOINT_RULES)},
        "k": {"type": "integer", "minimum": 0},
        "ids": _ids,
        "delay": _tick,
    }
)

SCHEMA = _obj(
    {
        "seed": {"type": "integer", "minimum": 0, "maximum": 2**64 - 1},
        "run_until": _tick,
        "regions": {
            "type": "array",
            "items": _obj(
                {
                    "name": {"type": "string", "pattern": r"^[^/]+$"},
                    "clusters": {
                        "type": "array",
                        "items": _obj(
                            {
                                "name": {"type": "string", "pattern": r"^[^/]+$"},
                                "nodes": {"type": "integer", "minimum": 1},
                                "max_nodes": {"type": "integer", "minimum": 1},
                                "federated": {"type": "boolean"},
                                "added_at": _tick,
                            },
                            ["name"],
                        ),
                    },
                },
                ["name", "clusters"],
            ),
        },
        "topics": {
            "type": "array",
            "items": _obj(
                {
                    "name": _name,
                    "partitions": {"type": "integer"},
                    "retention_ticks": {"type": ["integer", "null"], "minimum": 1},
                    "lossless": {"type": "boolean"},
                    "clusters": {"type": "array", "items": _cluster_ref},
                    "federated": {"type": "boolean"},
                    "created_at": _tick,
                    "migrations": {
                        "type": "array",
                        "items": _obj(
                            {"at": _tick, "to": _cluster_ref, "groups": {"type": "array", "items": _name}},
                            ["at", "to"],
                        ),
                    },
                    "traffic": {
                        "type": "array",
                        "items": _obj(
                            {
                                "cluster": _cluster_ref,
                                "rate": {"type": "integer", "minimum": 0},
                                "jitter": {"type": "integer", "minimum": 0},
                                "start": _tick,
                                "end": _tick,
                                "keys": {"type": ["integer", "null"], "minimum": 1},
                                "payload": {"enum": ["opaque", "trip"]},
                                "geofences": {"type": "integer", "minimum": 1},
                                "service": {"type": "string"},
                                "tier": {"type": "string"},
                            },
                            ["rate"],
                        ),
                    },
                    "audit": _obj(
                        {
                            "window": {"type": "integer", "minimum": 1},
                            "grace": _tick,
                            "chains": {
                                "type": "array",
                                "items": _obj(
                                    {
                                        "name": _name,
                                        "stages": {
                                            "type": "array",
                                            "minItems": 1,
                                            "items": _obj(
                                                {"name": _name, "points": {"type": "array", "minItems": 1, "items": _name}},
                                                ["name", "points"],
                                            ),
                                        },
                                    },
                                    ["name", "stages"],
                                ),
                            },
                        },
                        ["chains"],
                    ),
                },
                ["name", "partitions"],
            ),
        },
        "routes": {
            "type": "array",
            "items": _obj(
                {
                    "id": _name,
                    "src": _cluster_ref,
                    "dst": _cluster_ref,
                    "topic": _name,
                    "dst_topic": _name,
                    "checkpoint_interval": {"type": "integer", "minimum": 1},
                },
                ["id", "src", "dst", "topic"],
            ),
        },
        "workers": _obj(
            {
                "active": {"type": "array", "items": _name},
                "standby": {"type": "array", "items": _name},
                "budget": {"type": ["integer", "null"], "minimum": 1},
                "lag_threshold": {"type": ["integer", "null"], "minimum": 0},
                "changes": {
                    "type": "array",
                    "items": _obj({"at": _tick, "active": {"type": "array", "items": _name}}, ["at", "active"]),
                },
            }
        ),
        "consumers": {
            "type": "array",
            "items": _obj(
                {
                    "name": _name,
                    "topic": _name,
                    "mode": {"enum": ["single", "active-passive"]},
                    "cluster": _cluster_ref,
                    "clusters": {"type": "object", "additionalProperties": _cluster_ref},
                    "region": _name,
                    "endpoint": _endpoint,
                    "window": {"type": "integer", "minimum": 1},
                    "retry": _obj({"max_retries": _tick, "backoff": _tick}),
                    "sync_interval": {"type": "integer", "minimum": 1},
                    "start": _tick,
                    "failovers": {
                        "type": "array",
                        "items": _obj({"at": _tick, "to": _name}, ["at", "to"]),
                    },
                    "dlq_actions": {
                        "type": "array",
                        "items": _obj({"at": _tick, "action": {"enum": ["merge", "purge"]}}, ["at", "action"]),
                    },
                },
                ["name", "topic"],
            ),
        },
        "pipelines": {
            "type": "array",
            "items": _obj(
                {
                    "name": _name,
                    "topic": _name,
                    "clusters": {"type": "object", "additionalProperties": _cluster_ref, "minProperties": 1},
                    "window": {"type": "integer", "minimum": 1},
                    "lateness": _tick,
                    "budget": {"type": ["integer", "null"], "minimum": 1},
                    "primary": _name,
                    "detection_ticks": _tick,
                    "primary_changes": {
                        "type": "array",
                        "items": _obj({"at": _tick, "region": _name}, ["at", "region"]),
                    },
                },
                ["name", "topic", "clusters"],
            ),
        },
        "faults": {
            "type": "array",
            "items": _obj(
                {
                    "kind": {"enum": list(FAULT_KINDS)},
                    "target": _name,
                    "window": {
                        "type": "array",
                        "prefixItems": [_tick, {"type": ["integer", "null"], "minimum": 0}],
                        "minItems": 2,
                        "maxItems": 2,
                    },
                    "params": {"type": "object"},
                },
                ["kind", "target", "window"],
            ),
        },
    },
    ["seed", "run_until"],
)


# -- parsed form -----------------------------------------------------------------


@dataclass
class ClusterSpec:
    id: ClusterId
    nodes: int = 1
    max_nodes: int = 150
    federated: bool = False
    added_at: int = 0


@dataclass
class TrafficSpec:
    rate: int
    cluster: Optional[ClusterId] = None
    jitter: int = 0
    start: int = 0
    end: Optional[int] = None
    keys: Optional[int] = None
    payload: str = "opaque"
    geofences: int = 8
    service: str = "producer"
    tier: str = "tier-1"


@dataclass
class AuditChainSpec:
    name: str
    stages: List[Tuple[str, List[str]]]


@dataclass
class AuditSpec:
    window: int = 10
    grace: Optional[int] = None
    chains: List[AuditChainSpec] = field(default_factory=list)


@dataclass
class MigrationSpec:
    at: int
    to: ClusterId
    groups: List[str]


@dataclass
class TopicSpec:
    name: str
    partitions: int
    retention_ticks: Optional[int] = None
    lossless: bool = False
    clusters: List[ClusterId] = field(default_factory=list)
    federated: bool = False
    created_at: int = 0
    migrations: List[MigrationSpec] = field(default_factory=list)
    traffic: List[TrafficSpec] = field(default_factory=list)
    audit: Optional[AuditSpec] = None


@dataclass
class RouteSpec:
    id: str
    src: ClusterId
    dst: ClusterId
    topic: str
    dst_topic: str
    checkpoint_interval: int = 100


@dataclass
class WorkersSpec:
    active: List[str] = field(default_factory=list)
    standby: List[str] = field(default_factory=list)
    budget: Optional[int] = None
    lag_threshold: Optional[int] = None
    changes: List[Tuple[int, List[str]]] = field(default_factory=list)


@dataclass
class EndpointConfig:
    rule: str = "always-ack"
    k: int = 0
    ids: List[int] = field(default_factory=list)
    delay: int = 1


@dataclass
class ConsumerSpec:
    name: str
    topic: str
    mode: str = "single"
    cluster: Optional[ClusterId] = None
    clusters: Dict[str, ClusterId] = field(default_factory=dict)
    region: Optional[str] = None
    endpoint: EndpointConfig = field(default_factory=EndpointConfig)
    window: int = 1
    max_retries: int = 2
    backoff: int = 1
    sync_interval: int = 20
    start: int = 0
    failovers: List[Tuple[int, str]] = field(default_factory=list)
    dlq_actions: List[Tuple[int, str]] = field(default_factory=list)


@dataclass
class PipelineSpec:
    name: str
    topic: str
    clusters: Dict[str, ClusterId]
    window: int = 10
    lateness: int = 10
    budget: Optional[int] = None
    primary: Optional[str] = None
    detection_ticks: int = 5
    primary_changes: List[Tuple[int, str]] = field(default_factory=list)


@dataclass
class FaultSpec:
    kind: str
    target: str
    start: int
    end: Optional[int]
    params: dict = field(default_factory=dict)

    def active(self, now: int) -> bool:
        return self.start <= now and (self.end is None or now < self.end)


@dataclass
class SimConfig:
    seed: int
    run_until: int
    regions: Dict[str, List[ClusterSpec]] = field(default_factory=dict)
    topics: List[TopicSpec] = field(default_factory=list)
    routes: List[RouteSpec] = field(default_factory=list)
    workers: WorkersSpec = field(default_factory=WorkersSpec)
    consumers: List[ConsumerSpec] = field(default_factory=list)
    pipelines: List[PipelineSpec] = field(default_factory=list)
    faults: List[FaultSpec] = field(default_factory=list)

    def cluster_specs(self) -> Dict[ClusterId, ClusterSpec]:
        return {c.id: c for specs in self.regions.values() for c in specs}


def _path(parts) -> str:
    out = ""
    for p in parts:
        out += f"[{p}]" if isinstance(p, int) else (f".{p}" if out else str(p))
    return out


def validate_schema(raw) -> None:
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(raw), key=lambda e: (list(map(str, e.absolute_path)), e.message))
    if errors:
        err = errors[0]
        parts = list(err.absolute_path)
        if err.validator == "additionalProperties" and isinstance(err.instance, dict):
            unexpected = sorted(set(err.instance) - set(err.schema.get("properties", {})))
            raise ConfigError(_path(parts + unexpected[:1]), "unknown key")
        if err.validator == "required":
            missing = sorted(set(err.validator_value) - set(err.instance))
            raise ConfigError(_path(parts + missing[:1]), "required key is missing")
        raise ConfigError(_path(parts) or "<root>", err.message)


class _Refs:
    """Referential-integrity checks with field paths."""

    def __init__(self, cfg: SimConfig):
        self.clusters = cfg.cluster_specs()
        self.regions = set(cfg.regions)

    def cluster(self, ref: str, path: str) -> ClusterId:
        cid = ClusterId.parse(ref)
        if cid not in self.clusters:
            raise ConfigError(path, f"unknown cluster {ref!r}")
        return cid

    def region(self, name: str, path: str) -> str:
        if name not in self.regions:
            raise ConfigError(path, f"unknown region {name!r}")
        return name


def parse_config(raw) -> SimConfig:
    validate_schema(raw)
    cfg = SimConfig(seed=raw["seed"], run_until=raw["run_until"])

    for i, region in enumerate(raw.get("regions", [])):
        if region["name"] in cfg.regions:
            raise ConfigError(f"regions[{i}].name", f"duplicate region {region['name']!r}")
        specs = []
        seen = set()
        for j, c in enumerate(region["clusters"]):
            if c["name"] in seen:
                raise ConfigError(f"regions[{i}].clusters[{j}].name", "duplicate cluster in region")
            seen.add(c["name"])
            spec = ClusterSpec(
                ClusterId(region["name"], c["name"]),
                c.get("nodes", 1),
                c.get("max_nodes", 150),
                c.get("federated", False),
                c.get("added_at", 0),
            )
            if spec.added_at and not spec.federated:
                raise ConfigError(f"regions[{i}].clusters[{j}].added_at", "only federated clusters can join late")
            specs.append(spec)
        cfg.regions[region["name"]] = specs
    refs = _Refs(cfg)

    topic_names = set()
    for i, t in enumerate(raw.get("topics", [])):
        base = f"topics[{i}]"
        if t["name"] in topic_names:
            raise ConfigError(f"{base}.name", f"duplicate topic {t['name']!r}")
        if t["name"].endswith(".dlq"):
            raise ConfigError(f"{base}.name", "'.dlq' suffix is reserved for dead letter topics")
        topic_names.add(t["name"])
        if t["partitions"] < 1:
            raise ConfigError(f"{base}.partitions", "must be >= 1")
        federated = t.get("federated", False)
        clusters = [refs.cluster(r, f"{base}.clusters[{j}]") for j, r in enumerate(t.get("clusters", []))]
        if federated == bool(clusters):
            raise ConfigError(base, "exactly one of 'clusters' or 'federated: true' is required")
        if federated and not any(c.federated for c in refs.clusters.values()):
            raise ConfigError(f"{base}.federated", "no federated clusters declared")
        migrations = []
        for j, m in enumerate(t.get("migrations", [])):
            if not federated:
                raise ConfigError(f"{base}.migrations", "only federated topics migrate")
            to = refs.cluster(m["to"], f"{base}.migrations[{j}].to")
            if not refs.clusters[to].federated:
                raise ConfigError(f"{base}.migrations[{j}].to", "target cluster is not federated")
            migrations.append(MigrationSpec(m["at"], to, list(m.get("groups", []))))
        traffic = []
        for j, tr in enumerate(t.get("traffic", [])):
            tpath = f"{base}.traffic[{j}]"
            cid = None
            if "cluster" in tr:
                cid = refs.cluster(tr["cluster"], f"{tpath}.cluster")
                if cid not in clusters:
                    raise ConfigError(f"{tpath}.cluster", "topic is not hosted on this cluster")
            elif not federated:
                raise ConfigError(tpath, "'cluster' is required for non-federated topics")
            spec = TrafficSpec(
                rate=tr["rate"],
                cluster=cid,
                jitter=tr.get("jitter", 0),
                start=tr.get("start", 0),
                end=tr.get("end"),
                keys=tr.get("keys"),
                payload=tr.get("payload", "opaque"),
                geofences=tr.get("geofences", 8),
                service=tr.get("service", "producer"),
                tier=tr.get("tier", "tier-1"),
            )
            if spec.jitter > spec.rate:
                raise ConfigError(f"{tpath}.jitter", "jitter cannot exceed rate")
            traffic.append(spec)
        audit = None
        if "audit" in t:
            a = t["audit"]
            chains = []
            for j, ch in enumerate(a["chains"]):
                stages = [(s["name"], list(s["points"])) for s in ch["stages"]]
                names = [s for s, _ in stages]
                if len(set(names)) != len(names):
                    raise ConfigError(f"{base}.audit.chains[{j}].stages", "stage names must be distinct")
                chains.append(AuditChainSpec(ch["name"], stages))
            audit = AuditSpec(a.get("window", 10), a.get("grace"), chains)
        cfg.topics.append(
            TopicSpec(
                t["name"],
                t["partitions"],
                t.get("retention_ticks"),
                t.get("lossless", False),
                clusters,
                federated,
                t.get("created_at", 0),
                migrations,
                traffic,
                audit,
            )
        )
    topics = {t.name: t for t in cfg.topics}
    chain_names = [c.name for t in cfg.topics if t.audit for c in t.audit.chains]
    if len(set(chain_names)) != len(chain_names):
        raise ConfigError("topics", "audit chain names must be unique")

    route_ids = set()
    for i, r in enumerate(raw.get("routes", [])):
        base = f"routes[{i}]"
        if r["id"] in route_ids:
            raise ConfigError(f"{base}.id", f"duplicate route {r['id']!r}")
        route_ids.add(r["id"])
        src = refs.cluster(r["src"], f"{base}.src")
        dst = refs.cluster(r["dst"], f"{base}.dst")
        dst_topic = r.get("dst_topic", r["topic"])
        for key, name, cid in (("topic", r["topic"], src), ("dst_topic", dst_topic, dst)):
            t = topics.get(name)
            if t is None or cid not in t.clusters:
                raise ConfigError(f"{base}.{key}", f"topic {name!r} is not hosted on {cid}")
        if topics[r["topic"]].partitions != topics[dst_topic].partitions:
            raise ConfigError(base, "source and destination partition counts differ")
        if (src, r["topic"]) == (dst, dst_topic):
            raise ConfigError(base, "source and destination are identical")
        cfg.routes.append(RouteSpec(r["id"], src, dst, r["topic"], dst_topic, r.get("checkpoint_interval", 100)))

    w = raw.get("workers", {})
    cfg.workers = WorkersSpec(
        list(w.get("active", [])),
        list(w.get("standby", [])),
        w.get("budget"),
        w.get("lag_threshold"),
        [(c["at"], list(c["active"])) for c in w.get("changes", [])],
    )
    if set(cfg.workers.active) & set(cfg.workers.standby):
        raise ConfigError("workers.standby", "a worker cannot be both active and standby")
    if cfg.routes and not cfg.workers.active:
        raise ConfigError("workers.active", "routes need at least one active worker")
    for j, (_, active) in enumerate(cfg.workers.changes):
        if not active:
            raise ConfigError(f"workers.changes[{j}].active", "must not be empty")
    worker_ids = set(cfg.workers.active) | set(cfg.workers.standby)
    for _, active in cfg.workers.changes:
        worker_ids |= set(active)

    consumer_names = set()
    for i, c in enumerate(raw.get("consumers", [])):
        base = f"consumers[{i}]"
        if c["name"] in consumer_names:
            raise ConfigError(f"{base}.name", f"duplicate consumer {c['name']!r}")
        consumer_names.add(c["name"])
        topic = topics.get(c["topic"])
        if topic is None:
            raise ConfigError(f"{base}.topic", f"unknown topic {c['topic']!r}")
        mode = c.get("mode", "single")
        ep = c.get("endpoint", {})
        retry = c.get("retry", {})
        spec = ConsumerSpec(
            c["name"],
            c["topic"],
            mode,
            endpoint=EndpointConfig(ep.get("rule", "always-ack"), ep.get("k", 0), list(ep.get("ids", [])), ep.get("delay", 1)),
            window=c.get("window", 1),
            max_retries=retry.get("max_retries", 2),
            backoff=retry.get("backoff", 1),
            sync_interval=c.get("sync_interval", 20),
            start=c.get("start", 0),
            failovers=[(f["at"], f["to"]) for f in c.get("failovers", [])],
            dlq_actions=[(d["at"], d["action"]) for d in c.get("dlq_actions", [])],
        )
        if mode == "single":
            if "clusters" in c or "region" in c or spec.failovers:
                raise ConfigError(base, "'clusters', 'region' and 'failovers' need mode 'active-passive'")
            if topic.federated:
                if "cluster" in c:
                    raise ConfigError(f"{base}.cluster", "federated topics are resolved by the federation")
            else:
                if "cluster" not in c:
                    raise ConfigError(f"{base}.cluster", "required for non-federated topics")
                spec.cluster = refs.cluster(c["cluster"], f"{base}.cluster")
                if spec.cluster not in topic.clusters:
                    raise ConfigError(f"{base}.cluster", "topic is not hosted on this cluster")
        else:
            if topic.federated:
                raise ConfigError(f"{base}.mode", "active-passive consumers need explicitly placed topics")
            if len(c.get("clusters", {})) < 2 or "region" not in c:
                raise ConfigError(base, "active-passive needs 'clusters' for two or more regions and a 'region'")
            for region, ref in sorted(c["clusters"].items()):
                refs.region(region, f"{base}.clusters.{region}")
                cid = refs.cluster(ref, f"{base}.clusters.{region}")
                if cid.region != region:
                    raise ConfigError(f"{base}.clusters.{region}", "cluster belongs to another region")
                if cid not in topic.clusters:
                    raise ConfigError(f"{base}.clusters.{region}", "topic is not hosted on this cluster")
                spec.clusters[region] = cid
            if c["region"] not in spec.clusters:
                raise ConfigError(f"{base}.region", "initial region has no cluster")
            spec.region = c["region"]
            for j, (_, to) in enumerate(spec.failovers):
                if to not in spec.clusters:
                    raise ConfigError(f"{base}.failovers[{j}].to", f"no cluster for region {to!r}")
        cfg.consumers.append(spec)
    for t in cfg.topics:
        for j, m in enumerate(t.migrations):
            for g in m.groups:
                if g not in consumer_names:
                    raise ConfigError(f"topics[{cfg.topics.index(t)}].migrations[{j}].groups", f"unknown consumer {g!r}")

    for i, p in enumerate(raw.get("pipelines", [])):
        base = f"pipelines[{i}]"
        topic = topics.get(p["topic"])
        if topic is None:
            raise ConfigError(f"{base}.topic", f"unknown topic {p['topic']!r}")
        clusters = {}
        for region, ref in sorted(p["clusters"].items()):
            refs.region(region, f"{base}.clusters.{region}")
            cid = refs.cluster(ref, f"{base}.clusters.{region}")
            if cid not in topic.clusters:
                raise ConfigError(f"{base}.clusters.{region}", "topic is not hosted on this cluster")
            clusters[region] = cid
        primary = p.get("primary", min(clusters))
        if primary not in clusters:
            raise ConfigError(f"{base}.primary", "primary region has no pipeline instance")
        changes = [(c["at"], c["region"]) for c in p.get("primary_changes", [])]
        for j, (_, region) in enumerate(changes):
            if region not in clusters:
                raise ConfigError(f"{base}.primary_changes[{j}].region", "no pipeline instance in region")
        cfg.pipelines.append(
            PipelineSpec(
                p["name"], p["topic"], clusters, p.get("window", 10), p.get("lateness", 10),
                p.get("budget"), primary, p.get("detection_ticks", 5), changes,
            )
        )

    for i, f in enumerate(raw.get("faults", [])):
        base = f"faults[{i}]"
        start, end = f["window"]
        if end is not None and end < start:
            raise ConfigError(f"{base}.window", "end before start")
        spec = FaultSpec(f["kind"], f["target"], start, end, dict(f.get("params", {})))
        check_fault_target(spec, cfg, base)
        cfg.faults.append(spec)
    return cfg


def check_fault_target(spec: FaultSpec, cfg: SimConfig, base: str = "fault") -> None:
    kind = spec.kind
    if kind == "cluster_down":
        try:
            cid = ClusterId.parse(spec.target)
        except ValueError:
            cid = None
        if cid not in cfg.cluster_specs():
            raise ConfigError(f"{base}.target", f"unknown cluster {spec.target!r}")
    elif kind == "region_down":
        if spec.target not in cfg.regions:
            raise ConfigError(f"{base}.target", f"unknown region {spec.target!r}")
    elif kind == "worker_crash":
        known = set(cfg.workers.active) | set(cfg.workers.standby)
        for _, active in cfg.workers.changes:
            known |= set(active)
        if spec.target not in known:
            raise ConfigError(f"{base}.target", f"unknown worker {spec.target!r}")
    elif kind == "drop_message_ids":
        if spec.target not in {r.id for r in cfg.routes}:
            raise ConfigError(f"{base}.target", f"unknown route {spec.target!r}")
        ids = spec.params.get("ids")
        if not isinstance(ids, list) or not all(isinstance(i, int) and i >= 0 for i in ids):
            raise ConfigError(f"{base}.params.ids", "must be a list of message ids")
    elif kind == "endpoint_behavior_change":
        if spec.target not in {c.name for c in cfg.consumers}:
            raise ConfigError(f"{base}.target", f"unknown consumer {spec.target!r}")
        rule = spec.params.get("rule")
        if rule not in ENDPOINT_RULES:
            raise ConfigError(f"{base}.params.rule", f"must be one of {', '.join(ENDPOINT_RULES)}")
    else:
        raise ConfigError(f"{base}.kind", f"unknown fault kind {kind!r}")


def load_config(path) -> SimConfig:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError("<file>", f"invalid JSON: {exc}") from None
    except OSError as exc:
        raise ConfigError("<file>", str(exc)) from None
    return parse_config(raw)
