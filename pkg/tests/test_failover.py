import pytest
from hypothesis import given, settings, strategies as st

from multiregion.broker import Cluster, TopicConfig
from multiregion.core import AuditMeta, ClusterId, Message, TopicPartition
from multiregion.errors import AlreadyInRegion, RegionUnavailable, UnknownConsumer, UnknownRoute
from multiregion.failover import (
    ActiveActiveCoordinator,
    ActivePassiveConsumer,
    FailoverManager,
    OffsetCheckpoint,
    OffsetMappingStore,
    ResultsStore,
)
from multiregion.proxy import ConsumerProxy, EndpointSpec, RetryPolicy
from multiregion.replicator import ReplicationRoute, Replicator, WorkerPool

from oracles import floor_translate

A_AGG = ClusterId("A", "aggregate")
B_AGG = ClusterId("B", "aggregate")
TP = TopicPartition("pay", 0)


class World:
    def __init__(self, interval=100, partitions=1):
        self.clusters = {A_AGG: Cluster(A_AGG), B_AGG: Cluster(B_AGG)}
        for c in self.clusters.values():
            c.create_topic("pay", TopicConfig(partitions))
        self.store = OffsetMappingStore()
        self.route = ReplicationRoute("mirror", A_AGG, "pay", B_AGG, "pay", interval)
        self.rep = Replicator(self.clusters, WorkerPool({"w1"}), self.store)
        self.rep.add_route(self.route)
        self.acks = []
        self.proxy = ConsumerProxy(self.resolve, listener=self.listen)
        self.fm = FailoverManager(self.store, {"mirror": self.route}, self.clusters, self.proxy)
        self.next_id = 1

    def resolve(self, topic, group):
        return self.fm.resolve(topic, group) or self.clusters[A_AGG]

    def listen(self, kind, sub, *details):
        self.fm.observe(kind, sub, *details)
        if kind == "ack":
            self.acks.append((sub.cluster.id.region, details[2].id))

    def produce(self, n, now=0):
        for _ in range(n):
            self.clusters[A_AGG].append("pay", Message(AuditMeta(self.next_id, now), None, b""), now)
            self.next_id += 1

    def add_consumer(self, window=1, sync_interval=20):
        self.fm.add_consumer(
            ActivePassiveConsumer(
                "payments", "pay", {"A": A_AGG, "B": B_AGG}, "A", EndpointSpec("ep"), window, RetryPolicy(),
                sync_interval,
            )
        )


def ck(src, dst, p=0):
    return OffsetCheckpoint("mirror", p, src, dst, 0)


def test_translate_exact_floor_and_cold_start():
    w = World()
    assert w.fm.translate_offset("mirror", TP, 150) == 0
    w.store.add(ck(100, 100))
    w.store.add(ck(200, 200))
    assert w.fm.translate_offset("mirror", TP, 100) == 100
    assert w.fm.translate_offset("mirror", TP, 150) == 100
    assert w.fm.translate_offset("mirror", TP, 99) == 0
    with pytest.raises(UnknownRoute):
        w.fm.translate_offset("nope", TP, 0)


def test_translate_cold_start_uses_low_watermark():
    w = World()
    w.clusters[B_AGG].append("pay", Message(AuditMeta(900, 0), None, b""), 0)
    w.clusters[B_AGG].delete_records(TopicPartition("pay", 0), 1)
    assert w.fm.translate_offset("mirror", TP, 5) == 1


def test_store_rejects_non_increasing():
    s = OffsetMappingStore()
    s.register_route("mirror")
    assert s.add(ck(10, 10))
    assert not s.add(ck(10, 12))
    assert not s.add(ck(12, 10))
    with pytest.raises(UnknownRoute):
        s.add(OffsetCheckpoint("x", 0, 1, 1, 0))


@settings(max_examples=150, deadline=None)
@given(
    steps=st.lists(st.tuples(st.integers(1, 50), st.integers(1, 50)), max_size=20),
    queries=st.lists(st.integers(0, 1200), min_size=2, max_size=20),
)
def test_translate_matches_oracle_and_is_monotone(steps, queries):
    w = World()
    src = dst = 0
    for ds, dd in steps:
        src += ds
        dst += dd
        w.store.add(ck(src, dst))
    cks = w.store.checkpoints("mirror", 0)
    results = []
    for q in sorted(queries):
        got = w.fm.translate_offset("mirror", TP, q)
        assert got == floor_translate(cks, q, 0)
        results.append(got)
    assert results == sorted(results)


def test_route_path_composition():
    c = {ClusterId("A", "r"): None, A_AGG: None, B_AGG: None}
    routes = {
        "r2a": ReplicationRoute("r2a", ClusterId("A", "r"), "pay", A_AGG, "pay", 10),
        "a2b": ReplicationRoute("a2b", A_AGG, "pay", B_AGG, "pay", 100),
    }
    store = OffsetMappingStore()
    for r in routes:
        store.register_route(r)
    store.add(OffsetCheckpoint("r2a", 0, 10, 14, 0))
    store.add(OffsetCheckpoint("r2a", 0, 20, 31, 0))
    store.add(OffsetCheckpoint("a2b", 0, 14, 14, 0))
    store.add(OffsetCheckpoint("a2b", 0, 30, 30, 0))
    fm = FailoverManager(store, routes, c, proxy=None)
    path = fm.route_path(ClusterId("A", "r"), "pay", B_AGG)
    assert path == ["r2a", "a2b"]
    # 25 -> floor(20)=31 on A_AGG -> floor(30)=30 on B_AGG
    assert fm.translate_path(path, 0, 25) == 30
    assert fm.path_interval(path) == 110
    assert fm.route_path(B_AGG, "pay", A_AGG) is None


def test_sync_without_consumers():
    assert World().fm.sync_offsets(0) == 0


def test_sync_translates_commit():
    w = World()
    w.produce(250)
    w.rep.step(0)
    assert [c.src_offset for c in w.store.checkpoints("mirror", 0)] == [100, 200, 250]
    w.add_consumer()
    w.clusters[A_AGG].commit("payments", TP, 150)
    assert w.fm.sync_offsets(0) == 1
    assert w.clusters[B_AGG].committed("payments", TP) == 100
    assert w.fm.sync_offsets(20) == 1
    assert w.clusters[B_AGG].committed("payments", TP) == 100


def test_sync_respects_interval():
    w = World()
    w.add_consumer(sync_interval=20)
    w.produce(5)
    w.clusters[A_AGG].commit("payments", TP, 3)
    assert w.fm.sync_offsets(7) == 0
    assert w.fm.sync_offsets(40) == 1


def drive(w, until, failover_at=None, sync=True, start=0):
    for now in range(start, until):
        w.rep.step(now)
        w.proxy.step(now)
        if sync:
            w.fm.sync_offsets(now)
        if now == failover_at:
            w.fm.failover_consumer("payments", "B", now)


def test_failover_on_exact_checkpoint_no_duplicates():
    w = World(interval=10)
    w.add_consumer()
    w.produce(40)
    for now in range(200):
        w.rep.step(now)
        w.proxy.step(now)
        committed = w.clusters[A_AGG].committed("payments", TP)
        if committed == 20:
            w.fm.sync_offsets(now, force=True)
            w.fm.failover_consumer("payments", "B", now)
            break
    drive(w, 400, start=now + 1)
    ids = [i for _, i in w.acks]
    assert sorted(set(ids)) == list(range(1, 41))
    assert len(ids) == 40


def test_failover_between_checkpoints_bounded_duplicates():
    interval = 10
    w = World(interval=interval)
    w.add_consumer(sync_interval=20)
    w.produce(120)
    drive(w, 57, failover_at=56)
    drive(w, 400, start=57)
    ids = [i for _, i in w.acks]
    assert set(ids) == set(range(1, 121))
    rec = w.fm.failovers[0]
    dups = len(ids) - len(set(ids))
    assert 0 < dups <= interval + rec["acks_since_sync"][0]


def test_failover_before_any_sync_reprocesses_from_low():
    w = World()
    w.add_consumer()
    w.produce(30)
    drive(w, 10, sync=False)
    resume = w.fm.failover_consumer("payments", "B", 10)
    assert resume == {0: 0}
    drive(w, 100, sync=False, start=11)
    ids = [i for _, i in w.acks]
    assert set(ids) == set(range(1, 31))


def test_failover_errors():
    w = World()
    w.add_consumer()
    with pytest.raises(UnknownConsumer):
        w.fm.failover_consumer("ghost", "B", 0)
    with pytest.raises(AlreadyInRegion):
        w.fm.failover_consumer("payments", "A", 0)


def test_set_primary_epochs_and_fencing():
    down = set()
    coord = ActiveActiveCoordinator(lambda r: r not in down)
    assert coord.set_primary("surge", "A", 0).epoch == 1
    assert coord.set_primary("surge", "A", 1).epoch == 1
    assert coord.publish("surge", "A", "k", 1, 2)
    assert not coord.publish("surge", "B", "k", 2, 2)
    down.add("A")
    with pytest.raises(RegionUnavailable):
        coord.set_primary("surge", "A", 3)
    label = coord.set_primary("surge", "B", 5)
    assert label.epoch == 2
    assert not coord.publish("surge", "A", "k", 3, 6)
    assert coord.publish("surge", "B", "k", 4, 6)
    assert [r for t, r, *_ in coord.write_log if t >= 5] == ["B"]
    assert coord.discarded == 2


def test_results_store_rejects_stale_epoch():
    store = ResultsStore()
    assert store.write("k", 1, 2, "B")
    assert not store.write("k", 0, 1, "A")
    assert store.data["k"] == (1, 2, "B")
    assert store.rejected_stale == 1
