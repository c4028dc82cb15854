import random

import pytest
from hypothesis import given, settings, strategies as st

from multiregion.audit import Auditor
from multiregion.core import AuditMeta, Message
from multiregion.errors import UnknownTopic

STAGES = ["produced", "regional", "aggregate"]


def msg(i, ts):
    return Message(AuditMeta(i, ts), None, b"")


def auditor(window=10, grace=10):
    a = Auditor()
    a.register("trips", STAGES, window, grace)
    return a


def test_duplicates_collapse():
    a = auditor()
    a.record("produced", "trips", msg(1, 3), 3)
    a.record("produced", "trips", msg(1, 3), 4)
    assert a.stats("trips", "produced", 0).unique_count == 1


def test_window_boundaries():
    a = auditor()
    assert a.window_start("trips", 0) == 0
    assert a.window_start("trips", 9) == 0
    assert a.window_start("trips", 10) == 10


def test_record_after_seal_is_late():
    a = auditor()
    a.record("produced", "trips", msg(1, 0), 0)
    a.seal_and_compare(20)
    assert a.record("produced", "trips", msg(2, 5), 21) is False
    assert a.late_records == 1
    assert a.stats("trips", "produced", 0) is None


def test_seal_respects_grace():
    a = auditor(window=10, grace=5)
    for s in STAGES[:2]:
        a.record(s, "trips", msg(1, 0), 0)
    assert a.seal_and_compare(14) == []
    assert a.windows_sealed == 0
    alerts = a.seal_and_compare(15)
    assert a.windows_sealed == 1 and len(alerts) == 1


def test_identical_traffic_no_alerts():
    a = auditor()
    for i in range(50):
        for s in STAGES:
            a.record(s, "trips", msg(i, i), i)
    assert a.seal_and_compare(10**6) == []


def test_dropped_ids_reported_once():
    a = auditor()
    dropped = {4, 17, 33}
    for i in range(40):
        a.record("produced", "trips", msg(i, i), i)
        a.record("regional", "trips", msg(i, i), i)
        if i not in dropped:
            a.record("aggregate", "trips", msg(i, i), i)
    alerts = a.seal_and_compare(100)
    assert {al.window_start for al in alerts} == {0, 10, 30}
    assert all((al.stage_a, al.stage_b) == ("regional", "aggregate") for al in alerts)
    assert set().union(*(al.missing_ids for al in alerts)) == dropped
    assert sum(al.count_a - al.count_b for al in alerts) == 3


def test_duplicates_downstream_do_not_alert():
    a = auditor()
    for i in range(30):
        a.record("produced", "trips", msg(i, i), i)
        a.record("regional", "trips", msg(i, i), i)
        for _ in range(3):
            a.record("aggregate", "trips", msg(i, i), i)
    assert a.seal_and_compare(100) == []


def test_unknown_topic_and_stage():
    a = auditor()
    with pytest.raises(UnknownTopic):
        a.record("produced", "nope", msg(1, 1), 1)
    with pytest.raises(ValueError):
        a.record("bogus", "trips", msg(1, 1), 1)


@settings(max_examples=80, deadline=None)
@given(
    n=st.integers(0, 80),
    drops=st.sets(st.integers(0, 79), max_size=10),
    dup_seed=st.integers(0, 10**6),
)
def test_exact_detection_and_duplicate_invariance(n, drops, dup_seed):
    rng = random.Random(dup_seed)
    drops = {d for d in drops if d < n}
    base = auditor()
    duped = auditor()
    for i in range(n):
        ts = rng.randrange(0, 60)
        for a, reps in ((base, 1), (duped, rng.randrange(1, 4))):
            for _ in range(reps):
                a.record("produced", "trips", msg(i, ts), 0)
                a.record("regional", "trips", msg(i, ts), 0)
                if i not in drops:
                    a.record("aggregate", "trips", msg(i, ts), 0)
    a1 = base.seal_all()
    a2 = duped.seal_all()
    assert [x.to_dict() for x in a1] == [x.to_dict() for x in a2]
    missing = [i for al in a1 for i in al.missing_ids]
    assert sorted(missing) == sorted(drops)
