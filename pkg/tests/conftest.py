import pytest

from multiregion.broker import Cluster, TopicConfig
from multiregion.core import AuditMeta, ClusterId


class IdSource:
    def __init__(self):
        self.next_id = 1

    def audit(self, ts=0, service="svc", tier="t1"):
        meta = AuditMeta(self.next_id, ts, service, tier)
        self.next_id += 1
        return meta


@pytest.fixture
def ids():
    return IdSource()


@pytest.fixture
def cluster():
    return Cluster(ClusterId("A", "main"))


def make_cluster(ref, topics=()):
    c = Cluster(ClusterId.parse(ref))
    for name, partitions in topics:
        c.create_topic(name, TopicConfig(partitions))
    return c
