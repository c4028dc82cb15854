"""Domain types shared by every component, and the key partitioner."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional

from multiregion.errors import InvalidPartitionCount

FNV64_OFFSET_BASIS = 14695981039346656037
FNV64_PRIME = 1099511628211
_MASK64 = (1 << 64) - 1
_MASK128 = (1 << 128) - 1


def fnv1a_64(data: bytes) -> int:
    h = FNV64_OFFSET_BASIS
    for byte in data:
        h ^= byte
        h = (h * FNV64_PRIME) & _MASK64
    return h


def partition_for_key(key: bytes, n: int) -> int:
    """Map ``key`` onto one of ``n`` partitions (FNV-1a 64, reduced mod n)."""
    if n < 1:
        raise InvalidPartitionCount(f"partition count must be >= 1, got {n}")
    return fnv1a_64(key) % n


class TopicPartition(NamedTuple):
    topic: str
    partition: int

    def __str__(self):
        return f"{self.topic}[{self.partition}]"


class ClusterId(NamedTuple):
    region: str
    cluster: str

    def __str__(self):
        return f"{self.region}/{self.cluster}"

    @classmethod
    def parse(cls, ref: str) -> "ClusterId":
        region, sep, cluster = ref.partition("/")
        if not sep or not region or not cluster or "/" in cluster:
            raise ValueError(f"cluster reference must look like 'region/cluster': {ref!r}")
        return cls(region, cluster)


@dataclass(frozen=True)
class AuditMeta:
    message_id: int
    app_timestamp: int
    service_name: str = ""
    tier: str = ""

    def __post_init__(self):
        if not 0 <= self.message_id <= _MASK128:
            raise ValueError("message_id must be a 128-bit unsigned integer")
        if self.app_timestamp < 0:
            raise ValueError("app_timestamp must be non-negative")


@dataclass(frozen=True)
class Message:
    audit: AuditMeta
    key: Optional[bytes]
    payload: bytes

    @property
    def id(self) -> int:
        return self.audit.message_id
