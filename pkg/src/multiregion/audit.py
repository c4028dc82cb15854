"""Unique-message-count auditing across pipeline stages.

Each audited stream declares an ordered list of stages. Every stage counts
distinct message ids per tumbling window of application time. Once a window
is past its grace period it is sealed everywhere, and each adjacent stage
pair whose counts disagree produces an alert listing the ids seen upstream
but not downstream. Duplicates collapse, so at-least-once delivery never
raises alerts by itself.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

from multiregion.core import Message
from multiregion.errors import UnknownTopic

logger = logging.getLogger(__name__)

DEFAULT_WINDOW = 10

STANDARD_STAGES = ("produced", "regional", "aggregate", "replicated", "dispatched", "consumed")


@dataclass
class WindowStats:
    topic: str
    stage: str
    window_start: int
    id_set: set = field(default_factory=set)
    sealed: bool = False

    @property
    def unique_count(self) -> int:
        return len(self.id_set)


@dataclass(frozen=True)
class AlertRecord:
    topic: str
    window_start: int
    stage_a: str
    stage_b: str
    count_a: int
    count_b: int
    missing_ids: frozenset

    def to_dict(self) -> dict:
        return {
            "topic": self.topic,
            "window_start": self.window_start,
            "stage_a": self.stage_a,
            "stage_b": self.stage_b,
            "count_a": self.count_a,
            "count_b": self.count_b,
            "missing_ids": sorted(self.missing_ids),
        }


class _Chain:
    def __init__(self, topic, stages, window, grace):
        self.topic = topic
        self.stages = list(stages)
        self.window = window
        self.grace = grace
        self.windows: Dict[int, Dict[str, WindowStats]] = {}
        self.sealed_below: Optional[int] = None  # every window_start < this is sealed


class Auditor:
    def __init__(self):
        self._chains: Dict[str, _Chain] = {}
        self.alerts: List[AlertRecord] = []
        self.late_records = 0
        self.windows_sealed = 0

    def register(self, topic: str, stages: Sequence[str], window: int = DEFAULT_WINDOW, grace: Optional[int] = None) -> None:
        if len(set(stages)) != len(stages) or len(stages) < 1:
            raise ValueError(f"{topic}: stages must be distinct and non-empty")
        if window < 1:
            raise ValueError("window must be >= 1")
        grace = window if grace is None else grace
        self._chains[topic] = _Chain(topic, stages, window, grace)

    def _chain(self, topic: str) -> _Chain:
        try:
            return self._chains[topic]
        except KeyError:
            raise UnknownTopic(f"{topic} is not audited") from None

    def window_start(self, topic: str, app_timestamp: int) -> int:
        w = self._chain(topic).window
        return app_timestamp // w * w

    def record(self, stage: str, topic: str, msg: Message, now: int) -> bool:
        """Count ``msg`` at ``stage``; returns False for a late record."""
        chain = self._chain(topic)
        if stage not in chain.stages:
            raise ValueError(f"{stage!r} is not a stage of {topic}")
        start = msg.audit.app_timestamp // chain.window * chain.window
        if chain.sealed_below is not None and start < chain.sealed_below:
            self.late_records += 1
            return False
        stats = chain.windows.setdefault(start, {}).get(stage)
        if stats is None:
            stats = chain.windows[start][stage] = WindowStats(topic, stage, start)
        stats.id_set.add(msg.audit.message_id)
        return True

    def stats(self, topic: str, stage: str, window_start: int) -> Optional[WindowStats]:
        return self._chain(topic).windows.get(window_start, {}).get(stage)

    def seal_and_compare(self, now: int, grace: Optional[int] = None) -> List[AlertRecord]:
        """Seal every window whose end plus grace has passed and compare stages."""
        new = []
        for name in sorted(self._chains):
            chain = self._chains[name]
            g = chain.grace if grace is None else grace
            # window_start + window + grace <= now  <=>  window_start < limit
            limit = (now - g - chain.window) // chain.window * chain.window + chain.window
            if chain.sealed_below is not None and limit <= chain.sealed_below:
                continue
            for start in sorted(s for s in chain.windows if s < limit):
                new.extend(self._seal(chain, start))
                del chain.windows[start]
            chain.sealed_below = limit if chain.sealed_below is None else max(limit, chain.sealed_below)
        self.alerts.extend(new)
        return new

    def seal_all(self) -> List[AlertRecord]:
        new = []
        for name in sorted(self._chains):
            chain = self._chains[name]
            starts = sorted(chain.windows)
            for start in starts:
                new.extend(self._seal(chain, start))
                del chain.windows[start]
            if starts:
                top = starts[-1] + chain.window
                chain.sealed_below = top if chain.sealed_below is None else max(top, chain.sealed_below)
        self.alerts.extend(new)
        return new

    def _seal(self, chain: _Chain, start: int) -> List[AlertRecord]:
        per_stage = chain.windows.get(start, {})
        sets = []
        for stage in chain.stages:
            stats = per_stage.get(stage) or WindowStats(chain.topic, stage, start)
            stats.sealed = True
            sets.append(stats.id_set)
        self.windows_sealed += 1
        alerts = []
        for i in range(len(sets) - 1):
            a, b = sets[i], sets[i + 1]
            missing = frozenset(a - b)
            if len(a) != len(b) or missing:
                alerts.append(
                    AlertRecord(chain.topic, start, chain.stages[i], chain.stages[i + 1], len(a), len(b), missing)
                )
        return alerts
