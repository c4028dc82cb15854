"""Surge-style windowed aggregation used to show active-active convergence.

Trip events are counted per (geofence, window) as demand or supply. Counting
is keyed by message id, so redelivered events change nothing, and the result
does not depend on arrival order. The pricing multiplier is a simple
stand-in: ``max(1, demand / max(supply, 1))`` as an exact fraction.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional

from multiregion.core import Message, fnv1a_64
from multiregion.errors import AlreadySealed, DigestUnavailable

DEMAND = "demand"
SUPPLY = "supply"


@dataclass(frozen=True)
class TripEvent:
    geofence: str
    kind: str
    app_timestamp: int
    origin_region: str

    def __post_init__(self):
        if self.kind not in (DEMAND, SUPPLY):
            raise ValueError(f"kind must be demand or supply, got {self.kind!r}")

    def encode(self) -> bytes:
        return json.dumps(
            {"geofence": self.geofence, "kind": self.kind, "ts": self.app_timestamp, "origin": self.origin_region},
            sort_keys=True,
            separators=(",", ":"),
        ).encode()

    @classmethod
    def decode(cls, payload: bytes) -> "TripEvent":
        d = json.loads(payload)
        return cls(d["geofence"], d["kind"], d["ts"], d["origin"])


def surge_multiplier(demand: int, supply: int) -> Fraction:
    return max(Fraction(1), Fraction(demand, max(supply, 1)))


@dataclass(frozen=True)
class WindowAggregate:
    geofence: str
    window_start: int
    demand_count: int
    supply_count: int
    multiplier: Fraction

    def canonical(self) -> str:
        m = self.multiplier
        return f"{self.geofence}|{self.window_start}|{self.demand_count}|{self.supply_count}|{m.numerator}/{m.denominator}"


class SurgePipeline:
    def __init__(self, window: int = 10):
        if window < 1:
            raise ValueError("window must be >= 1")
        self.window = window
        self._open: Dict[int, Dict[str, Dict[str, set]]] = {}
        self._sealed: Dict[int, List[WindowAggregate]] = {}
        self.late = 0
        self.ingested = 0
        self._sealed_below: Optional[int] = None

    def window_of(self, app_timestamp: int) -> int:
        return app_timestamp // self.window * self.window

    def ingest_event(self, event: TripEvent, message_id: int) -> bool:
        """Count one event; False if its window is already sealed."""
        start = self.window_of(event.app_timestamp)
        if start in self._sealed or (self._sealed_below is not None and start < self._sealed_below):
            self.late += 1
            return False
        counts = self._open.setdefault(start, {}).setdefault(event.geofence, {DEMAND: set(), SUPPLY: set()})
        counts[event.kind].add(message_id)
        self.ingested += 1
        return True

    def ingest(self, message: Message) -> bool:
        return self.ingest_event(TripEvent.decode(message.payload), message.id)

    def open_windows(self) -> List[int]:
        return sorted(self._open)

    def seal_window(self, window_start: int) -> List[WindowAggregate]:
        if window_start in self._sealed:
            raise AlreadySealed(f"window {window_start}")
        groups = self._open.pop(window_start, {})
        out = []
        for geofence in sorted(groups):
            d = len(groups[geofence][DEMAND])
            s = len(groups[geofence][SUPPLY])
            out.append(WindowAggregate(geofence, window_start, d, s, surge_multiplier(d, s)))
        self._sealed[window_start] = out
        return out

    def seal_due(self, now: int, lateness: int) -> List[WindowAggregate]:
        """Seal open windows whose end plus ``lateness`` has passed."""
        out = []
        for start in self.open_windows():
            if start + self.window + lateness <= now:
                out.extend(self.seal_window(start))
        limit = (now - lateness - self.window) // self.window * self.window + self.window
        if self._sealed_below is None or limit > self._sealed_below:
            self._sealed_below = limit
        return out

    def seal_open(self) -> List[WindowAggregate]:
        out = []
        for start in self.open_windows():
            out.extend(self.seal_window(start))
        return out

    def aggregates(self) -> List[WindowAggregate]:
        rows = [a for aggs in self._sealed.values() for a in aggs]
        return sorted(rows, key=lambda a: (a.geofence, a.window_start))

    def state_digest(self) -> str:
        if self._open:
            raise DigestUnavailable(f"{len(self._open)} windows still open")
        text = "\n".join(a.canonical() for a in self.aggregates())
        return f"{fnv1a_64(text.encode()):016x}"
