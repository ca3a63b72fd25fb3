"""Two-tier future-event list.

Events near in time sit in a sorted list, everything further away in an
unsorted append-only list.  Because almost every event in a polling
simulation reschedules itself one poll interval ahead (past the mean of
the pending events), the vast majority of inserts take the O(1) unsorted
path instead of a sorted insert.
"""

from __future__ import annotations

from bisect import insort
from dataclasses import dataclass, field
from typing import NamedTuple

# Event codes: >= 1 means "update for service (code - 1)"; negative codes
# are predefined events.
CHANGE = -1
PROBE = -2
END_OF_RUN = -3

# Sequence number forcing an event to pop after every same-time event.
LAST_AMONG_TIES = float("inf")


class Event(NamedTuple):
    time: float
    code: int


class PastInsertError(ValueError):
    """Raised when an event is scheduled before the last popped time."""


@dataclass
class QueueStats:
    inserts_near: int = 0
    inserts_far: int = 0
    peak_size: int = 0
    refills: int = 0

    @property
    def far_fraction(self) -> float:
        total = self.inserts_near + self.inserts_far
        return self.inserts_far / total if total else 0.0


@dataclass
class TwoTierQueue:
    """Future-event list split at a moving time horizon.

    The near list holds entries ``(-time, -seq, code)`` sorted ascending, so
    the globally next event is at the end and pops in O(1).  Ties in time
    pop in insertion order.
    """

    horizon: float = 0.0
    _near: list[tuple[float, float, int]] = field(default_factory=list)
    _far: list[tuple[float, float, int]] = field(default_factory=list)
    _seq: int = 0
    _last_popped: float = 0.0
    stats: QueueStats = field(default_factory=QueueStats)

    def __len__(self) -> int:
        return len(self._near) + len(self._far)

    def insert(self, event: Event, *, last_among_ties: bool = False) -> None:
        """Schedule an event; near-horizon inserts keep the near list sorted."""
        time, code = event
        if time < self._last_popped:
            raise PastInsertError(
                f"event at t={time} scheduled before last popped t={self._last_popped}"
            )
        seq = LAST_AMONG_TIES if last_among_ties else self._seq
        self._seq += 1
        if time <= self.horizon:
            insort(self._near, (-time, -seq, code))
            self.stats.inserts_near += 1
        else:
            self._far.append((-time, -seq, code))
            self.stats.inserts_far += 1
        self.stats.peak_size = max(self.stats.peak_size, len(self))

    def pop_next(self) -> Event | None:
        """Remove and return the earliest event, or None when empty."""
        if not self._near:
            if not self._far:
                return None
            self._refill()
        neg_time, _neg_seq, code = self._near.pop()
        self._last_popped = -neg_time
        return Event(-neg_time, code)

    def _refill(self) -> None:
        # Pivot on the mean of the pending far times; everything at or
        # below it becomes the new sorted near window.  If rounding strands
        # every event above the mean (all times equal), move them all.
        times = [-entry[0] for entry in self._far]
        pivot = sum(times) / len(times)
        moved = [entry for entry in self._far if -entry[0] <= pivot]
        if not moved:
            moved = self._far[:]
        if len(moved) == len(self._far):
            self._far.clear()
        else:
            moved_set = set(moved)
            self._far = [e for e in self._far if e not in moved_set]
        moved.sort()
        self._near = moved
        self.horizon = pivot
        self.stats.refills += 1
