"""Virtual and wall clocks mapped onto a UTC start instant."""

from __future__ import annotations

import time
from datetime import datetime, timedelta, timezone

from ..docmodel import to_utc


class VirtualClock:
    """Time that only moves when the scheduler advances it."""

    def __init__(self, start: datetime):
        self.start = to_utc(start)
        self._now = 0.0

    def now(self) -> float:
        return self._now

    def advance_to(self, t: float) -> None:
        if t < self._now:
            raise ValueError(f"virtual time cannot go back ({t} < {self._now})")
        self._now = t

    def timestamp(self) -> datetime:
        return self.start + timedelta(seconds=int(self._now))


class RealClock(VirtualClock):
    """Seconds elapsed since construction; advancing sleeps."""

    def __init__(self, start: datetime | None = None):
        super().__init__(start or datetime.now(timezone.utc))
        self._t0 = time.monotonic()

    def now(self) -> float:
        return time.monotonic() - self._t0

    def advance_to(self, t: float) -> None:
        delay = t - self.now()
        if delay > 0:
            time.sleep(delay)
