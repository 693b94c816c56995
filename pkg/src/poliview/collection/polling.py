"""Adaptive poll interval driven by the novelty of the last poll."""

from __future__ import annotations

from dataclasses import dataclass, replace

LOW_NOVELTY = 0.1
HIGH_NOVELTY = 0.5


@dataclass(frozen=True)
class PollSchedule:
    interval: float
    min_interval: float
    max_interval: float
    last_novelty_ratio: float | None = None

    def __post_init__(self):
        if not 0 < self.min_interval <= self.interval <= self.max_interval:
            raise ValueError(f"need 0 < min <= interval <= max, got {self}")


def novelty_ratio(new_unique: int, fetched: int) -> float | None:
    """Share of fetched documents not seen before; ``None`` when nothing was fetched."""
    if fetched <= 0:
        return None
    return new_unique / fetched


def adapt_poll_interval(sched: PollSchedule, ratio: float | None) -> PollSchedule:
    """Double the interval on stale polls, halve it on fresh ones.

    An undefined ratio (empty poll) leaves the interval alone and records
    ``None`` as the last ratio.
    """
    if ratio is None:
        return replace(sched, last_novelty_ratio=None)
    if not 0.0 <= ratio <= 1.0:
        raise ValueError(f"novelty ratio {ratio} outside [0, 1]")
    interval = sched.interval
    if ratio < LOW_NOVELTY:
        interval = min(interval * 2, sched.max_interval)
    elif ratio > HIGH_NOVELTY:
        interval = max(interval / 2, sched.min_interval)
    return replace(sched, interval=interval, last_novelty_ratio=ratio)
