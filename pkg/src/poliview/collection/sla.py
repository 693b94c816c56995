"""SLA contracts and sliding-window request quotas."""

from __future__ import annotations

import bisect
from collections import deque
from dataclasses import dataclass
from typing import Sequence

from ..policy import PrivacyLevel


@dataclass(frozen=True)
class SlaContract:
    max_requests: int = 1_000_000
    window: float = 3600.0
    auth_required: bool = False
    default_privacy: PrivacyLevel = PrivacyLevel.PUBLIC
    default_license: str = "unspecified"

    def __post_init__(self):
        if self.max_requests < 1 or self.window <= 0:
            raise ValueError(f"invalid SLA {self}")


@dataclass(frozen=True)
class RateDecision:
    allowed: bool
    retry_after: float = 0.0

    def __bool__(self) -> bool:
        return self.allowed


ALLOW = RateDecision(True)


def rate_limit_check(sla: SlaContract, history: Sequence[float], now: float) -> RateDecision:
    """Allow iff fewer than ``max_requests`` timestamps lie in ``(now - window, now]``.

    On Deny, ``retry_after`` is the wait until enough in-window requests have
    aged out (with a well-kept history: until the oldest one exits).
    """
    lo = bisect.bisect_right(history, now - sla.window)
    hi = bisect.bisect_right(history, now)
    in_window = hi - lo
    if in_window < sla.max_requests:
        return ALLOW
    # the (in_window - max_requests + 1)-th oldest has to leave
    exiting = history[lo + in_window - sla.max_requests]
    return RateDecision(False, exiting + sla.window - now)


class RateLimiter:
    """Request history for one provider, pruned to the current window."""

    def __init__(self, sla: SlaContract):
        self.sla = sla
        self.history: deque[float] = deque()

    def check(self, now: float) -> RateDecision:
        while self.history and self.history[0] <= now - self.sla.window:
            self.history.popleft()
        return rate_limit_check(self.sla, list(self.history), now)

    def record(self, now: float) -> None:
        if self.history and now < self.history[-1]:
            raise ValueError("request timestamps must be non-decreasing")
        self.history.append(now)

    def acquire(self, now: float) -> RateDecision:
        decision = self.check(now)
        if decision:
            self.record(now)
        return decision
