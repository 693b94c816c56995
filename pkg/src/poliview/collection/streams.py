"""Subscriptions to stream providers and the consumer-side flush policy.

A stream delivers ``items`` every ``period`` seconds.  The consumer buffers
items and flushes when the first of three bounds is crossed: item count,
seconds since the last flush, or buffered bytes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

from ..docmodel import canonicalize
from .providers import ProviderDescriptor, ProviderKind

TRIGGERS = ("count", "elapsed", "bytes")


class SubscriptionError(Exception):
    """Subscribing to the wrong kind of provider, twice, or using an ended subscription."""


@dataclass(frozen=True)
class FlushPolicy:
    max_count: float = math.inf
    max_elapsed: float = math.inf
    max_bytes: float = math.inf

    def __post_init__(self):
        bounds = (self.max_count, self.max_elapsed, self.max_bytes)
        if not any(math.isfinite(b) for b in bounds):
            raise ValueError("a flush policy needs at least one finite bound")
        if any(b <= 0 for b in bounds):
            raise ValueError("flush bounds must be positive")

    @classmethod
    def from_dict(cls, data: dict) -> "FlushPolicy":
        return cls(**{k: float(v) if v is not None else math.inf for k, v in data.items()})


@dataclass(frozen=True)
class ProductionRate:
    items: int = 1
    period: float = 300.0

    def __post_init__(self):
        if self.items < 1 or self.period <= 0:
            raise ValueError(f"invalid production rate {self}")

    def delivery_time(self, started_at: float, k: int) -> float:
        """Virtual time of the k-th delivery (1-based)."""
        return started_at + k * self.period / self.items


@dataclass(frozen=True)
class Hold:
    buffered: int


@dataclass(frozen=True)
class Flush:
    batch: list
    trigger: str      # count | elapsed | bytes | final
    nbytes: int
    at: float


@dataclass
class Subscription:
    provider_id: str
    rate: ProductionRate
    started_at: float
    flush: FlushPolicy
    duration: float | None = None       # None: runs until unsubscribe
    buffer: list = field(default_factory=list)
    buffer_bytes: int = 0
    last_flush: float = 0.0
    active: bool = True
    delivered: int = 0

    def __post_init__(self):
        self.last_flush = self.started_at

    @property
    def ends_at(self) -> float:
        return math.inf if self.duration is None else self.started_at + self.duration

    def accepts(self, now: float) -> bool:
        return self.active and now <= self.ends_at

    def next_delivery(self) -> float:
        return self.rate.delivery_time(self.started_at, self.delivered + 1)

    def flush_deadline(self) -> float:
        return self.last_flush + self.flush.max_elapsed


def item_size(item: Any) -> int:
    return len(canonicalize(item))


class SubscriptionRegistry:
    """At most one active subscription per provider."""

    def __init__(self):
        self.active: dict[str, Subscription] = {}

    def subscribe(self, provider: ProviderDescriptor, rate: ProductionRate,
                  duration: float | None, flush: FlushPolicy, now: float) -> Subscription:
        if provider.kind is not ProviderKind.STREAM:
            raise SubscriptionError(f"{provider.id} is {provider.kind.value}, not a stream")
        if provider.id in self.active:
            raise SubscriptionError(f"already subscribed to {provider.id}")
        if duration is not None and duration <= 0:
            raise ValueError("subscription duration must be positive")
        sub = Subscription(provider.id, rate, now, flush, duration)
        self.active[provider.id] = sub
        return sub

    def unsubscribe(self, sub: Subscription, now: float) -> Flush | None:
        if self.active.get(sub.provider_id) is not sub:
            raise SubscriptionError(f"subscription to {sub.provider_id} is not active")
        del self.active[sub.provider_id]
        return unsubscribe(sub, now)


def flush_decision(sub: Subscription, item: Any, now: float) -> Hold | Flush:
    """Buffer ``item`` (``None`` for a timer tick) and decide whether to flush.

    The reported trigger is the bound crossed first in time.  The elapsed
    bound is crossed at the deadline itself, so a deadline already behind
    ``now`` wins; bounds crossed at the same instant rank count, elapsed,
    bytes.
    """
    if not sub.accepts(now):
        raise SubscriptionError(f"subscription to {sub.provider_id} has ended")
    if item is not None:
        sub.buffer.append(item)
        sub.buffer_bytes += item_size(item)
        sub.delivered += 1
    if not sub.buffer:
        return Hold(0)
    deadline = sub.flush_deadline()
    elapsed_hit = now >= deadline
    if elapsed_hit and deadline < now:
        trigger = "elapsed"
    elif len(sub.buffer) >= sub.flush.max_count:
        trigger = "count"
    elif elapsed_hit:
        trigger = "elapsed"
    elif sub.buffer_bytes >= sub.flush.max_bytes:
        trigger = "bytes"
    else:
        return Hold(len(sub.buffer))
    return _drain(sub, trigger, now)


def _drain(sub: Subscription, trigger: str, now: float) -> Flush:
    out = Flush(sub.buffer, trigger, sub.buffer_bytes, now)
    sub.buffer = []
    sub.buffer_bytes = 0
    sub.last_flush = now
    return out


def unsubscribe(sub: Subscription, now: float) -> Flush | None:
    """End the subscription; the residual buffer (if any) is the final flush."""
    if not sub.active:
        raise SubscriptionError(f"subscription to {sub.provider_id} already ended")
    sub.active = False
    if not sub.buffer:
        return None
    return _drain(sub, "final", now)
