"""One provider, one dataset: rate-limited pulls with costs and availability markers."""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Any
from urllib.parse import urldefrag, urljoin, urlsplit

from ..docmodel import Availability, Document, ProvenanceStamp, canonical_json, format_timestamp
from ..store import DatasetCollection
from .clock import VirtualClock
from .costs import CostLedger, CostRecord, EnergyModel, cost_of_request
from .providers import ProviderDescriptor, ProviderKind, Transport
from .sla import RateLimiter

logger = logging.getLogger(__name__)

UNRECOVERABLE = ("auth", "privacy")


@dataclass
class PullResult:
    availability: Availability
    documents: list[Document] = field(default_factory=list)
    new_documents: int = 0
    links: list[str] = field(default_factory=list)
    cost: CostRecord | None = None
    placeholder: Document | None = None
    retry_after: float = 0.0

    @property
    def fetched(self) -> int:
        return len(self.documents)


class ProviderSession:
    """Pull/crawl access to a provider with SLA enforcement and cost accounting.

    Every interaction leaves a trace in the dataset: the collected documents,
    or a single Empty / Unavailable marker document.
    """

    def __init__(self, provider: ProviderDescriptor, transport: Transport,
                 dataset: DatasetCollection, clock: VirtualClock, ledger: CostLedger,
                 energy: EnergyModel = EnergyModel(), candidate_field: str = "user"):
        self.provider = provider
        self.transport = transport
        self.dataset = dataset
        self.clock = clock
        self.ledger = ledger
        self.energy = energy
        self.candidate_field = candidate_field
        self.limiter = RateLimiter(provider.sla)
        self.requests = 0

    def stamp(self, availability: Availability, jurisdiction: str | None = None) -> ProvenanceStamp:
        return ProvenanceStamp(self.provider.id, self.clock.timestamp(),
                               jurisdiction if jurisdiction is not None else self.provider.jurisdiction,
                               availability)

    def charge(self, bytes_in: int, bytes_out: int) -> CostRecord:
        self.requests += 1
        rec = cost_of_request(self.provider.network, self.provider.invocation_price,
                              self.provider.method_throughput, bytes_in, bytes_out,
                              request_id=f"{self.provider.id}:{len(self.ledger) + 1:06d}",
                              energy=self.energy)
        return self.ledger.record(rec)

    def marker(self, availability: Availability, request: str, candidate: str | None,
               jurisdiction: str | None = None) -> Document:
        body: dict[str, Any] = {"status": availability.status, "request": request,
                                "at": format_timestamp(self.clock.timestamp())}
        if availability.reason is not None:
            body["reason"] = availability.reason.value
        if candidate is not None:
            body[self.candidate_field] = candidate
        return self.dataset.add(body, self.stamp(availability, jurisdiction))

    def pull_once(self, request: str, credentials: str | None = None,
                  candidate: str | None = None, jurisdiction: str | None = None) -> PullResult:
        if self.provider.kind is ProviderKind.STREAM:
            raise ValueError(f"{self.provider.id} is a stream provider; subscribe instead")
        if self.provider.sla.auth_required and not credentials:
            return self._unavailable("auth", request, candidate, jurisdiction)
        decision = self.limiter.check(self.clock.now())
        if not decision:
            result = self._unavailable("rate_limit", request, candidate, jurisdiction)
            result.retry_after = decision.retry_after
            return result
        self.limiter.record(self.clock.now())
        envelope = canonical_json({"provider": self.provider.id, "request": request,
                                   "auth": bool(credentials)})
        response = self.transport.fetch(request, credentials)
        cost = self.charge(response.bytes_in, len(envelope.encode("utf-8")))
        if not response.ok:
            result = self._unavailable(response.status, request, candidate, jurisdiction)
            result.cost = cost
            return result
        if not response.documents:
            doc = self.marker(Availability.empty(), request, candidate, jurisdiction)
            return PullResult(Availability.empty(), cost=cost, placeholder=doc,
                              links=response.links)
        stamp = self.stamp(Availability.collected(), jurisdiction)
        stored, new = [], 0
        for body in response.documents:
            before = len(self.dataset)
            stored.append(self.dataset.add(body, stamp))
            new += len(self.dataset) - before
        return PullResult(Availability.collected(), stored, new, response.links, cost)

    def _unavailable(self, reason: str, request: str, candidate: str | None,
                     jurisdiction: str | None) -> PullResult:
        availability = Availability.unavailable(reason)
        logger.info("%s %s: unavailable (%s)", self.provider.id, request, reason)
        doc = self.marker(availability, request, candidate, jurisdiction)
        return PullResult(availability, placeholder=doc)


class Frontier:
    """Breadth-first crawl frontier restricted to the seeds' hosts and a depth bound."""

    def __init__(self, seeds: list[str], max_depth: int = 3):
        self.max_depth = max_depth
        self.hosts = {urlsplit(s).netloc for s in seeds}
        self.queue: deque[tuple[str, int]] = deque()
        self.seen: set[str] = set()
        for seed in seeds:
            self._offer(seed, 0)

    def _offer(self, url: str, depth: int) -> None:
        url = urldefrag(url)[0]
        if url in self.seen or depth > self.max_depth:
            return
        if urlsplit(url).netloc not in self.hosts:
            return
        self.seen.add(url)
        self.queue.append((url, depth))

    def push_links(self, base: str, links: list[str], depth: int) -> None:
        for link in links:
            self._offer(urljoin(base, link), depth + 1)

    def pop(self) -> tuple[str, int]:
        return self.queue.popleft()

    def __bool__(self) -> bool:
        return bool(self.queue)
