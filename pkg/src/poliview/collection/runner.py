"""Collection plans and the deterministic task scheduler.

Every task is a generator that yields the virtual time at which it wants to
resume.  The scheduler always resumes the earliest task (ties by submission
order), so a plan, a seed and the virtual clock fix every output byte.
"""

from __future__ import annotations

import heapq
import json
import logging
import os
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Iterator

from ..docmodel import Availability, parse_timestamp
from ..store import DatasetCollection
from .clock import RealClock, VirtualClock
from .costs import CostLedger, EnergyModel
from .http import HttpTransport
from .polling import PollSchedule, adapt_poll_interval, novelty_ratio
from .providers import ProviderDescriptor, ProviderKind
from .session import UNRECOVERABLE, Frontier, ProviderSession, PullResult
from .sla import RateLimiter
from .simulator import SimulatedProvider, load_script
from .streams import (
    Flush,
    FlushPolicy,
    ProductionRate,
    SubscriptionRegistry,
    flush_decision,
)

logger = logging.getLogger(__name__)

DEFAULT_START = datetime(2014, 5, 1, tzinfo=timezone.utc)


class PlanError(ValueError):
    """The collection plan is inconsistent or references unknown things."""


@dataclass
class CollectionPlan:
    name: str
    providers: dict[str, ProviderDescriptor]
    tasks: list[dict]
    seed: int = 0
    clock: str = "virtual"
    start: datetime = DEFAULT_START
    dataset: str = "campaign"
    candidates: list[dict] = field(default_factory=list)
    candidate_field: str = "user"
    script: dict = field(default_factory=dict)
    energy: EnergyModel = EnergyModel()

    @classmethod
    def from_dict(cls, data: dict, base_dir: Path | None = None) -> "CollectionPlan":
        try:
            providers = {}
            for row in data.get("providers", []):
                p = ProviderDescriptor.from_dict(row)
                if p.id in providers:
                    raise PlanError(f"provider {p.id} declared twice")
                providers[p.id] = p
            script = data.get("script", {})
            if "simulator" in data:
                path = Path(data["simulator"])
                if base_dir is not None and not path.is_absolute():
                    path = base_dir / path
                script = load_script(path)
            start = parse_timestamp(data["start"]) if "start" in data else DEFAULT_START
            if start is None:
                raise PlanError(f"bad start time {data['start']!r}")
            plan = cls(
                name=data.get("name", "plan"),
                providers=providers,
                tasks=list(data.get("tasks", [])),
                seed=int(data.get("seed", 0)),
                clock=data.get("clock", "virtual"),
                start=start,
                dataset=data.get("dataset", "campaign"),
                candidates=list(data.get("candidates", [])),
                candidate_field=data.get("candidate_field", "user"),
                script=script,
                energy=EnergyModel(**data.get("energy", {})),
            )
        except (KeyError, TypeError) as exc:
            raise PlanError(f"malformed plan: {exc!r}") from exc
        plan.check()
        return plan

    @classmethod
    def load(cls, path: Path | str) -> "CollectionPlan":
        path = Path(path)
        try:
            data = json.loads(path.read_text("utf-8"))
        except (OSError, ValueError) as exc:
            raise PlanError(f"cannot read plan {path}: {exc}") from exc
        return cls.from_dict(data, path.parent)

    def check(self) -> None:
        if self.clock not in ("virtual", "real"):
            raise PlanError(f"clock must be virtual or real, not {self.clock!r}")
        for n, task in enumerate(self.tasks):
            kind = task.get("type")
            if kind not in TASK_TYPES:
                raise PlanError(f"task {n}: unknown type {kind!r}")
            pid = task.get("provider")
            if pid not in self.providers:
                raise PlanError(f"task {n}: unknown provider {pid!r}")
            expected = TASK_TYPES[kind]
            if self.providers[pid].kind not in expected:
                raise PlanError(f"task {n}: {kind} needs a {'/'.join(k.value for k in expected)} "
                                f"provider, {pid} is {self.providers[pid].kind.value}")

    def country_of(self, candidate: str | None) -> str | None:
        for c in self.candidates:
            if c.get("id") == candidate:
                return c.get("country")
        return None


TASK_TYPES = {
    "pull": (ProviderKind.ON_DEMAND, ProviderKind.SITE),
    "poll": (ProviderKind.ON_DEMAND, ProviderKind.SITE),
    "crawl": (ProviderKind.SITE,),
    "subscribe": (ProviderKind.STREAM,),
}


@dataclass
class RunResult:
    datasets: dict[str, DatasetCollection]
    ledger: CostLedger
    report: dict


def _credentials(task: dict) -> str | None:
    cred = task.get("credentials")
    if isinstance(cred, str) and cred.startswith("env:"):
        return os.environ.get(cred[4:])
    return cred


class _Run:
    def __init__(self, plan: CollectionPlan, root: Path, seed: int, clock_mode: str):
        self.plan = plan
        self.root = Path(root)
        self.seed = seed
        self.clock = VirtualClock(plan.start) if clock_mode == "virtual" else RealClock(plan.start)
        self.ledger = CostLedger()
        self.datasets: dict[str, DatasetCollection] = {}
        self.sessions: dict[tuple[str, str], ProviderSession] = {}
        self.transports: dict[str, Any] = {}
        self.registry = SubscriptionRegistry()
        self.limiters: dict[str, RateLimiter] = {}
        self.outcomes: list[dict] = []

    def dataset(self, name: str) -> DatasetCollection:
        if name not in self.datasets:
            ds = DatasetCollection(self.root / name, name)
            if len(ds):
                raise PlanError(f"dataset {ds.root} is not empty")
            ds.set_meta("plan", self.plan.name)
            ds.set_meta("candidate_field", self.plan.candidate_field)
            ds.set_meta("roster", self.plan.candidates)
            ds.set_meta("providers", {p.id: p.to_dict() for p in self.plan.providers.values()})
            self.datasets[name] = ds
        return self.datasets[name]

    def transport(self, provider: ProviderDescriptor):
        if provider.id not in self.transports:
            if provider.endpoint.startswith(("http://", "https://")):
                self.transports[provider.id] = HttpTransport(provider.endpoint)
            else:
                script = self.plan.script.get("providers", {}).get(provider.id)
                if script is None:
                    raise PlanError(f"no simulator script for provider {provider.id}")
                self.transports[provider.id] = SimulatedProvider(provider.id, script, self.seed)
        return self.transports[provider.id]

    def session(self, task: dict) -> ProviderSession:
        provider = self.plan.providers[task["provider"]]
        ds_name = task.get("dataset", self.plan.dataset)
        key = (provider.id, ds_name)
        if key not in self.sessions:
            self.sessions[key] = ProviderSession(provider, self.transport(provider),
                                                 self.dataset(ds_name), self.clock, self.ledger,
                                                 self.plan.energy, self.plan.candidate_field)
            # one quota per provider, however many datasets it feeds
            limiter = self.limiters.setdefault(provider.id, self.sessions[key].limiter)
            self.sessions[key].limiter = limiter
        return self.sessions[key]

    def note(self, task_no: int, provider: str, request: str, candidate: str | None,
             availability: Availability, documents: int) -> None:
        self.outcomes.append({
            "task": task_no,
            "provider": provider,
            "request": request,
            "candidate": candidate,
            "at": self.clock.now(),
            "status": availability.status,
            "reason": availability.reason.value if availability.reason else None,
            "documents": documents,
        })

    def note_pull(self, task_no: int, session: ProviderSession, request: str,
                  candidate: str | None, result: PullResult) -> None:
        self.note(task_no, session.provider.id, request, candidate, result.availability,
                  result.fetched)

    # -- tasks ------------------------------------------------------------
    def pull_task(self, n: int, task: dict) -> Iterator[float]:
        session = self.session(task)
        creds = _credentials(task)
        for req in sorted(task.get("requests", []), key=lambda r: r.get("at", 0)):
            yield float(req.get("at", 0))
            cand = req.get("candidate", task.get("candidate"))
            result = session.pull_once(req["key"], creds, cand, self.plan.country_of(cand))
            self.note_pull(n, session, req["key"], cand, result)

    def poll_task(self, n: int, task: dict) -> Iterator[float]:
        session = self.session(task)
        creds = _credentials(task)
        cand = task.get("candidate")
        sched = PollSchedule(**task["schedule"])
        t = float(task.get("start", 0))
        until = float(task["until"])
        while t <= until:
            yield t
            result = session.pull_once(task["request"], creds, cand, self.plan.country_of(cand))
            self.note_pull(n, session, task["request"], cand, result)
            reason = result.availability.reason
            if reason is not None and reason.value in UNRECOVERABLE:
                logger.info("task %d aborted: %s", n, reason.value)
                return
            sched = adapt_poll_interval(sched, novelty_ratio(result.new_documents, result.fetched))
            t += sched.interval

    def crawl_task(self, n: int, task: dict) -> Iterator[float]:
        session = self.session(task)
        creds = _credentials(task)
        cand = task.get("candidate")
        frontier = Frontier(list(task["seeds"]), int(task.get("max_depth", 3)))
        t = float(task.get("start", 0))
        yield t
        while frontier:
            url, depth = frontier.pop()
            # politeness: the provider's quota spaces out requests
            decision = session.limiter.check(self.clock.now())
            while not decision:
                yield self.clock.now() + decision.retry_after
                decision = session.limiter.check(self.clock.now())
            result = session.pull_once(url, creds, cand, self.plan.country_of(cand))
            self.note_pull(n, session, url, cand, result)
            reason = result.availability.reason
            if reason is not None and reason.value in UNRECOVERABLE:
                logger.info("task %d aborted: %s", n, reason.value)
                return
            frontier.push_links(url, result.links, depth)

    def subscribe_task(self, n: int, task: dict) -> Iterator[float]:
        provider = self.plan.providers[task["provider"]]
        ds = self.dataset(task.get("dataset", self.plan.dataset))
        session = self.session(task)
        transport = self.transport(provider)
        rate = ProductionRate(**task.get("rate", {}))
        end = task.get("end", {})
        duration = end.get("duration")
        stop_at = end.get("unsubscribe_at")
        flush = FlushPolicy.from_dict(task.get("flush", {"max_count": 1}))
        field_name = self.plan.candidate_field
        track = list(task.get("track", []))

        yield float(task.get("start", 0))
        decision = session.limiter.acquire(self.clock.now())
        if not decision:
            session.marker(Availability.unavailable("rate_limit"), "subscribe", None)
            self.note(n, provider.id, "subscribe", None, Availability.unavailable("rate_limit"), 0)
            return
        session.charge(0, len(f"subscribe {provider.id}".encode("utf-8")))
        sub = self.registry.subscribe(provider, rate, duration, flush, self.clock.now())
        ends = sub.ends_at if stop_at is None else min(sub.ends_at, float(stop_at))
        per_candidate: Counter = Counter()
        index = 0
        exhausted = False

        def store(flushed):
            session.charge(flushed.nbytes, 0)
            for item in flushed.batch:
                cand = item.get(field_name) if isinstance(item, dict) else None
                stamp = session.stamp(Availability.collected(), self.plan.country_of(cand))
                ds.add(item, stamp)
                per_candidate[cand] += 1

        while True:
            next_item = float("inf") if exhausted else sub.next_delivery()
            deadline = sub.flush_deadline() if sub.buffer else float("inf")
            t = min(next_item, deadline)
            if t > ends or t == float("inf"):
                break
            yield t
            if t == next_item:
                item = transport.stream_item(index)
                index += 1
                if item is None:
                    exhausted = True
                    continue
                outcome = flush_decision(sub, item, self.clock.now())
            else:
                outcome = flush_decision(sub, None, self.clock.now())
            if isinstance(outcome, Flush):
                store(outcome)
        if ends != float("inf"):
            yield max(ends, self.clock.now())
        final = self.registry.unsubscribe(sub, self.clock.now())
        if final is not None:
            store(final)
        for cand in track:
            if per_candidate[cand] == 0:
                session.marker(Availability.empty(), "stream", cand, self.plan.country_of(cand))
                self.note(n, provider.id, "stream", cand, Availability.empty(), 0)
            else:
                self.note(n, provider.id, "stream", cand, Availability.collected(),
                          per_candidate[cand])
        if not track:
            total = sum(per_candidate.values())
            if total == 0:
                session.marker(Availability.empty(), "stream", None)
            self.note(n, provider.id, "stream", None,
                      Availability.collected() if total else Availability.empty(), total)

    # -- driver -------------------------------------------------------------
    def run(self) -> RunResult:
        self.dataset(self.plan.dataset)
        handlers = {"pull": self.pull_task, "poll": self.poll_task,
                    "crawl": self.crawl_task, "subscribe": self.subscribe_task}
        heap: list[tuple[float, int, Iterator[float]]] = []
        seq = 0
        for n, task in enumerate(self.plan.tasks):
            gen = handlers[task["type"]](n, task)
            heap.append((float(task.get("start", 0)), seq, gen))
            seq += 1
        heapq.heapify(heap)
        while heap:
            t, _, gen = heapq.heappop(heap)
            if t > self.clock.now():
                self.clock.advance_to(t)
            try:
                wake = next(gen)
            except StopIteration:
                continue
            heapq.heappush(heap, (max(wake, self.clock.now()), seq, gen))
            seq += 1
        return RunResult(self.datasets, self.ledger, self.report())

    def report(self) -> dict:
        providers: dict[str, dict] = {}
        for pid, p in sorted(self.plan.providers.items()):
            counts: dict[str, Any] = {"collected": 0, "empty": 0, "unavailable": defaultdict(int)}
            for ds in self.datasets.values():
                for doc in ds.iterate():
                    if doc.provenance.provider_id != pid:
                        continue
                    a = doc.availability
                    if a.reason is not None:
                        counts["unavailable"][a.reason.value] += 1
                    else:
                        counts[a.status] += 1
            counts["unavailable"] = dict(sorted(counts["unavailable"].items()))
            providers[pid] = {
                "platform": p.platform,
                "kind": p.kind.value,
                "documents": counts,
                "cost": self.ledger.by_prefix(pid + ":").totals(),
            }
        return {
            "plan": self.plan.name,
            "seed": self.seed,
            "clock": "virtual" if type(self.clock) is VirtualClock else "real",
            "datasets": {name: {"documents": len(ds), "duplicates": ds.duplicates}
                         for name, ds in sorted(self.datasets.items())},
            "providers": providers,
            "outcomes": self.outcomes,
            "ledger": self.ledger.totals(),
            "costs": self.ledger.to_list(),
        }


def run_collection(plan: CollectionPlan, root: Path | str, *, seed: int | None = None,
                   clock: str | None = None) -> RunResult:
    """Run every task of ``plan`` to completion, writing datasets under ``root``."""
    return _Run(plan, Path(root), plan.seed if seed is None else seed,
                clock or plan.clock).run()
