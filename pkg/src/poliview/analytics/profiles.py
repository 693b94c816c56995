"""Candidate and party campaign profiles built from a harvested dataset.

A platform's availability for a candidate is read from the dataset itself:
Collected documents give a post count, an Empty marker a genuine zero, and an
Unavailable marker a reason instead of any count.
"""

from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass, field
from datetime import date, timedelta
from fractions import Fraction
from typing import Any, Iterable, Sequence

from ..docmodel import Document, get_path, parse_timestamp
from ..store import DatasetCollection
from ..curation.relations import influence_counts
from ..curation.topics import extract_hashtags

DEFAULT_TOP_N = 10
UNKNOWN_TOOL = "unknown"
# several blocked requests: report the most telling reason
REASON_PRIORITY = ("privacy", "auth", "provider_error", "rate_limit")


class AnalyticsError(ValueError):
    """Unknown candidate or party, or a dataset without a roster."""


@dataclass
class CampaignSource:
    """Documents plus the roster and provider metadata needed to read them."""

    documents: list[Document]
    roster: list[dict]
    platforms: dict[str, str]                  # provider id -> platform name
    candidate_field: str = "user"
    date_path: str = "date"
    content_path: str = "content"
    id_path: str | None = "tweet_id"
    link_paths: tuple[str, ...] = ("reply_to", "retweet_of")

    @classmethod
    def from_dataset(cls, ds: DatasetCollection, documents: Iterable[Document] | None = None,
                     **options) -> "CampaignSource":
        meta = ds.meta
        platforms = {pid: p.get("platform", pid) for pid, p in meta.get("providers", {}).items()}
        options.setdefault("candidate_field", meta.get("candidate_field", "user"))
        docs = list(ds.iterate() if documents is None else documents)
        return cls(docs, list(meta.get("roster", [])), platforms, **options)

    @property
    def platform_names(self) -> list[str]:
        return sorted(set(self.platforms.values()))

    def platform_of(self, doc: Document) -> str:
        pid = doc.provenance.provider_id
        return self.platforms.get(pid, pid)

    def candidate_of(self, doc: Document) -> Any:
        return get_path(doc.body, self.candidate_field)

    def roster_entry(self, candidate: str) -> dict:
        for row in self.roster:
            if row.get("id") == candidate:
                return row
        raise AnalyticsError(f"unknown candidate {candidate!r}")


@dataclass
class PlatformActivity:
    status: str                        # collected | empty | unavailable | none
    reason: str | None = None
    post_count: int | None = None
    topics: list[list] = field(default_factory=list)
    influence: int | None = None
    partial: bool = False              # some requests failed although posts were collected

    def to_dict(self) -> dict:
        return {"status": self.status, "reason": self.reason, "post_count": self.post_count,
                "topics": self.topics, "influence": self.influence, "partial": self.partial}

    @classmethod
    def from_dict(cls, d: dict) -> "PlatformActivity":
        return cls(d["status"], d["reason"], d["post_count"], [list(t) for t in d["topics"]],
                   d["influence"], d["partial"])

    @property
    def counted(self) -> bool:
        return self.status in ("collected", "empty")

    def label(self) -> str:
        if self.status == "unavailable":
            return f"NA({self.reason})"
        return "" if self.status == "none" else self.status


@dataclass
class CampaignProfile:
    candidate: str
    party: str
    country: str
    platforms: dict[str, PlatformActivity]
    timeline: list[list] = field(default_factory=list)

    @property
    def total_posts(self) -> int:
        return sum(a.post_count for a in self.platforms.values() if a.counted)

    def to_dict(self) -> dict:
        return {"candidate": self.candidate, "party": self.party, "country": self.country,
                "platforms": {k: v.to_dict() for k, v in sorted(self.platforms.items())},
                "timeline": self.timeline}

    @classmethod
    def from_dict(cls, d: dict) -> "CampaignProfile":
        return cls(d["candidate"], d["party"], d["country"],
                   {k: PlatformActivity.from_dict(v) for k, v in d["platforms"].items()},
                   [list(t) for t in d["timeline"]])


def _ranked(counts: Counter, n: int) -> list[list]:
    return [[k, c] for k, c in sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))[:n]]


def _influence_index(src: CampaignSource) -> Counter:
    collected = [d for d in src.documents if d.availability.status == "collected"]
    return influence_counts(collected, src.link_paths)


def _doc_key(src: CampaignSource, doc: Document) -> str | None:
    if src.id_path is None:
        return doc.id
    value = get_path(doc.body, src.id_path)
    return None if value is None else str(value)


def build_profile(src: CampaignSource | DatasetCollection, candidate: str,
                  top_n: int = DEFAULT_TOP_N, _influence: Counter | None = None) -> CampaignProfile:
    """Per-platform counts, topics and influence for one candidate."""
    if isinstance(src, DatasetCollection):
        src = CampaignSource.from_dataset(src)
    entry = src.roster_entry(candidate)
    influence = _influence if _influence is not None else _influence_index(src)
    posts: dict[str, list[Document]] = defaultdict(list)
    empty: set[str] = set()
    blocked: dict[str, set[str]] = defaultdict(set)
    for doc in src.documents:
        if src.candidate_of(doc) != candidate:
            continue
        platform = src.platform_of(doc)
        a = doc.availability
        if a.status == "collected":
            posts[platform].append(doc)
        elif a.status == "empty":
            empty.add(platform)
        else:
            blocked[platform].add(a.reason.value)
    activity = {}
    for platform in src.platform_names:
        reasons = blocked.get(platform, set())
        reason = next((r for r in REASON_PRIORITY if r in reasons), None)
        if posts.get(platform):
            docs = posts[platform]
            tags: Counter = Counter()
            for doc in docs:
                tags.update(extract_hashtags(get_path(doc.body, src.content_path)))
            total_influence = sum(influence[k] for k in (_doc_key(src, d) for d in docs)
                                  if k is not None)
            activity[platform] = PlatformActivity("collected", None, len(docs), _ranked(tags, top_n),
                                                  total_influence, partial=bool(reasons))
        elif reasons:
            activity[platform] = PlatformActivity("unavailable", reason)
        elif platform in empty:
            activity[platform] = PlatformActivity("empty", None, 0, [], 0)
        else:
            activity[platform] = PlatformActivity("none")
    timeline = activity_timeline([d for ds in posts.values() for d in ds], src.date_path)
    return CampaignProfile(candidate, entry.get("party", ""), entry.get("country", ""),
                           activity, timeline)


def build_profiles(src: CampaignSource, top_n: int = DEFAULT_TOP_N) -> list[CampaignProfile]:
    influence = _influence_index(src)
    return [build_profile(src, row["id"], top_n, influence)
            for row in sorted(src.roster, key=lambda r: r["id"])]


# --------------------------------------------------------------------------
# aggregates


@dataclass
class PartyAggregate:
    party: str
    country: str
    candidates: int
    totals: dict[str, int]
    per_capita: dict[str, float | None]
    counted_candidates: dict[str, int]
    global_average: float | None
    favourite_tool: str

    def to_dict(self) -> dict:
        return {"party": self.party, "country": self.country, "candidates": self.candidates,
                "totals": self.totals, "per_capita": self.per_capita,
                "counted_candidates": self.counted_candidates,
                "global_average": self.global_average, "favourite_tool": self.favourite_tool}

    @classmethod
    def from_dict(cls, d: dict) -> "PartyAggregate":
        return cls(**d)

    @property
    def total_posts(self) -> int:
        return sum(self.totals.values())

    @property
    def per_capita_posts(self) -> float | None:
        """Posts per candidate over all platforms, each platform on its own denominator."""
        known = [v for v in self.per_capita.values() if v is not None]
        return sum(known) if known else None


def favourite_tool(totals: dict[str, int]) -> str:
    """Platform with the largest total; ties go to the first name, no posts to ``unknown``."""
    best = [(-c, p) for p, c in totals.items() if c > 0]
    return min(best)[1] if best else UNKNOWN_TOOL


def aggregate(profiles: Sequence[CampaignProfile], label: str, country: str) -> PartyAggregate:
    platforms = sorted({p for prof in profiles for p in prof.platforms})
    totals, per_capita, counted = {}, {}, {}
    for platform in platforms:
        acts = [prof.platforms[platform] for prof in profiles if platform in prof.platforms]
        known = [a for a in acts if a.counted]
        totals[platform] = sum(a.post_count for a in known)
        counted[platform] = len(known)
        per_capita[platform] = (float(Fraction(totals[platform], len(known)))
                                if known else None)
    n = len(profiles)
    everything = sum(totals.values())
    return PartyAggregate(label, country, n, totals, per_capita, counted,
                          everything / n if n else None, favourite_tool(totals))


def party_aggregate(profiles: Sequence[CampaignProfile], party: str) -> PartyAggregate:
    members = [p for p in profiles if p.party == party]
    if not members:
        raise AnalyticsError(f"no candidate of party {party!r}")
    countries = sorted({p.country for p in members})
    return aggregate(members, party, "/".join(countries))


def country_aggregate(profiles: Sequence[CampaignProfile], country: str) -> PartyAggregate:
    members = [p for p in profiles if p.country == country]
    if not members:
        raise AnalyticsError(f"no candidate from {country!r}")
    return aggregate(members, country, country)


# --------------------------------------------------------------------------
# time and topics


def _day(doc: Document, date_path: str) -> date | None:
    raw = get_path(doc.body, date_path)
    if not isinstance(raw, str):
        return None
    ts = parse_timestamp(raw)
    return None if ts is None else ts.date()


def activity_timeline(documents: Iterable[Document], date_path: str = "date",
                      bucket_days: int = 1) -> list[list]:
    """Contiguous ``[day, posts]`` buckets from first to last post, gaps as 0."""
    days = Counter()
    for doc in documents:
        if doc.availability.status != "collected":
            continue
        d = _day(doc, date_path)
        if d is not None:
            days[d] += 1
    if not days:
        return []
    first, last = min(days), max(days)
    out = []
    step = timedelta(days=bucket_days)
    start = first
    while start <= last:
        end = start + step
        out.append([start.isoformat(), sum(c for d, c in days.items() if start <= d < end)])
        start = end
    return out


def scope_documents(src: CampaignSource, scope: str | None) -> list[Document]:
    """Documents of ``candidate:x``, ``party:x``, ``country:x`` or everything (None)."""
    if scope is None:
        return list(src.documents)
    kind, _, value = scope.partition(":")
    if kind not in ("candidate", "party", "country"):
        raise AnalyticsError(f"bad scope {scope!r}")
    key = "id" if kind == "candidate" else kind
    members = {row["id"] for row in src.roster if row.get(key) == value}
    return [d for d in src.documents if src.candidate_of(d) in members]


@dataclass
class TopicDivergence:
    top: dict[str, list[list]]
    pairs: list[dict]

    def to_dict(self) -> dict:
        return {"top": self.top, "pairs": self.pairs}

    @classmethod
    def from_dict(cls, d: dict) -> "TopicDivergence":
        return cls({k: [list(t) for t in v] for k, v in d["top"].items()}, list(d["pairs"]))


def platform_tags(src: CampaignSource) -> dict[str, Counter]:
    tags: dict[str, Counter] = {p: Counter() for p in src.platform_names}
    for doc in src.documents:
        if doc.availability.status == "collected":
            tags[src.platform_of(doc)].update(extract_hashtags(get_path(doc.body, src.content_path)))
    return tags


def cross_platform_topics(tags: dict[str, Counter], n: int = DEFAULT_TOP_N) -> TopicDivergence:
    """Top-``n`` tags per platform and, per platform pair, what each has that the other lacks."""
    top = {p: _ranked(c, n) for p, c in sorted(tags.items())}
    sets = {p: {t for t, _ in ranked} for p, ranked in top.items()}
    pairs = []
    names = sorted(top)
    for i, a in enumerate(names):
        for b in names[i + 1:]:
            pairs.append({"a": a, "b": b, "only_a": sorted(sets[a] - sets[b]),
                          "only_b": sorted(sets[b] - sets[a]), "overlap": len(sets[a] & sets[b])})
    return TopicDivergence(top, pairs)
