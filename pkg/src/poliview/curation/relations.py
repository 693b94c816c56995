"""Inter-attribute relationships: functional and temporal dependencies,
hashtag similarity between documents, and reference-count influence.

Strength is always ``1 - violations / support``.  The causal kind is kept
in the vocabulary but nothing here produces it.
"""

from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Any, Iterable, Sequence

from ..docmodel import Document, canonical_json, epoch_seconds, get_path, parse_timestamp
from .infer import DummyDictionary
from .topics import extract_hashtags, semantic_similarity

KINDS = ("functional", "temporal", "similarity", "causal")


@dataclass
class Relationship:
    kind: str
    from_path: str
    to_path: str
    strength: float
    support: int
    violations: int
    documents: list[str] | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown relationship kind {self.kind!r}")

    @classmethod
    def measured(cls, kind: str, from_path: str, to_path: str, support: int, violations: int,
                 documents: list[str] | None = None) -> "Relationship":
        strength = 1.0 - violations / support if support else 0.0
        return cls(kind, from_path, to_path, strength, support, violations, documents)

    def sort_key(self) -> tuple:
        return (self.kind, self.from_path, self.to_path, self.documents or [])

    def to_dict(self) -> dict:
        out = {"kind": self.kind, "from_path": self.from_path, "to_path": self.to_path,
               "strength": self.strength, "support": self.support, "violations": self.violations}
        if self.documents is not None:
            out["documents"] = self.documents
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "Relationship":
        return cls(data["kind"], data["from_path"], data["to_path"], data["strength"],
                   data["support"], data["violations"], data.get("documents"))


def _cell(body: Any, path: str, dummies: DummyDictionary | None) -> str | None:
    value = get_path(body, path)
    if value is None or (dummies is not None and value in dummies):
        return None
    return canonical_json(value)


def fd_violations(rows: Iterable[tuple[str | None, str | None]]) -> tuple[int, int]:
    """(support, violations) of A -> B over (a, b) rows; rows missing either side are skipped."""
    groups: dict[str, Counter] = defaultdict(Counter)
    for a, b in rows:
        if a is None or b is None:
            continue
        groups[a][b] += 1
    support = violations = 0
    for counts in groups.values():
        size = sum(counts.values())
        support += size
        # the majority value (ties broken lexicographically) keeps the most rows;
        # which of several tied values is chosen does not change the count
        violations += size - max(counts.values())
    return support, violations


def majority_value(counts: Counter) -> str:
    return min(counts.items(), key=lambda kv: (-kv[1], kv[0]))[0]


def fd_holds(support: int, violations: int, epsilon: float | str | Fraction) -> bool:
    """Strength >= 1 - epsilon, compared exactly (epsilon read as a decimal)."""
    if not support:
        return False
    return Fraction(violations, support) <= Fraction(str(epsilon))


def detect_fd(documents: Sequence[Document], pairs: Iterable[tuple[str, str]],
              epsilon: float = 0.01, dummies: DummyDictionary | None = None) -> list[Relationship]:
    """Functional dependencies A -> B that hold up to a violation share ``epsilon``."""
    bodies = [d.body for d in documents]
    columns: dict[str, list[str | None]] = {}

    def column(path: str) -> list[str | None]:
        if path not in columns:
            columns[path] = [_cell(b, path, dummies) for b in bodies]
        return columns[path]

    out = []
    for a_path, b_path in pairs:
        if a_path == b_path:
            continue
        support, violations = fd_violations(zip(column(a_path), column(b_path)))
        if fd_holds(support, violations, epsilon):
            out.append(Relationship.measured("functional", a_path, b_path, support, violations))
    return out


# --------------------------------------------------------------------------
# time and references

def timestamp_of(body: Any, time_paths: Sequence[str]) -> int | None:
    """Epoch seconds from one timestamp path, or a (date, time) pair of paths."""
    parts = [get_path(body, p) for p in time_paths]
    if any(not isinstance(p, str) or not p for p in parts):
        return None
    text = parts[0] if len(parts) == 1 else f"{parts[0]}T{parts[1]}"
    ts = parse_timestamp(text)
    return None if ts is None else epoch_seconds(ts)


def _key(doc: Document, id_path: str | None) -> str | None:
    if id_path is None:
        return doc.id
    value = get_path(doc.body, id_path)
    return None if value is None else str(value)


def _refs(body: Any, link_path: str) -> list[str]:
    value = get_path(body, link_path)
    if value is None:
        return []
    if isinstance(value, list):
        return [str(v) for v in value if v is not None]
    return [str(value)]


@dataclass
class TemporalCheck:
    relationship: Relationship
    violations: list[tuple[str, str]] = field(default_factory=list)
    dangling: int = 0
    untimed: int = 0


def check_temporal(documents: Sequence[Document], link_path: str, time_paths: Sequence[str],
                   id_path: str | None = None) -> TemporalCheck:
    """A referenced document must be strictly older than the one referencing it.

    Links to unknown documents are counted as dangling and links where either
    side lacks a timestamp as untimed; neither enters the support.
    """
    index: dict[str, tuple[str, int | None]] = {}
    for doc in documents:
        key = _key(doc, id_path)
        if key is not None and key not in index:
            index[key] = (doc.id, timestamp_of(doc.body, time_paths))
    support = 0
    bad: list[tuple[str, str]] = []
    dangling = untimed = 0
    for doc in documents:
        for ref in _refs(doc.body, link_path):
            if ref not in index:
                dangling += 1
                continue
            ref_id, ref_ts = index[ref]
            ts = timestamp_of(doc.body, time_paths)
            if ts is None or ref_ts is None:
                untimed += 1
                continue
            support += 1
            if ref_ts >= ts:
                bad.append((doc.id, ref_id))
    rel = Relationship.measured("temporal", link_path, "+".join(time_paths), support, len(bad))
    return TemporalCheck(rel, bad, dangling, untimed)


def influence_counts(documents: Iterable[Document], link_paths: Sequence[str],
                     id_path: str | None = None) -> Counter:
    """Reference count per referenced key (replies plus shares)."""
    counts: Counter = Counter()
    for doc in documents:
        for path in link_paths:
            counts.update(_refs(doc.body, path))
    return counts


def influence_measure(doc: Document, documents: Iterable[Document], link_paths: Sequence[str],
                      id_path: str | None = None) -> int:
    key = _key(doc, id_path)
    if key is None:
        return 0
    return influence_counts(documents, link_paths, id_path)[key]


def similar_documents(documents: Sequence[Document], path: str,
                      threshold: float = 0.5) -> list[Relationship]:
    """Document pairs whose hashtag sets at ``path`` overlap with Jaccard >= threshold.

    Encoded so that support = |union| and violations = |union| - |intersection|.
    """
    tags = {d.id: extract_hashtags(get_path(d.body, path)) for d in documents}
    by_tag: dict[str, list[str]] = defaultdict(list)
    for doc_id in sorted(tags):
        for tag in tags[doc_id]:
            by_tag[tag].append(doc_id)
    pairs = set()
    for ids in by_tag.values():
        pairs.update(combinations(ids, 2))
    out = []
    for a, b in sorted(pairs):
        if semantic_similarity(tags[a], tags[b]) >= threshold:
            union = len(tags[a] | tags[b])
            inter = len(tags[a] & tags[b])
            out.append(Relationship.measured("similarity", path, path, union, union - inter, [a, b]))
    return out
