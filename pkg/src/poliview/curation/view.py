"""Views: one statistical profile per flattened attribute path, plus relationships.

A profile carries its own sufficient statistics (a table of value counts and
exact moments), so merging new documents into a view gives exactly the
profile a fresh extraction over all documents would give.  Raw documents are
never copied into a view; ``source`` records where in the dataset it stopped.
"""

from __future__ import annotations

import copy
import json
from collections import Counter, defaultdict
from dataclasses import dataclass, field, replace
from typing import Any, Iterable, Sequence

from ..docmodel import EPOCH, Document, canonical_json, format_timestamp, from_epoch, parse_timestamp
from ..policy import PrivacyLevel
from ..store import DatasetCollection
from .infer import DEFAULT_DUMMIES, NUMERIC, TYPE_ORDER, DummyDictionary, as_epoch, as_number, infer_type
from .relations import Relationship, check_temporal, detect_fd, similar_documents
from .stats import (
    DEFAULT_BINS,
    DEFAULT_TOP_K,
    Histogram,
    Moments,
    categorical_histogram,
    median_low,
    numeric_histogram,
    top_values,
)
from .topics import extract_hashtags

SCHEMA = "view-v1"
STATUSES = ("draft", "validated", "amended")
ACTIONS = ("confirm", "override_type", "note")
ROOT_PATH = "$"


class ViewError(ValueError):
    """Bad annotation, dataset mismatch or malformed view file."""


# --------------------------------------------------------------------------
# configuration


@dataclass
class ViewConfig:
    bins: int = DEFAULT_BINS
    top_k: int = DEFAULT_TOP_K
    dummies: tuple[str, ...] = DEFAULT_DUMMIES
    epsilon: float = 0.01
    fd_pairs: list[list[str]] | None = None      # None: every ordered pair of scalar paths
    temporal: list[dict] = field(default_factory=list)
    similarity_path: str | None = None
    similarity_threshold: float = 0.5
    author_path: str | None = None
    unknown_privacy: str = "restricted"

    def to_dict(self) -> dict:
        return {
            "bins": self.bins, "top_k": self.top_k, "dummies": list(self.dummies),
            "epsilon": self.epsilon, "fd_pairs": self.fd_pairs, "temporal": self.temporal,
            "similarity_path": self.similarity_path,
            "similarity_threshold": self.similarity_threshold,
            "author_path": self.author_path, "unknown_privacy": self.unknown_privacy,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ViewConfig":
        data = dict(data)
        if "dummies" in data:
            data["dummies"] = tuple(data["dummies"])
        try:
            return cls(**data)
        except TypeError as exc:
            raise ViewError(f"bad view config: {exc}") from exc


# --------------------------------------------------------------------------
# view value types


@dataclass
class InferredValue:
    document_id: str
    path: str
    imputed: Any
    confidence: float
    method: str

    def to_dict(self) -> dict:
        return {"document_id": self.document_id, "path": self.path, "imputed": self.imputed,
                "confidence": self.confidence, "method": self.method}


@dataclass
class TopicTag:
    tag: str
    frequency: int


@dataclass
class ValidationAnnotation:
    path: str
    action: str
    analyst: str
    at: str
    value: str | None = None

    def __post_init__(self):
        if self.action not in ACTIONS:
            raise ViewError(f"unknown annotation action {self.action!r}")
        if self.action == "override_type" and self.value not in TYPE_ORDER:
            raise ViewError(f"override_type needs one of {TYPE_ORDER}, got {self.value!r}")
        if self.action == "note" and not isinstance(self.value, str):
            raise ViewError("a note needs text")
        if parse_timestamp(self.at) is None:
            raise ViewError(f"bad annotation timestamp {self.at!r}")

    def to_dict(self) -> dict:
        out = {"path": self.path, "action": self.action, "analyst": self.analyst, "at": self.at}
        if self.value is not None:
            out["value"] = self.value
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "ValidationAnnotation":
        try:
            return cls(data["path"], data["action"], data.get("analyst", ""), data["at"],
                       data.get("value", data.get("type", data.get("text"))))
        except KeyError as exc:
            raise ViewError(f"annotation lacks {exc}") from exc


@dataclass
class AttributeProfile:
    path: str
    type_distribution: dict[str, int]
    inferred_type: str
    primary_type: str
    count_present: int
    count_null: int
    count_missing: int
    count_dummy: int
    min: float | int | None
    max: float | int | None
    mean: float | None
    stddev: float | None
    sum: str | None
    sum_sq: str | None
    histogram: Histogram | None
    distinct_count: int
    top_values: list[list]
    inferred_values: list[InferredValue]
    author_path: str | None
    license: str
    privacy: str
    topics: list[TopicTag]
    # merge accumulators
    slots: int
    value_counts: dict[str, int]
    numeric: Moments
    temporal: Moments
    missing_refs: list[str]
    providers: list[str]

    @property
    def is_list_path(self) -> bool:
        return "[]" in self.path

    def to_dict(self) -> dict:
        return {
            "path": self.path,
            "type_distribution": dict(sorted(self.type_distribution.items())),
            "inferred_type": self.inferred_type,
            "primary_type": self.primary_type,
            "count_present": self.count_present,
            "count_null": self.count_null,
            "count_missing": self.count_missing,
            "count_dummy": self.count_dummy,
            "min": self.min, "max": self.max, "mean": self.mean, "stddev": self.stddev,
            "sum": self.sum, "sum_sq": self.sum_sq,
            "histogram": None if self.histogram is None else self.histogram.to_dict(),
            "distinct_count": self.distinct_count,
            "top_values": self.top_values,
            "inferred_values": [iv.to_dict() for iv in self.inferred_values],
            "author_path": self.author_path,
            "license": self.license,
            "privacy": self.privacy,
            "topics": [[t.tag, t.frequency] for t in self.topics],
            "accumulators": {
                "slots": self.slots,
                "value_counts": sorted([k, c] for k, c in self.value_counts.items()),
                "numeric": self.numeric.to_dict(),
                "temporal": self.temporal.to_dict(),
                "missing_refs": self.missing_refs,
                "providers": self.providers,
            },
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AttributeProfile":
        acc = d["accumulators"]
        return cls(
            path=d["path"],
            type_distribution=dict(d["type_distribution"]),
            inferred_type=d["inferred_type"],
            primary_type=d["primary_type"],
            count_present=d["count_present"],
            count_null=d["count_null"],
            count_missing=d["count_missing"],
            count_dummy=d["count_dummy"],
            min=d["min"], max=d["max"], mean=d["mean"], stddev=d["stddev"],
            sum=d["sum"], sum_sq=d["sum_sq"],
            histogram=None if d["histogram"] is None else Histogram.from_dict(d["histogram"]),
            distinct_count=d["distinct_count"],
            top_values=[list(t) for t in d["top_values"]],
            inferred_values=[InferredValue(**iv) for iv in d["inferred_values"]],
            author_path=d["author_path"],
            license=d["license"],
            privacy=d["privacy"],
            topics=[TopicTag(t, f) for t, f in d["topics"]],
            slots=acc["slots"],
            value_counts={k: c for k, c in acc["value_counts"]},
            numeric=Moments.from_dict(acc["numeric"]),
            temporal=Moments.from_dict(acc["temporal"]),
            missing_refs=list(acc["missing_refs"]),
            providers=list(acc["providers"]),
        )


@dataclass
class View:
    dataset_id: str
    created_at: str
    version: int
    status: str
    document_count: int
    profiles: list[AttributeProfile]
    relationships: list[Relationship]
    config: ViewConfig = field(default_factory=ViewConfig)
    providers: dict[str, dict] = field(default_factory=dict)
    source: dict = field(default_factory=dict)
    annotations: list[ValidationAnnotation] = field(default_factory=list)
    confirmed: list[str] = field(default_factory=list)
    overrides: dict[str, str] = field(default_factory=dict)

    def profile(self, path: str) -> AttributeProfile:
        for p in self.profiles:
            if p.path == path:
                return p
        raise KeyError(path)

    @property
    def paths(self) -> list[str]:
        return [p.path for p in self.profiles]

    def to_dict(self) -> dict:
        return {
            "schema": SCHEMA,
            "dataset_id": self.dataset_id,
            "created_at": self.created_at,
            "version": self.version,
            "status": self.status,
            "document_count": self.document_count,
            "source": self.source,
            "config": self.config.to_dict(),
            "providers": self.providers,
            "profiles": [p.to_dict() for p in self.profiles],
            "relationships": [r.to_dict() for r in self.relationships],
            "annotations": [a.to_dict() for a in self.annotations],
            "confirmed": self.confirmed,
            "overrides": self.overrides,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "View":
        if d.get("schema") != SCHEMA:
            raise ViewError(f"not a {SCHEMA} document")
        try:
            return cls(
                dataset_id=d["dataset_id"],
                created_at=d["created_at"],
                version=d["version"],
                status=d["status"],
                document_count=d["document_count"],
                profiles=[AttributeProfile.from_dict(p) for p in d["profiles"]],
                relationships=[Relationship.from_dict(r) for r in d["relationships"]],
                config=ViewConfig.from_dict(d["config"]),
                providers=d["providers"],
                source=d["source"],
                annotations=[ValidationAnnotation.from_dict(a) for a in d["annotations"]],
                confirmed=list(d["confirmed"]),
                overrides=dict(d["overrides"]),
            )
        except KeyError as exc:
            raise ViewError(f"view document lacks {exc}") from exc


# --------------------------------------------------------------------------
# flattening and accumulation


def flatten(body: Any, prefix: str = "") -> Iterable[tuple[str, Any]]:
    """Leaf (path, value) pairs: records are walked with dotted paths and
    list elements appear under ``path[]``.  Empty records and lists yield nothing."""
    if isinstance(body, dict):
        for key in sorted(body):
            yield from flatten(body[key], f"{prefix}.{key}" if prefix else key)
    elif isinstance(body, list):
        for item in body:
            yield from flatten(item, f"{prefix or ROOT_PATH}[]")
    else:
        yield (prefix or ROOT_PATH), body


@dataclass
class _Acc:
    slots: int = 0
    values: Counter = field(default_factory=Counter)
    nulls: int = 0
    dummies: int = 0
    numeric: Moments = field(default_factory=Moments)
    temporal: Moments = field(default_factory=Moments)
    missing: list[str] = field(default_factory=list)
    providers: set[str] = field(default_factory=set)

    @classmethod
    def of_profile(cls, p: AttributeProfile) -> "_Acc":
        return cls(p.slots, Counter(p.value_counts), p.count_null, p.count_dummy,
                   p.numeric, p.temporal, list(p.missing_refs), set(p.providers))

    def __iadd__(self, other: "_Acc") -> "_Acc":
        self.slots += other.slots
        self.values.update(other.values)
        self.nulls += other.nulls
        self.dummies += other.dummies
        self.numeric = self.numeric + other.numeric
        self.temporal = self.temporal + other.temporal
        self.missing.extend(other.missing)
        self.providers |= other.providers
        return self


def _accumulate(documents: Iterable[Document], dummies: DummyDictionary
                ) -> tuple[dict[str, _Acc], int, str | None]:
    """Per-path accumulators over Collected documents, their count and latest stamp."""
    accs: dict[str, _Acc] = defaultdict(_Acc)
    numbers: dict[str, Counter] = defaultdict(Counter)
    instants: dict[str, Counter] = defaultdict(Counter)
    n = 0
    latest = None
    for doc in documents:
        if doc.availability.status != "collected":
            continue
        n += 1
        stamp = doc.provenance.collected_at
        if latest is None or stamp > latest:
            latest = stamp
        for path, value in flatten(doc.body):
            acc = accs[path]
            acc.slots += 1
            acc.providers.add(doc.provenance.provider_id)
            if value is None:
                acc.nulls += 1
                acc.missing.append(doc.id)
                continue
            if value in dummies:
                acc.dummies += 1
                acc.missing.append(doc.id)
                continue
            acc.values[canonical_json(value)] += 1
            num = as_number(value)
            if num is not None:
                numbers[path][num] += 1
                continue
            ts = as_epoch(value)
            if ts is not None:
                instants[path][ts] += 1
    for path, acc in accs.items():
        acc.numeric = Moments.of(numbers[path].items())
        acc.temporal = Moments.of(instants[path].items())
    return dict(accs), n, None if latest is None else format_timestamp(latest)


def _primary(types: dict[str, int]) -> str:
    if not types:
        return "null"
    return min(types.items(), key=lambda kv: (-kv[1], TYPE_ORDER.index(kv[0])
                                              if kv[0] in TYPE_ORDER else len(TYPE_ORDER), kv[0]))[0]


def _finish(path: str, acc: _Acc, n_docs: int, view_providers: dict[str, dict],
            config: ViewConfig, override: str | None) -> AttributeProfile:
    decoded = {k: json.loads(k) for k in acc.values}
    types: Counter = Counter()
    for key, count in acc.values.items():
        types[infer_type(decoded[key])] += count
    present = sum(acc.values.values())
    slots = acc.slots if "[]" in path else n_docs
    inferred = _primary(types)

    family = None
    if inferred in NUMERIC and acc.numeric.n:
        family = acc.numeric
    elif inferred == "timestamp" and acc.temporal.n:
        family = acc.temporal

    ranked = top_values(acc.values, config.top_k)
    tops = [[decoded[k], c] for k, c in ranked]
    if family is not None:
        pairs = _family_pairs(decoded, acc.values, inferred)
        histogram = numeric_histogram(pairs, family.min, family.max, config.bins)
        stats = dict(min=family.min, max=family.max, mean=family.mean, stddev=family.stddev,
                     sum=str(family.sum), sum_sq=str(family.sum_sq))
    elif present:
        histogram = categorical_histogram(acc.values, config.top_k)
        histogram.top = [[decoded[k], c] for k, c in histogram.top]
        stats = dict(min=None, max=None, mean=None, stddev=None, sum=None, sum_sq=None)
        pairs = []
    else:
        histogram = None
        stats = dict(min=None, max=None, mean=None, stddev=None, sum=None, sum_sq=None)
        pairs = []

    imputed = _impute(inferred, family, pairs, histogram, acc.values, decoded, present)
    missing = sorted(acc.missing)
    inferred_values = [] if imputed is None else [
        InferredValue(doc_id, path, imputed[0], imputed[1], imputed[2]) for doc_id in missing]

    tags: Counter = Counter()
    for key, count in acc.values.items():
        for tag in extract_hashtags(decoded[key]):
            tags[tag] += count
    topics = [TopicTag(t, f) for t, f in top_values(tags, config.top_k)]

    providers = sorted(acc.providers)
    licenses = sorted({view_providers.get(p, {}).get("license", "") for p in providers} - {""})
    privacy = max((PrivacyLevel(view_providers.get(p, {}).get("privacy", config.unknown_privacy))
                   for p in providers), default=PrivacyLevel(config.unknown_privacy))

    return AttributeProfile(
        path=path,
        type_distribution=dict(sorted(types.items())),
        inferred_type=inferred,
        primary_type=override or inferred,
        count_present=present,
        count_null=acc.nulls,
        count_missing=slots - present,
        count_dummy=acc.dummies,
        histogram=histogram,
        distinct_count=len(acc.values),
        top_values=tops,
        inferred_values=inferred_values,
        author_path=config.author_path if config.author_path and config.author_path != path else None,
        license="; ".join(licenses),
        privacy=privacy.value,
        topics=topics,
        slots=acc.slots,
        value_counts=dict(sorted(acc.values.items())),
        numeric=acc.numeric,
        temporal=acc.temporal,
        missing_refs=missing,
        providers=providers,
        **stats,
    )


def _family_pairs(decoded: dict, values: Counter, inferred: str) -> list[tuple[Any, int]]:
    read = as_epoch if inferred == "timestamp" else as_number
    tally: Counter = Counter()
    for key, count in values.items():
        x = read(decoded[key])
        if x is not None and (inferred == "timestamp" or infer_type(decoded[key]) in NUMERIC):
            tally[x] += count
    return sorted(tally.items())


def _impute(inferred: str, family: Moments | None, pairs, histogram: Histogram | None,
            values: Counter, decoded: dict, present: int) -> tuple[Any, float, str] | None:
    """Median for numeric attributes, mode for everything else; None without data."""
    if not present:
        return None
    if family is not None and inferred in NUMERIC:
        med = median_low(pairs)
        half = histogram.bin_width / 2
        near = sum(c for x, c in pairs if abs(x - med) <= half)
        return med, near / present, "median"
    key, count = min(values.items(), key=lambda kv: (-kv[1], kv[0]))
    return decoded[key], count / present, "mode"


def _profiles(accs: dict[str, _Acc], n_docs: int, providers: dict[str, dict],
              config: ViewConfig, overrides: dict[str, str]) -> list[AttributeProfile]:
    return [_finish(path, accs[path], n_docs, providers, config, overrides.get(path))
            for path in sorted(accs)]


# --------------------------------------------------------------------------
# relationships


def detect_relationships(documents: Sequence[Document], profiles: Sequence[AttributeProfile],
                         config: ViewConfig) -> list[Relationship]:
    docs = [d for d in documents if d.availability.status == "collected"]
    dummies = DummyDictionary(config.dummies)
    if config.fd_pairs is None:
        scalar = [p.path for p in profiles if not p.is_list_path and p.count_present
                  and p.path != ROOT_PATH]
        pairs = [(a, b) for a in scalar for b in scalar if a != b]
    else:
        pairs = [tuple(p) for p in config.fd_pairs]
    out = detect_fd(docs, pairs, config.epsilon, dummies)
    for spec in config.temporal:
        check = check_temporal(docs, spec["link_path"], spec["time_paths"], spec.get("id_path"))
        if check.relationship.support:
            out.append(check.relationship)
    if config.similarity_path:
        out.extend(similar_documents(docs, config.similarity_path, config.similarity_threshold))
    return sorted(out, key=Relationship.sort_key)


# --------------------------------------------------------------------------
# public operations


def provider_info(ds: DatasetCollection | None) -> dict[str, dict]:
    if ds is None:
        return {}
    info = {}
    for pid, p in sorted(ds.meta.get("providers", {}).items()):
        sla = p.get("sla", {})
        info[pid] = {"license": sla.get("default_license", ""),
                     "privacy": sla.get("default_privacy", "public"),
                     "platform": p.get("platform", pid)}
    return info


def build_view(documents: Iterable[Document], dataset_id: str,
               config: ViewConfig | None = None, providers: dict[str, dict] | None = None,
               relationships: bool = True) -> View:
    """Version-1 Draft view of an in-memory document sequence."""
    config = config or ViewConfig()
    docs = list(documents)
    accs, n, latest = _accumulate(docs, DummyDictionary(config.dummies))
    providers = providers or {}
    profiles = _profiles(accs, n, providers, config, {})
    rels = detect_relationships(docs, profiles, config) if relationships else []
    return View(dataset_id, latest or format_timestamp(EPOCH), 1, "draft", n, profiles, rels,
                config, providers, {"dataset": dataset_id, "position": len(docs)})


def extract_view(ds: DatasetCollection, config: ViewConfig | None = None) -> View:
    """Draft view over every Collected document of ``ds``; a pure function of its files."""
    return build_view(ds.iterate(), ds.name, config, provider_info(ds))


def merge_view(view: View, documents: Iterable[Document] | None = None, *,
               dataset_id: str | None = None, dataset: DatasetCollection | None = None) -> View:
    """New version of ``view`` with ``documents`` folded in.

    With a dataset and no explicit documents, the documents appended since the
    view's source position are taken, and relationships are re-detected over
    the whole dataset (they have no exact incremental form).
    """
    if dataset_id is not None and dataset_id != view.dataset_id:
        raise ViewError(f"view describes {view.dataset_id!r}, not {dataset_id!r}")
    if dataset is not None and dataset.name != view.dataset_id:
        raise ViewError(f"view describes {view.dataset_id!r}, not {dataset.name!r}")
    if documents is None:
        if dataset is None:
            documents = []
        else:
            documents = dataset.iterate(start=view.source.get("position", 0))
    docs = list(documents)
    accs, n, latest = _accumulate(docs, DummyDictionary(view.config.dummies))
    merged = {p.path: _Acc.of_profile(p) for p in view.profiles}
    for path, acc in accs.items():
        if path in merged:
            merged[path] += acc
        else:
            merged[path] = acc
    total = view.document_count + n
    profiles = _profiles(merged, total, view.providers, view.config, view.overrides)
    if dataset is not None:
        relationships = detect_relationships(list(dataset.iterate()), profiles, view.config)
        position = len(dataset)
    else:
        relationships = copy.deepcopy(view.relationships)
        position = view.source.get("position", 0) + len(docs)
    created = max(view.created_at, latest) if latest else view.created_at
    return replace(
        view,
        created_at=created,
        version=view.version + 1,
        status="amended" if view.status == "validated" else view.status,
        document_count=total,
        profiles=profiles,
        relationships=relationships,
        source={"dataset": view.dataset_id, "position": position},
        annotations=list(view.annotations),
        confirmed=[],
        overrides=dict(view.overrides),
    )


def apply_validation(view: View, ann: ValidationAnnotation) -> View:
    """Record an analyst annotation; the view becomes Validated once every path is confirmed."""
    if ann.path not in view.paths:
        raise ViewError(f"no attribute {ann.path!r} in view of {view.dataset_id}")
    confirmed = list(view.confirmed)
    overrides = dict(view.overrides)
    profiles = view.profiles
    if ann.action == "confirm" and ann.path not in confirmed:
        confirmed = sorted(confirmed + [ann.path])
    elif ann.action == "override_type":
        overrides[ann.path] = ann.value
        profiles = [replace(p, primary_type=ann.value) if p.path == ann.path else p
                    for p in view.profiles]
    status = view.status
    if ann.action == "confirm" and set(confirmed) >= set(view.paths):
        status = "validated"
    return replace(view, version=view.version + 1, status=status, profiles=profiles,
                   annotations=list(view.annotations) + [ann], confirmed=confirmed,
                   overrides=overrides)


def load_annotations(text: str) -> list[ValidationAnnotation]:
    data = json.loads(text)
    if not isinstance(data, list):
        raise ViewError("annotation file must hold a JSON list")
    return [ValidationAnnotation.from_dict(a) for a in data]


# --------------------------------------------------------------------------
# rendering


def _fmt(x: Any, ts: bool = False) -> str:
    if x is None:
        return "-"
    if ts:
        return format_timestamp(from_epoch(x))
    if isinstance(x, float):
        return f"{x:.6g}"
    return str(x)


HEADER = ("path", "type", "present", "missing", "null", "dummy", "min", "max", "stddev", "top topic")


def render_table(view: View) -> str:
    rows = [HEADER]
    for p in view.profiles:
        ts = p.inferred_type == "timestamp"
        rows.append((p.path, p.primary_type, str(p.count_present), str(p.count_missing),
                     str(p.count_null), str(p.count_dummy), _fmt(p.min, ts), _fmt(p.max, ts),
                     _fmt(p.stddev), p.topics[0].tag if p.topics else "-"))
    widths = [max(len(r[i]) for r in rows) for i in range(len(HEADER))]
    lines = ["  ".join(cell.ljust(w) for cell, w in zip(r, widths)).rstrip() for r in rows]
    return "\n".join(lines) + "\n"


def render_view(view: View) -> tuple[str, str]:
    """Plain-text summary table and the canonical view document."""
    return render_table(view), canonical_json(view.to_dict()) + "\n"


def parse_view(text: str) -> View:
    try:
        data = json.loads(text)
    except ValueError as exc:
        raise ViewError(f"view file is not JSON: {exc}") from exc
    return View.from_dict(data)
