"""Document values, canonical serialization and content-addressed documents.

A document body is a JSON-like tree (``None``, ``bool``, ``int``, finite
``float``, ``str``, UTC ``datetime``, ``list`` and ``dict`` with non-empty
string keys).  Timestamps serialize as RFC3339 UTC strings at second
precision, so a body read back from storage holds them as plain strings; the
canonical bytes are unchanged by that round trip.
"""

from __future__ import annotations

import hashlib
import json
import math
import re
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from enum import Enum
from typing import Any, Union

MAX_DEPTH = 32

DocValue = Union[None, bool, int, float, str, datetime, list, dict]


class DocValueError(ValueError):
    """A value that cannot be represented as a document value."""


class ParseError(ValueError):
    """Malformed raw document text."""

    def __init__(self, message: str, position: int | None = None, line: int | None = None,
                 column: int | None = None):
        self.position = position
        self.line = line
        self.column = column
        where = f" at position {position}" if position is not None else ""
        super().__init__(f"{message}{where}")


# --------------------------------------------------------------------------
# timestamps

_TS_RE = re.compile(
    r"^(\d{4})-(\d{2})-(\d{2})"
    r"(?:[T ](\d{2}):(\d{2})(?::(\d{2})(?:\.\d+)?)?"
    r"(Z|z|[+-]\d{2}:?\d{2})?)?$"
)

EPOCH = datetime(1970, 1, 1, tzinfo=timezone.utc)


def parse_timestamp(text: str) -> datetime | None:
    """Parse an RFC3339 / ISO-8601 date or datetime into UTC, seconds only.

    Naive values are taken as UTC.  Returns ``None`` when ``text`` is not a
    timestamp.
    """
    m = _TS_RE.match(text)
    if m is None:
        return None
    year, month, day, hh, mm, ss, tz = m.groups()
    try:
        dt = datetime(int(year), int(month), int(day), int(hh or 0), int(mm or 0),
                      int(ss or 0), tzinfo=timezone.utc)
    except ValueError:
        return None
    if tz and tz not in ("Z", "z"):
        sign = 1 if tz[0] == "+" else -1
        digits = tz[1:].replace(":", "")
        offset = timedelta(hours=int(digits[:2]), minutes=int(digits[2:]))
        dt = dt - sign * offset
    return dt


def to_utc(dt: datetime) -> datetime:
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc).replace(microsecond=0)


def format_timestamp(dt: datetime) -> str:
    return to_utc(dt).strftime("%Y-%m-%dT%H:%M:%SZ")


def epoch_seconds(dt: datetime) -> int:
    return int((to_utc(dt) - EPOCH).total_seconds())


def from_epoch(seconds: float) -> datetime:
    return EPOCH + timedelta(seconds=math.floor(seconds))


# --------------------------------------------------------------------------
# values

def validate(value: Any, _depth: int = 0) -> None:
    """Raise :class:`DocValueError` unless ``value`` is a valid document value."""
    if _depth > MAX_DEPTH:
        raise DocValueError(f"nesting deeper than {MAX_DEPTH}")
    if value is None or isinstance(value, (bool, int)):
        return
    if isinstance(value, float):
        if not math.isfinite(value):
            raise DocValueError(f"non-finite float {value!r}")
        return
    if isinstance(value, str):
        try:
            value.encode("utf-8")
        except UnicodeEncodeError as exc:
            raise DocValueError("text is not valid unicode") from exc
        return
    if isinstance(value, datetime):
        return
    if isinstance(value, (list, tuple)):
        for item in value:
            validate(item, _depth + 1)
        return
    if isinstance(value, dict):
        for key, item in value.items():
            if not isinstance(key, str) or not key:
                raise DocValueError(f"record field names must be non-empty text, got {key!r}")
            validate(item, _depth + 1)
        return
    raise DocValueError(f"unsupported value type {type(value).__name__}")


def _plain(value: Any) -> Any:
    if isinstance(value, datetime):
        return format_timestamp(value)
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in value.items()}
    return value


def canonical_json(value: Any) -> str:
    """Canonical text form: sorted fields, no whitespace, shortest floats."""
    return json.dumps(_plain(value), sort_keys=True, separators=(",", ":"),
                      ensure_ascii=False, allow_nan=False)


def canonicalize(value: DocValue) -> bytes:
    validate(value)
    return canonical_json(value).encode("utf-8")


def _reject_constant(name: str) -> Any:
    raise ValueError(f"non-finite number {name}")


def _unique_pairs(pairs: list[tuple[str, Any]]) -> dict:
    out: dict = {}
    for key, value in pairs:
        if key in out:
            raise ValueError(f"duplicate field {key!r}")
        out[key] = value
    return out


def parse_value(raw: str) -> DocValue:
    """Parse JSON text into a document value, raising :class:`ParseError`."""
    try:
        value = json.loads(raw, parse_constant=_reject_constant,
                           object_pairs_hook=_unique_pairs)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.pos, exc.lineno, exc.colno) from exc
    except (ValueError, RecursionError) as exc:
        raise ParseError(str(exc)) from exc
    try:
        validate(value)
    except DocValueError as exc:
        raise ParseError(str(exc)) from exc
    return value


# --------------------------------------------------------------------------
# provenance and documents

class UnavailableReason(str, Enum):
    AUTH = "auth"
    PRIVACY = "privacy"
    RATE_LIMIT = "rate_limit"
    PROVIDER_ERROR = "provider_error"


@dataclass(frozen=True)
class Availability:
    """Collected, Empty, or Unavailable(reason)."""

    status: str
    reason: UnavailableReason | None = None

    def __post_init__(self):
        if self.status not in ("collected", "empty", "unavailable"):
            raise ValueError(f"unknown availability status {self.status!r}")
        if (self.status == "unavailable") != (self.reason is not None):
            raise ValueError("only Unavailable carries a reason, and it always does")

    @classmethod
    def collected(cls) -> "Availability":
        return cls("collected")

    @classmethod
    def empty(cls) -> "Availability":
        return cls("empty")

    @classmethod
    def unavailable(cls, reason: UnavailableReason | str) -> "Availability":
        return cls("unavailable", UnavailableReason(reason))

    @property
    def is_placeholder(self) -> bool:
        return self.status != "collected"

    def label(self) -> str:
        if self.reason is not None:
            return f"unavailable({self.reason.value})"
        return self.status

    def to_dict(self) -> dict:
        if self.reason is None:
            return {"status": self.status}
        return {"status": self.status, "reason": self.reason.value}

    @classmethod
    def from_dict(cls, data: dict) -> "Availability":
        return cls(data["status"], UnavailableReason(data["reason"]) if data.get("reason") else None)


COLLECTED = Availability.collected()
EMPTY = Availability.empty()


@dataclass(frozen=True)
class ProvenanceStamp:
    provider_id: str
    collected_at: datetime
    jurisdiction: str = ""
    availability: Availability = COLLECTED

    def __post_init__(self):
        if not self.provider_id:
            raise ValueError("provider_id must be non-empty")
        object.__setattr__(self, "collected_at", to_utc(self.collected_at))

    def to_dict(self) -> dict:
        return {
            "provider_id": self.provider_id,
            "collected_at": format_timestamp(self.collected_at),
            "jurisdiction": self.jurisdiction,
            "availability": self.availability.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ProvenanceStamp":
        collected_at = parse_timestamp(data["collected_at"])
        if collected_at is None:
            raise ValueError(f"bad collected_at {data['collected_at']!r}")
        return cls(data["provider_id"], collected_at, data.get("jurisdiction", ""),
                   Availability.from_dict(data["availability"]))


def document_id(body: DocValue, provider_id: str) -> str:
    """SHA-256 over the canonical body, a NUL separator and the provider id."""
    h = hashlib.sha256()
    h.update(canonicalize(body))
    h.update(b"\x00")
    h.update(provider_id.encode("utf-8"))
    return h.hexdigest()


@dataclass(frozen=True)
class Document:
    id: str
    body: Any
    provenance: ProvenanceStamp

    @classmethod
    def create(cls, body: DocValue, provenance: ProvenanceStamp) -> "Document":
        return cls(document_id(body, provenance.provider_id), _plain(body), provenance)

    @property
    def availability(self) -> Availability:
        return self.provenance.availability

    def to_dict(self) -> dict:
        return {"id": self.id, "body": self.body, "provenance": self.provenance.to_dict()}

    def to_line(self) -> str:
        return canonical_json(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> "Document":
        return cls(data["id"], data["body"], ProvenanceStamp.from_dict(data["provenance"]))


# --------------------------------------------------------------------------
# dotted paths over bodies

_MISSING = object()


def get_path(body: Any, path: str, default: Any = None) -> Any:
    """Look up a dotted path (no list segments) in a record body."""
    node = body
    for part in path.split("."):
        if not isinstance(node, dict) or part not in node:
            return default
        node = node[part]
    return node


def set_path(body: Any, path: str, value: Any) -> bool:
    """Replace the value at ``path`` in place; ``a[].b`` walks every list element.

    Returns True when at least one slot was replaced.
    """
    parts = path.split(".")
    return _set(body, parts, value)


def _set(node: Any, parts: list[str], value: Any) -> bool:
    head, rest = parts[0], parts[1:]
    is_list = head.endswith("[]")
    key = head[:-2] if is_list else head
    if not isinstance(node, dict) or key not in node:
        return False
    if is_list:
        items = node[key]
        if not isinstance(items, list):
            return False
        if not rest:
            if not items:
                return False
            node[key] = [value for _ in items]
            return True
        hit = False
        for item in items:
            hit = _set(item, rest, value) or hit
        return hit
    if not rest:
        node[key] = value
        return True
    return _set(node[key], rest, value)
