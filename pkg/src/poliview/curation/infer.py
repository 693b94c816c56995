"""Scalar type inference, dummy-value detection and imputation rules."""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from datetime import datetime
from typing import Any, Sequence

from ..docmodel import canonical_json, epoch_seconds, parse_timestamp
from .stats import median_low

TYPE_ORDER = ("boolean", "integer", "float", "timestamp", "url", "text")
NUMERIC = ("integer", "float")

DEFAULT_DUMMIES = ("", "N/A", "null", "-", "unknown", "1970-01-01T00:00:00Z")

_INT_RE = re.compile(r"^[+-]?\d+$")
_FLOAT_RE = re.compile(r"^[+-]?(?:\d+\.\d*|\.\d+|\d+(?=[eE]))(?:[eE][+-]?\d+)?$")
_URL_RE = re.compile(r"^[A-Za-z][A-Za-z0-9+.-]*://\S+$")


def infer_type(raw: Any) -> str:
    """Type tag of a scalar; strings are tried as boolean, integer, float,
    timestamp and URL in that order, text being the catch-all."""
    if isinstance(raw, bool):
        return "boolean"
    if isinstance(raw, int):
        return "integer"
    if isinstance(raw, float):
        return "float"
    if isinstance(raw, datetime):
        return "timestamp"
    if raw is None:
        return "null"
    if isinstance(raw, dict):
        return "record"
    if isinstance(raw, list):
        return "list"
    text = str(raw)
    if text.lower() in ("true", "false"):
        return "boolean"
    if _INT_RE.match(text):
        return "integer"
    if _FLOAT_RE.match(text) and math.isfinite(float(text)):
        return "float"
    if parse_timestamp(text) is not None:
        return "timestamp"
    if _URL_RE.match(text):
        return "url"
    return "text"


def as_number(raw: Any) -> int | float | None:
    """Numeric reading of a scalar whose inferred type is integer or float."""
    kind = infer_type(raw)
    if kind == "integer":
        return int(raw)
    if kind == "float":
        return float(raw)
    return None


def as_epoch(raw: Any) -> int | None:
    """Epoch seconds of a timestamp scalar."""
    if isinstance(raw, datetime):
        return epoch_seconds(raw)
    if isinstance(raw, str) and infer_type(raw) == "timestamp":
        return epoch_seconds(parse_timestamp(raw))
    return None


class DummyDictionary:
    """Sentinel values standing in for missing data.

    Text entries match exactly; a timestamp entry matches any text denoting
    the same instant.
    """

    def __init__(self, values: Sequence[str] = DEFAULT_DUMMIES):
        self.values = tuple(values)
        self._text = set(self.values)
        self._instants = {epoch_seconds(t) for t in map(parse_timestamp, self.values) if t}

    def __contains__(self, value: Any) -> bool:
        if not isinstance(value, str):
            return False
        if value in self._text:
            return True
        if self._instants:
            ts = parse_timestamp(value)
            return ts is not None and epoch_seconds(ts) in self._instants
        return False


@dataclass(frozen=True)
class Imputation:
    value: Any
    confidence: float
    method: str


def impute_mode(counts: dict[str, int], present: int) -> Imputation | None:
    """Most frequent key (ties: smallest key); confidence = its share of present values.

    Keys are canonical JSON texts, so the tie-break is a plain string order.
    """
    if present <= 0 or not counts:
        return None
    key, c = min(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return Imputation(key, c / present, "mode")


def impute_median(pairs: Sequence[tuple[float, int]], bin_width: float) -> Imputation | None:
    """Lower median; confidence = share of values within half a bin width of it."""
    total = sum(c for _, c in pairs)
    if total <= 0:
        return None
    med = median_low(pairs)
    half = bin_width / 2
    near = sum(c for x, c in pairs if abs(x - med) <= half)
    return Imputation(med, near / total, "median")


def detect_dummy_and_impute(values: Sequence[Any], dummies: DummyDictionary | None = None,
                            bins: int = 20) -> tuple[list[bool], Imputation | None]:
    """Flag dummy/null slots of one column and compute the value to put there.

    Numeric columns (every present value integer or float) use the median,
    anything else the mode.
    """
    dummies = dummies or DummyDictionary()
    flags = [v is None or v in dummies for v in values]
    present = [v for v, f in zip(values, flags) if not f]
    if not present:
        return flags, None
    numbers = [as_number(v) for v in present]
    if all(n is not None for n in numbers):
        lo, hi = min(numbers), max(numbers)
        width = (hi - lo) / bins if hi != lo else 0.0
        tally: dict = {}
        for n in numbers:
            tally[n] = tally.get(n, 0) + 1
        return flags, impute_median(list(tally.items()), width)
    tally = {}
    for v in present:
        key = canonical_json(v)
        tally[key] = tally.get(key, 0) + 1
    found = impute_mode(tally, len(present))
    return flags, Imputation(json.loads(found.value), found.confidence, found.method)
