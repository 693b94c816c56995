"""Exact summary statistics and histograms.

Sums are kept as exact rationals: every finite float is an integer over a
power of two, so accumulating numerators per exponent is exact and cheap.
Mean and population standard deviation are rounded once, at the end, from
the exact moments, which also avoids cancellation in ``sum_sq/n - mean**2``.
"""

from __future__ import annotations

import bisect
import math
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

DEFAULT_BINS = 20
DEFAULT_TOP_K = 50

Number = int | float


@dataclass
class Moments:
    """Additive accumulator: count, exact sum, exact sum of squares, min, max."""

    n: int = 0
    sum: Fraction = Fraction(0)
    sum_sq: Fraction = Fraction(0)
    min: Number | None = None
    max: Number | None = None

    @classmethod
    def of(cls, pairs: Iterable[tuple[Number, int]]) -> "Moments":
        """Accumulate ``(value, multiplicity)`` pairs."""
        n = 0
        s1_int = 0
        s2_int = 0
        s1_by_exp: dict[int, int] = defaultdict(int)
        s2_by_exp: dict[int, int] = defaultdict(int)
        lo = hi = None
        for x, c in pairs:
            n += c
            if lo is None or x < lo:
                lo = x
            if hi is None or x > hi:
                hi = x
            if type(x) is int:
                s1_int += c * x
                s2_int += c * x * x
                continue
            num, den = x.as_integer_ratio()
            k = den.bit_length() - 1
            if k == 0:
                s1_int += c * num
                s2_int += c * num * num
            else:
                s1_by_exp[k] += c * num
                s2_by_exp[2 * k] += c * num * num
        s1 = Fraction(s1_int) + sum((Fraction(v, 1 << k) for k, v in s1_by_exp.items()), Fraction(0))
        s2 = Fraction(s2_int) + sum((Fraction(v, 1 << k) for k, v in s2_by_exp.items()), Fraction(0))
        return cls(n, s1, s2, lo, hi)

    def __add__(self, other: "Moments") -> "Moments":
        if not self.n:
            return other
        if not other.n:
            return self
        return Moments(self.n + other.n, self.sum + other.sum, self.sum_sq + other.sum_sq,
                       min(self.min, other.min), max(self.max, other.max))

    @property
    def mean(self) -> float | None:
        return float(self.sum / self.n) if self.n else None

    @property
    def variance(self) -> Fraction | None:
        if not self.n:
            return None
        # sum_sq/n - mean^2, exactly
        return (self.n * self.sum_sq - self.sum * self.sum) / (self.n * self.n)

    @property
    def stddev(self) -> float | None:
        var = self.variance
        return None if var is None else math.sqrt(float(var))

    def to_dict(self) -> dict:
        return {"n": self.n, "sum": str(self.sum), "sum_sq": str(self.sum_sq),
                "min": self.min, "max": self.max}

    @classmethod
    def from_dict(cls, data: dict) -> "Moments":
        return cls(data["n"], Fraction(data["sum"]), Fraction(data["sum_sq"]),
                   data["min"], data["max"])


@dataclass
class Histogram:
    """Numeric: equal-width bins over [min, max], last bin closed.
    Categorical: the top-K values with counts plus everything else lumped."""

    kind: str
    edges: list[float] = field(default_factory=list)
    counts: list[int] = field(default_factory=list)
    top: list[list] = field(default_factory=list)
    other_count: int = 0

    @property
    def bin_count(self) -> int:
        return len(self.counts)

    @property
    def bin_width(self) -> float:
        if self.kind != "numeric" or not self.counts:
            return 0.0
        return (self.edges[-1] - self.edges[0]) / len(self.counts)

    def total(self) -> int:
        if self.kind == "numeric":
            return sum(self.counts)
        return sum(c for _, c in self.top) + self.other_count

    def to_dict(self) -> dict:
        if self.kind == "numeric":
            return {"kind": "numeric", "edges": self.edges, "counts": self.counts}
        return {"kind": "categorical", "top": self.top, "other_count": self.other_count}

    @classmethod
    def from_dict(cls, data: dict) -> "Histogram":
        if data["kind"] == "numeric":
            return cls("numeric", list(data["edges"]), list(data["counts"]))
        return cls("categorical", top=[list(t) for t in data["top"]],
                   other_count=data["other_count"])


def numeric_histogram(pairs: Sequence[tuple[Number, int]], lo: Number, hi: Number,
                      bins: int = DEFAULT_BINS) -> Histogram:
    if lo == hi:
        return Histogram("numeric", [float(lo), float(hi)], [sum(c for _, c in pairs)])
    width = (hi - lo) / bins
    edges = [lo + i * width for i in range(bins)] + [hi]
    edges = [float(e) for e in edges]
    counts = [0] * bins
    for x, c in pairs:
        i = bisect.bisect_right(edges, x) - 1
        counts[min(max(i, 0), bins - 1)] += c
    return Histogram("numeric", edges, counts)


def categorical_histogram(counts: dict[str, int], top_k: int = DEFAULT_TOP_K) -> Histogram:
    ranked = top_values(counts, top_k)
    return Histogram("categorical", top=ranked,
                     other_count=sum(counts.values()) - sum(c for _, c in ranked))


def top_values(counts: dict[str, int], k: int = DEFAULT_TOP_K) -> list[list]:
    """``[key, count]`` pairs, most frequent first, ties by key."""
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return [[key, c] for key, c in ranked[:k]]


def median_low(pairs: Sequence[tuple[Number, int]]) -> Number:
    """Lower median of a weighted sample (always an observed value)."""
    ordered = sorted(pairs)
    total = sum(c for _, c in ordered)
    target = (total + 1) // 2
    seen = 0
    for x, c in ordered:
        seen += c
        if seen >= target:
            return x
    raise ValueError("median of an empty sample")


@dataclass
class Stats:
    count: int
    min: Number
    max: Number
    mean: float
    stddev: float
    sum: Fraction
    sum_sq: Fraction
    histogram: Histogram


def compute_stats(values: Iterable[Number], bins: int = DEFAULT_BINS) -> Stats | None:
    """min, max, mean, population stddev, histogram and exact moments.

    Returns ``None`` for an empty input: absent statistics, not zeros.
    """
    tally: dict[Number, int] = defaultdict(int)
    for v in values:
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise TypeError(f"compute_stats takes numbers, got {v!r}")
        if isinstance(v, float) and not math.isfinite(v):
            raise ValueError(f"non-finite value {v!r}")
        tally[v] += 1
    return stats_from_pairs(list(tally.items()), bins)


def stats_from_pairs(pairs: Sequence[tuple[Number, int]], bins: int = DEFAULT_BINS) -> Stats | None:
    m = Moments.of(pairs)
    if not m.n:
        return None
    return Stats(m.n, m.min, m.max, m.mean, m.stddev, m.sum, m.sum_sq,
                 numeric_histogram(pairs, m.min, m.max, bins))
