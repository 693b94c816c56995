"""Hashtag topics and tag-overlap similarity."""

from __future__ import annotations

import re
from collections import Counter
from typing import Any, Iterable

_HASHTAG = re.compile(r"#(\w+)")


def extract_hashtags(text: Any) -> set[str]:
    """Lowercased hashtags without the ``#``; non-text input has none."""
    if not isinstance(text, str):
        return set()
    return {m.lower() for m in _HASHTAG.findall(text)}


def semantic_similarity(a: Iterable[str], b: Iterable[str]) -> float:
    """Jaccard index of two tag sets; two empty sets score 0."""
    a, b = set(a), set(b)
    union = a | b
    if not union:
        return 0.0
    return len(a & b) / len(union)


def tag_frequencies(texts: Iterable[Any]) -> Counter:
    """Number of texts mentioning each tag."""
    counts: Counter = Counter()
    for text in texts:
        counts.update(extract_hashtags(text))
    return counts
