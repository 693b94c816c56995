"""View curation: attribute profiles, missing values, topics and dependencies."""

from .infer import DEFAULT_DUMMIES, DummyDictionary, Imputation, detect_dummy_and_impute, infer_type
from .relations import (
    Relationship,
    TemporalCheck,
    check_temporal,
    detect_fd,
    influence_counts,
    influence_measure,
    similar_documents,
)
from .stats import Histogram, Moments, Stats, compute_stats
from .topics import extract_hashtags, semantic_similarity, tag_frequencies
from .view import (
    AttributeProfile,
    InferredValue,
    TopicTag,
    ValidationAnnotation,
    View,
    ViewConfig,
    ViewError,
    apply_validation,
    build_view,
    extract_view,
    flatten,
    load_annotations,
    merge_view,
    parse_view,
    render_view,
)

__all__ = [
    "AttributeProfile", "DEFAULT_DUMMIES", "DummyDictionary", "Histogram", "Imputation",
    "InferredValue", "Moments", "Relationship", "Stats", "TemporalCheck", "TopicTag",
    "ValidationAnnotation", "View", "ViewConfig", "ViewError", "apply_validation",
    "build_view", "check_temporal", "compute_stats", "detect_dummy_and_impute", "detect_fd",
    "extract_hashtags", "extract_view", "flatten", "influence_counts", "influence_measure",
    "infer_type", "load_annotations", "merge_view", "parse_view", "render_view",
    "semantic_similarity", "similar_documents", "tag_frequencies",
]
