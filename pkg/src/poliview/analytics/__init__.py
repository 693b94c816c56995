"""Campaign analytics: candidate profiles, party aggregates and comparison reports."""

from .profiles import (
    AnalyticsError,
    CampaignProfile,
    CampaignSource,
    PartyAggregate,
    PlatformActivity,
    TopicDivergence,
    activity_timeline,
    build_profile,
    build_profiles,
    country_aggregate,
    cross_platform_topics,
    favourite_tool,
    party_aggregate,
)
from .report import ComparisonReport, build_report, emit_report, reconcile, render_files

__all__ = [
    "AnalyticsError", "CampaignProfile", "CampaignSource", "ComparisonReport", "PartyAggregate",
    "PlatformActivity", "TopicDivergence", "activity_timeline", "build_profile",
    "build_profiles", "build_report", "country_aggregate", "cross_platform_topics",
    "emit_report", "favourite_tool", "party_aggregate", "reconcile", "render_files",
]
