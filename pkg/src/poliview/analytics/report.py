"""Comparison reports and their file renderings (CSV, canonical JSON, plot TSV)."""

from __future__ import annotations

import csv
import io
import os
import shutil
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from ..docmodel import canonical_json
from .profiles import (
    DEFAULT_TOP_N,
    CampaignProfile,
    CampaignSource,
    PartyAggregate,
    TopicDivergence,
    activity_timeline,
    build_profiles,
    country_aggregate,
    cross_platform_topics,
    party_aggregate,
    platform_tags,
    scope_documents,
)

FORMATS = ("csv", "json", "plot-tsv")
SECTIONS = ("candidates", "parties", "countries", "topics", "timelines")


@dataclass
class ComparisonReport:
    platforms: list[str]
    candidates: list[CampaignProfile]
    parties: list[PartyAggregate]
    countries: list[PartyAggregate]
    topics: TopicDivergence
    timelines: dict[str, list[list]]
    reconciliation: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "platforms": self.platforms,
            "candidates": [c.to_dict() for c in self.candidates],
            "parties": [p.to_dict() for p in self.parties],
            "countries": [c.to_dict() for c in self.countries],
            "topics": self.topics.to_dict(),
            "timelines": self.timelines,
            "reconciliation": self.reconciliation,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ComparisonReport":
        return cls(list(d["platforms"]),
                   [CampaignProfile.from_dict(c) for c in d["candidates"]],
                   [PartyAggregate.from_dict(p) for p in d["parties"]],
                   [PartyAggregate.from_dict(c) for c in d["countries"]],
                   TopicDivergence.from_dict(d["topics"]),
                   {k: [list(t) for t in v] for k, v in d["timelines"].items()},
                   d["reconciliation"])

    @property
    def total_posts(self) -> int:
        return sum(c.total_posts for c in self.candidates)


def reconcile(profiles: Iterable[CampaignProfile], src: CampaignSource) -> dict:
    """Check that report post counts account for every Collected document."""
    roster = {row["id"] for row in src.roster}
    collected = [d for d in src.documents if d.availability.status == "collected"]
    unattributed = sum(1 for d in collected if src.candidate_of(d) not in roster)
    reported = sum(p.total_posts for p in profiles)
    return {"collected_documents": len(collected), "reported_posts": reported,
            "unattributed": unattributed, "ok": reported + unattributed == len(collected)}


def build_report(src: CampaignSource, top_n: int = DEFAULT_TOP_N) -> ComparisonReport:
    profiles = build_profiles(src, top_n)
    parties = [party_aggregate(profiles, p) for p in sorted({c.party for c in profiles})]
    countries = [country_aggregate(profiles, c) for c in sorted({c.country for c in profiles})]
    timelines = {"all": activity_timeline(scope_documents(src, None), src.date_path)}
    for agg in parties:
        timelines[f"party:{agg.party}"] = activity_timeline(
            scope_documents(src, f"party:{agg.party}"), src.date_path)
    return ComparisonReport(src.platform_names, profiles, parties, countries,
                            cross_platform_topics(platform_tags(src), top_n), timelines,
                            reconcile(profiles, src))


# --------------------------------------------------------------------------
# rendering


def _num(x) -> str:
    if x is None:
        return ""
    return repr(x) if isinstance(x, float) else str(x)


def _csv(rows: list[list]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerows(rows)
    return buf.getvalue()


def candidates_csv(report: ComparisonReport) -> str:
    header = ["candidate", "party", "country"]
    for p in report.platforms:
        header += [f"{p}_status", f"{p}_posts", f"{p}_influence"]
    header.append("total_posts")
    rows = [header]
    for prof in report.candidates:
        row = [prof.candidate, prof.party, prof.country]
        for p in report.platforms:
            act = prof.platforms.get(p)
            if act is None or act.status == "none":
                row += ["", "", ""]
            elif act.status == "unavailable":
                row += [act.label(), act.label(), act.label()]
            else:
                row += [act.label(), str(act.post_count), str(act.influence)]
        row.append(str(prof.total_posts))
        rows.append(row)
    return _csv(rows)


def aggregates_csv(report: ComparisonReport, rows_in: list[PartyAggregate], key: str) -> str:
    header = [key, "country", "candidates"]
    for p in report.platforms:
        header += [f"{p}_total", f"{p}_per_capita"]
    header += ["total_posts", "global_average", "favourite_tool"]
    rows = [header]
    for agg in rows_in:
        row = [agg.party, agg.country, str(agg.candidates)]
        for p in report.platforms:
            counted = agg.counted_candidates.get(p, 0)
            # nobody countable on this platform: the total is unknown, not zero
            row += [str(agg.totals.get(p, 0)) if counted else "NA", _num(agg.per_capita.get(p))]
        row += [str(agg.total_posts), _num(agg.global_average), agg.favourite_tool]
        rows.append(row)
    return _csv(rows)


def topics_csv(report: ComparisonReport) -> str:
    rows = [["platform", "rank", "tag", "frequency"]]
    for platform, ranked in report.topics.top.items():
        for i, (tag, freq) in enumerate(ranked, 1):
            rows.append([platform, str(i), tag, str(freq)])
    rows.append([])
    rows.append(["platform_a", "platform_b", "only_a", "only_b", "overlap"])
    for pair in report.topics.pairs:
        rows.append([pair["a"], pair["b"], " ".join(pair["only_a"]), " ".join(pair["only_b"]),
                     str(pair["overlap"])])
    return _csv(rows)


def _slug(text: str) -> str:
    return "".join(ch if ch.isalnum() or ch in "-_" else "_" for ch in text)


def tsv(series: Iterable[Iterable]) -> str:
    return "".join(f"{x}\t{_num(y)}\n" for x, y in series)


def render_files(report: ComparisonReport, fmt: str,
                 sections: Iterable[str] = SECTIONS) -> dict[str, str]:
    """File name -> text for one output format."""
    if fmt not in FORMATS:
        raise ValueError(f"format must be one of {FORMATS}")
    sections = [s for s in SECTIONS if s in set(sections)]
    files: dict[str, str] = {}
    if fmt == "json":
        data = report.to_dict()
        keep = {"candidates": "candidates", "parties": "parties", "countries": "countries",
                "topics": "topics", "timelines": "timelines"}
        out = {"platforms": data["platforms"], "reconciliation": data["reconciliation"]}
        out.update({keep[s]: data[keep[s]] for s in sections})
        files["report.json"] = canonical_json(out) + "\n"
    elif fmt == "csv":
        if "candidates" in sections:
            files["candidates.csv"] = candidates_csv(report)
        if "parties" in sections:
            files["parties.csv"] = aggregates_csv(report, report.parties, "party")
        if "countries" in sections:
            files["countries.csv"] = aggregates_csv(report, report.countries, "country")
        if "topics" in sections:
            files["topics.csv"] = topics_csv(report)
    else:
        if "timelines" in sections:
            for scope, series in report.timelines.items():
                files[f"timeline_{_slug(scope)}.tsv"] = tsv(series)
        if "parties" in sections:
            for p in report.platforms:
                files[f"per_capita_{_slug(p)}.tsv"] = tsv(
                    (agg.party, agg.per_capita.get(p)) for agg in report.parties)
        if "candidates" in sections:
            files["posts_by_candidate.tsv"] = tsv(
                (c.candidate, c.total_posts) for c in report.candidates)
    return files


def emit_report(report: ComparisonReport, fmt: str, out_dir: Path | str,
                sections: Iterable[str] = SECTIONS, figures: bool = False) -> list[Path]:
    """Write the report files all-or-nothing; returns the written paths.

    Everything is staged in a scratch directory next to ``out_dir`` and only
    moved into place once every file (and figure) rendered.
    """
    out_dir = Path(out_dir)
    sections = list(sections)
    texts = render_files(report, fmt, sections)
    out_dir.parent.mkdir(parents=True, exist_ok=True)
    staging = Path(tempfile.mkdtemp(prefix=".report-", dir=out_dir.parent))
    try:
        for name, text in texts.items():
            with open(staging / name, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        if figures and fmt == "plot-tsv":
            from .figures import render_figures
            render_figures(report, staging, sections)
        out_dir.mkdir(parents=True, exist_ok=True)
        written = []
        for path in sorted(staging.iterdir()):
            os.replace(path, out_dir / path.name)
            written.append(out_dir / path.name)
        return written
    finally:
        shutil.rmtree(staging, ignore_errors=True)
