"""PNG figures for a comparison report, rendered headless with the Agg backend."""

from __future__ import annotations

from pathlib import Path
from typing import Iterable

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

# no version string or timestamp in the PNG, so reruns are byte-identical
PNG_METADATA = {"Software": None}
FIGSIZE = (7.0, 4.0)
DPI = 100


def _save(fig, path: Path) -> Path:
    fig.tight_layout()
    fig.savefig(path, format="png", dpi=DPI, metadata=PNG_METADATA)
    plt.close(fig)
    return path


def timeline_figure(report, path: Path) -> Path:
    fig, ax = plt.subplots(figsize=FIGSIZE)
    for scope, series in sorted(report.timelines.items()):
        if scope == "all" or not series:
            continue
        ax.plot(range(len(series)), [y for _, y in series], marker="o", label=scope.split(":", 1)[-1])
        ticks = list(range(0, len(series), max(1, len(series) // 8)))
        ax.set_xticks(ticks)
        ax.set_xticklabels([series[i][0] for i in ticks], rotation=30, ha="right", fontsize=8)
    ax.set_ylabel("posts per day")
    ax.set_title("Campaign activity")
    if ax.get_legend_handles_labels()[0]:
        ax.legend(frameon=False)
    return _save(fig, path)


def per_capita_figure(report, path: Path) -> Path:
    """Grouped bars: per-candidate average posts per platform, one group per party."""
    fig, ax = plt.subplots(figsize=FIGSIZE)
    parties = report.parties
    width = 0.8 / max(1, len(report.platforms))
    for i, platform in enumerate(report.platforms):
        xs = [j + i * width for j in range(len(parties))]
        ys = [agg.per_capita.get(platform) or 0.0 for agg in parties]
        bars = ax.bar(xs, ys, width, label=platform)
        # a platform nobody could be counted on gets a hatched stub, not a zero bar
        for bar, agg in zip(bars, parties):
            if agg.per_capita.get(platform) is None:
                bar.set_hatch("//")
                ax.annotate("NA", (bar.get_x() + bar.get_width() / 2, 0), ha="center",
                            va="bottom", fontsize=7)
    ax.set_xticks([j + width * (len(report.platforms) - 1) / 2 for j in range(len(parties))])
    ax.set_xticklabels([f"{a.party} ({a.candidates})" for a in parties])
    ax.set_ylabel("posts per candidate")
    ax.set_title("Per-capita activity by platform")
    ax.legend(frameon=False)
    return _save(fig, path)


def render_figures(report, out_dir: Path, sections: Iterable[str]) -> list[Path]:
    sections = set(sections)
    out = []
    if "timelines" in sections:
        out.append(timeline_figure(report, Path(out_dir) / "timeline.png"))
    if "parties" in sections and report.parties:
        out.append(per_capita_figure(report, Path(out_dir) / "per_capita.png"))
    return out
