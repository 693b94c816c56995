from __future__ import annotations

import csv
import io
import json
from collections import Counter

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import doc, marker
from poliview.analytics import (
    AnalyticsError,
    CampaignProfile,
    CampaignSource,
    PlatformActivity,
    activity_timeline,
    build_profile,
    build_report,
    cross_platform_topics,
    emit_report,
    favourite_tool,
    party_aggregate,
)
from poliview.analytics.report import ComparisonReport, render_files
from poliview.collection import CollectionPlan, run_collection
from poliview.scenario import TRUTH, plan as scenario_plan, simulator_script

ROSTER = [{"id": "a", "party": "P", "country": "FR"}, {"id": "b", "party": "P", "country": "FR"},
          {"id": "c", "party": "Q", "country": "GB"}]
PLATFORMS = {"tw": "twitter", "fb": "facebook"}


def post(cand, provider="tw", date="2014-05-20", content="", **extra):
    return doc({"user": cand, "date": date, "content": content, **extra}, provider=provider)


def source(docs, roster=ROSTER):
    return CampaignSource(docs, roster, PLATFORMS)


def test_privacy_block_is_unavailable_not_zero():
    src = source([post("a"), marker("privacy", provider="fb", user="a")])
    prof = build_profile(src, "a")
    fb = prof.platforms["facebook"]
    assert fb.status == "unavailable" and fb.reason == "privacy" and fb.post_count is None
    assert fb.label() == "NA(privacy)"
    assert prof.platforms["twitter"].post_count == 1


def test_zero_activity_is_empty_with_zero():
    src = source([marker(None, provider="tw", user="b"), marker(None, provider="fb", user="b")])
    prof = build_profile(src, "b")
    for act in prof.platforms.values():
        assert act.status == "empty" and act.post_count == 0 and act.label() == "empty"
    assert prof.total_posts == 0


def test_unknown_candidate():
    with pytest.raises(AnalyticsError):
        build_profile(source([]), "zz")


def test_reason_priority_and_partial():
    src = source([marker("rate_limit", provider="fb", user="a"),
                  marker("auth", provider="fb", user="a"), post("a", "tw"),
                  marker("provider_error", provider="tw", user="a")])
    prof = build_profile(src, "a")
    assert prof.platforms["facebook"].reason == "auth"
    assert prof.platforms["twitter"].status == "collected" and prof.platforms["twitter"].partial


def test_topics_and_influence():
    src = source([post("a", content="#EU #jobs", tweet_id="1"),
                  post("c", content="#eu", tweet_id="2", reply_to="1"),
                  post("c", content="#eu", tweet_id="3", retweet_of="1")])
    prof = build_profile(src, "a")
    assert prof.platforms["twitter"].influence == 2
    assert prof.platforms["twitter"].topics == [["eu", 1], ["jobs", 1]]


def profile(cand, party, counts: dict, country="FR"):
    acts = {}
    for platform, n in counts.items():
        if isinstance(n, str):
            acts[platform] = PlatformActivity("unavailable", n)
        else:
            acts[platform] = PlatformActivity("collected" if n else "empty", None, n, [], 0)
    return CampaignProfile(cand, party, country, acts)


def spread(party, n_cands, total, platform="twitter", country="FR"):
    base, extra = divmod(total, n_cands)
    return [profile(f"{party}{i}", party, {platform: base + (i < extra)}, country)
            for i in range(n_cands)]


def test_per_capita_inversion_example():
    fr = party_aggregate(spread("FR", 20, 100), "FR")
    uk = party_aggregate(spread("UK", 10, 60, country="GB"), "UK")
    assert fr.per_capita["twitter"] == 5 and uk.per_capita["twitter"] == 6
    assert fr.total_posts > uk.total_posts and fr.per_capita_posts < uk.per_capita_posts


def test_favourite_tool_examples():
    assert favourite_tool({"twitter": 100, "site": 40}) == "twitter"
    assert favourite_tool({"twitter": 50, "facebook": 50}) == "facebook"
    assert favourite_tool({"twitter": 0}) == "unknown"
    agg = party_aggregate([profile("x", "P", {"twitter": "privacy"})], "P")
    assert agg.favourite_tool == "unknown" and agg.per_capita["twitter"] is None


def test_unavailable_excluded_from_denominator():
    profs = [profile("x", "P", {"facebook": 4}), profile("y", "P", {"facebook": "privacy"}),
             profile("z", "P", {"facebook": 0})]
    agg = party_aggregate(profs, "P")
    assert agg.counted_candidates["facebook"] == 2 and agg.per_capita["facebook"] == 2.0


counts_st = st.dictionaries(st.sampled_from(["twitter", "facebook", "site"]),
                            st.integers(0, 50), min_size=1)


@given(st.lists(counts_st, min_size=1, max_size=6), st.integers(1, 9))
def test_favourite_tool_scale_invariant(rows, k):
    profs = [profile(f"c{i}", "P", r) for i, r in enumerate(rows)]
    scaled = [profile(f"c{i}", "P", {p: n * k for p, n in r.items()}) for i, r in enumerate(rows)]
    assert party_aggregate(profs, "P").favourite_tool == party_aggregate(scaled, "P").favourite_tool


@given(st.lists(counts_st, min_size=1, max_size=6), st.integers(2, 4))
def test_per_capita_invariant_under_duplication(rows, k):
    profs = [profile(f"c{i}", "P", r) for i, r in enumerate(rows)]
    copies = [profile(f"c{i}-{j}", "P", r) for j in range(k) for i, r in enumerate(rows)]
    assert party_aggregate(profs, "P").per_capita == party_aggregate(copies, "P").per_capita


def test_timeline_examples():
    assert activity_timeline([post("a", date="2014-05-20")] * 3) == [["2014-05-20", 3]]
    series = activity_timeline([post("a", date="2014-05-20"), post("a", date="2014-05-22"),
                                post("b", date="2014-05-22")])
    assert series == [["2014-05-20", 1], ["2014-05-21", 0], ["2014-05-22", 2]]
    assert activity_timeline([post("a", date="someday")]) == []


def test_topic_divergence_example():
    div = cross_platform_topics({"twitter": Counter(a=3, b=2, c=1), "site": Counter(c=2, d=1)})
    (pair,) = div.pairs
    assert (pair["a"], pair["b"]) == ("site", "twitter")
    assert pair["only_a"] == ["d"] and pair["only_b"] == ["a", "b"] and pair["overlap"] == 1
    same = cross_platform_topics({"x": Counter(a=1), "y": Counter(a=5)})
    assert same.pairs[0]["only_a"] == same.pairs[0]["only_b"] == []


tag_counts = st.dictionaries(st.sampled_from("abcdefghij"), st.integers(1, 9), max_size=8)


@given(st.dictionaries(st.sampled_from(["twitter", "facebook", "site"]), tag_counts, min_size=2),
       st.integers(1, 5))
def test_topic_divergence_matches_sets(tags, n):
    div = cross_platform_topics({p: Counter(c) for p, c in tags.items()}, n)
    for pair in div.pairs:
        ranked = {p: sorted(c.items(), key=lambda kv: (-kv[1], kv[0]))[:n] for p, c in tags.items()}
        a = {t for t, _ in ranked[pair["a"]]}
        b = {t for t, _ in ranked[pair["b"]]}
        assert set(pair["only_a"]) == a - b and set(pair["only_b"]) == b - a
        assert pair["overlap"] == len(a & b)


# --------------------------------------------------------------------------
# the bundled scenario


@pytest.fixture(scope="module")
def campaign(tmp_path_factory):
    root = tmp_path_factory.mktemp("scenario")
    (root / "simulator.json").write_text(json.dumps(simulator_script()))
    result = run_collection(CollectionPlan.from_dict(scenario_plan(), root), root / "data")
    ds = result.datasets["campaign"]
    return ds, build_report(CampaignSource.from_dataset(ds))


def test_scenario_matches_ground_truth(campaign):
    _, report = campaign
    for prof in report.candidates:
        for platform, truth in TRUTH.items():
            act = prof.platforms[platform]
            expected = truth[prof.candidate]
            if expected is None:
                assert act.status == "unavailable" and act.post_count is None
            else:
                assert act.post_count == expected
    rec = report.reconciliation
    assert rec["ok"] and rec["reported_posts"] == rec["collected_documents"] == 102


def test_scenario_timeline_sums(campaign):
    _, report = campaign
    assert sum(n for _, n in report.timelines["all"]) == report.total_posts


def test_report_json_round_trip(campaign):
    _, report = campaign
    text = render_files(report, "json")["report.json"]
    again = ComparisonReport.from_dict(json.loads(text))
    assert again == report
    assert render_files(again, "json")["report.json"] == text


def test_candidate_csv_rows(campaign, tmp_path):
    _, report = campaign
    paths = emit_report(report, "csv", tmp_path / "out")
    names = sorted(p.name for p in paths)
    assert names == ["candidates.csv", "countries.csv", "parties.csv", "topics.csv"]
    raw = (tmp_path / "out" / "candidates.csv").read_bytes()
    assert b"\r\n" in raw
    rows = list(csv.DictReader(io.StringIO(raw.decode())))
    assert len(rows) == 10
    uk02 = next(r for r in rows if r["candidate"] == "uk02")
    assert uk02["facebook_status"] == uk02["facebook_posts"] == "NA(privacy)"
    fr06 = next(r for r in rows if r["candidate"] == "fr06")
    assert all(fr06[f"{p}_posts"] == "0" for p in ("twitter", "facebook", "site"))


def test_plot_tsv_and_figures(campaign, tmp_path):
    _, report = campaign
    paths = emit_report(report, "plot-tsv", tmp_path / "plots", figures=True)
    names = {p.name for p in paths}
    assert {"timeline.png", "per_capita.png", "posts_by_candidate.tsv",
            "timeline_all.tsv"} <= names
    for p in paths:
        if p.suffix == ".tsv":
            for line in p.read_text().splitlines():
                assert len(line.split("\t")) == 2
    assert (tmp_path / "plots" / "timeline.png").read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"
    again = emit_report(report, "plot-tsv", tmp_path / "plots2", figures=True)
    for a, b in zip(sorted(paths), sorted(again)):
        assert a.read_bytes() == b.read_bytes()


def test_emit_is_all_or_nothing(campaign, tmp_path, monkeypatch):
    _, report = campaign
    import poliview.analytics.figures as figures

    def boom(*args, **kwargs):
        raise RuntimeError("render failed")

    monkeypatch.setattr(figures, "render_figures", boom)
    with pytest.raises(RuntimeError):
        emit_report(report, "plot-tsv", tmp_path / "out", figures=True)
    assert not (tmp_path / "out").exists()
    assert list(tmp_path.iterdir()) == []
