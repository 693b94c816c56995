from __future__ import annotations

import math
import random
import unicodedata
from collections import Counter
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import doc, marker
from poliview.curation import (
    DummyDictionary,
    Relationship,
    ValidationAnnotation,
    ViewConfig,
    ViewError,
    apply_validation,
    build_view,
    check_temporal,
    compute_stats,
    detect_dummy_and_impute,
    detect_fd,
    extract_hashtags,
    extract_view,
    flatten,
    infer_type,
    influence_counts,
    influence_measure,
    merge_view,
    parse_view,
    render_view,
    semantic_similarity,
    similar_documents,
)
from poliview.curation.relations import fd_violations
from poliview.curation.view import provider_info

# --------------------------------------------------------------------------
# statistics


def test_stats_closed_form():
    s = compute_stats([1, 2, 3])
    assert (s.min, s.max, s.mean, s.count) == (1, 3, 2.0, 3)
    assert s.stddev == pytest.approx(math.sqrt(2 / 3), rel=1e-15)
    assert s.sum == 6 and s.sum_sq == 14


def test_stats_single_and_empty():
    s = compute_stats([7])
    assert s.min == s.max == 7 and s.stddev == 0.0
    assert s.histogram.counts == [1]
    assert compute_stats([]) is None


def test_equal_width_bins():
    s = compute_stats(range(1, 11), bins=5)
    assert s.histogram.counts == [2, 2, 2, 2, 2]
    assert s.histogram.total() == 10


def test_stats_reject_non_numbers():
    with pytest.raises(TypeError):
        compute_stats(["1"])
    with pytest.raises(ValueError):
        compute_stats([float("nan")])


@given(st.lists(st.floats(-1e9, 1e9, allow_nan=False) | st.integers(-10**6, 10**6),
                min_size=1, max_size=200))
def test_stats_match_exact_rationals(values):
    s = compute_stats(values)
    exact = [Fraction(v) for v in values]
    n = len(values)
    mean = sum(exact) / n
    var = sum((x - mean) ** 2 for x in exact) / n
    assert s.mean == float(mean)
    assert s.stddev == pytest.approx(math.sqrt(float(var)), rel=1e-12, abs=1e-300)
    assert (s.min, s.max) == (min(values), max(values))
    assert s.histogram.total() == n


# --------------------------------------------------------------------------
# inference, dummies, imputation


@pytest.mark.parametrize("raw,tag", [
    ("2014-05-22T10:00:00Z", "timestamp"), ("42", "integer"), ("42.0", "float"),
    ("#EP2014", "text"), ("true", "boolean"), (True, "boolean"), (3, "integer"),
    (2.5, "float"), ("http://x.example/a", "url"), ("Paris", "text"), ("1e3", "float"),
])
def test_infer_type(raw, tag):
    assert infer_type(raw) == tag


def test_dummy_dictionary_defaults():
    d = DummyDictionary()
    for v in ("", "N/A", "null", "-", "unknown", "1970-01-01T00:00:00Z", "1970-01-01T01:00:00+01:00"):
        assert v in d
    assert "Paris" not in d and 0 not in d


def test_mode_imputation_example():
    flags, imp = detect_dummy_and_impute(["N/A", "red", "red", "blue"])
    assert flags == [True, False, False, False]
    assert imp.value == "red" and imp.confidence == pytest.approx(2 / 3) and imp.method == "mode"


def test_mode_tie_is_lexicographic():
    _, imp = detect_dummy_and_impute(["b", "a", "b", "a"])
    assert imp.value == "a" and imp.confidence == 0.5


def test_median_imputation_example():
    values = [1, 2, 2, 3, 100, ""]
    flags, imp = detect_dummy_and_impute(values)
    assert flags == [False] * 5 + [True]
    assert imp.value == 2 and imp.method == "median"
    present = [1, 2, 2, 3, 100]
    half = (100 - 1) / 20 / 2
    assert imp.confidence == sum(abs(x - 2) <= half for x in present) / len(present)


def test_no_present_values_no_imputation():
    flags, imp = detect_dummy_and_impute(["", None, "N/A"])
    assert flags == [True, True, True] and imp is None


def test_empty_location_flagged_in_view():
    docs = [doc({"user": "a", "location": ""}), doc({"user": "b", "location": "Paris"}),
            doc({"user": "c", "location": "Paris"})]
    p = build_view(docs, "ds").profile("location")
    assert p.count_dummy == 1 and p.count_present == 2
    assert [iv.imputed for iv in p.inferred_values] == ["Paris"]
    assert p.inferred_values[0].document_id == docs[0].id


# --------------------------------------------------------------------------
# topics


def test_hashtags():
    assert extract_hashtags("Vote #EP2014 for #Labour!") == {"ep2014", "labour"}
    assert extract_hashtags("no tags here") == set()
    assert extract_hashtags("#Été #été") == {"été"}
    assert extract_hashtags(42) == set()


def test_hashtag_lowercasing_matches_reference_fold():
    for word in ("Été", "ÖSTERREICH", "Ñandú", "ΑΘΗΝΑ", "İstanbul"):
        tags = extract_hashtags(f"#{word}")
        assert len(tags) == 1
        (tag,) = tags
        assert tag == word.lower()
        assert unicodedata.normalize("NFC", tag.casefold()) == \
            unicodedata.normalize("NFC", word.casefold())


def test_similarity_examples():
    assert semantic_similarity({"a", "b"}, {"b", "c"}) == pytest.approx(1 / 3)
    assert semantic_similarity({"a"}, {"a"}) == 1.0
    assert semantic_similarity(set(), set()) == 0.0


@given(st.sets(st.sampled_from("abcdefg")), st.sets(st.sampled_from("abcdefg")))
def test_similarity_properties(a, b):
    s = semantic_similarity(a, b)
    assert s == semantic_similarity(b, a) and 0 <= s <= 1
    if a and a == b:
        assert s == 1
    if not a & b:
        assert s == 0


def test_similar_documents_encoding():
    docs = [doc({"content": "#a #b"}), doc({"content": "#b #c"}), doc({"content": "#a #b #x"})]
    rels = similar_documents(docs, "content", threshold=0.5)
    assert len(rels) == 1
    r = rels[0]
    assert r.kind == "similarity" and r.support == 3 and r.violations == 1
    assert r.strength == pytest.approx(2 / 3)


# --------------------------------------------------------------------------
# relationships


def rows_docs(rows):
    return [doc({"a": a, "b": b, "i": i}) for i, (a, b) in enumerate(rows)]


def test_fd_examples():
    (r,) = detect_fd(rows_docs([(1, "x"), (1, "x"), (2, "y")]), [("a", "b")])
    assert r.strength == 1 and r.support == 3
    assert detect_fd(rows_docs([(1, "x"), (1, "y"), (2, "z")]), [("a", "b")]) == []
    assert fd_violations([("1", "x"), ("1", "y"), ("2", "z")]) == (3, 1)
    docs = rows_docs([(1, "x"), (1, "y"), (2, "z")])
    rels = detect_fd(docs, [("i", "a"), ("i", "b")])
    assert [(r.to_path, r.strength) for r in rels] == [("a", 1.0), ("b", 1.0)]


def fd_oracle(table, a, b, eps):
    groups: dict = {}
    for row in table:
        if row[a] is None or row[b] is None:
            continue
        groups.setdefault(row[a], []).append(row[b])
    support = sum(len(g) for g in groups.values())
    if not support:
        return None
    violations = 0
    for g in groups.values():
        c = Counter(g)
        best = min(c, key=lambda v: (-c[v], v))
        violations += sum(1 for v in g if v != best)
    return (support, violations) if Fraction(violations, support) <= eps else None


@settings(max_examples=60)
@given(st.integers(2, 4), st.integers(1, 40), st.sampled_from(["0", "0.01", "0.1"]),
       st.randoms(use_true_random=False))
def test_fd_matches_group_oracle(ncols, nrows, eps, rnd):
    cols = [f"c{i}" for i in range(ncols)]
    table = [{c: (None if rnd.random() < 0.1 else rnd.randrange(3)) for c in cols}
             for _ in range(nrows)]
    docs = [doc({**row, "row": i}) for i, row in enumerate(table)]
    pairs = [(a, b) for a in cols for b in cols if a != b]
    got = {(r.from_path, r.to_path): (r.support, r.violations)
           for r in detect_fd(docs, pairs, epsilon=float(eps))}
    want = {}
    for a, b in pairs:
        res = fd_oracle(table, a, b, Fraction(eps))
        if res is not None:
            want[(a, b)] = res
    assert got == want


def tweet(tid, date, time, **links):
    return doc({"tweet_id": tid, "date": date, "time": time, **links})


def test_temporal_violation_example():
    docs = [tweet("o", "2014-05-20", "10:00:00"), tweet("r", "2014-05-20", "09:55:00", reply_to="o")]
    chk = check_temporal(docs, "reply_to", ["date", "time"], id_path="tweet_id")
    assert chk.relationship.violations == 1 and chk.relationship.support == 1
    assert chk.violations == [(docs[1].id, docs[0].id)]


def test_temporal_strength_and_dangling():
    docs = [tweet("o", "2014-05-20", "10:00:00")]
    for i, t in enumerate(["11:00:00", "12:00:00", "13:00:00", "09:00:00"]):
        docs.append(tweet(f"r{i}", "2014-05-20", t, reply_to="o"))
    docs.append(tweet("d", "2014-05-20", "12:00:00", reply_to="missing"))
    chk = check_temporal(docs, "reply_to", ["date", "time"], id_path="tweet_id")
    assert chk.relationship.strength == 0.75 and chk.relationship.support == 4
    assert chk.dangling == 1
    later = [d for d in docs if d.body["time"] != "09:00:00"]
    assert check_temporal(later, "reply_to", ["date", "time"], "tweet_id").relationship.strength == 1


def test_influence_examples():
    docs = [tweet("o", "2014-05-20", "10:00:00"),
            tweet("a", "2014-05-20", "11:00:00", retweet_of="o"),
            tweet("b", "2014-05-20", "11:00:00", retweet_of="o"),
            tweet("c", "2014-05-20", "11:00:00", reply_to="o")]
    links = ("reply_to", "retweet_of")
    assert influence_measure(docs[0], docs, links, "tweet_id") == 3
    assert influence_measure(docs[1], docs, links, "tweet_id") == 0


@given(st.lists(st.tuples(st.integers(0, 9), st.integers(0, 9) | st.none()), max_size=40))
def test_influence_ranking_matches_scan(edges):
    docs = [doc({"tweet_id": str(i), "k": n, **({} if ref is None else {"reply_to": str(ref)})})
            for n, (i, ref) in enumerate(edges)]
    counts = influence_counts(docs, ["reply_to", "retweet_of"])
    for d in docs:
        brute = sum(1 for other in docs if other.body.get("reply_to") == d.body["tweet_id"])
        assert counts[d.body["tweet_id"]] == brute


def test_relationship_strength_and_kinds():
    r = Relationship.measured("functional", "a", "b", 8, 2)
    assert r.strength == 0.75
    with pytest.raises(ValueError):
        Relationship("mystery", "a", "b", 1.0, 1, 0)


# --------------------------------------------------------------------------
# views

TWEETS = [
    {"user": "fr01", "date": "2014-05-20", "time": "10:00:00", "location": "Paris",
     "content": "Go #EP2014"},
    {"user": "fr02", "date": "2014-05-21", "time": "11:30:00", "location": "",
     "content": "Vote #europe #EP2014"},
    {"user": "fr01", "date": "2014-05-22", "time": "09:15:00", "location": "Lyon",
     "content": "http://img.example/p.jpg"},
]


def tweet_view(**cfg):
    return build_view([doc(b) for b in TWEETS], "tweets", ViewConfig(**cfg))


def test_five_profile_tweet_view():
    view = tweet_view()
    assert view.paths == ["content", "date", "location", "time", "user"]
    assert view.version == 1 and view.status == "draft" and view.document_count == 3
    table, _ = render_view(view)
    assert len(table.strip().splitlines()) == 1 + 5
    content = view.profile("content")
    assert set(content.type_distribution) >= {"text", "url"}
    assert content.topics[0].tag == "ep2014" and content.topics[0].frequency == 2
    assert view.profile("date").inferred_type == "timestamp"


def test_profile_counts_invariant():
    docs = [doc({"a": 1, "b": {"c": "x"}}), doc({"a": None}), doc({"b": {"c": ""}, "l": [1, 2]})]
    view = build_view(docs, "ds")
    for p in view.profiles:
        if not p.is_list_path:
            assert p.count_present + p.count_missing == view.document_count
        if p.histogram is not None and p.histogram.kind == "numeric":
            assert p.histogram.total() == p.count_present
    assert "b.c" in view.paths and "l[]" in view.paths


def test_flatten_paths():
    assert list(flatten({"a": {"b": 1}, "l": [{"x": 2}]})) == [("a.b", 1), ("l[].x", 2)]


def test_empty_view(dataset):
    view = extract_view(dataset)
    assert view.profiles == [] and view.version == 1 and view.status == "draft"
    table, text = render_view(view)
    assert len(table.splitlines()) == 1
    assert parse_view(text) == view


def test_markers_are_not_profiled():
    docs = [doc({"user": "a", "n": 1}), marker("privacy", user="b"), marker(None, user="c")]
    view = build_view(docs, "ds")
    assert view.document_count == 1 and view.profile("n").count_present == 1


def test_license_privacy_author(dataset):
    dataset.set_meta("providers", {"p": {"platform": "t", "sla": {
        "default_license": "cc-by", "default_privacy": "restricted"}}})
    from conftest import stamp
    dataset.add({"user": "a", "n": 1}, stamp("p"))
    view = extract_view(dataset, ViewConfig(author_path="user"))
    p = view.profile("n")
    assert (p.license, p.privacy, p.author_path) == ("cc-by", "restricted", "user")


AT = "2014-06-01T00:00:00Z"


def test_validation_override_and_confirm():
    view = tweet_view()
    ann = ValidationAnnotation("location", "override_type", "ana", "2014-06-01T00:00:00Z", "text")
    v2 = apply_validation(view, ann)
    assert v2.profile("location").primary_type == "text" and v2.version == 2
    assert view.version == 1          # the input view is left untouched
    with pytest.raises(ViewError):
        apply_validation(view, ValidationAnnotation("foo.bar", "confirm", "ana", AT))
    v = v2
    for path in v.paths:
        v = apply_validation(v, ValidationAnnotation(path, "confirm", "ana", AT))
    assert v.status == "validated"
    merged = merge_view(v, [])
    assert merged.status == "amended" and merged.version == v.version + 1
    assert merged.profiles == v.profiles
    assert merged.profile("location").primary_type == "text"


def test_note_survives_round_trip():
    view = apply_validation(tweet_view(), ValidationAnnotation(
        "content", "note", "ana", "2014-06-01T00:00:00Z", "hashtags drive topics"))
    again = parse_view(render_view(view)[1])
    assert again == view and again.annotations[0].value == "hashtags drive topics"


def test_merge_small_example():
    base = build_view([doc({"x": 1}), doc({"x": 2})], "ds")
    merged = merge_view(base, [doc({"x": 3})])
    full = build_view([doc({"x": 1}), doc({"x": 2}), doc({"x": 3})], "ds")
    assert [p.to_dict() for p in merged.profiles] == [p.to_dict() for p in full.profiles]
    p = merged.profile("x")
    assert (p.min, p.max, p.mean) == (1, 3, 2.0) and merged.version == 2


def test_merge_rejects_other_dataset():
    with pytest.raises(ViewError):
        merge_view(build_view([], "a"), [], dataset_id="b")


def test_extract_is_byte_deterministic(dataset):
    from conftest import stamp
    for b in TWEETS:
        dataset.add(b, stamp())
    assert render_view(extract_view(dataset))[1] == render_view(extract_view(dataset))[1]


def test_causal_never_emitted():
    view = tweet_view(similarity_path="content", similarity_threshold=0.1,
                      temporal=[{"link_path": "reply_to", "time_paths": ["date", "time"]}])
    assert all(r.kind != "causal" for r in view.relationships)
    for r in view.relationships:
        if r.support:
            assert r.strength == 1 - r.violations / r.support


scalars = st.one_of(
    st.none(), st.booleans(), st.integers(-50, 50), st.floats(-1e3, 1e3, allow_nan=False),
    st.sampled_from(["", "N/A", "red", "blue", "2014-05-20T10:00:00Z", "2014-05-21",
                     "http://a.example/", "#Tag text", "12", "3.5"]))
bodies = st.dictionaries(st.sampled_from(["a", "b", "c", "d"]),
                         scalars | st.lists(scalars, max_size=3)
                         | st.dictionaries(st.sampled_from(["x", "y"]), scalars, max_size=2),
                         max_size=4)


@settings(max_examples=100, deadline=None)
@given(st.lists(bodies, max_size=12))
def test_view_round_trip(body_list):
    view = build_view([doc(b) for b in body_list], "ds", ViewConfig(bins=4))
    table, text = render_view(view)
    assert parse_view(text) == view
    assert render_view(parse_view(text))[1] == text


@settings(max_examples=60, deadline=None)
@given(st.lists(bodies, max_size=12), st.randoms(use_true_random=False))
def test_merge_is_order_independent(body_list, rnd):
    docs = [doc(b) for b in body_list]
    cfg = ViewConfig(bins=4)
    full = build_view(docs, "ds", cfg, relationships=False)
    order = docs[:]
    rnd.shuffle(order)
    cut1 = rnd.randint(0, len(order))
    cut2 = rnd.randint(cut1, len(order))
    v = build_view(order[:cut1], "ds", cfg, relationships=False)
    v = merge_view(v, order[cut1:cut2])
    v = merge_view(v, order[cut2:])
    assert [p.to_dict() for p in v.profiles] == [p.to_dict() for p in full.profiles]
    assert v.document_count == full.document_count
