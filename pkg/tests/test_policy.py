from __future__ import annotations

import json
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from poliview.policy import (
    PURPOSES,
    REDACTED,
    PolicyDenied,
    PolicyEngine,
    PolicyError,
    PolicyRule,
    PrivacyLevel,
    default_ruleset,
    dump_ruleset,
    evaluate,
    gate,
    load_ruleset,
    redact,
)

from conftest import doc

PUBLIC, RESTRICTED, PRIVATE = PrivacyLevel.PUBLIC, PrivacyLevel.RESTRICTED, PrivacyLevel.PRIVATE


def test_privacy_total_order():
    assert PUBLIC < RESTRICTED < PRIVATE
    assert max([PRIVATE, PUBLIC, RESTRICTED]) is PRIVATE
    # the str mixin must not leak alphabetical order (private < public)
    assert not PRIVATE < PUBLIC


def test_default_ruleset_examples():
    assert evaluate(doc({"privacy": "private"}), "export").outcome == "deny"
    assert evaluate(doc({"privacy": "public"}), "analyze").outcome == "allow"
    assert evaluate(doc({"privacy": "private"}), "archive").outcome == "allow"


def test_redact_rule_wins_on_specificity():
    rules = default_ruleset() + [
        PolicyRule("attribute:body.user", "export", "redact", RESTRICTED, ("body.user",))]
    d = evaluate(doc({"user": "x", "privacy": "restricted"}), "export", rules)
    assert d.outcome == "redact" and d.redact_paths == ("body.user",)


def test_specificity_order():
    rules = [PolicyRule("*", "export", "deny"),
             PolicyRule("jurisdiction:FR", "export", "deny"),
             PolicyRule("provider:p", "export", "allow")]
    assert evaluate(doc({"a": 1}), "export", rules).outcome == "allow"
    rules.append(PolicyRule("attribute:body.a", "export", "deny"))
    assert evaluate(doc({"a": 1}), "export", rules).outcome == "deny"
    assert evaluate(doc({"b": 1}), "export", rules).outcome == "allow"


def test_tie_is_deny_biased_and_redacts_merge():
    rules = [PolicyRule("*", "export", "allow"),
             PolicyRule("provider:p", "export", "redact", redact_paths=("body.a",)),
             PolicyRule("provider:p", "export", "redact", redact_paths=("body.b",)),
             PolicyRule("provider:p", "export", "allow")]
    d = evaluate(doc({"a": 1, "b": 2}), "export", rules)
    assert d.outcome == "redact" and d.redact_paths == ("body.a", "body.b")
    rules.append(PolicyRule("provider:p", "export", "deny"))
    assert evaluate(doc({"a": 1}), "export", rules).outcome == "deny"


def test_privacy_above_rule_denies():
    rules = [PolicyRule("*", "export", "allow", PUBLIC)]
    assert evaluate(doc({"privacy": "restricted"}), "export", rules).outcome == "deny"
    engine = PolicyEngine(rules, provider_privacy={"p": RESTRICTED})
    assert engine.evaluate(doc({"x": 1}), "export").outcome == "deny"
    assert engine.evaluate(doc({"x": 1}, provider="q"), "export").outcome == "deny"   # unknown -> restricted


def test_missing_wildcard_means_deny():
    rules = [PolicyRule("provider:q", "export", "allow")]
    assert evaluate(doc({"a": 1}), "export", rules).outcome == "deny"


def test_rule_validation():
    with pytest.raises(PolicyError):
        PolicyRule("planet:mars", "export", "allow")
    with pytest.raises(PolicyError):
        PolicyRule("*", "export", "redact")
    with pytest.raises(PolicyError):
        PolicyRule("*", "sell", "allow")


def test_redact():
    d = doc({"user": "x", "n": 1})
    r = redact(d, ["body.user"])
    assert r.body == {"user": REDACTED, "n": 1}
    assert r.provenance == d.provenance and r.id != d.id
    assert redact(d, []) is d
    assert redact(d, ["body.absent"]) is d
    assert d.body["user"] == "x"


def test_redaction_closure():
    rules = default_ruleset() + [
        PolicyRule("attribute:body.user", "export", "redact", PUBLIC, ("body.user",))]
    engine = PolicyEngine(rules)
    d = doc({"user": "x", "privacy": "public"})
    first = engine.evaluate(d, "export")
    r = redact(d, first.redact_paths)
    second = engine.evaluate(r, "export")
    assert second.outcome != "deny"
    assert redact(r, second.redact_paths).body == r.body


def test_audit_log(tmp_path):
    audit = tmp_path / "audit.jsonl"
    engine = PolicyEngine(audit_path=audit)
    docs = [doc({"i": i, "privacy": p}) for i, p in enumerate(["public", "private", "public"])]
    for d in docs:
        for purpose in PURPOSES:
            engine.evaluate(d, purpose)
    lines = [json.loads(x) for x in audit.read_text().splitlines()]
    assert len(lines) == len(engine.audit_log) == 9
    assert [e["seq"] for e in lines] == list(range(9))


def test_gate_abort_and_exclude():
    docs = [doc({"i": 1, "privacy": "public"}), doc({"i": 2, "privacy": "private"})]
    with pytest.raises(PolicyDenied) as info:
        gate(docs, PolicyEngine(), "export")
    assert info.value.document_ids == [docs[1].id]
    result = gate(docs, PolicyEngine(), "export", on_deny="exclude")
    assert [d.id for d in result.documents] == [docs[0].id]


def test_ruleset_file_round_trip(tmp_path):
    rules = default_ruleset() + [PolicyRule("attribute:body.a[].b", "export", "redact",
                                            redact_paths=("body.a[].b",))]
    path = tmp_path / "rules.json"
    path.write_text(dump_ruleset(rules))
    assert load_ruleset(path) == rules
    path.write_text("[]")
    with pytest.raises(PolicyError):
        load_ruleset(path)


scopes = st.sampled_from(["*", "provider:p", "provider:q", "jurisdiction:FR", "attribute:body.a"])
rules_st = st.lists(st.builds(
    lambda s, pur, act, lvl: PolicyRule(s, pur, act, lvl, ("body.a",) if act == "redact" else ()),
    scopes, st.sampled_from(PURPOSES), st.sampled_from(["allow", "deny", "redact"]),
    st.sampled_from(list(PrivacyLevel))), max_size=6)


@given(rules_st, st.sampled_from(PURPOSES), st.sampled_from(["public", "restricted", "private", None]))
def test_evaluate_total_and_deterministic(rules, purpose, privacy):
    body = {"a": 1} if privacy is None else {"a": 1, "privacy": privacy}
    d = doc(body)
    first = evaluate(d, purpose, rules or None)
    second = evaluate(d, purpose, rules or None)
    assert first.outcome in ("allow", "deny", "redact")
    assert (first.outcome, first.rule, first.redact_paths) == (second.outcome, second.rule, second.redact_paths)
    if first.outcome != "deny":
        assert first.privacy <= first.rule.max_privacy
