"""Privacy/authorship policy rules: evaluation, field redaction, audit log.

Rule resolution for a (document, purpose) pair:

1. keep rules for that purpose whose scope matches the document;
2. the most specific scope wins (attribute > provider > jurisdiction > wildcard);
3. within that scope level, Deny beats Redact beats Allow (Redact paths merge);
4. if the document's privacy level exceeds the winning rule's ``max_privacy``
   the outcome is Deny regardless.

A wildcard Deny is implied for any purpose the ruleset leaves uncovered.
"""

from __future__ import annotations

import copy
import json
import logging
from dataclasses import dataclass, field
from datetime import datetime
from enum import Enum
from pathlib import Path
from typing import Any, Callable, Iterable, Sequence

from .docmodel import Document, canonical_json, format_timestamp, set_path

logger = logging.getLogger(__name__)

REDACTED = "[REDACTED]"
PURPOSES = ("archive", "analyze", "export")


class PrivacyLevel(str, Enum):
    """public < restricted < private.

    The str mixin would compare alphabetically, so every order operator is
    defined explicitly.
    """

    PUBLIC = "public"
    RESTRICTED = "restricted"
    PRIVATE = "private"

    @property
    def rank(self) -> int:
        return _PRIVACY_RANK[self]

    def __lt__(self, other):
        return self.rank < PrivacyLevel(other).rank

    def __le__(self, other):
        return self.rank <= PrivacyLevel(other).rank

    def __gt__(self, other):
        return self.rank > PrivacyLevel(other).rank

    def __ge__(self, other):
        return self.rank >= PrivacyLevel(other).rank

    __hash__ = str.__hash__


_PRIVACY_RANK = {PrivacyLevel.PUBLIC: 0, PrivacyLevel.RESTRICTED: 1, PrivacyLevel.PRIVATE: 2}

SPECIFICITY = {"attribute": 3, "provider": 2, "jurisdiction": 1, "*": 0}
_OUTCOME_RANK = {"deny": 2, "redact": 1, "allow": 0}


class PolicyError(ValueError):
    """Malformed rule or ruleset."""


class PolicyDenied(Exception):
    """A document was denied for the requested purpose."""

    def __init__(self, purpose: str, document_ids: Sequence[str]):
        self.purpose = purpose
        self.document_ids = list(document_ids)
        super().__init__(f"{len(self.document_ids)} document(s) denied for {purpose}")


@dataclass(frozen=True)
class PolicyRule:
    scope: str                      # "*", "provider:<id>", "jurisdiction:<cc>", "attribute:<path>"
    purpose: str
    action: str                     # allow | deny | redact
    max_privacy: PrivacyLevel = PrivacyLevel.PRIVATE
    redact_paths: tuple[str, ...] = ()

    def __post_init__(self):
        kind = self.scope_kind
        if kind not in SPECIFICITY:
            raise PolicyError(f"unknown scope {self.scope!r}")
        if kind != "*" and not self.scope_value:
            raise PolicyError(f"scope {self.scope!r} needs a value")
        if self.purpose not in PURPOSES:
            raise PolicyError(f"unknown purpose {self.purpose!r}")
        if self.action not in _OUTCOME_RANK:
            raise PolicyError(f"unknown action {self.action!r}")
        if (self.action == "redact") != bool(self.redact_paths):
            raise PolicyError("redact rules need a non-empty path list (and only they take one)")

    @property
    def scope_kind(self) -> str:
        return "*" if self.scope == "*" else self.scope.split(":", 1)[0]

    @property
    def scope_value(self) -> str:
        return "" if self.scope == "*" else self.scope.split(":", 1)[1] if ":" in self.scope else ""

    @property
    def specificity(self) -> int:
        return SPECIFICITY[self.scope_kind]

    def matches(self, doc: Document) -> bool:
        kind, value = self.scope_kind, self.scope_value
        if kind == "*":
            return True
        if kind == "provider":
            return doc.provenance.provider_id == value
        if kind == "jurisdiction":
            return doc.provenance.jurisdiction == value
        return has_path(doc, value)

    def to_dict(self) -> dict:
        action: Any = {"redact": list(self.redact_paths)} if self.action == "redact" else self.action
        return {"scope": self.scope, "purpose": self.purpose, "action": action,
                "max_privacy": self.max_privacy.value}

    @classmethod
    def from_dict(cls, data: dict) -> "PolicyRule":
        action = data["action"]
        paths: tuple[str, ...] = ()
        if isinstance(action, dict):
            paths = tuple(action.get("redact", ()))
            action = "redact"
        return cls(scope=data.get("scope", "*"), purpose=data["purpose"], action=action,
                   max_privacy=PrivacyLevel(data.get("max_privacy", "private")),
                   redact_paths=paths)


def has_path(doc: Document, path: str) -> bool:
    """True when ``path`` (``body.x``, ``body.a[].b`` or ``provenance.x``) resolves."""
    root: Any = {"body": doc.body, "provenance": doc.provenance.to_dict()}
    return _present(root, path.split("."))


def _present(node: Any, parts: list[str]) -> bool:
    if not parts:
        return node is not None
    head, rest = parts[0], parts[1:]
    is_list = head.endswith("[]")
    key = head[:-2] if is_list else head
    if not isinstance(node, dict) or key not in node:
        return False
    child = node[key]
    if is_list:
        return isinstance(child, list) and any(_present(item, rest) for item in child)
    return _present(child, rest)


def default_ruleset() -> list[PolicyRule]:
    """Deny-biased defaults: archive anything, analyze up to restricted, export public only."""
    return [
        PolicyRule("*", "archive", "allow", PrivacyLevel.PRIVATE),
        PolicyRule("*", "analyze", "allow", PrivacyLevel.RESTRICTED),
        PolicyRule("*", "export", "allow", PrivacyLevel.PUBLIC),
    ]


def load_ruleset(path: Path | str) -> list[PolicyRule]:
    try:
        rows = json.loads(Path(path).read_text("utf-8"))
    except (OSError, ValueError) as exc:
        raise PolicyError(f"cannot read ruleset {path}: {exc}") from exc
    if not isinstance(rows, list) or not rows:
        raise PolicyError("a ruleset is a non-empty JSON list of rules")
    try:
        return [PolicyRule.from_dict(r) for r in rows]
    except (KeyError, TypeError, ValueError) as exc:
        raise PolicyError(f"bad rule in {path}: {exc}") from exc


def dump_ruleset(rules: Iterable[PolicyRule]) -> str:
    return json.dumps([r.to_dict() for r in rules], indent=2) + "\n"


@dataclass(frozen=True)
class PolicyDecision:
    outcome: str
    rule: PolicyRule
    document_id: str
    purpose: str
    privacy: PrivacyLevel
    redact_paths: tuple[str, ...] = ()
    audit: dict = field(default_factory=dict, compare=False)


def resolve(doc: Document, purpose: str, rules: Sequence[PolicyRule],
            privacy: PrivacyLevel) -> tuple[str, PolicyRule, tuple[str, ...]]:
    """Pure rule resolution; returns (outcome, decisive rule, redact paths)."""
    if purpose not in PURPOSES:
        raise PolicyError(f"unknown purpose {purpose!r}")
    candidates = [r for r in rules if r.purpose == purpose and r.matches(doc)]
    if not any(r.scope_kind == "*" for r in rules if r.purpose == purpose):
        candidates.append(PolicyRule("*", purpose, "deny"))
    top = max(r.specificity for r in candidates)
    level = [r for r in candidates if r.specificity == top]
    best = max(_OUTCOME_RANK[r.action] for r in level)
    winners = [r for r in level if _OUTCOME_RANK[r.action] == best]
    rule = winners[0]
    outcome = rule.action
    paths: tuple[str, ...] = ()
    if outcome == "redact":
        paths = tuple(sorted({p for r in winners for p in r.redact_paths}))
    if privacy > rule.max_privacy:
        outcome, paths = "deny", ()
    return outcome, rule, paths


class PolicyEngine:
    """Evaluates documents against a ruleset and keeps the audit trail.

    ``provider_privacy`` maps provider ids to their SLA default privacy; a
    body field ``privacy`` holding a valid level overrides it.
    """

    def __init__(self, rules: Sequence[PolicyRule] | None = None, *,
                 provider_privacy: dict[str, PrivacyLevel] | None = None,
                 unknown_privacy: PrivacyLevel = PrivacyLevel.RESTRICTED,
                 audit_path: Path | str | None = None,
                 clock: Callable[[], datetime] | None = None):
        self.rules = list(rules) if rules else default_ruleset()
        self.provider_privacy = dict(provider_privacy or {})
        self.unknown_privacy = unknown_privacy
        self.audit_log: list[dict] = []
        self.audit_path = Path(audit_path) if audit_path else None
        self.clock = clock

    def privacy_of(self, doc: Document) -> PrivacyLevel:
        if isinstance(doc.body, dict):
            raw = doc.body.get("privacy")
            if isinstance(raw, str) and raw in PrivacyLevel._value2member_map_:
                return PrivacyLevel(raw)
        return self.provider_privacy.get(doc.provenance.provider_id, self.unknown_privacy)

    def evaluate(self, doc: Document, purpose: str) -> PolicyDecision:
        privacy = self.privacy_of(doc)
        outcome, rule, paths = resolve(doc, purpose, self.rules, privacy)
        entry = {
            "seq": len(self.audit_log),
            "at": format_timestamp(self.clock()) if self.clock else None,
            "document_id": doc.id,
            "purpose": purpose,
            "outcome": outcome,
            "rule": rule.to_dict(),
        }
        if paths:
            entry["redact"] = list(paths)
        self._append(entry)
        return PolicyDecision(outcome, rule, doc.id, purpose, privacy, paths, entry)

    def _append(self, entry: dict) -> None:
        self.audit_log.append(entry)
        if self.audit_path is not None:
            with open(self.audit_path, "a", encoding="utf-8") as fh:
                fh.write(canonical_json(entry) + "\n")


def evaluate(doc: Document, purpose: str, rules: Sequence[PolicyRule] | None = None,
             **engine_kwargs) -> PolicyDecision:
    """One-off evaluation with a throwaway engine."""
    return PolicyEngine(rules, **engine_kwargs).evaluate(doc, purpose)


def redact(doc: Document, paths: Iterable[str]) -> Document:
    """Replace each listed ``body.`` path with the redaction sentinel.

    Provenance is kept; the id is recomputed when the body changed.  Paths
    that do not resolve are skipped and logged.
    """
    paths = list(paths)
    if not paths:
        return doc
    body = copy.deepcopy(doc.body)
    changed = False
    for path in paths:
        if not path.startswith("body."):
            logger.info("redact: ignoring non-body path %s", path)
            continue
        if set_path(body, path[len("body."):], REDACTED):
            changed = True
        else:
            logger.info("redact: %s not present in %s", path, doc.id)
    if not changed:
        return doc
    return Document.create(body, doc.provenance)


@dataclass
class GateResult:
    documents: list[Document]
    allowed: int = 0
    redacted: int = 0
    denied: list[str] = field(default_factory=list)

    def summary(self, purpose: str) -> dict:
        return {"purpose": purpose, "allowed": self.allowed, "redacted": self.redacted,
                "excluded": len(self.denied)}


def gate(documents: Iterable[Document], engine: PolicyEngine, purpose: str,
         on_deny: str = "abort") -> GateResult:
    """Apply the policy to every document before it reaches an output.

    ``on_deny='abort'`` raises :class:`PolicyDenied` listing every denied
    document; ``'exclude'`` drops them.
    """
    if on_deny not in ("abort", "exclude"):
        raise ValueError(f"on_deny must be abort or exclude, not {on_deny!r}")
    result = GateResult([])
    for doc in documents:
        decision = engine.evaluate(doc, purpose)
        if decision.outcome == "deny":
            result.denied.append(doc.id)
        elif decision.outcome == "redact":
            result.redacted += 1
            result.documents.append(redact(doc, decision.redact_paths))
        else:
            result.allowed += 1
            result.documents.append(doc)
    if result.denied and on_deny == "abort":
        raise PolicyDenied(purpose, result.denied)
    return result
