from __future__ import annotations

import json
import os
from pathlib import Path

import pytest

from poliview.cli import main
from poliview.scenario import ruleset


def run(*argv) -> int:
    return main([str(a) for a in argv])


def tree(root: Path) -> dict[str, bytes]:
    return {str(p.relative_to(root)): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


@pytest.fixture
def collected(tmp_path):
    work = tmp_path / "work"
    assert run("simulate", "--out", work) == 0
    assert run("collect", "--plan", work / "plan.json", "--data", tmp_path / "data") == 0
    assert run("view", "extract", "--data", tmp_path / "data", "--dataset", "campaign",
               "--config", work / "view-config.json", "--out", tmp_path / "view.json") == 0
    return tmp_path


def test_unknown_flag_is_usage_error(capsys):
    assert run("report", "compare", "--bogus") == 1
    assert run() == 1
    assert run("--version") == 0
    assert "usage" in capsys.readouterr().err


def test_missing_dataset_is_data_error(tmp_path):
    assert run("policy", "check", "--data", tmp_path, "--dataset", "nope") == 3


def test_recollect_refused(collected):
    work = collected / "work"
    before = tree(collected / "data" / "campaign")
    assert run("collect", "--plan", work / "plan.json", "--data", collected / "data") == 3
    assert tree(collected / "data" / "campaign") == before
    assert not [p for p in (collected / "data").iterdir() if p.name.startswith(".collect-")]


def test_seed_from_environment(collected, monkeypatch):
    monkeypatch.setenv("POLIVIEW_SEED", "not-a-number")
    assert run("collect", "--plan", collected / "work" / "plan.json",
               "--data", collected / "other") == 1


def test_full_pipeline(collected, capsys):
    work, out = collected / "work", collected / "out"
    assert run("view", "validate", "--view", collected / "view.json",
               "--annotations", work / "annotations.json") == 0
    view = json.loads((collected / "view.json").read_text())
    assert view["version"] == 3 and len(view["annotations"]) == 2
    assert run("view", "show", "--view", collected / "view.json") == 0
    assert "location" in capsys.readouterr().out
    assert run("policy", "check", "--data", collected / "data", "--dataset", "campaign",
               "--ruleset", work / "ruleset.json", "--audit", collected / "audit.jsonl") == 0
    assert (collected / "audit.jsonl").read_text().count("\n") == 106
    assert run("report", "compare", "--data", collected / "data", "--dataset", "campaign",
               "--view", collected / "view.json", "--ruleset", work / "ruleset.json",
               "--format", "csv", "--format", "json", "--format", "plot-tsv", "--out", out) == 0
    files = {p.name for p in out.iterdir()}
    assert {"candidates.csv", "parties.csv", "report.json", "timeline.png",
            "per_capita.png"} <= files
    report = json.loads((out / "report.json").read_text())
    assert report["reconciliation"]["ok"]
    # location was redacted for export, so no city appears anywhere in the outputs
    assert b"Marseille" not in b"".join(tree(out).values())


def test_merge_extends_view(collected):
    assert run("view", "extract", "--data", collected / "data", "--dataset", "campaign",
               "--merge", collected / "view.json", "--out", collected / "v2.json") == 0
    v1 = json.loads((collected / "view.json").read_text())
    v2 = json.loads((collected / "v2.json").read_text())
    assert v2["version"] == v1["version"] + 1 and v2["profiles"] == v1["profiles"]


def test_export_denial_writes_nothing(collected):
    rules = ruleset() + [{"scope": "provider:site-sim", "purpose": "export", "action": "deny"}]
    path = collected / "deny.json"
    path.write_text(json.dumps(rules))
    args = ["--data", collected / "data", "--dataset", "campaign", "--ruleset", path]
    assert run("policy", "check", *args) == 2
    out = collected / "denied"
    assert run("report", "compare", *args, "--view", collected / "view.json",
               "--format", "csv", "--out", out) == 2
    assert not out.exists()
    assert run("report", "compare", *args, "--view", collected / "view.json",
               "--on-deny", "exclude", "--format", "json", "--out", out) == 0
    report = json.loads((out / "report.json").read_text())
    assert all(c["platforms"]["site"]["status"] == "none" for c in report["candidates"])


def test_view_of_other_dataset_rejected(collected):
    view = json.loads((collected / "view.json").read_text())
    view["dataset_id"] = "elsewhere"
    (collected / "bad.json").write_text(json.dumps(view))
    assert run("report", "profile", "--data", collected / "data", "--dataset", "campaign",
               "--view", collected / "bad.json", "--out", collected / "o") == 3
