from __future__ import annotations

import pytest

from poliview.docmodel import COLLECTED, Availability, Document, ProvenanceStamp, parse_timestamp
from poliview.store import DatasetCollection

T0 = parse_timestamp("2014-05-01T00:00:00Z")


def stamp(provider="p", availability=COLLECTED, jurisdiction="FR", at=T0):
    return ProvenanceStamp(provider, at, jurisdiction, availability)


def doc(body, provider="p", availability=COLLECTED, jurisdiction="FR"):
    return Document.create(body, stamp(provider, availability, jurisdiction))


def marker(reason, provider="p", **body):
    a = Availability.unavailable(reason) if reason else Availability.empty()
    return Document.create({"status": a.status, **body}, stamp(provider, a))


@pytest.fixture
def dataset(tmp_path):
    return DatasetCollection(tmp_path / "ds", "ds")


# --------------------------------------------------------------------------
# acceptance summary: one line per criterion at the end of the run

CRITERIA = pytest.StashKey[list]()


def record_criterion(config, number: int, line: str) -> None:
    config.stash.setdefault(CRITERIA, []).append((number, line))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(CRITERIA, [])
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(lines):
        terminalreporter.write_line(line)
