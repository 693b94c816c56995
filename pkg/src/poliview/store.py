"""Append-only JSONL dataset storage with content-address deduplication.

Layout of one dataset directory::

    manifest.json        shard list, per-shard counts, totals, free-form meta
    shard-00000.jsonl    one canonical document per line
    shard-00001.jsonl    ...

The id index is rebuilt from the shards when a dataset is opened.
"""

from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path
from typing import Any, Callable, Iterator

from .docmodel import (
    Document,
    ProvenanceStamp,
    canonical_json,
    parse_value,
    to_utc,
    validate,
)

logger = logging.getLogger(__name__)

SHARD_SIZE = 10_000
MANIFEST = "manifest.json"
SCHEMA = "dataset-v1"


class StorageError(Exception):
    """Dataset files are missing, unreadable or inconsistent."""


def atomic_write(path: Path, data: bytes | str, fsync: bool = True) -> None:
    """Write ``data`` to ``path`` through a temporary file and rename."""
    path = Path(path)
    if isinstance(data, str):
        data = data.encode("utf-8")
    tmp = path.with_name(f".{path.name}.tmp")
    with open(tmp, "wb") as fh:
        fh.write(data)
        fh.flush()
        if fsync:
            os.fsync(fh.fileno())
    os.replace(tmp, path)


@dataclass(frozen=True)
class DocFilter:
    """Selection over provenance; ``None`` fields do not constrain.

    ``availability`` is a status (``collected``/``empty``/``unavailable``).
    The time range is half-open: ``start <= collected_at < end``.
    """

    provider_id: str | None = None
    availability: str | None = None
    start: datetime | None = None
    end: datetime | None = None

    def __call__(self, doc: Document) -> bool:
        prov = doc.provenance
        if self.provider_id is not None and prov.provider_id != self.provider_id:
            return False
        if self.availability is not None and prov.availability.status != self.availability:
            return False
        if self.start is not None and prov.collected_at < to_utc(self.start):
            return False
        if self.end is not None and prov.collected_at >= to_utc(self.end):
            return False
        return True


class DatasetCollection:
    """A named, append-only collection of documents stored as JSONL shards.

    Single writer; readers only ever see complete lines.
    """

    def __init__(self, root: Path | str, name: str | None = None, *,
                 shard_size: int = SHARD_SIZE, durable: bool = True):
        self.root = Path(root)
        self.shard_size = shard_size
        self.durable = durable
        self._index: dict[str, tuple[int, int]] = {}
        manifest_path = self.root / MANIFEST
        if manifest_path.exists():
            self._load(manifest_path)
            if name is not None and name != self.name:
                raise StorageError(f"dataset at {self.root} is named {self.name!r}, not {name!r}")
        else:
            self.root.mkdir(parents=True, exist_ok=True)
            self.name = name or self.root.name
            self.shards: list[dict] = []
            self.duplicates = 0
            self.meta: dict[str, Any] = {}
            self._write_manifest()

    # ------------------------------------------------------------------
    @classmethod
    def open(cls, root: Path | str) -> "DatasetCollection":
        if not (Path(root) / MANIFEST).exists():
            raise StorageError(f"no dataset at {root}")
        return cls(root)

    def _load(self, manifest_path: Path) -> None:
        try:
            data = json.loads(manifest_path.read_text("utf-8"))
        except (OSError, ValueError) as exc:
            raise StorageError(f"unreadable manifest {manifest_path}: {exc}") from exc
        if data.get("schema") != SCHEMA:
            raise StorageError(f"unsupported manifest schema {data.get('schema')!r}")
        self.name = data["name"]
        self.shards = data["shards"]
        self.duplicates = data.get("duplicates", 0)
        self.meta = data.get("meta", {})
        for shard_no, shard in enumerate(self.shards):
            seen = 0
            for offset, line in self._lines(shard_no):
                doc_id = json.loads(line)["id"]
                if doc_id in self._index:
                    raise StorageError(f"duplicate id {doc_id} in {shard['file']}")
                self._index[doc_id] = (shard_no, offset)
                seen += 1
            if seen != shard["count"]:
                raise StorageError(
                    f"{shard['file']}: manifest says {shard['count']} lines, found {seen}")

    def _manifest(self) -> dict:
        return {
            "schema": SCHEMA,
            "name": self.name,
            "shards": self.shards,
            "count": len(self),
            "duplicates": self.duplicates,
            "meta": self.meta,
        }

    def _write_manifest(self) -> None:
        text = json.dumps(self._manifest(), sort_keys=True, indent=2, ensure_ascii=False) + "\n"
        atomic_write(self.root / MANIFEST, text, fsync=self.durable)

    def set_meta(self, key: str, value: Any) -> None:
        validate(value)
        self.meta[key] = json.loads(canonical_json(value))
        self._write_manifest()

    def __len__(self) -> int:
        return sum(s["count"] for s in self.shards)

    # ------------------------------------------------------------------
    def ingest(self, raw: str, stamp: ProvenanceStamp) -> Document:
        """Parse ``raw`` JSON text and store it; see :meth:`add`."""
        return self.add(parse_value(raw), stamp)

    def add(self, body: Any, stamp: ProvenanceStamp) -> Document:
        """Store a document unless its id is already present.

        Returns the stored document; for a duplicate this is the copy already
        on disk and the duplicate counter is incremented instead.
        """
        doc = Document.create(body, stamp)
        if doc.id in self._index:
            self.duplicates += 1
            self._write_manifest()
            return self.get(doc.id)
        self._append(doc)
        return doc

    def _append(self, doc: Document) -> None:
        if not self.shards or self.shards[-1]["count"] >= self.shard_size:
            self.shards.append({"file": f"shard-{len(self.shards):05d}.jsonl", "count": 0})
        shard_no = len(self.shards) - 1
        path = self.root / self.shards[shard_no]["file"]
        line = (doc.to_line() + "\n").encode("utf-8")
        with open(path, "ab") as fh:
            offset = fh.tell()
            fh.write(line)
            fh.flush()
            if self.durable:
                os.fsync(fh.fileno())
        self.shards[shard_no]["count"] += 1
        self._index[doc.id] = (shard_no, offset)
        self._write_manifest()

    # ------------------------------------------------------------------
    def contains(self, doc_id: str) -> bool:
        return doc_id in self._index

    __contains__ = contains

    def get(self, doc_id: str) -> Document:
        shard_no, offset = self._index[doc_id]
        path = self.root / self.shards[shard_no]["file"]
        try:
            with open(path, "rb") as fh:
                fh.seek(offset)
                line = fh.readline()
        except OSError as exc:
            raise StorageError(f"cannot read {path}: {exc}") from exc
        return Document.from_dict(json.loads(line))

    def _lines(self, shard_no: int) -> Iterator[tuple[int, bytes]]:
        path = self.root / self.shards[shard_no]["file"]
        try:
            with open(path, "rb") as fh:
                offset = 0
                limit = self.shards[shard_no]["count"]
                for n, line in enumerate(fh):
                    # a line without its newline is a write still in flight
                    if n >= limit or not line.endswith(b"\n"):
                        break
                    yield offset, line
                    offset += len(line)
        except OSError as exc:
            raise StorageError(f"cannot read {path}: {exc}") from exc

    def iterate(self, filter: Callable[[Document], bool] | None = None,
                start: int = 0) -> Iterator[Document]:
        """Documents in ingestion order, optionally filtered.

        ``start`` skips that many documents (before filtering); views use it
        to pick up only documents appended since they were built.
        """
        position = 0
        for shard_no, shard in enumerate(self.shards):
            if position + shard["count"] <= start:
                position += shard["count"]
                continue
            for _, line in self._lines(shard_no):
                position += 1
                if position <= start:
                    continue
                try:
                    doc = Document.from_dict(json.loads(line))
                except (ValueError, KeyError) as exc:
                    raise StorageError(f"corrupt line in {shard['file']}: {exc}") from exc
                if filter is None or filter(doc):
                    yield doc

    def __iter__(self) -> Iterator[Document]:
        return self.iterate()

    def shard_line_total(self) -> int:
        """Count complete lines on disk (the manifest invariant's other side)."""
        total = 0
        for shard in self.shards:
            with open(self.root / shard["file"], "rb") as fh:
                total += sum(1 for line in fh if line.endswith(b"\n"))
        return total
