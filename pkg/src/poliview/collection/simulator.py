"""Scripted stand-in for social network APIs and candidate web sites.

Script layout (one entry per provider id)::

    {"providers": {
        "facebook-sim": {
            "token": "secret",              # checked when credentials are sent
            "failure_rate": 0.0,            # seeded transient provider errors
            "responses": {
                "feed/fr01": [ {"documents": [...]}, {"documents": [...]} ],
                "feed/uk02": {"fail": "privacy"}
            }
        },
        "twitter-sim": {"stream": [ {...}, {...} ]}
    }}

A list of responses is served in call order and its last entry repeats.
Unknown requests fail with ``provider_error``.
"""

from __future__ import annotations

import json
import random
from pathlib import Path
from typing import Any

from ..docmodel import canonical_json
from .providers import Response

FAILURES = ("auth", "privacy", "rate_limit", "provider_error")


class SimulatedProvider:
    def __init__(self, provider_id: str, script: dict, seed: int | str = 0):
        self.provider_id = provider_id
        self.script = script
        self.rng = random.Random(f"{seed}:{provider_id}")
        self.calls: dict[str, int] = {}

    def fetch(self, request: str, credentials: str | None) -> Response:
        token = self.script.get("token")
        if token is not None and credentials != token:
            return self._failure("auth", "invalid credentials")
        rate = self.script.get("failure_rate", 0.0)
        if rate and self.rng.random() < rate:
            return self._failure("provider_error", "transient failure")
        scripted = self.script.get("responses", {}).get(request)
        if scripted is None:
            return self._failure("provider_error", f"not found: {request}")
        n = self.calls.get(request, 0)
        self.calls[request] = n + 1
        if isinstance(scripted, list):
            scripted = scripted[min(n, len(scripted) - 1)]
        if "fail" in scripted:
            return self._failure(scripted["fail"], scripted.get("message", ""))
        payload = {"documents": scripted.get("documents", []), "links": scripted.get("links", [])}
        return Response("ok", list(payload["documents"]), list(payload["links"]),
                        len(canonical_json(payload).encode("utf-8")))

    def stream_item(self, index: int) -> Any:
        items = self.script.get("stream", [])
        return items[index] if index < len(items) else None

    def _failure(self, reason: str, message: str) -> Response:
        if reason not in FAILURES:
            raise ValueError(f"{self.provider_id}: unknown scripted failure {reason!r}")
        body = canonical_json({"error": reason, "message": message}).encode("utf-8")
        return Response(reason, bytes_in=len(body), message=message)


def load_script(path: Path | str) -> dict:
    data = json.loads(Path(path).read_text("utf-8"))
    if "providers" not in data:
        raise ValueError(f"{path}: simulator script needs a 'providers' mapping")
    return data
