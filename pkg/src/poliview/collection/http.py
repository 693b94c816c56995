"""Plain-GET adapter for real providers.

JSON answers are either a list of documents or ``{"documents": [...],
"links": [...]}``.  HTML pages become one document ``{url, title, text}``
and their ``<a href>`` targets become links.  Status codes map onto
unavailability reasons: 401/403 auth, 451 privacy, 429 rate limit, anything
else (or a network failure) provider error.
"""

from __future__ import annotations

import json
import urllib.error
import urllib.request
from html.parser import HTMLParser
from typing import Any
from urllib.parse import urljoin

from .providers import Response

_STATUS_REASON = {401: "auth", 403: "auth", 451: "privacy", 429: "rate_limit"}


class _PageParser(HTMLParser):
    def __init__(self):
        super().__init__()
        self.links: list[str] = []
        self.title = ""
        self.text: list[str] = []
        self._in_title = False
        self._skip = 0

    def handle_starttag(self, tag, attrs):
        if tag == "a":
            href = dict(attrs).get("href")
            if href:
                self.links.append(href)
        elif tag == "title":
            self._in_title = True
        elif tag in ("script", "style"):
            self._skip += 1

    def handle_endtag(self, tag):
        if tag == "title":
            self._in_title = False
        elif tag in ("script", "style") and self._skip:
            self._skip -= 1

    def handle_data(self, data):
        if self._in_title:
            self.title += data
        elif not self._skip and data.strip():
            self.text.append(data.strip())


class HttpTransport:
    def __init__(self, endpoint: str, timeout: float = 30.0):
        self.endpoint = endpoint
        self.timeout = timeout

    def _url(self, request: str) -> str:
        if request.startswith(("http://", "https://")):
            return request
        return urljoin(self.endpoint.rstrip("/") + "/", request)

    def _get(self, url: str, credentials: str | None) -> tuple[int, str, bytes]:
        req = urllib.request.Request(url, method="GET")
        if credentials:
            req.add_header("Authorization", f"Bearer {credentials}")
        try:
            with urllib.request.urlopen(req, timeout=self.timeout) as resp:
                return resp.status, resp.headers.get("Content-Type", ""), resp.read()
        except urllib.error.HTTPError as exc:
            return exc.code, "", exc.read() or b""

    def fetch(self, request: str, credentials: str | None) -> Response:
        url = self._url(request)
        try:
            status, ctype, raw = self._get(url, credentials)
        except (urllib.error.URLError, OSError) as exc:
            return Response("provider_error", message=str(exc))
        if status >= 400:
            return Response(_STATUS_REASON.get(status, "provider_error"), bytes_in=len(raw),
                            message=f"HTTP {status}")
        if "json" in ctype:
            try:
                data = json.loads(raw)
            except ValueError as exc:
                return Response("provider_error", bytes_in=len(raw), message=str(exc))
            if isinstance(data, list):
                return Response("ok", data, [], len(raw))
            return Response("ok", list(data.get("documents", [])),
                            [urljoin(url, l) for l in data.get("links", [])], len(raw))
        parser = _PageParser()
        parser.feed(raw.decode("utf-8", errors="replace"))
        doc = {"url": url, "title": parser.title.strip(), "text": " ".join(parser.text)}
        return Response("ok", [doc], [urljoin(url, l) for l in parser.links], len(raw))

    def stream_item(self, index: int) -> Any:
        """Next stream item via ``GET <endpoint>?seq=<index>``; ``None`` when exhausted."""
        sep = "&" if "?" in self.endpoint else "?"
        try:
            status, _, raw = self._get(f"{self.endpoint}{sep}seq={index}", None)
        except (urllib.error.URLError, OSError):
            return None
        if status == 204 or status >= 400 or not raw:
            return None
        return json.loads(raw)
