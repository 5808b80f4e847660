"""Search backends: a Serper-style HTTP client and a deterministic replay store."""

from __future__ import annotations

import json
import logging
import os
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Protocol

import httpx

from .errors import SearchBackendError
from .fetchers import fixture_key

logger = logging.getLogger(__name__)

SEARCH_KINDS = ("google_search", "image_search", "visual_search")


@dataclass(frozen=True)
class SearchHit:
    title: str
    link: str | None = None
    snippet: str | None = None
    image_url: str | None = None
    source_url: str | None = None

    def __post_init__(self) -> None:
        if not self.link and not self.image_url:
            raise ValueError("search hit needs a link or an image_url")

    def to_record(self) -> dict:
        return {k: v for k, v in asdict(self).items() if v is not None}

    @classmethod
    def from_record(cls, rec: dict) -> SearchHit:
        return cls(
            title=rec.get("title", ""),
            link=rec.get("link"),
            snippet=rec.get("snippet"),
            image_url=rec.get("image_url") or rec.get("imageUrl"),
            source_url=rec.get("source_url") or rec.get("source"),
        )


class SearchBackend(Protocol):
    def search(self, kind: str, query: str, top_k: int) -> list[SearchHit]:
        """``kind`` is one of SEARCH_KINDS; for visual_search ``query`` is an image URL."""
        ...


class SerperBackend:
    """Client for a Serper-compatible API (``/search``, ``/images``, ``/lens``)."""

    ENDPOINTS = {"google_search": "search", "image_search": "images", "visual_search": "lens"}

    def __init__(self, api_key: str, base_url: str = "https://google.serper.dev", *, client: httpx.Client | None = None) -> None:
        self.api_key = api_key
        self.base_url = base_url.rstrip("/")
        self.client = client or httpx.Client(timeout=30.0)

    @classmethod
    def from_env(cls, **kw) -> SerperBackend:
        key = os.environ.get("SEARCH_API_KEY")
        if not key:
            raise SearchBackendError("environment variable SEARCH_API_KEY is not set")
        return cls(key, os.environ.get("SEARCH_API_URL", "https://google.serper.dev"), **kw)

    def search(self, kind: str, query: str, top_k: int) -> list[SearchHit]:
        try:
            endpoint = self.ENDPOINTS[kind]
        except KeyError:
            raise SearchBackendError(f"unsupported search kind {kind!r}") from None
        if kind == "visual_search":
            payload = {"url": query}
        else:
            payload = {"q": query, "num": top_k}
        try:
            resp = self.client.post(
                f"{self.base_url}/{endpoint}",
                json=payload,
                headers={"X-API-KEY": self.api_key, "Content-Type": "application/json"},
            )
            resp.raise_for_status()
            body = resp.json()
        except (httpx.HTTPError, ValueError) as exc:
            raise SearchBackendError(str(exc)) from exc
        return self._parse(kind, body)[:top_k]

    @staticmethod
    def _parse(kind: str, body: dict) -> list[SearchHit]:
        hits = []
        if kind == "google_search":
            for item in body.get("organic", []):
                if item.get("link"):
                    hits.append(SearchHit(title=item.get("title", ""), link=item["link"], snippet=item.get("snippet")))
        else:
            items = body.get("images") or body.get("visual_matches") or body.get("organic") or []
            for item in items:
                image = item.get("imageUrl") or item.get("image_url") or item.get("thumbnailUrl")
                link = item.get("link")
                if not image and not link:
                    continue
                hits.append(SearchHit(title=item.get("title", ""), link=link, image_url=image, source_url=item.get("source") if _looks_like_url(item.get("source")) else link))
        return hits


def _looks_like_url(value) -> bool:
    return isinstance(value, str) and value.startswith(("http://", "https://"))


class ReplaySearchBackend:
    """Reads ``<fixture_dir>/search/<kind>/<fixture_key(query)>.json``.

    The file holds either a list of hits, ``{"hits": [...]}``, or
    ``{"responses": [[...], [...]]}`` for queries that returned different
    results on successive calls (consumed in order, the last one repeating).
    A missing file means zero hits.
    """

    def __init__(self, fixture_dir: str | os.PathLike) -> None:
        self.fixture_dir = Path(fixture_dir)
        self._calls: dict[tuple[str, str], int] = {}

    def path_for(self, kind: str, query: str) -> Path:
        return self.fixture_dir / "search" / kind / f"{fixture_key(query)}.json"

    def search(self, kind: str, query: str, top_k: int) -> list[SearchHit]:
        path = self.path_for(kind, query)
        if not path.exists():
            logger.info("no replay fixture for %s %r", kind, query)
            return []
        rec = json.loads(path.read_text(encoding="utf-8"))
        if isinstance(rec, dict) and "responses" in rec:
            key = (kind, fixture_key(query))
            n = self._calls.get(key, 0)
            self._calls[key] = n + 1
            responses = rec["responses"]
            hits = responses[min(n, len(responses) - 1)]
        elif isinstance(rec, dict):
            hits = rec.get("hits", [])
        else:
            hits = rec
        return [SearchHit.from_record(h) for h in hits][:top_k]


def write_replay_fixture(fixture_dir: str | os.PathLike, kind: str, query: str, responses: list[list[SearchHit]]) -> Path:
    """Freeze search results so a later run can replay them."""
    path = ReplaySearchBackend(fixture_dir).path_for(kind, query)
    path.parent.mkdir(parents=True, exist_ok=True)
    body: dict = {"query": query}
    if len(responses) == 1:
        body["hits"] = [h.to_record() for h in responses[0]]
    else:
        body["responses"] = [[h.to_record() for h in r] for r in responses]
    path.write_text(json.dumps(body, ensure_ascii=False, indent=2), encoding="utf-8")
    return path
