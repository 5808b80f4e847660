"""Page and image retrieval behind small swappable interfaces.

Live implementations talk HTTP through httpx. Fixture implementations read
JSON records from disk so every pipeline can run offline and replay
deterministically.
"""

from __future__ import annotations

import hashlib
import http
import json
import os
import unicodedata
from dataclasses import dataclass, field
from html.parser import HTMLParser
from pathlib import Path
from typing import Protocol
from urllib.parse import urljoin

import httpx

from .errors import FetchError

DEFAULT_TIMEOUT = 30.0
USER_AGENT = "uidagent/0.1 (+https://example.invalid/uidagent)"


def normalize_key(text: str) -> str:
    return " ".join(unicodedata.normalize("NFKC", text).split()).casefold()


def fixture_key(text: str) -> str:
    """Stable 16-hex-digit file stem for a URL or query."""
    return hashlib.sha256(normalize_key(text).encode("utf-8")).hexdigest()[:16]


def http_error_message(status: int, url: str) -> str:
    """Same wording httpx uses in ``raise_for_status``."""
    try:
        phrase = http.HTTPStatus(status).phrase
    except ValueError:
        phrase = "Unknown"
    kind = "Client error" if 400 <= status < 500 else "Server error" if status >= 500 else "Error"
    return f"{kind} '{status} {phrase}' for url '{url}'"


@dataclass
class Segment:
    kind: str  # "text" | "image"
    text: str | None = None
    image_url: str | None = None
    image_bytes: bytes | None = field(default=None, repr=False)
    caption: str | None = None

    def __post_init__(self) -> None:
        if self.kind == "text":
            if self.text is None or self.image_url is not None or self.image_bytes is not None:
                raise ValueError("text segment must carry text and nothing else")
        elif self.kind == "image":
            if self.image_url is None or self.text is not None:
                raise ValueError("image segment must carry image_url and no text")
        else:
            raise ValueError(f"unknown segment kind {self.kind!r}")

    @classmethod
    def from_record(cls, rec: dict) -> Segment:
        if rec.get("kind") == "image":
            return cls("image", image_url=rec["image_url"], caption=rec.get("caption"))
        return cls("text", text=rec["text"])


@dataclass
class InterleavedDocument:
    source_url: str
    segments: list[Segment]

    def __post_init__(self) -> None:
        if not self.segments:
            raise ValueError("document needs at least one segment")

    @property
    def image_segments(self) -> list[Segment]:
        return [s for s in self.segments if s.kind == "image"]

    @property
    def text(self) -> str:
        return "\n".join(s.text for s in self.segments if s.kind == "text")


class PageFetcher(Protocol):
    def fetch(self, url: str) -> InterleavedDocument: ...


class ImageFetcher(Protocol):
    def fetch(self, url: str) -> bytes: ...


# --------------------------------------------------------------------------
# HTML -> interleaved segments

_BLOCK_TAGS = {"p", "h1", "h2", "h3", "h4", "h5", "h6", "li", "blockquote", "td", "th", "dd", "dt", "pre"}
_SKIP_TAGS = {"script", "style", "noscript", "template", "svg", "head"}


class _InterleaveParser(HTMLParser):
    def __init__(self, base_url: str) -> None:
        super().__init__(convert_charrefs=True)
        self.base_url = base_url
        self.segments: list[Segment] = []
        self._buf: list[str] = []
        self._skip = 0
        self._in_figcaption = False
        self._figcaption: list[str] = []
        self._figure_images: list[Segment] | None = None

    def _flush(self) -> None:
        text = " ".join("".join(self._buf).split())
        self._buf = []
        if text:
            self.segments.append(Segment("text", text=text))

    def handle_starttag(self, tag, attrs):
        if tag in _SKIP_TAGS:
            self._skip += 1
            return
        if self._skip:
            return
        attrs = dict(attrs)
        if tag in _BLOCK_TAGS or tag == "br":
            self._flush()
        if tag == "figure":
            self._flush()
            self._figure_images = []
        elif tag == "figcaption":
            self._in_figcaption = True
            self._figcaption = []
        elif tag == "img":
            src = attrs.get("src") or attrs.get("data-src")
            if not src or src.startswith("data:"):
                return
            self._flush()
            seg = Segment("image", image_url=urljoin(self.base_url, src), caption=(attrs.get("alt") or "").strip() or None)
            self.segments.append(seg)
            if self._figure_images is not None:
                self._figure_images.append(seg)

    def handle_endtag(self, tag):
        if tag in _SKIP_TAGS:
            self._skip = max(0, self._skip - 1)
            return
        if self._skip:
            return
        if tag == "figcaption":
            self._in_figcaption = False
            caption = " ".join("".join(self._figcaption).split())
            if caption and self._figure_images:
                for seg in self._figure_images:
                    seg.caption = caption
        elif tag == "figure":
            self._figure_images = None
        elif tag in _BLOCK_TAGS:
            self._flush()

    def handle_data(self, data):
        if self._skip:
            return
        if self._in_figcaption:
            self._figcaption.append(data)
        else:
            self._buf.append(data)

    def close(self):
        super().close()
        self._flush()


def parse_html(html: str, base_url: str) -> InterleavedDocument:
    parser = _InterleaveParser(base_url)
    parser.feed(html)
    parser.close()
    segments = parser.segments or [Segment("text", text="")]
    return InterleavedDocument(source_url=base_url, segments=segments)


# --------------------------------------------------------------------------
# live fetchers


class HttpPageFetcher:
    def __init__(self, client: httpx.Client | None = None, timeout: float = DEFAULT_TIMEOUT) -> None:
        self.client = client or httpx.Client(timeout=timeout, follow_redirects=True, headers={"User-Agent": USER_AGENT})

    def fetch(self, url: str) -> InterleavedDocument:
        try:
            resp = self.client.get(url)
            resp.raise_for_status()
        except httpx.HTTPError as exc:
            raise FetchError(str(exc)) from exc
        return parse_html(resp.text, str(resp.url))


class HttpImageFetcher:
    def __init__(self, client: httpx.Client | None = None, timeout: float = DEFAULT_TIMEOUT) -> None:
        self.client = client or httpx.Client(timeout=timeout, follow_redirects=True, headers={"User-Agent": USER_AGENT})

    def fetch(self, url: str) -> bytes:
        try:
            resp = self.client.get(url)
            resp.raise_for_status()
        except httpx.HTTPError as exc:
            raise FetchError(str(exc)) from exc
        return resp.content


# --------------------------------------------------------------------------
# fixture fetchers


class FixturePageFetcher:
    """Reads ``<fixture_dir>/<fixture_key(url)>.json``.

    A record is ``{"source_url": ..., "segments": [...]}``; a record with an
    ``"error": {"status": 403}`` member replays an HTTP failure instead.
    """

    def __init__(self, fixture_dir: str | os.PathLike) -> None:
        self.fixture_dir = Path(fixture_dir)

    def fetch(self, url: str) -> InterleavedDocument:
        path = self.fixture_dir / f"{fixture_key(url)}.json"
        if not path.exists():
            raise FetchError(http_error_message(404, url))
        rec = json.loads(path.read_text(encoding="utf-8"))
        err = rec.get("error")
        if err is not None:
            if isinstance(err, dict) and "status" in err:
                raise FetchError(http_error_message(int(err["status"]), url))
            raise FetchError(str(err))
        return InterleavedDocument(
            source_url=rec.get("source_url", url),
            segments=[Segment.from_record(s) for s in rec["segments"]],
        )


class ReplayImageFetcher:
    """Serves image bytes from ``<fixture_dir>/index.json`` (url -> file name)."""

    def __init__(self, fixture_dir: str | os.PathLike) -> None:
        self.fixture_dir = Path(fixture_dir)
        index = self.fixture_dir / "index.json"
        self.index: dict[str, str] = json.loads(index.read_text(encoding="utf-8")) if index.exists() else {}

    def fetch(self, url: str) -> bytes:
        name = self.index.get(url)
        if name is None:
            raise FetchError(http_error_message(404, url))
        return (self.fixture_dir / name).read_bytes()


class MemoryImageFetcher:
    """Dict-backed fetcher, handy in tests and notebooks."""

    def __init__(self, images: dict[str, bytes] | None = None) -> None:
        self.images = dict(images or {})
        self.calls: list[str] = []

    def fetch(self, url: str) -> bytes:
        self.calls.append(url)
        try:
            return self.images[url]
        except KeyError:
            raise FetchError(http_error_message(404, url)) from None
