"""Intercepting middleware: interleaved pages in, UID-proxied text out.

Before a fetched page reaches the agent, every image in it is registered
in the asset store and replaced by its UID, and the text is condensed into
bullet points. The agent only ever sees the output of :func:`render`.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from typing import Protocol

from .assets import AssetStore
from .errors import FetchError, SummarizerUnavailable, UidAgentError
from .fetchers import ImageFetcher, InterleavedDocument, Segment
from .llm import ChatClient

logger = logging.getLogger(__name__)

IMAGES_HEADING = "### Images:"
NO_CAPTION = "(none)"


@dataclass(frozen=True)
class ImageRef:
    uid: str
    caption: str | None = None


@dataclass(frozen=True)
class FailedImage:
    url: str
    caption: str | None = None
    reason: str = ""


@dataclass
class SerializedDocument:
    source_url: str
    summary_text: str
    images: list[ImageRef] = field(default_factory=list)
    failed: list[FailedImage] = field(default_factory=list)

    def to_record(self) -> dict:
        return {
            "source_url": self.source_url,
            "summary_text": self.summary_text,
            "images": [{"uid": i.uid, "caption": i.caption} for i in self.images],
            "failed": [{"url": f.url, "caption": f.caption, "reason": f.reason} for f in self.failed],
        }

    @classmethod
    def from_record(cls, rec: dict) -> SerializedDocument:
        return cls(
            source_url=rec["source_url"],
            summary_text=rec["summary_text"],
            images=[ImageRef(i["uid"], i.get("caption")) for i in rec.get("images", [])],
            failed=[FailedImage(f["url"], f.get("caption"), f.get("reason", "")) for f in rec.get("failed", [])],
        )


class Summarizer(Protocol):
    def summarize(self, text: str, focus_query: str | None = None) -> str: ...


_SENTENCE_END = re.compile(r"(?<=[.!?。！？])\s+|(?<=[。！？])|\n+")


class LeadSentenceSummarizer:
    """Offline fallback: the first ``n`` sentences as markdown bullets."""

    def __init__(self, n: int = 10) -> None:
        self.n = n

    def summarize(self, text: str, focus_query: str | None = None) -> str:
        sentences = [s.strip() for s in _SENTENCE_END.split(text) if s and s.strip()]
        return "\n".join(f"- {s}" for s in sentences[: self.n])


SUMMARY_PROMPT = (
    "Summarize the following webpage content as concise markdown bullet points. "
    "Keep names, dates and numbers exact.{focus}\n\n---\n{text}"
)


class ChatSummarizer:
    def __init__(self, chat: ChatClient, prompt: str = SUMMARY_PROMPT, max_chars: int = 60_000) -> None:
        self.chat = chat
        self.prompt = prompt
        self.max_chars = max_chars

    def summarize(self, text: str, focus_query: str | None = None) -> str:
        focus = f" Focus on information needed to answer: {focus_query}" if focus_query else ""
        try:
            return self.chat.complete(self.prompt.format(focus=focus, text=text[: self.max_chars])).strip()
        except UidAgentError as exc:
            raise SummarizerUnavailable(str(exc)) from exc


def _escape_caption(caption: str | None) -> str:
    if caption is None:
        return NO_CAPTION
    escaped = caption.replace("\\", "\\\\").replace("\r", "\\r").replace("\n", "\\n")
    # a literal "(none)" caption must not collide with a missing one
    return "\\" + escaped if escaped == NO_CAPTION else escaped


def render(doc: SerializedDocument) -> str:
    """Deterministic text form: summary bullets, then the image-caption pairs."""
    summary = doc.summary_text.rstrip("\n")
    if not doc.images and not doc.failed:
        return summary
    lines = [summary, ""] if summary else []
    lines.append(IMAGES_HEADING)
    for img in doc.images:
        lines.append(f"- **Image URL**: {img.uid}")
        lines.append(f"  - **Caption**: {_escape_caption(img.caption)}")
    for bad in doc.failed:
        lines.append(f"- **Image URL**: {bad.url} (fetch failed)")
        lines.append(f"  - **Caption**: {_escape_caption(bad.caption)}")
    return "\n".join(lines)


def _register_segment(seg: Segment, store: AssetStore, image_fetcher: ImageFetcher | None) -> str:
    data = seg.image_bytes
    if data is None:
        if image_fetcher is None:
            raise FetchError("no image fetcher configured")
        data = image_fetcher.fetch(seg.image_url)
    return store.register_asset(data, source_url=seg.image_url, caption=seg.caption)


def intercept(
    doc: InterleavedDocument,
    store: AssetStore,
    summarizer: Summarizer,
    focus_query: str | None = None,
    image_fetcher: ImageFetcher | None = None,
) -> SerializedDocument:
    """Register every image of ``doc`` and return its lightweight form.

    Per-image download or decode failures never abort the call; the image is
    listed by URL with a fetch-failed note instead. Summarizer failures
    propagate as SummarizerUnavailable.
    """
    images: list[ImageRef] = []
    failed: list[FailedImage] = []
    for seg in doc.image_segments:
        try:
            uid = _register_segment(seg, store, image_fetcher)
        except UidAgentError as exc:
            logger.info("image %s not stored: %s", seg.image_url, exc)
            failed.append(FailedImage(seg.image_url, seg.caption, str(exc)))
            continue
        images.append(ImageRef(uid, seg.caption))
    try:
        summary = summarizer.summarize(doc.text, focus_query)
    except SummarizerUnavailable:
        raise
    except Exception as exc:
        raise SummarizerUnavailable(str(exc)) from exc
    return SerializedDocument(source_url=doc.source_url, summary_text=summary, images=images, failed=failed)
