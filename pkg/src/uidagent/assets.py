"""File-backed visual asset store.

Every image the agent encounters is written once to ``<root>/blobs/<hash>``
and described by one line in the append-only ``<root>/index.jsonl``. The
store hands out a textual UID per distinct image content: the source URL
when the image came from the web, otherwise a URL-shaped locator derived
from the content hash. Replaying the index on open rebuilds the mapping.
"""

from __future__ import annotations

import hashlib
import io
import json
import logging
import os
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Literal
from urllib.parse import urlparse

from PIL import Image

from .errors import UndecodableImage, UnknownUid

logger = logging.getLogger(__name__)

Provenance = Literal["retrieved", "generated"]

DEFAULT_MAX_BYTES = 32 * 1024 * 1024
DEFAULT_UID_PREFIX = "asset://"
DIGEST = "sha256"

_EXTENSIONS = {"JPEG": "jpg", "PNG": "png", "GIF": "gif", "WEBP": "webp", "BMP": "bmp", "TIFF": "tiff"}


def content_digest(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def is_url(value: str | None) -> bool:
    """True for absolute http(s) URLs with a host."""
    if not value or any(c.isspace() for c in value):
        return False
    parsed = urlparse(value)
    return parsed.scheme in ("http", "https") and bool(parsed.netloc)


def probe_image(data: bytes) -> tuple[str, int, int]:
    """Return ``(media_type, width, height)`` or raise UndecodableImage."""
    try:
        with Image.open(io.BytesIO(data)) as img:
            fmt = img.format
            width, height = img.size
            img.verify()
    except Exception as exc:  # PIL raises a zoo of exception types
        raise UndecodableImage(f"undecodable image: {exc}") from exc
    if not fmt or width <= 0 or height <= 0:
        raise UndecodableImage("undecodable image: missing format or size")
    return Image.MIME.get(fmt, f"image/{fmt.lower()}"), width, height


@dataclass(frozen=True)
class VisualAsset:
    uid: str
    data: bytes
    content_hash: str
    media_type: str
    width: int
    height: int
    source_url: str | None = None
    caption: str | None = None
    provenance: Provenance = "retrieved"

    def open(self) -> Image.Image:
        img = Image.open(io.BytesIO(self.data))
        img.load()
        return img


@dataclass(frozen=True)
class _Entry:
    uid: str
    content_hash: str
    media_type: str
    width: int
    height: int
    source_url: str | None
    caption: str | None
    provenance: Provenance

    def record(self) -> dict:
        rec = {
            "uid": self.uid,
            "content_hash": self.content_hash,
            "media_type": self.media_type,
            "width": self.width,
            "height": self.height,
            "provenance": self.provenance,
        }
        if self.source_url is not None:
            rec["source_url"] = self.source_url
        if self.caption is not None:
            rec["caption"] = self.caption
        return rec


class AssetStore:
    """Persistent one-to-one mapping between image content and UIDs.

    Besides registered assets (which always have bytes on disk), the store
    keeps *pending references*: image URLs seen in search results whose bytes
    have not been downloaded yet. They are not assets until ``fetch_image``
    pulls them in, so ``contains`` is false for them.
    """

    def __init__(
        self,
        root: str | os.PathLike,
        *,
        max_bytes: int = DEFAULT_MAX_BYTES,
        uid_prefix: str = DEFAULT_UID_PREFIX,
    ) -> None:
        self.root = Path(root)
        self.max_bytes = max_bytes
        self.uid_prefix = uid_prefix
        self._lock = threading.RLock()
        self._entries: dict[str, _Entry] = {}
        self._by_hash: dict[str, str] = {}
        self._aliases: dict[str, str] = {}
        self._pending: dict[str, str | None] = {}
        (self.root / "blobs").mkdir(parents=True, exist_ok=True)
        self._check_meta()
        self._replay()

    # -- persistence ---------------------------------------------------

    @property
    def index_path(self) -> Path:
        return self.root / "index.jsonl"

    def blob_path(self, content_hash: str) -> Path:
        return self.root / "blobs" / content_hash

    def _check_meta(self) -> None:
        meta_path = self.root / "store.json"
        if meta_path.exists():
            meta = json.loads(meta_path.read_text())
            if meta.get("digest") != DIGEST:
                raise ValueError(f"store at {self.root} uses digest {meta.get('digest')!r}, expected {DIGEST!r}")
        else:
            meta_path.write_text(json.dumps({"digest": DIGEST, "version": 1}))

    def _replay(self) -> None:
        if not self.index_path.exists():
            return
        with self.index_path.open(encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.strip()
                if not line:
                    continue
                try:
                    rec = json.loads(line)
                except json.JSONDecodeError:
                    # torn final write from a crash; everything before it is intact
                    logger.warning("skipping corrupt index line %d in %s", lineno, self.index_path)
                    continue
                if "alias" in rec:
                    self._aliases[rec["alias"]] = rec["uid"]
                elif "pending" in rec:
                    self._pending.setdefault(rec["pending"], rec.get("caption"))
                else:
                    entry = _Entry(
                        uid=rec["uid"],
                        content_hash=rec["content_hash"],
                        media_type=rec["media_type"],
                        width=rec["width"],
                        height=rec["height"],
                        source_url=rec.get("source_url"),
                        caption=rec.get("caption"),
                        provenance=rec.get("provenance", "retrieved"),
                    )
                    self._entries[entry.uid] = entry
                    self._by_hash[entry.content_hash] = entry.uid

    def _append(self, rec: dict) -> None:
        with self.index_path.open("a", encoding="utf-8") as fh:
            fh.write(json.dumps(rec, ensure_ascii=False, sort_keys=True) + "\n")
            fh.flush()
            os.fsync(fh.fileno())

    def _write_blob(self, content_hash: str, data: bytes) -> None:
        path = self.blob_path(content_hash)
        if path.exists():
            return
        tmp = path.with_name(f".{content_hash}.{threading.get_ident()}.tmp")
        tmp.write_bytes(data)
        os.replace(tmp, path)

    # -- public API ----------------------------------------------------

    def register_asset(
        self,
        data: bytes,
        source_url: str | None = None,
        caption: str | None = None,
        *,
        provenance: Provenance = "retrieved",
    ) -> str:
        """Store ``data`` and return its UID.

        Identical bytes always come back with the first UID issued for them;
        a different ``source_url`` for known content is recorded as an alias.
        """
        if len(data) > self.max_bytes:
            raise UndecodableImage(f"undecodable image: payload of {len(data)} bytes exceeds cap of {self.max_bytes}")
        if provenance == "generated":
            source_url = None
        digest = content_digest(data)
        with self._lock:
            existing = self._by_hash.get(digest)
            if existing is not None:
                return self._note_alias(existing, source_url)
        # only new content pays for decoding, and it happens outside the lock
        media_type, width, height = probe_image(data)
        with self._lock:
            existing = self._by_hash.get(digest)
            if existing is not None:  # another thread won the race
                return self._note_alias(existing, source_url)
            uid = None
            if is_url(source_url) and source_url not in self._entries and source_url not in self._aliases:
                uid = source_url
            if uid is None:
                ext = _EXTENSIONS.get(media_type.split("/")[-1].upper(), media_type.split("/")[-1])
                uid = f"{self.uid_prefix}{digest}.{ext}"
            self._write_blob(digest, data)
            if caption is None and source_url:
                caption = self._pending.get(source_url)
            entry = _Entry(uid, digest, media_type, width, height, source_url, caption, provenance)
            self._append(entry.record())
            self._entries[uid] = entry
            self._by_hash[digest] = uid
            self._pending.pop(uid, None)
            return uid

    def _note_alias(self, existing: str, source_url: str | None) -> str:
        if source_url and source_url != existing and self._aliases.get(source_url) != existing:
            if source_url in self._entries:
                logger.warning("url %s already names different content; not aliasing", source_url)
            else:
                self._aliases[source_url] = existing
                self._append({"alias": source_url, "uid": existing})
        return existing

    def canonical(self, uid: str) -> str:
        """Follow an alias to the canonical UID (identity for canonical UIDs)."""
        with self._lock:
            if uid in self._entries:
                return uid
            if uid in self._aliases:
                return self._aliases[uid]
        raise UnknownUid(uid)

    def resolve(self, uid: str) -> VisualAsset:
        with self._lock:
            target = self._aliases.get(uid, uid)
            entry = self._entries.get(target)
        if entry is None:
            raise UnknownUid(uid)
        data = self.blob_path(entry.content_hash).read_bytes()
        return VisualAsset(data=data, **entry.record())

    def contains(self, uid: str) -> bool:
        with self._lock:
            return uid in self._entries or uid in self._aliases

    def uid_for_hash(self, content_hash: str) -> str | None:
        with self._lock:
            return self._by_hash.get(content_hash)

    def uids(self) -> list[str]:
        with self._lock:
            return list(self._entries)

    def __len__(self) -> int:
        with self._lock:
            return len(self._entries)

    def __contains__(self, uid: object) -> bool:
        return isinstance(uid, str) and self.contains(uid)

    # -- lazily fetched search images -----------------------------------

    def note_reference(self, url: str, caption: str | None = None) -> None:
        """Remember an image URL surfaced by search without downloading it."""
        with self._lock:
            if url in self._entries or url in self._aliases or url in self._pending:
                return
            self._pending[url] = caption
            rec = {"pending": url}
            if caption is not None:
                rec["caption"] = caption
            self._append(rec)

    def is_pending(self, url: str) -> bool:
        with self._lock:
            return url in self._pending
