"""The agent's tool interface and its dispatcher.

Search and browse tools only ever return text; pixels enter the model
context exclusively through ``fetch_image`` and ``zoom_in``, which list the
UIDs to materialize in ``ToolResult.materialized_images``. Every failure is
returned as an ``is_error`` result so the agent loop can keep going.
"""

from __future__ import annotations

import io
import json
import logging
from dataclasses import dataclass, field
from typing import Any, Callable

from PIL import Image

from .assets import AssetStore, is_url
from .errors import FetchError, SearchBackendError, SummarizerUnavailable, UidAgentError, UndecodableImage, UnknownUid
from .fetchers import ImageFetcher, PageFetcher
from .middleware import Summarizer, intercept, render
from .search import SearchBackend, SearchHit

logger = logging.getLogger(__name__)

DEFAULT_TOP_K = 10

WIRE_NAMES = {
    "google_search": "tool-google-search-google_search",
    "image_search": "tool-google-search-image_search",
    "visual_search": "tool-google-search-visual_search",
    "scrape_website": "jina_scrape_llm_summary-scrape_and_extract_info",
    "fetch_image": "tool-fetch-image-fetch_image",
    "zoom_in": "tool-image-processing-zoom_in",
}
CANONICAL_NAMES = {wire: name for name, wire in WIRE_NAMES.items()}
VISUAL_TOOLS = frozenset({"fetch_image", "zoom_in"})


def canonical_tool_name(name: str) -> str | None:
    if name in WIRE_NAMES:
        return name
    return CANONICAL_NAMES.get(name)


@dataclass(frozen=True)
class ToolCall:
    name: str
    arguments: dict[str, Any] = field(default_factory=dict)

    def to_wire(self) -> dict:
        return {"name": self.name, "arguments": self.arguments}

    @classmethod
    def from_wire(cls, rec: dict) -> ToolCall:
        """Accept arguments either as an object or as a JSON-encoded string."""
        args = rec.get("arguments", {})
        if isinstance(args, str):
            try:
                args = json.loads(args) if args.strip() else {}
            except json.JSONDecodeError:
                args = {"__unparsed__": args}
        if not isinstance(args, dict):
            args = {"__unparsed__": args}
        return cls(name=str(rec.get("name", "")), arguments=args)


@dataclass
class ToolResult:
    text: str
    tool_name: str
    materialized_images: list[str] = field(default_factory=list)
    is_error: bool = False
    turn_index: int = 0

    def __post_init__(self) -> None:
        if self.is_error and self.materialized_images:
            raise ValueError("error results cannot materialize images")

    def to_record(self) -> dict:
        return {
            "text": self.text,
            "tool_name": self.tool_name,
            "materialized_images": list(self.materialized_images),
            "is_error": self.is_error,
            "turn_index": self.turn_index,
        }


def error_result(tool_name: str, message: str) -> ToolResult:
    return ToolResult(text=message, tool_name=tool_name, is_error=True)


@dataclass
class ToolContext:
    """Backends and shared state the tools operate on."""

    store: AssetStore
    search: SearchBackend | None = None
    page_fetcher: PageFetcher | None = None
    image_fetcher: ImageFetcher | None = None
    summarizer: Summarizer | None = None
    top_k: int = DEFAULT_TOP_K


# --------------------------------------------------------------------------
# result formatting


def format_web_hits(hits: list[SearchHit]) -> str:
    if not hits:
        return "0 results"
    lines = []
    for i, hit in enumerate(hits, 1):
        parts = [f'"title": {json.dumps(hit.title, ensure_ascii=False)}', f'"link": {json.dumps(hit.link or hit.image_url, ensure_ascii=False)}']
        if hit.snippet:
            parts.append(f'"snippet": {json.dumps(hit.snippet, ensure_ascii=False)}')
        lines.append(f"{i}. " + ", ".join(parts))
    return "\n".join(lines)


def format_image_hits(hits: list[SearchHit]) -> str:
    if not hits:
        return "0 results"
    lines = []
    for i, hit in enumerate(hits, 1):
        lines.append(f"{i}. | Title: {hit.title} | Image URL: {hit.image_url or ''} | Source: {hit.source_url or hit.link or ''}")
    return "\n".join(lines)


# --------------------------------------------------------------------------
# tools


def google_search(ctx: ToolContext, q: str, top_k: int | None = None) -> ToolResult:
    if not q or not q.strip():
        return error_result("google_search", "empty query")
    if ctx.search is None:
        return error_result("google_search", "search backend not configured")
    try:
        hits = ctx.search.search("google_search", q, top_k or ctx.top_k)
    except SearchBackendError as exc:
        return error_result("google_search", f"search failed: {exc}")
    return ToolResult(text=format_web_hits(hits[: top_k or ctx.top_k]), tool_name="google_search")


def _image_hits(ctx: ToolContext, kind: str, query: str, top_k: int | None) -> ToolResult:
    try:
        hits = ctx.search.search(kind, query, top_k or ctx.top_k)[: top_k or ctx.top_k]
    except SearchBackendError as exc:
        return error_result(kind, f"search failed: {exc}")
    for hit in hits:
        if hit.image_url:
            ctx.store.note_reference(hit.image_url, hit.title or None)
    return ToolResult(text=format_image_hits(hits), tool_name=kind)


def image_search(ctx: ToolContext, q: str, top_k: int | None = None) -> ToolResult:
    if not q or not q.strip():
        return error_result("image_search", "empty query")
    if ctx.search is None:
        return error_result("image_search", "search backend not configured")
    return _image_hits(ctx, "image_search", q, top_k)


def visual_search(ctx: ToolContext, image_url: str, top_k: int | None = None) -> ToolResult:
    if ctx.search is None:
        return error_result("visual_search", "search backend not configured")
    if ctx.store.contains(image_url):
        ref = ctx.store.canonical(image_url)
    elif is_url(image_url):
        ref = image_url
    else:
        return error_result("visual_search", f"unknown image reference: {image_url}")
    return _image_hits(ctx, "visual_search", ref, top_k)


def scrape_website(ctx: ToolContext, url: str, info_to_extract: str | None = None) -> ToolResult:
    if not is_url(url):
        return error_result("scrape_website", f"malformed url: {url!r}")
    if ctx.page_fetcher is None or ctx.summarizer is None:
        return error_result("scrape_website", "page fetcher or summarizer not configured")
    try:
        doc = ctx.page_fetcher.fetch(url)
    except FetchError as exc:
        return error_result("scrape_website", f"Scraping failed for {url}: {exc}")
    try:
        serialized = intercept(doc, ctx.store, ctx.summarizer, info_to_extract, ctx.image_fetcher)
    except SummarizerUnavailable as exc:
        return error_result("scrape_website", f"summarizer unavailable: {exc}")
    return ToolResult(text=render(serialized), tool_name="scrape_website")


def fetch_image(ctx: ToolContext, url: str) -> ToolResult:
    """Load an image into the model context, downloading it on first use."""
    store = ctx.store
    if store.contains(url):
        return ToolResult(text=f"Image downloaded from: {url}", tool_name="fetch_image", materialized_images=[store.canonical(url)])
    if not is_url(url):
        return error_result("fetch_image", f"unknown image reference: {url}")
    if ctx.image_fetcher is None:
        return error_result("fetch_image", "image fetcher not configured")
    try:
        data = ctx.image_fetcher.fetch(url)
    except FetchError as exc:
        return error_result("fetch_image", f"failed to fetch image: {exc}")
    try:
        uid = store.register_asset(data, source_url=url)
    except UndecodableImage:
        return error_result("fetch_image", f"undecodable image at {url}")
    return ToolResult(text=f"Image downloaded from: {url}", tool_name="fetch_image", materialized_images=[uid])


def crop_bounds_message(width: int, height: int, x: int, y: int, w: int, h: int) -> str:
    return (
        "Your cropped region extends beyond image bounds "
        f"(image size: {width}x{height}, your cropped region: ({x}+{w})x({y}+{h}))"
    )


def crop_image(img: Image.Image, x: int, y: int, w: int, h: int) -> bytes:
    """Lossless PNG crop; palette and alpha modes are kept so crops compose exactly."""
    if img.mode not in ("1", "L", "LA", "P", "RGB", "RGBA", "I", "I;16"):
        img = img.convert("RGB")
    out = io.BytesIO()
    img.crop((x, y, x + w, y + h)).save(out, format="PNG")
    return out.getvalue()


def zoom_in(ctx: ToolContext, image_url: str, x: int, y: int, width: int, height: int) -> ToolResult:
    try:
        asset = ctx.store.resolve(image_url)
    except UnknownUid:
        return error_result("zoom_in", f"unknown image reference: {image_url}")
    if width <= 0 or height <= 0:
        return error_result("zoom_in", "width and height must be positive")
    if x < 0 or y < 0 or x + width > asset.width or y + height > asset.height:
        return error_result("zoom_in", crop_bounds_message(asset.width, asset.height, x, y, width, height))
    data = crop_image(asset.open(), x, y, width, height)
    u_new = ctx.store.register_asset(
        data, caption=f"Zoomed region: ({x}, {y}, {width}, {height}) from {asset.uid}", provenance="generated"
    )
    text = (
        f"[SUCCESS]: Zoomed in on region ({x}, {y}, {width}, {height}). "
        f"Image dimensions: {width}x{height}. Image URL: {u_new}"
    )
    return ToolResult(text=text, tool_name="zoom_in", materialized_images=[u_new])


# --------------------------------------------------------------------------
# registry and dispatch


@dataclass(frozen=True)
class Param:
    name: str
    type: type
    description: str
    required: bool = True
    aliases: tuple[str, ...] = ()


@dataclass(frozen=True)
class ToolSpec:
    name: str
    func: Callable[..., ToolResult]
    description: str
    params: tuple[Param, ...]

    def schema(self, wire_name: str | None = None) -> dict:
        props = {}
        for p in self.params:
            props[p.name] = {"type": "integer" if p.type is int else "string", "description": p.description}
        return {
            "type": "function",
            "function": {
                "name": wire_name or self.name,
                "description": self.description,
                "parameters": {
                    "type": "object",
                    "properties": props,
                    "required": [p.name for p in self.params if p.required],
                },
            },
        }


TOOL_SPECS: dict[str, ToolSpec] = {
    spec.name: spec
    for spec in (
        ToolSpec(
            "google_search",
            google_search,
            "Web search. Returns titles, links and snippets.",
            (Param("q", str, "search query", aliases=("query",)), Param("top_k", int, "number of results", required=False)),
        ),
        ToolSpec(
            "image_search",
            image_search,
            "Text-to-image search. Returns image URLs with their source pages.",
            (Param("q", str, "search query", aliases=("query",)), Param("top_k", int, "number of results", required=False)),
        ),
        ToolSpec(
            "visual_search",
            visual_search,
            "Reverse image search for an image URL or UID.",
            (Param("image_url", str, "image URL or UID", aliases=("url", "uid", "image")), Param("top_k", int, "number of results", required=False)),
        ),
        ToolSpec(
            "scrape_website",
            scrape_website,
            "Fetch a webpage, summarize it with respect to info_to_extract and list its images by URL.",
            (Param("url", str, "page URL"), Param("info_to_extract", str, "what to look for", required=False)),
        ),
        ToolSpec(
            "fetch_image",
            fetch_image,
            "Load the image behind a URL or UID into context for visual inspection.",
            (Param("url", str, "image URL or UID", aliases=("image_url", "uid")),),
        ),
        ToolSpec(
            "zoom_in",
            zoom_in,
            "Crop the region (x, y, width, height) of an image and load the crop into context.",
            (
                Param("image_url", str, "image URL or UID", aliases=("url", "uid")),
                Param("x", int, "left edge in pixels"),
                Param("y", int, "top edge in pixels"),
                Param("width", int, "crop width in pixels", aliases=("w",)),
                Param("height", int, "crop height in pixels", aliases=("h",)),
            ),
        ),
    )
}


class ArgumentError(Exception):
    pass


def _coerce(param: Param, value: Any) -> Any:
    if param.type is int:
        if isinstance(value, bool):
            raise ArgumentError(f"argument type mismatch: {param.name} must be an integer")
        if isinstance(value, int):
            return value
        if isinstance(value, float) and value.is_integer():
            return int(value)
        raise ArgumentError(f"argument type mismatch: {param.name} must be an integer")
    if not isinstance(value, str):
        raise ArgumentError(f"argument type mismatch: {param.name} must be a string")
    return value


def bind_arguments(spec: ToolSpec, arguments: dict[str, Any]) -> dict[str, Any]:
    if "__unparsed__" in arguments:
        raise ArgumentError("malformed arguments: not a JSON object")
    remaining = dict(arguments)
    bound: dict[str, Any] = {}
    errors: list[str] = []
    for param in spec.params:
        keys = [k for k in (param.name, *param.aliases) if k in remaining]
        if not keys:
            if param.required:
                errors.append(f"missing argument: {param.name}")
            continue
        value = remaining.pop(keys[0])
        for extra in keys[1:]:
            remaining.pop(extra)
        try:
            bound[param.name] = _coerce(param, value)
        except ArgumentError as exc:
            errors.insert(0, str(exc))
    if remaining:
        errors.append("unexpected argument: " + ", ".join(sorted(remaining)))
    if errors:
        raise ArgumentError("; ".join(errors))
    return bound


class ToolRegistry:
    """Immutable name -> tool table bound to one ToolContext."""

    def __init__(self, ctx: ToolContext, tools: list[str] | None = None, *, wire_names: bool = True) -> None:
        self.ctx = ctx
        names = tools if tools is not None else list(TOOL_SPECS)
        unknown = set(names) - set(TOOL_SPECS)
        if unknown:
            raise ValueError(f"unknown tools: {sorted(unknown)}")
        self._tools = {n: TOOL_SPECS[n] for n in names}
        self.wire_names = wire_names

    @property
    def names(self) -> list[str]:
        return list(self._tools)

    def lookup(self, name: str) -> ToolSpec | None:
        canonical = canonical_tool_name(name)
        return self._tools.get(canonical) if canonical else None

    def schemas(self) -> list[dict]:
        return [spec.schema(WIRE_NAMES[n] if self.wire_names else n) for n, spec in self._tools.items()]


def dispatch(call: ToolCall, registry: ToolRegistry, turn_index: int = 0) -> ToolResult:
    """Route ``call`` to its tool. Never raises: failures come back as is_error results."""
    spec = registry.lookup(call.name)
    if spec is None:
        result = error_result(call.name, f"unknown tool: {call.name}")
    else:
        try:
            kwargs = bind_arguments(spec, call.arguments)
            result = spec.func(registry.ctx, **kwargs)
        except ArgumentError as exc:
            result = error_result(spec.name, str(exc))
        except UidAgentError as exc:
            result = error_result(spec.name, f"{type(exc).__name__}: {exc}")
        except Exception as exc:  # a tool bug must not kill a long-horizon run
            logger.exception("tool %s crashed", spec.name)
            result = error_result(spec.name, f"tool failure: {exc}")
    result.turn_index = turn_index
    return result
