"""Wiring helpers: build tool contexts for replay or live operation."""

from __future__ import annotations

import os
from importlib import resources
from pathlib import Path

from .assets import AssetStore
from .fetchers import FixturePageFetcher, HttpImageFetcher, HttpPageFetcher, ReplayImageFetcher
from .llm import ChatCompletionsAPI, HttpChatClient
from .middleware import ChatSummarizer, LeadSentenceSummarizer, Summarizer
from .search import ReplaySearchBackend, SerperBackend
from .tools import DEFAULT_TOP_K, ToolContext, ToolRegistry


def appendix_fixture_dir() -> Path:
    """Location of the packaged replay fixture for the poster-trees case."""
    return Path(str(resources.files("uidagent") / "fixtures" / "appendix"))


def replay_context(fixture_dir: str | os.PathLike, store: AssetStore, *, top_k: int = DEFAULT_TOP_K) -> ToolContext:
    """Tools backed entirely by files under ``fixture_dir``.

    Layout: ``search/<tool>/<key>.json``, ``pages/<key>.json``,
    ``images/index.json`` (+ image files), ``model/<task_id>.json``.
    """
    root = Path(fixture_dir)
    return ToolContext(
        store=store,
        search=ReplaySearchBackend(root),
        page_fetcher=FixturePageFetcher(root / "pages"),
        image_fetcher=ReplayImageFetcher(root / "images"),
        summarizer=LeadSentenceSummarizer(),
        top_k=top_k,
    )


def live_summarizer() -> Summarizer:
    url = os.environ.get("SUMMARIZER_API_URL")
    if not url:
        return LeadSentenceSummarizer()
    api = ChatCompletionsAPI(url, os.environ.get("SUMMARIZER_API_KEY") or os.environ.get("MODEL_API_KEY"))
    return ChatSummarizer(HttpChatClient(api))


def live_context(store: AssetStore, *, top_k: int = DEFAULT_TOP_K) -> ToolContext:
    return ToolContext(
        store=store,
        search=SerperBackend.from_env(),
        page_fetcher=HttpPageFetcher(),
        image_fetcher=HttpImageFetcher(),
        summarizer=live_summarizer(),
        top_k=top_k,
    )


def replay_registry(fixture_dir: str | os.PathLike, store: AssetStore, **kw) -> ToolRegistry:
    return ToolRegistry(replay_context(fixture_dir, store, **kw))
