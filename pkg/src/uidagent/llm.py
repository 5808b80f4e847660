"""Chat-completions plumbing shared by the agent, summarizer and synthesis steps."""

from __future__ import annotations

import json
import os
from typing import Any, Protocol, Sequence

import httpx

from .errors import ModelError

DEFAULT_TIMEOUT = 120.0


class ChatClient(Protocol):
    """Plain text-in/text-out completion, used for summaries, judges and composers."""

    def complete(self, prompt: str, *, system: str | None = None) -> str: ...


class ChatCompletionsAPI:
    """Minimal client for an OpenAI-compatible ``/chat/completions`` endpoint."""

    def __init__(
        self,
        base_url: str,
        api_key: str | None = None,
        model: str = "default",
        *,
        client: httpx.Client | None = None,
        timeout: float = DEFAULT_TIMEOUT,
        **params: Any,
    ) -> None:
        self.base_url = base_url.rstrip("/")
        self.api_key = api_key
        self.model = model
        self.params = params
        self.client = client or httpx.Client(timeout=timeout)

    @classmethod
    def from_env(cls, url_var: str = "MODEL_API_URL", key_var: str = "MODEL_API_KEY", **kw: Any) -> ChatCompletionsAPI:
        base = os.environ.get(url_var)
        if not base:
            raise ModelError(f"environment variable {url_var} is not set")
        return cls(base, os.environ.get(key_var), model=os.environ.get("MODEL_NAME", "default"), **kw)

    @property
    def endpoint(self) -> str:
        if self.base_url.endswith("/chat/completions"):
            return self.base_url
        return f"{self.base_url}/chat/completions"

    def create(self, messages: list[dict], tools: Sequence[dict] | None = None) -> dict:
        payload: dict[str, Any] = {"model": self.model, "messages": messages, **self.params}
        if tools:
            payload["tools"] = list(tools)
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        try:
            resp = self.client.post(self.endpoint, json=payload, headers=headers)
            resp.raise_for_status()
            body = resp.json()
            return body["choices"][0]["message"]
        except (httpx.HTTPError, ValueError, KeyError, IndexError) as exc:
            raise ModelError(f"chat completion failed: {exc}") from exc


class HttpChatClient:
    def __init__(self, api: ChatCompletionsAPI) -> None:
        self.api = api

    def complete(self, prompt: str, *, system: str | None = None) -> str:
        messages = []
        if system:
            messages.append({"role": "system", "content": system})
        messages.append({"role": "user", "content": prompt})
        content = self.api.create(messages).get("content")
        if not isinstance(content, str):
            raise ModelError("chat completion returned no text")
        return content


class ScriptedChat:
    """Replays canned replies in order and records the prompts it was given."""

    def __init__(self, replies: Sequence[str | dict]) -> None:
        self.replies = [r if isinstance(r, str) else json.dumps(r, ensure_ascii=False) for r in replies]
        self.prompts: list[str] = []

    def complete(self, prompt: str, *, system: str | None = None) -> str:
        self.prompts.append(prompt)
        if len(self.prompts) > len(self.replies):
            raise ModelError("scripted chat exhausted")
        return self.replies[len(self.prompts) - 1]


def parse_json_reply(text: str) -> Any:
    """Decode a JSON object from a model reply, tolerating code fences and chatter."""
    text = text.strip()
    if text.startswith("```"):
        text = text.strip("`")
        text = text.split("\n", 1)[1] if "\n" in text else text
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        start, end = text.find("{"), text.rfind("}")
        if start != -1 and end > start:
            return json.loads(text[start : end + 1])
        raise
