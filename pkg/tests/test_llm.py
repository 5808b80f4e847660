from __future__ import annotations

import json

import httpx
import pytest

from uidagent.errors import ModelError
from uidagent.llm import ChatCompletionsAPI, HttpChatClient, ScriptedChat, parse_json_reply


def _api(handler, **kw) -> ChatCompletionsAPI:
    return ChatCompletionsAPI("https://llm.test/v1", "secret", "m", client=httpx.Client(transport=httpx.MockTransport(handler)), **kw)


def test_create_posts_openai_payload():
    seen = {}

    def handler(request: httpx.Request) -> httpx.Response:
        seen["url"] = str(request.url)
        seen["auth"] = request.headers["Authorization"]
        seen["body"] = json.loads(request.content)
        return httpx.Response(200, json={"choices": [{"message": {"role": "assistant", "content": "hi"}}]})

    api = _api(handler, temperature=0.0)
    msg = api.create([{"role": "user", "content": "x"}], [{"type": "function"}])
    assert msg["content"] == "hi"
    assert seen["url"] == "https://llm.test/v1/chat/completions"
    assert seen["auth"] == "Bearer secret"
    assert seen["body"]["tools"] and seen["body"]["temperature"] == 0.0


def test_errors_become_model_error():
    with pytest.raises(ModelError):
        _api(lambda r: httpx.Response(503)).create([])
    with pytest.raises(ModelError):
        _api(lambda r: httpx.Response(200, json={"choices": []})).create([])


def test_http_chat_client_system_prompt():
    bodies = []

    def handler(request):
        bodies.append(json.loads(request.content))
        return httpx.Response(200, json={"choices": [{"message": {"content": "ok"}}]})

    assert HttpChatClient(_api(handler)).complete("p", system="s") == "ok"
    assert [m["role"] for m in bodies[0]["messages"]] == ["system", "user"]


def test_from_env(monkeypatch):
    monkeypatch.delenv("MODEL_API_URL", raising=False)
    with pytest.raises(ModelError):
        ChatCompletionsAPI.from_env()
    monkeypatch.setenv("MODEL_API_URL", "https://x.test/v1/chat/completions")
    assert ChatCompletionsAPI.from_env().endpoint == "https://x.test/v1/chat/completions"


def test_scripted_chat():
    chat = ScriptedChat(["a", {"k": 1}])
    assert chat.complete("1") == "a"
    assert json.loads(chat.complete("2")) == {"k": 1}
    with pytest.raises(ModelError):
        chat.complete("3")


def test_parse_json_reply():
    assert parse_json_reply('```json\n{"a": 1}\n```') == {"a": 1}
    assert parse_json_reply('Sure! {"a": [1, 2]} done') == {"a": [1, 2]}
    with pytest.raises(json.JSONDecodeError):
        parse_json_reply("no json here")
