"""Long-horizon agent loop with keep-recent-K tool-result eviction.

Assistant turns carry their tool calls as ``<tool_call>{json}</tool_call>``
markup, whichever model backend produced them, so recorded trajectories
look the same for scripted replays and live endpoints.
"""

from __future__ import annotations

import base64
import json
import logging
import math
import os
import re
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Literal, Protocol, Sequence

from .assets import AssetStore
from .errors import ModelError
from .llm import ChatCompletionsAPI
from .tools import ToolCall, ToolRegistry, canonical_tool_name, dispatch

logger = logging.getLogger(__name__)

Role = Literal["system", "user", "assistant", "tool"]
Termination = Literal["self", "turn_budget", "context_budget", "error"]

DEFAULT_IMAGE_TOKENS = 1024

FINAL_SUMMARY_PROMPT = (
    "Summarize the above conversation, and output the FINAL ANSWER to the original question. "
    "If a clear answer has already been provided earlier in the conversation, do not rethink or "
    "recalculate it; simply extract that answer and reformat it to match the required format below. "
    "If a definitive answer could not be determined, make a well-informed educated guess based on the "
    "conversation. Wrap the final answer in \\boxed{}."
)

DEFAULT_SYSTEM_PROMPT = (
    "You are a multimodal deep-search agent. Images are referenced by URL-like identifiers; "
    "use fetch_image to look at one and zoom_in to inspect a region. Call at most one tool per turn "
    "using <tool_call>{\"name\": ..., \"arguments\": {...}}</tool_call>. When you are done, give the "
    "final answer wrapped in \\boxed{}."
)


def heuristic_token_count(text: str) -> int:
    return math.ceil(len(text) / 4)


@dataclass
class ContextPolicy:
    max_turns: int = 30
    keep_recent_k: int | None = 5  # None disables eviction
    max_context_tokens: int = 128_000
    image_tokens: int = DEFAULT_IMAGE_TOKENS
    token_counter: Callable[[str], int] = heuristic_token_count
    summarize_on_finish: bool = False
    summary_prompt: str = FINAL_SUMMARY_PROMPT

    def __post_init__(self) -> None:
        if self.max_turns < 1:
            raise ValueError("max_turns must be >= 1")
        if self.keep_recent_k is not None and self.keep_recent_k < 0:
            raise ValueError("keep_recent_k must be >= 0")

    def budgets(self) -> dict:
        return {
            "max_turns": self.max_turns,
            "keep_recent_k": self.keep_recent_k,
            "max_context_tokens": self.max_context_tokens,
            "image_tokens": self.image_tokens,
        }


@dataclass
class Message:
    role: Role
    text: str
    images: list[str] = field(default_factory=list)
    evicted: bool = False
    tool_name: str | None = None
    turn_index: int | None = None

    def to_record(self) -> dict:
        rec = {"role": self.role, "text": self.text, "images": list(self.images), "evicted": self.evicted}
        if self.tool_name is not None:
            rec["tool_name"] = self.tool_name
        if self.turn_index is not None:
            rec["turn_index"] = self.turn_index
        return rec

    @classmethod
    def from_record(cls, rec: dict) -> Message:
        return cls(
            role=rec["role"],
            text=rec["text"],
            images=list(rec.get("images", [])),
            evicted=rec.get("evicted", False),
            tool_name=rec.get("tool_name"),
            turn_index=rec.get("turn_index"),
        )


# --------------------------------------------------------------------------
# assistant-text parsing

_TOOL_CALL = re.compile(r"<tool_call>\s*(.*?)\s*</tool_call>", re.DOTALL)
_THINK = re.compile(r"<think>.*?</think>", re.DOTALL)
_BOXED = re.compile(r"\\?boxed\{")


def parse_tool_calls(text: str) -> tuple[list[ToolCall], list[str]]:
    """Return (well-formed calls, raw bodies of malformed calls)."""
    calls, malformed = [], []
    for body in _TOOL_CALL.findall(text):
        try:
            rec = json.loads(body)
        except json.JSONDecodeError:
            malformed.append(body)
            continue
        if not isinstance(rec, dict) or not isinstance(rec.get("name"), str):
            malformed.append(body)
            continue
        calls.append(ToolCall.from_wire(rec))
    return calls, malformed


def format_tool_call(call: ToolCall) -> str:
    return "<tool_call>" + json.dumps(call.to_wire(), ensure_ascii=False) + "</tool_call>"


def _last_boxed(text: str) -> str | None:
    found = None
    for m in _BOXED.finditer(text):
        depth, i = 1, m.end()
        while i < len(text) and depth:
            if text[i] == "{":
                depth += 1
            elif text[i] == "}":
                depth -= 1
            i += 1
        if depth == 0:
            found = text[m.end() : i - 1].strip()
    return found


def extract_final_answer(assistant_text: str) -> str | None:
    """The content of the last ``boxed{...}``; else the whole text when no tool was called."""
    boxed = _last_boxed(assistant_text)
    if boxed is not None:
        return boxed
    if _TOOL_CALL.search(assistant_text):
        return None
    visible = _THINK.sub("", assistant_text).strip()
    return visible or assistant_text.strip()


# --------------------------------------------------------------------------
# context accounting

_REF = re.compile(r"[a-zA-Z][a-zA-Z0-9+.-]*://[^\s\"'<>|`]+")


def referenced_uids(msg: Message) -> list[str]:
    """Image UIDs and URL-like tokens a message mentions, in order of appearance."""
    seen: dict[str, None] = {}
    for uid in msg.images:
        seen.setdefault(uid, None)
    for token in _REF.findall(msg.text):
        seen.setdefault(token, None)
    return list(seen)


def eviction_placeholder(msg: Message) -> str:
    refs = referenced_uids(msg)
    where = f"{msg.tool_name or 'tool'} result from turn {msg.turn_index}"
    if refs:
        return f"[evicted {where}; references: {' '.join(refs)}]"
    return f"[evicted {where}]"


def apply_eviction(messages: Sequence[Message], policy: ContextPolicy) -> list[Message]:
    """Keep the newest ``keep_recent_k`` tool results whole; stub out the older ones."""
    out = list(messages)
    k = policy.keep_recent_k
    if k is None:
        return out
    tool_positions = [i for i, m in enumerate(out) if m.role == "tool"]
    stale = tool_positions[: max(0, len(tool_positions) - k)]
    for i in stale:
        msg = out[i]
        if msg.evicted:
            continue
        text = eviction_placeholder(msg)
        # never let a stub cost more than the body it replaces; the short
        # alternative keeps the body and names any image-only UIDs after it
        missing = [u for u in msg.images if u not in msg.text]
        short = " ".join([msg.text, *missing]) if missing else msg.text
        if policy.token_counter(short) < policy.token_counter(text):
            text = short
        out[i] = Message("tool", text, images=[], evicted=True, tool_name=msg.tool_name, turn_index=msg.turn_index)
    return out


def count_context(messages: Sequence[Message], policy: ContextPolicy) -> int:
    return sum(policy.token_counter(m.text) + policy.image_tokens * len(m.images) for m in messages)


# --------------------------------------------------------------------------
# model clients


class ModelClient(Protocol):
    def generate(self, messages: Sequence[Message], tools: Sequence[dict] | None) -> str:
        """Return the assistant text; tool calls are embedded as <tool_call> markup."""
        ...


def _render_turn(turn: str | dict) -> str:
    if isinstance(turn, str):
        return turn
    text = turn.get("text", "")
    calls = [format_tool_call(ToolCall.from_wire(c)) for c in turn.get("tool_calls", [])]
    return "\n".join([text, *calls]) if calls else text


class ScriptedModel:
    """Replays a fixed list of assistant turns; raises ModelError when exhausted."""

    def __init__(self, turns: Sequence[str | dict]) -> None:
        self.turns = [_render_turn(t) for t in turns]
        self.calls = 0

    @classmethod
    def from_fixture(cls, fixture_dir: str | os.PathLike, task_id: str) -> ScriptedModel:
        path = Path(fixture_dir) / "model" / f"{task_id}.json"
        rec = json.loads(path.read_text(encoding="utf-8"))
        return cls(rec["turns"] if isinstance(rec, dict) else rec)

    def generate(self, messages, tools):
        if self.calls >= len(self.turns):
            raise ModelError("scripted model has no more turns")
        self.calls += 1
        return self.turns[self.calls - 1]


class ChatToolModel:
    """Drives an OpenAI-compatible chat endpoint with function calling."""

    def __init__(self, api: ChatCompletionsAPI, store: AssetStore) -> None:
        self.api = api
        self.store = store

    def _image_part(self, uid: str) -> dict:
        asset = self.store.resolve(uid)
        b64 = base64.b64encode(asset.data).decode("ascii")
        return {"type": "image_url", "image_url": {"url": f"data:{asset.media_type};base64,{b64}"}}

    def _content(self, text: str, images: list[str]) -> str | list[dict]:
        if not images:
            return text
        return [{"type": "text", "text": text}, *(self._image_part(u) for u in images)]

    def to_wire(self, messages: Sequence[Message]) -> list[dict]:
        wire: list[dict] = []
        pending_id: str | None = None
        for m in messages:
            if m.role == "assistant":
                calls, _ = parse_tool_calls(m.text)
                entry: dict = {"role": "assistant", "content": _TOOL_CALL.sub("", m.text).strip()}
                pending_id = None
                if len(calls) == 1:
                    pending_id = f"call_{m.turn_index}"
                    entry["tool_calls"] = [
                        {
                            "id": pending_id,
                            "type": "function",
                            "function": {"name": calls[0].name, "arguments": json.dumps(calls[0].arguments, ensure_ascii=False)},
                        }
                    ]
                wire.append(entry)
            elif m.role == "tool":
                if pending_id is not None:
                    wire.append({"role": "tool", "tool_call_id": pending_id, "content": m.text})
                else:
                    wire.append({"role": "user", "content": f"<tool_response>\n{m.text}\n</tool_response>"})
                pending_id = None
                if m.images:
                    wire.append({"role": "user", "content": self._content("Images returned by the tool:", m.images)})
            else:
                wire.append({"role": m.role, "content": self._content(m.text, m.images)})
        return wire

    def generate(self, messages, tools):
        reply = self.api.create(self.to_wire(messages), tools)
        text = reply.get("content") or ""
        if isinstance(text, list):
            text = "".join(p.get("text", "") for p in text if isinstance(p, dict))
        if reply.get("reasoning_content"):
            text = f"<think>{reply['reasoning_content']}</think>\n{text}"
        for tc in reply.get("tool_calls") or []:
            fn = tc.get("function", {})
            text += "\n" + format_tool_call(ToolCall.from_wire({"name": fn.get("name", ""), "arguments": fn.get("arguments", "{}")}))
        return text


# --------------------------------------------------------------------------
# trajectory


@dataclass
class ToolCallRecord:
    turn_index: int
    call: ToolCall
    tool_name: str
    is_error: bool
    materialized_images: list[str]
    text: str

    def to_record(self) -> dict:
        return {
            "turn_index": self.turn_index,
            "call": self.call.to_wire(),
            "result": {
                "tool_name": self.tool_name,
                "is_error": self.is_error,
                "materialized_images": list(self.materialized_images),
                "text": self.text,
            },
        }

    @classmethod
    def from_record(cls, rec: dict) -> ToolCallRecord:
        res = rec["result"]
        return cls(
            turn_index=rec["turn_index"],
            call=ToolCall.from_wire(rec["call"]),
            tool_name=res["tool_name"],
            is_error=res["is_error"],
            materialized_images=list(res["materialized_images"]),
            text=res["text"],
        )


@dataclass
class Trajectory:
    task_id: str
    question: str
    input_images: list[str]
    messages: list[Message] = field(default_factory=list)
    tool_calls: list[ToolCallRecord] = field(default_factory=list)
    final_answer: str | None = None
    terminated_by: Termination = "error"
    turns_used: int = 0
    peak_context_tokens: int = 0
    forced_summary: bool = False
    budgets: dict = field(default_factory=dict)
    error: str | None = None
    success: bool | None = None

    def to_record(self) -> dict:
        return {
            "task_id": self.task_id,
            "question": self.question,
            "input_images": list(self.input_images),
            "messages": [m.to_record() for m in self.messages],
            "tool_calls": [t.to_record() for t in self.tool_calls],
            "final_answer": self.final_answer,
            "terminated_by": self.terminated_by,
            "turns_used": self.turns_used,
            "peak_context_tokens": self.peak_context_tokens,
            "forced_summary": self.forced_summary,
            "budgets": dict(self.budgets),
            "error": self.error,
            "success": self.success,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_record(), ensure_ascii=False, sort_keys=True)

    @classmethod
    def from_record(cls, rec: dict) -> Trajectory:
        return cls(
            task_id=rec["task_id"],
            question=rec["question"],
            input_images=list(rec.get("input_images", [])),
            messages=[Message.from_record(m) for m in rec.get("messages", [])],
            tool_calls=[ToolCallRecord.from_record(t) for t in rec.get("tool_calls", [])],
            final_answer=rec.get("final_answer"),
            terminated_by=rec.get("terminated_by", "error"),
            turns_used=rec.get("turns_used", 0),
            peak_context_tokens=rec.get("peak_context_tokens", 0),
            forced_summary=rec.get("forced_summary", False),
            budgets=dict(rec.get("budgets", {})),
            error=rec.get("error"),
            success=rec.get("success"),
        )


def write_trajectories(path: str | os.PathLike, trajectories: Sequence[Trajectory], *, append: bool = False) -> None:
    with open(path, "a" if append else "w", encoding="utf-8") as fh:
        for traj in trajectories:
            fh.write(traj.to_json() + "\n")


def read_trajectories(path: str | os.PathLike) -> list[Trajectory]:
    with open(path, encoding="utf-8") as fh:
        return [Trajectory.from_record(json.loads(line)) for line in fh if line.strip()]


# --------------------------------------------------------------------------
# the loop


def question_message(question: str, input_images: Sequence[str]) -> Message:
    lines = [question]
    lines += [f"Image URL: {uid}" for uid in input_images]
    return Message("user", "\n".join(lines), images=list(input_images))


class _Run:
    def __init__(self, model, registry, policy, retries, backoff, sleep):
        self.model = model
        self.registry = registry
        self.policy = policy
        self.retries = retries
        self.backoff = backoff
        self.sleep = sleep
        self.history: list[Message] = []
        self.peak = 0

    def admit(self) -> list[Message] | None:
        """Context for the next model call, or None when it would blow the token budget."""
        context = apply_eviction(self.history, self.policy)
        tokens = count_context(context, self.policy)
        if tokens > self.policy.max_context_tokens:
            return None
        self.peak = max(self.peak, tokens)
        return context

    def call(self, context: list[Message], tools: list[dict] | None) -> str:
        last: Exception | None = None
        for attempt in range(self.retries):
            try:
                return self.model.generate(context, tools)
            except ModelError as exc:
                last = exc
                if attempt + 1 < self.retries:
                    self.sleep(self.backoff * 2**attempt)
        raise ModelError(f"model failed after {self.retries} attempts: {last}")


def run_task(
    question: str,
    input_images: Sequence[str],
    model: ModelClient,
    registry: ToolRegistry,
    store: AssetStore,
    policy: ContextPolicy | None = None,
    *,
    task_id: str = "task",
    system_prompt: str | None = DEFAULT_SYSTEM_PROMPT,
    retries: int = 3,
    backoff: float = 0.5,
    sleep: Callable[[float], None] = time.sleep,
) -> Trajectory:
    policy = policy or ContextPolicy()
    for uid in input_images:
        store.resolve(uid)  # dangling input references are a caller bug
    run = _Run(model, registry, policy, retries, backoff, sleep)
    if system_prompt:
        run.history.append(Message("system", system_prompt))
    run.history.append(question_message(question, input_images))
    traj = Trajectory(task_id=task_id, question=question, input_images=list(input_images), budgets=policy.budgets())
    tools = registry.schemas()

    def finish_with_summary(tools_for_call) -> str | None:
        run.history.append(Message("user", policy.summary_prompt))
        context = run.admit()
        if context is None:
            return None
        text = run.call(context, tools_for_call)
        run.history.append(Message("assistant", text, turn_index=traj.turns_used + 1))
        return text

    try:
        while True:
            if traj.turns_used >= policy.max_turns:
                # the wrap-up call sits outside the turn budget
                traj.forced_summary = True
                text = finish_with_summary(None)
                traj.terminated_by = "turn_budget"
                if text is None:
                    traj.terminated_by = "context_budget"
                else:
                    traj.final_answer = _last_boxed(text) or extract_final_answer(text)
                break
            context = run.admit()
            if context is None:
                traj.terminated_by = "context_budget"
                break
            text = run.call(context, tools)
            traj.turns_used += 1
            turn = traj.turns_used
            run.history.append(Message("assistant", text, turn_index=turn))
            calls, malformed = parse_tool_calls(text)

            if not calls and not malformed:
                answer = extract_final_answer(text)
                if policy.summarize_on_finish and _last_boxed(text) is None and turn < policy.max_turns:
                    summary = finish_with_summary(None)
                    if summary is not None:
                        traj.turns_used += 1
                        answer = extract_final_answer(summary) or answer
                traj.final_answer = answer
                traj.terminated_by = "self"
                break

            if len(calls) + len(malformed) > 1:
                run.history.append(
                    Message("tool", "error: only one tool call per turn is allowed; retry with a single call", tool_name="error", turn_index=turn)
                )
                continue
            if malformed:
                run.history.append(Message("tool", f"error: malformed tool call: {malformed[0]}", tool_name="error", turn_index=turn))
                continue
            call = calls[0]
            result = dispatch(call, registry, turn_index=turn)
            tool_name = canonical_tool_name(call.name) or call.name
            run.history.append(Message("tool", result.text, images=list(result.materialized_images), tool_name=tool_name, turn_index=turn))
            traj.tool_calls.append(
                ToolCallRecord(turn, call, tool_name, result.is_error, list(result.materialized_images), result.text)
            )
    except ModelError as exc:
        logger.warning("task %s stopped: %s", task_id, exc)
        traj.terminated_by = "error"
        traj.error = str(exc)

    final_view = apply_eviction(run.history, policy)
    traj.messages = [
        Message(m.role, m.text, list(m.images), view.evicted, m.tool_name, m.turn_index)
        for m, view in zip(run.history, final_view)
    ]
    traj.peak_context_tokens = run.peak
    return traj
