"""Trajectory distillation: prefiltering, rejection sampling, SFT export, statistics."""

from __future__ import annotations

import json
import math
import os
import re
import unicodedata
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

from .agent import ModelClient, Trajectory, extract_final_answer, question_message
from .assets import AssetStore
from .errors import DanglingUid, EmptyDataset, UidAgentError, UnknownUid

Grader = Callable[[str | None, str], bool]

_NUMBER = re.compile(r"^[-+]?\d[\d,]*(\.\d+)?$|^[-+]?\.\d+$")


def normalize_answer(text: str) -> str:
    text = unicodedata.normalize("NFKC", text).casefold().strip()
    text = " ".join(text.split())
    return text.strip(" .,;:!?\"'`")


def _as_number(text: str) -> float | None:
    text = text.replace(" ", "")
    if not _NUMBER.match(text):
        return None
    try:
        return float(text.replace(",", ""))
    except ValueError:
        return None


def exact_match_grader(prediction: str | None, gold: str) -> bool:
    """Case/whitespace-normalized equality with a numeric fallback ("5" == "5.0")."""
    if prediction is None:
        return False
    p, g = normalize_answer(prediction), normalize_answer(gold)
    if p == g:
        return True
    pn, gn = _as_number(p), _as_number(g)
    return pn is not None and gn is not None and math.isclose(pn, gn, rel_tol=1e-9, abs_tol=1e-12)


@dataclass(frozen=True)
class FilterCriteria:
    max_turns: int = 40
    max_context_tokens: int = 64_000
    require_success: bool = True

    def __post_init__(self) -> None:
        if self.max_turns <= 0 or self.max_context_tokens <= 0:
            raise ValueError("filter bounds must be positive")


def prefilter_query(
    question: str,
    images: Sequence[str],
    judge_model: ModelClient,
    gold: str,
    grader: Grader = exact_match_grader,
) -> bool:
    """Keep the query only if the judge cannot answer it without search tools."""
    try:
        reply = judge_model.generate([question_message(question, images)], None)
    except UidAgentError:
        return True
    return not grader(extract_final_answer(reply), gold)


def rejection_filter(
    traj: Trajectory,
    gold: str,
    grader: Grader = exact_match_grader,
    criteria: FilterCriteria = FilterCriteria(),
) -> bool:
    if criteria.require_success and not grader(traj.final_answer, gold):
        return False
    return traj.turns_used <= criteria.max_turns and traj.peak_context_tokens <= criteria.max_context_tokens


@dataclass
class SftMessage:
    role: str
    text: str
    images: list[str] = field(default_factory=list)
    tool_name: str | None = None

    def to_record(self) -> dict:
        rec = {"role": self.role, "text": self.text, "images": list(self.images)}
        if self.tool_name is not None:
            rec["tool_name"] = self.tool_name
        return rec


@dataclass
class SftRecord:
    messages: list[SftMessage]
    loss_mask: list[bool]
    source_dataset: str
    turns: int
    task_id: str = ""
    assets: dict[str, str] = field(default_factory=dict)  # uid -> content hash

    def __post_init__(self) -> None:
        if len(self.loss_mask) != len(self.messages):
            raise ValueError("one mask value per message")

    @property
    def tool_names(self) -> list[str]:
        return [m.tool_name or "unknown" for m in self.messages if m.role == "tool"]

    def to_record(self) -> dict:
        return {
            "task_id": self.task_id,
            "source_dataset": self.source_dataset,
            "turns": self.turns,
            "messages": [m.to_record() for m in self.messages],
            "loss_mask": list(self.loss_mask),
            "assets": dict(self.assets),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_record(), ensure_ascii=False, sort_keys=True)

    @classmethod
    def from_record(cls, rec: dict) -> SftRecord:
        return cls(
            messages=[SftMessage(m["role"], m["text"], list(m.get("images", [])), m.get("tool_name")) for m in rec["messages"]],
            loss_mask=[bool(x) for x in rec["loss_mask"]],
            source_dataset=rec["source_dataset"],
            turns=rec["turns"],
            task_id=rec.get("task_id", ""),
            assets=dict(rec.get("assets", {})),
        )


def export_sft(traj: Trajectory, store: AssetStore, source_dataset: str = "unlabeled") -> SftRecord:
    """Copy the conversation with a loss mask that is true exactly on assistant turns."""
    messages, mask, assets = [], [], {}
    for msg in traj.messages:
        for uid in msg.images:
            try:
                asset = store.resolve(uid)
            except UnknownUid:
                raise DanglingUid(f"{traj.task_id}: image {uid!r} no longer resolves") from None
            assets[uid] = asset.content_hash
        messages.append(SftMessage(msg.role, msg.text, list(msg.images), msg.tool_name))
        mask.append(msg.role == "assistant")
    turns = sum(1 for m in messages if m.role == "tool")
    return SftRecord(messages, mask, source_dataset, turns, task_id=traj.task_id, assets=assets)


@dataclass
class DatasetStats:
    counts: dict[str, int]
    mean_turns: dict[str, float]
    tool_histogram: dict[str, int]

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def to_record(self) -> dict:
        return {"counts": self.counts, "mean_turns": self.mean_turns, "tool_histogram": self.tool_histogram, "total": self.total}

    def render_table(self, order: Sequence[str] | None = None) -> str:
        sources = list(order) if order else sorted(self.counts)
        header = ["Dataset", *sources]
        rows = [
            ["Num. of Samples", *(str(self.counts.get(s, 0)) for s in sources)],
            ["Avg. Turns", *(f"{self.mean_turns[s]:.2f}" if s in self.mean_turns else "-" for s in sources)],
        ]
        widths = [max(len(r[i]) for r in (header, *rows)) for i in range(len(header))]
        fmt = lambda r: "  ".join(c.ljust(w) if i == 0 else c.rjust(w) for i, (c, w) in enumerate(zip(r, widths)))  # noqa: E731
        return "\n".join([fmt(header), fmt(["-" * w for w in widths]), *(fmt(r) for r in rows)])


def compute_stats(records: Sequence[SftRecord]) -> DatasetStats:
    if not records:
        raise EmptyDataset("no records")
    counts: Counter[str] = Counter()
    turn_sums: dict[str, int] = defaultdict(int)
    tools: Counter[str] = Counter()
    for rec in records:
        counts[rec.source_dataset] += 1
        names = rec.tool_names
        turn_sums[rec.source_dataset] += len(names)
        tools.update(names)
    mean = {s: turn_sums[s] / counts[s] for s in counts}
    return DatasetStats(dict(counts), mean, dict(tools))


# --------------------------------------------------------------------------
# file formats


@dataclass
class Manifest:
    """Source labels and gold answers keyed by task id."""

    items: dict[str, dict]
    default_source: str = "unlabeled"

    @classmethod
    def load(cls, path: str | os.PathLike) -> Manifest:
        rec = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(items=rec.get("items", {}), default_source=rec.get("default_source", "unlabeled"))

    def source(self, task_id: str) -> str:
        return self.items.get(task_id, {}).get("source", self.default_source)

    def gold(self, task_id: str) -> str | None:
        return self.items.get(task_id, {}).get("gold")


def write_sft(path: str | os.PathLike, records: Sequence[SftRecord]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(rec.to_json() + "\n")


def read_sft(path: str | os.PathLike) -> list[SftRecord]:
    with open(path, encoding="utf-8") as fh:
        return [SftRecord.from_record(json.loads(line)) for line in fh if line.strip()]


def assets_manifest(records: Sequence[SftRecord], store: AssetStore) -> dict:
    """uid -> {content_hash, media_type, width, height, blob} for every image the records use."""
    out = {}
    for rec in records:
        for uid, digest in rec.assets.items():
            if uid in out:
                continue
            asset = store.resolve(uid)
            out[uid] = {
                "content_hash": digest,
                "media_type": asset.media_type,
                "width": asset.width,
                "height": asset.height,
                "blob": f"blobs/{digest}",
            }
    return out
