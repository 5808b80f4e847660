"""Benchmark sweeps: run items, grade answers, and compute the turn-scaling curve."""

from __future__ import annotations

import json
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

from .agent import ContextPolicy, ModelClient, Trajectory, run_task
from .assets import AssetStore
from .dataset import Grader, exact_match_grader
from .errors import EmptyBenchmark, UidAgentError
from .fetchers import ImageFetcher
from .tools import ToolRegistry

logger = logging.getLogger(__name__)


@dataclass
class BenchItem:
    item_id: str
    question: str
    input_image_urls: list[str] = field(default_factory=list)
    gold_answer: str = ""
    benchmark_label: str = ""

    def __post_init__(self) -> None:
        if not self.question.strip():
            raise ValueError(f"item {self.item_id!r} has an empty question")

    @classmethod
    def from_record(cls, rec: dict) -> BenchItem:
        return cls(
            item_id=str(rec["item_id"]),
            question=rec["question"],
            input_image_urls=list(rec.get("input_image_urls", [])),
            gold_answer=str(rec.get("gold_answer", "")),
            benchmark_label=rec.get("benchmark_label", ""),
        )


@dataclass
class EvalRecord:
    item_id: str
    final_answer: str | None
    correct: bool
    turns_used: int
    terminated_by: str

    def __post_init__(self) -> None:
        if self.correct and self.final_answer is None:
            raise ValueError("a correct record needs an answer")

    def to_json(self) -> str:
        return json.dumps(asdict(self), ensure_ascii=False, sort_keys=True)

    @classmethod
    def from_record(cls, rec: dict) -> EvalRecord:
        return cls(rec["item_id"], rec.get("final_answer"), bool(rec["correct"]), int(rec["turns_used"]), rec["terminated_by"])


def load_items(path: str | os.PathLike) -> list[BenchItem]:
    with open(path, encoding="utf-8") as fh:
        return [BenchItem.from_record(json.loads(line)) for line in fh if line.strip()]


def write_records(path: str | os.PathLike, records: Sequence[EvalRecord]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(rec.to_json() + "\n")


def read_records(path: str | os.PathLike) -> list[EvalRecord]:
    with open(path, encoding="utf-8") as fh:
        return [EvalRecord.from_record(json.loads(line)) for line in fh if line.strip()]


def _register_inputs(item: BenchItem, store: AssetStore, image_fetcher: ImageFetcher | None) -> list[str]:
    uids = []
    for url in item.input_image_urls:
        if store.contains(url):
            uids.append(store.canonical(url))
            continue
        if image_fetcher is None:
            raise UidAgentError(f"input image {url} is not in the store and no fetcher was given")
        uids.append(store.register_asset(image_fetcher.fetch(url), source_url=url, provenance="retrieved"))
    return uids


def run_item(
    item: BenchItem,
    model: ModelClient,
    registry: ToolRegistry,
    store: AssetStore,
    policy: ContextPolicy,
    grader: Grader = exact_match_grader,
    image_fetcher: ImageFetcher | None = None,
    **run_kw,
) -> tuple[EvalRecord, Trajectory | None]:
    try:
        uids = _register_inputs(item, store, image_fetcher)
        traj = run_task(item.question, uids, model, registry, store, policy, task_id=item.item_id, **run_kw)
    except Exception as exc:  # a broken item must not stop the sweep
        logger.warning("item %s failed: %s", item.item_id, exc)
        return EvalRecord(item.item_id, None, False, 0, "error"), None
    correct = traj.final_answer is not None and grader(traj.final_answer, item.gold_answer)
    traj.success = correct
    return EvalRecord(item.item_id, traj.final_answer, correct, traj.turns_used, traj.terminated_by), traj


def run_benchmark(
    items: Sequence[BenchItem],
    model_factory: Callable[[BenchItem], ModelClient],
    registry: ToolRegistry | Callable[[BenchItem], ToolRegistry],
    store: AssetStore,
    policy: ContextPolicy | None = None,
    grader: Grader = exact_match_grader,
    *,
    image_fetcher: ImageFetcher | None = None,
    parallel: int = 4,
    trajectories: list[Trajectory] | None = None,
    **run_kw,
) -> list[EvalRecord]:
    """One agent run per item; results come back in item order.

    ``trajectories``, when given, is filled with the recorded runs (items
    that failed before a run started are skipped).
    """
    if not items:
        raise EmptyBenchmark("no benchmark items")
    policy = policy or ContextPolicy()

    def one(item: BenchItem):
        reg = registry(item) if callable(registry) and not isinstance(registry, ToolRegistry) else registry
        return run_item(item, model_factory(item), reg, store, policy, grader, image_fetcher, **run_kw)

    if parallel <= 1:
        results = [one(item) for item in items]
    else:
        with ThreadPoolExecutor(max_workers=parallel) as pool:
            results = list(pool.map(one, items))
    if trajectories is not None:
        trajectories.extend(t for _, t in results if t is not None)
    return [r for r, _ in results]


def success_rate(records: Sequence[EvalRecord]) -> float:
    if not records:
        raise EmptyBenchmark("no records")
    return 100.0 * sum(r.correct for r in records) / len(records)


def scaling_curve(records: Sequence[EvalRecord], thresholds: Sequence[int]) -> dict[int, float]:
    """Accuracy when only self-terminated correct runs finishing within N turns count."""
    if any(n <= 0 for n in thresholds):
        raise ValueError("thresholds must be positive")
    if list(thresholds) != sorted(thresholds):
        raise ValueError("thresholds must be sorted")
    if not records:
        return {n: 0.0 for n in thresholds}
    finished = sorted(r.turns_used for r in records if r.correct and r.terminated_by == "self")
    curve = {}
    i = 0
    for n in thresholds:
        while i < len(finished) and finished[i] <= n:
            i += 1
        curve[n] = 100.0 * i / len(records)
    return curve
