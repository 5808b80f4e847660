"""Command-line entry point: ``uidagent <group> <command> ...``.

Exit status is 0 on success, 1 for usage errors and 2 when the command
itself fails.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import logging
import random
import sys
import tempfile
from pathlib import Path
from typing import Iterator, Sequence

from . import __version__
from .agent import ChatToolModel, ContextPolicy, ScriptedModel, read_trajectories, run_task, write_trajectories
from .assets import AssetStore
from .dataset import (
    FilterCriteria,
    Manifest,
    assets_manifest,
    compute_stats,
    exact_match_grader,
    export_sft,
    prefilter_query,
    read_sft,
    rejection_filter,
    write_sft,
)
from .errors import UidAgentError
from .harness import load_items, read_records, run_benchmark, scaling_curve, success_rate, write_records
from .llm import ChatCompletionsAPI, HttpChatClient, ScriptedChat
from .merge import MergeSpec, interpolate, load_tensors, save_tensors
from .runtime import live_context, replay_context
from .synthesis import (
    CandidateCountOracle,
    ChatJudge,
    FixtureKnowledgeSource,
    KnowledgeGraph,
    QuerySeed,
    build_graph,
    compose_multihop,
    extract_seed,
    fuzzify,
    sample_subgraph,
    synthesize_single_hop,
    write_questions,
)
from .tools import ToolRegistry, fetch_image, image_search, scrape_website

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse exits with 2 by default
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# --------------------------------------------------------------------------
# shared plumbing


@contextlib.contextmanager
def _store(path: str | None) -> Iterator[AssetStore]:
    if path:
        yield AssetStore(path)
        return
    with tempfile.TemporaryDirectory(prefix="uidagent-store-") as tmp:
        yield AssetStore(tmp)


def _context(args, store: AssetStore):
    if args.replay:
        return replay_context(args.replay, store)
    return live_context(store)


def _policy(args) -> ContextPolicy:
    return ContextPolicy(
        max_turns=args.max_turns,
        keep_recent_k=None if args.no_eviction else args.keep_recent,
        max_context_tokens=args.max_tokens,
        summarize_on_finish=args.final_summary,
    )


def _chat_client(script: str | None):
    if script:
        return ScriptedChat(json.loads(Path(script).read_text(encoding="utf-8")))
    return HttpChatClient(ChatCompletionsAPI.from_env())


def _read_jsonl(path: str) -> list[dict]:
    with open(path, encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)


def _register_input(url: str, store: AssetStore, ctx) -> str:
    if store.contains(url):
        return store.canonical(url)
    return store.register_asset(ctx.image_fetcher.fetch(url), source_url=url)


# --------------------------------------------------------------------------
# agent / scrape


def cmd_agent_run(args) -> int:
    task = {}
    if args.replay and (Path(args.replay) / "task.json").exists():
        task = json.loads((Path(args.replay) / "task.json").read_text(encoding="utf-8"))
    question = args.question or task.get("question")
    if not question:
        raise UsageError("--question is required")
    image_urls = args.image_url or ([task["image_url"]] if task.get("image_url") else [])
    task_id = args.task_id or task.get("task_id", "task")

    with _store(args.store) as store:
        ctx = _context(args, store)
        inputs = [_register_input(url, store, ctx) for url in image_urls]
        if args.replay:
            model = ScriptedModel.from_fixture(args.replay, task_id)
        else:
            model = ChatToolModel(ChatCompletionsAPI.from_env(), store)
        traj = run_task(question, inputs, model, ToolRegistry(ctx), store, _policy(args), task_id=task_id)
    if args.out:
        write_trajectories(args.out, [traj], append=args.append)
    else:
        print(traj.to_json())
    print(
        f"terminated_by={traj.terminated_by} turns={traj.turns_used} answer={traj.final_answer!r}",
        file=sys.stderr,
    )
    return EXIT_OK if traj.terminated_by != "error" else EXIT_RUNTIME


def cmd_scrape(args) -> int:
    with _store(args.store) as store:
        result = scrape_website(_context(args, store), args.url, args.extract)
    print(result.text)
    return EXIT_RUNTIME if result.is_error else EXIT_OK


# --------------------------------------------------------------------------
# synthesis


def _judge(args):
    if args.counts:
        return CandidateCountOracle.from_file(args.counts)
    return ChatJudge(_chat_client(None))


def cmd_synth_seed(args) -> int:
    with _store(args.store) as store:
        ctx = _context(args, store)
        seed = extract_seed(args.page_url, ctx.page_fetcher, ctx.summarizer, _chat_client(args.extractor_replies), store, ctx.image_fetcher)
    _emit(json.dumps(seed.to_record(), ensure_ascii=False, indent=2), args.out)
    return EXIT_OK


def _root_entity(args) -> str:
    if args.root:
        return args.root
    if args.seed_file:
        return QuerySeed.from_record(json.loads(Path(args.seed_file).read_text(encoding="utf-8"))).core_entity
    raise UsageError("one of --seed-file or --root is required")


def cmd_synth_graph(args) -> int:
    graph = build_graph(
        _root_entity(args),
        FixtureKnowledgeSource(args.knowledge),
        _judge(args),
        steps=args.steps,
        rng_seed=args.rng_seed,
    )
    if args.fuzz:
        fuzzify(graph, FixtureKnowledgeSource(args.knowledge))
    graph.save(args.out)
    print(f"{len(graph.nodes)} nodes, {len(graph.edges)} edges, {len(graph.history)} expansions", file=sys.stderr)
    return EXIT_OK


def _leaf_image(args, store: AssetStore) -> str:
    if args.leaf_image:
        if store.contains(args.leaf_image):
            return args.leaf_image
        ctx = _context(args, store)
        result = fetch_image(ctx, args.leaf_image)
        if result.is_error:
            raise UidAgentError(result.text)
        return result.materialized_images[0]
    if args.leaf_query:
        ctx = _context(args, store)
        pending = [u for u in _urls(image_search(ctx, args.leaf_query).text)]
        for url in pending:
            result = fetch_image(ctx, url)
            if not result.is_error:
                return result.materialized_images[0]
        raise UidAgentError(f"no usable image for {args.leaf_query!r}")
    raise UsageError("one of --leaf-image or --leaf-query is required")


def _urls(image_hits_text: str) -> list[str]:
    out = []
    for line in image_hits_text.splitlines():
        for part in line.split("|"):
            part = part.strip()
            if part.startswith("Image URL:"):
                out.append(part.split(":", 1)[1].strip())
    return out


def cmd_synth_question(args) -> int:
    graph = KnowledgeGraph.load(args.graph)
    seed = QuerySeed.from_record(json.loads(Path(args.seed_file).read_text(encoding="utf-8")))
    rng = random.Random(args.rng_seed)
    composer = _chat_client(args.composer_replies) if args.composer_replies or args.live_composer else None
    with _store(args.store) as store:
        leaf = _leaf_image(args, store) if args.max_hops > 0 else seed.anchor_image
        single = synthesize_single_hop(seed, composer)
        questions = [single]
        if args.max_hops > 0:
            sub = sample_subgraph(graph, rng, max_hops=args.max_hops)
            questions.append(compose_multihop(seed, sub, leaf, composer, single_hop=single))
    write_questions(args.out, questions, append=args.append)
    for q in questions:
        print(f"[{q.hop_count} hop] {q.question_text}", file=sys.stderr)
    return EXIT_OK


# --------------------------------------------------------------------------
# data


def _criteria(args) -> FilterCriteria:
    return FilterCriteria(max_turns=args.max_turns, max_context_tokens=args.max_context)


def cmd_data_prefilter(args) -> int:
    """Input: questions.jsonl records with question_text/answer/anchor_image."""
    rows = _read_jsonl(args.in_path)
    kept = []
    with _store(args.store) as store:
        if args.judge_replies:
            replies = json.loads(Path(args.judge_replies).read_text(encoding="utf-8"))
            judges = [ScriptedModel([r]) for r in replies]
        else:
            api = ChatCompletionsAPI.from_env()
            judges = [ChatToolModel(api, store) for _ in rows]
        if len(judges) < len(rows):
            raise UsageError(f"{len(rows)} questions but only {len(judges)} judge replies")
        for row, judge in zip(rows, judges):
            images = [row["anchor_image"]] if row.get("anchor_image") else []
            question = row.get("question_text") or row["question"]
            if prefilter_query(question, images, judge, str(row["answer"])):
                kept.append(row)
    with open(args.out, "w", encoding="utf-8") as fh:
        for row in kept:
            fh.write(json.dumps(row, ensure_ascii=False) + "\n")
    print(f"kept {len(kept)} of {len(rows)}", file=sys.stderr)
    return EXIT_OK


def cmd_data_filter(args) -> int:
    manifest = Manifest.load(args.manifest)
    trajs = read_trajectories(args.in_path)
    kept = []
    for traj in trajs:
        gold = manifest.gold(traj.task_id)
        if gold is None:
            logging.getLogger(__name__).warning("no gold answer for %s; dropped", traj.task_id)
            continue
        if rejection_filter(traj, gold, exact_match_grader, _criteria(args)):
            kept.append(traj)
    write_trajectories(args.out, kept)
    print(f"kept {len(kept)} of {len(trajs)}", file=sys.stderr)
    return EXIT_OK


def cmd_data_export(args) -> int:
    manifest = Manifest.load(args.manifest) if args.manifest else Manifest({})
    if not args.store:
        raise UsageError("--store is required for export")
    store = AssetStore(args.store)
    records = [export_sft(t, store, manifest.source(t.task_id)) for t in read_trajectories(args.in_path)]
    write_sft(args.out, records)
    assets_path = Path(args.assets_out or Path(args.out).with_name("assets_manifest.json"))
    assets_path.write_text(json.dumps(assets_manifest(records, store), indent=2, sort_keys=True), encoding="utf-8")
    print(f"exported {len(records)} records", file=sys.stderr)
    return EXIT_OK


def cmd_data_stats(args) -> int:
    stats = compute_stats(read_sft(args.in_path))
    order = args.order.split(",") if args.order else None
    if args.out:
        Path(args.out).write_text(json.dumps(stats.to_record(), indent=2, sort_keys=True), encoding="utf-8")
    print(stats.render_table(order))
    return EXIT_OK


# --------------------------------------------------------------------------
# merge / eval


def cmd_merge(args) -> int:
    merged = interpolate(load_tensors(args.a), load_tensors(args.b), MergeSpec(args.alpha, args.key_filter))
    save_tensors(args.out, merged)
    print(f"wrote {len(merged)} tensors to {args.out}", file=sys.stderr)
    return EXIT_OK


def cmd_eval_run(args) -> int:
    items = load_items(args.bench)
    with _store(args.store) as store:
        if args.replay:
            model_factory = lambda item: ScriptedModel.from_fixture(args.replay, item.item_id)  # noqa: E731
            registry = lambda item: ToolRegistry(replay_context(args.replay, store))  # noqa: E731
            image_fetcher = replay_context(args.replay, store).image_fetcher
        else:
            api = ChatCompletionsAPI.from_env()
            model_factory = lambda item: ChatToolModel(api, store)  # noqa: E731
            ctx = live_context(store)
            registry = ToolRegistry(ctx)
            image_fetcher = ctx.image_fetcher
        trajs: list = []
        records = run_benchmark(
            items, model_factory, registry, store, _policy(args), image_fetcher=image_fetcher, parallel=args.parallel, trajectories=trajs
        )
    if args.out:
        write_records(args.out, records)
    if args.trajectories:
        write_trajectories(args.trajectories, trajs)
    print(json.dumps({"items": len(records), "success_rate": success_rate(records)}))
    return EXIT_OK


def _thresholds(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"bad --thresholds {text!r}") from None


def cmd_eval_scaling(args) -> int:
    curve = scaling_curve(read_records(args.records), _thresholds(args.thresholds))
    _emit(json.dumps({str(k): v for k, v in curve.items()}), args.out)
    return EXIT_OK


# --------------------------------------------------------------------------
# parser


def _add_policy_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--max-turns", type=int, default=30)
    p.add_argument("--keep-recent", type=int, default=5, help="tool results kept in full (default 5)")
    p.add_argument("--no-eviction", action="store_true", help="keep every tool result in full")
    p.add_argument("--max-tokens", type=int, default=128_000, help="context budget in tokens")
    p.add_argument(
        "--final-summary",
        action="store_true",
        help="ask for a boxed summary when the model stops without one",
    )


def _add_io_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--replay", metavar="DIR", help="serve tools (and the model) from fixture files")
    p.add_argument("--store", metavar="DIR", help="asset store directory (default: a temporary one)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="uidagent", description="Multimodal search agent with a UID-addressed image store.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    groups = parser.add_subparsers(dest="group", required=True, parser_class=_Parser)

    agent = groups.add_parser("agent", help="run the agent").add_subparsers(dest="command", required=True, parser_class=_Parser)
    p = agent.add_parser("run", help="answer one question")
    p.add_argument("--question")
    p.add_argument("--image-url", action="append", default=[])
    p.add_argument("--task-id")
    p.add_argument("--out", help="write the trajectory record here instead of stdout")
    p.add_argument("--append", action="store_true", help="append to --out")
    _add_policy_flags(p)
    _add_io_flags(p)
    p.set_defaults(func=cmd_agent_run)

    p = groups.add_parser("scrape", help="fetch a page through the image-offloading middleware")
    p.add_argument("--url", required=True)
    p.add_argument("--extract", default=None)
    _add_io_flags(p)
    p.set_defaults(func=cmd_scrape)

    synth = groups.add_parser("synth", help="query synthesis").add_subparsers(dest="command", required=True, parser_class=_Parser)
    p = synth.add_parser("seed", help="extract a query seed from a web page")
    p.add_argument("--page-url", required=True)
    p.add_argument("--extractor-replies", help="JSON list of canned extractor replies")
    p.add_argument("--out")
    _add_io_flags(p)
    p.set_defaults(func=cmd_synth_seed)

    p = synth.add_parser("graph", help="grow a knowledge graph from the seed entity")
    p.add_argument("--seed-file")
    p.add_argument("--root", help="root entity (instead of --seed-file)")
    p.add_argument("--knowledge", required=True, metavar="DIR", help="fixture knowledge source")
    p.add_argument("--counts", help="candidate-count table for the irreversibility check")
    p.add_argument("--steps", type=int, default=None)
    p.add_argument("--rng-seed", type=int, default=0)
    p.add_argument("--fuzz", action="store_true", help="fuzzify low-degree entities after expansion")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth_graph)

    p = synth.add_parser("question", help="compose single- and multi-hop questions")
    p.add_argument("--graph", required=True)
    p.add_argument("--seed-file", required=True)
    p.add_argument("--max-hops", type=int, default=2)
    p.add_argument("--leaf-image", help="UID or URL of the image standing in for the marked leaf")
    p.add_argument("--leaf-query", help="image_search query used to find the leaf image")
    p.add_argument("--rng-seed", type=int, default=0)
    p.add_argument("--composer-replies", help="JSON list of canned composer replies")
    p.add_argument("--live-composer", action="store_true")
    p.add_argument("--out", required=True)
    p.add_argument("--append", action="store_true")
    _add_io_flags(p)
    p.set_defaults(func=cmd_synth_question)

    data = groups.add_parser("data", help="trajectory distillation").add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, func in (
        ("prefilter", cmd_data_prefilter),
        ("filter", cmd_data_filter),
        ("export", cmd_data_export),
        ("stats", cmd_data_stats),
    ):
        p = data.add_parser(name)
        p.add_argument("--in", dest="in_path", required=True)
        p.add_argument("--out", required=name != "stats")
        p.add_argument("--manifest", required=name == "filter")
        p.add_argument("--max-turns", type=int, default=40)
        p.add_argument("--max-context", type=int, default=64_000)
        p.add_argument("--store")
        p.add_argument("--judge-replies", help="prefilter: JSON list of canned judge replies")
        p.add_argument("--assets-out", help="export: where to write assets_manifest.json")
        p.add_argument("--order", help="stats: comma-separated source order for the table")
        p.set_defaults(func=func)

    p = groups.add_parser("merge", help="interpolate two checkpoints")
    p.add_argument("--a", required=True, help="multimodal checkpoint (theta_v)")
    p.add_argument("--b", required=True, help="text checkpoint (theta_t)")
    p.add_argument("--alpha", type=float, default=0.8)
    p.add_argument("--key-filter", default="*", help="glob(s) selecting the keys to interpolate")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_merge)

    ev = groups.add_parser("eval", help="benchmark evaluation").add_subparsers(dest="command", required=True, parser_class=_Parser)
    p = ev.add_parser("run")
    p.add_argument("--bench", required=True)
    p.add_argument("--out")
    p.add_argument("--trajectories")
    p.add_argument("--parallel", type=int, default=4)
    _add_policy_flags(p)
    _add_io_flags(p)
    p.set_defaults(func=cmd_eval_run)

    p = ev.add_parser("scaling")
    p.add_argument("--records", required=True)
    p.add_argument("--thresholds", default=",".join(str(n) for n in range(10, 101, 10)))
    p.add_argument("--out")
    p.set_defaults(func=cmd_eval_scaling)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"uidagent: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (UidAgentError, OSError, ValueError, KeyError) as exc:
        print(f"uidagent: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
