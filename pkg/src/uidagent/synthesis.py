"""Visual question synthesis: webpage seeds, knowledge-graph growth, multi-hop composition.

A seed pairs a webpage's core entity with one of its captioned images and
a question only that image can answer. The graph stage starts from the
core entity, repeatedly expands one unexpanded node with attributes from a
knowledge source (each edge must not give away its source entity on its
own), fuzzifies weakly connected nodes, and samples a rooted subgraph that
is turned into a reasoning chain ending at the core entity.
"""

from __future__ import annotations

import json
import os
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Literal, Protocol, Sequence

from .assets import AssetStore
from .errors import ComposerRefusal, ExtractorRefusal, JudgeUnavailable, NoQualifyingImage, NoUnexpandedNode, UidAgentError
from .fetchers import ImageFetcher, PageFetcher, fixture_key
from .llm import ChatClient, parse_json_reply
from .middleware import SerializedDocument, Summarizer, intercept, render

NodeState = Literal["unexpanded", "expanded"]

# Placeholder prompts: the real wording is deployment configuration.
EXTRACT_PROMPT = """From the webpage below, pick one core entity that is unique and unambiguous and one image that is
directly about it (it must have a caption or rich surrounding context). Then write a question about that image that
cannot be answered from the page text alone, its answer, and a clue linking the entity to the image.
Reply with JSON: {{"entity": ..., "image_uid": ..., "visual_question": ..., "answer": ..., "clue": ...}}
or {{"refusal": "<reason>"}} if no such entity/image exists.

{page}"""

SINGLE_HOP_PROMPT = """Combine the clue and the visual question into one fluent question. Keep every fact in the clue.
Clue: {clue}
Visual question: {visual_question}
Reply with the question only, or REFUSE."""

MULTI_HOP_PROMPT = """Rewrite the question so that the entity "{entity}" is never named and is instead identified through
the reasoning chain below. Do not mention any of these names: {forbidden}.
Reasoning chain: {chain}
Question: {question}
Reply with the rewritten question only, or REFUSE."""

FUZZ_PROMPT = """Describe the entity "{entity}" vaguely using only this fact: {fact}. Do not name it.
Reply with a short noun phrase."""


# --------------------------------------------------------------------------
# seeds and single-hop questions


@dataclass
class QuerySeed:
    webpage: SerializedDocument
    core_entity: str
    anchor_image: str
    clue: str
    visual_question: str
    answer: str

    def to_record(self) -> dict:
        return {
            "webpage": self.webpage.to_record(),
            "core_entity": self.core_entity,
            "anchor_image": self.anchor_image,
            "clue": self.clue,
            "visual_question": self.visual_question,
            "answer": self.answer,
        }

    @classmethod
    def from_record(cls, rec: dict) -> QuerySeed:
        return cls(
            webpage=SerializedDocument.from_record(rec["webpage"]),
            core_entity=rec["core_entity"],
            anchor_image=rec["anchor_image"],
            clue=rec["clue"],
            visual_question=rec["visual_question"],
            answer=rec["answer"],
        )


@dataclass
class SynthesizedQuestion:
    question_text: str
    answer: str
    anchor_image: str
    hop_count: int
    provenance: list[tuple[str, str, str]] = field(default_factory=list)

    def to_record(self) -> dict:
        return {
            "question_text": self.question_text,
            "answer": self.answer,
            "anchor_image": self.anchor_image,
            "hop_count": self.hop_count,
            "provenance": [list(e) for e in self.provenance],
        }


def _refused(text: str) -> bool:
    stripped = text.strip()
    if not stripped or stripped.upper().startswith("REFUSE"):
        return True
    if stripped.startswith("{"):
        try:
            return "refusal" in json.loads(stripped)
        except json.JSONDecodeError:
            return False
    return False


def extract_seed(
    page_url: str,
    fetcher: PageFetcher,
    summarizer: Summarizer,
    extractor: ChatClient,
    store: AssetStore,
    image_fetcher: ImageFetcher | None = None,
) -> QuerySeed:
    doc = intercept(fetcher.fetch(page_url), store, summarizer, image_fetcher=image_fetcher)
    if not doc.images:
        raise NoQualifyingImage(f"{page_url} has no stored images")
    try:
        reply = parse_json_reply(extractor.complete(EXTRACT_PROMPT.format(page=render(doc))))
    except (json.JSONDecodeError, UidAgentError) as exc:
        raise ExtractorRefusal(f"unusable extractor reply: {exc}") from exc
    if not isinstance(reply, dict) or "refusal" in reply:
        raise ExtractorRefusal(str(reply.get("refusal") if isinstance(reply, dict) else reply))
    missing = [k for k in ("entity", "image_uid", "visual_question", "answer", "clue") if not reply.get(k)]
    if missing:
        raise ExtractorRefusal(f"extractor reply lacks {missing}")
    uids = {img.uid for img in doc.images}
    if reply["image_uid"] not in uids:
        raise NoQualifyingImage(f"extractor chose {reply['image_uid']!r}, which is not an image of {page_url}")
    if reply["entity"] not in reply["clue"]:
        raise ExtractorRefusal("clue does not mention the core entity")
    return QuerySeed(
        webpage=doc,
        core_entity=reply["entity"],
        anchor_image=reply["image_uid"],
        clue=reply["clue"],
        visual_question=reply["visual_question"],
        answer=str(reply["answer"]),
    )


def synthesize_single_hop(seed: QuerySeed, composer: ChatClient | None = None) -> SynthesizedQuestion:
    if composer is None:
        text = f"{seed.clue} {seed.visual_question}"
    else:
        text = composer.complete(SINGLE_HOP_PROMPT.format(clue=seed.clue, visual_question=seed.visual_question)).strip()
        if _refused(text):
            raise ComposerRefusal("composer refused the single-hop question")
        if seed.core_entity not in text:
            raise ComposerRefusal("composed question dropped the core entity from the clue")
    return SynthesizedQuestion(text, seed.answer, seed.anchor_image, hop_count=1)


# --------------------------------------------------------------------------
# knowledge graph


@dataclass(frozen=True)
class Attribute:
    relation: str
    target: str
    value: str | None = None

    @property
    def key(self) -> str:
        return f"{self.relation}|{self.target}"

    @property
    def fact(self) -> str:
        return f"{self.relation} {self.value or self.target}"

    def to_record(self) -> dict:
        rec = {"relation": self.relation, "target": self.target}
        if self.value is not None:
            rec["value"] = self.value
        return rec

    @classmethod
    def from_record(cls, rec: dict) -> Attribute:
        return cls(rec["relation"], rec["target"], rec.get("value"))


class KnowledgeSource(Protocol):
    def lookup(self, entity: str) -> list[Attribute]: ...


class MemoryKnowledgeSource:
    def __init__(self, table: dict[str, Sequence[Attribute]]) -> None:
        self.table = {k: list(v) for k, v in table.items()}

    def lookup(self, entity: str) -> list[Attribute]:
        return list(self.table.get(entity, []))


class FixtureKnowledgeSource:
    """Attribute lists in ``<dir>/<fixture_key(entity)>.json``."""

    def __init__(self, fixture_dir: str | os.PathLike) -> None:
        self.fixture_dir = Path(fixture_dir)

    def lookup(self, entity: str) -> list[Attribute]:
        path = self.fixture_dir / f"{fixture_key(entity)}.json"
        if not path.exists():
            return []
        rec = json.loads(path.read_text(encoding="utf-8"))
        items = rec["attributes"] if isinstance(rec, dict) else rec
        return [Attribute.from_record(a) for a in items]


class IrreversibilityJudge(Protocol):
    def is_irreversible(self, attribute: Attribute, source_entity: str) -> bool:
        """True if the attribute alone cannot single out ``source_entity``."""
        ...


class CandidateCountOracle:
    """Offline judge: an attribute is reversible when at most ``threshold`` entities hold it."""

    def __init__(self, counts: dict[str, int], threshold: int = 1) -> None:
        self.counts = counts
        self.threshold = threshold

    @classmethod
    def from_file(cls, path: str | os.PathLike, threshold: int = 1) -> CandidateCountOracle:
        return cls(json.loads(Path(path).read_text(encoding="utf-8")), threshold)

    def is_irreversible(self, attribute: Attribute, source_entity: str) -> bool:
        try:
            return self.counts[attribute.key] > self.threshold
        except KeyError:
            raise JudgeUnavailable(f"no candidate count for {attribute.key!r}") from None


class ChatJudge:
    PROMPT = (
        'Could someone identify "{entity}" uniquely from this single fact alone: "{fact}"? '
        "Answer YES or NO."
    )

    def __init__(self, chat: ChatClient) -> None:
        self.chat = chat

    def is_irreversible(self, attribute: Attribute, source_entity: str) -> bool:
        try:
            reply = self.chat.complete(self.PROMPT.format(entity=source_entity, fact=attribute.fact))
        except UidAgentError as exc:
            raise JudgeUnavailable(str(exc)) from exc
        word = reply.strip().upper()
        if word.startswith("NO"):
            return True
        if word.startswith("YES"):
            return False
        raise JudgeUnavailable(f"judge reply not YES/NO: {reply!r}")


def check_irreversibility(attribute: Attribute, source_entity: str, judge: IrreversibilityJudge) -> bool:
    """Fail-closed: an unavailable judge rejects the edge."""
    try:
        return bool(judge.is_irreversible(attribute, source_entity))
    except JudgeUnavailable:
        return False


@dataclass
class GraphNode:
    node_id: int
    entity: str
    state: NodeState = "unexpanded"
    depth: int = 0
    fuzzed_as: str | None = None
    fuzz_attribute: Attribute | None = None
    fuzz_skipped: bool = False

    def to_record(self) -> dict:
        rec = {"node_id": self.node_id, "entity": self.entity, "state": self.state, "depth": self.depth}
        if self.fuzzed_as is not None:
            rec["fuzzed_as"] = self.fuzzed_as
        if self.fuzz_attribute is not None:
            rec["fuzz_attribute"] = self.fuzz_attribute.to_record()
        if self.fuzz_skipped:
            rec["fuzz_skipped"] = True
        return rec

    @classmethod
    def from_record(cls, rec: dict) -> GraphNode:
        fa = rec.get("fuzz_attribute")
        return cls(
            rec["node_id"],
            rec["entity"],
            rec.get("state", "unexpanded"),
            rec.get("depth", 0),
            rec.get("fuzzed_as"),
            Attribute.from_record(fa) if fa else None,
            rec.get("fuzz_skipped", False),
        )


@dataclass(frozen=True)
class GraphEdge:
    src: int
    relation: str
    dst: int
    irreversibility_checked: bool = True

    def to_record(self) -> dict:
        return {"from": self.src, "relation": self.relation, "to": self.dst, "irreversibility_checked": self.irreversibility_checked}


@dataclass
class ExpansionRecord:
    """One expansion step: the node, R_t as fetched, the selector's pick, and what was added."""

    node_id: int
    entity: str
    candidates: list[Attribute]
    selected: list[Attribute]
    kept: list[Attribute]

    def to_record(self) -> dict:
        return {
            "node_id": self.node_id,
            "entity": self.entity,
            "candidates": [a.to_record() for a in self.candidates],
            "selected": [a.to_record() for a in self.selected],
            "kept": [a.to_record() for a in self.kept],
        }

    @classmethod
    def from_record(cls, rec: dict) -> ExpansionRecord:
        conv = lambda xs: [Attribute.from_record(a) for a in xs]  # noqa: E731
        return cls(rec["node_id"], rec["entity"], conv(rec["candidates"]), conv(rec["selected"]), conv(rec["kept"]))


def _rng_state_to_json(state) -> list:
    version, internal, gauss = state
    return [version, list(internal), gauss]


def _rng_state_from_json(data) -> tuple:
    version, internal, gauss = data
    return (version, tuple(internal), gauss)


@dataclass
class KnowledgeGraph:
    nodes: dict[int, GraphNode]
    edges: list[GraphEdge]
    root_id: int
    rng_seed: int
    history: list[ExpansionRecord] = field(default_factory=list)
    marked_leaf: int | None = None
    rng: random.Random = field(default=None, repr=False, compare=False)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        if self.rng is None:
            self.rng = random.Random(self.rng_seed)

    @classmethod
    def new(cls, root_entity: str, rng_seed: int = 0) -> KnowledgeGraph:
        return cls(nodes={0: GraphNode(0, root_entity)}, edges=[], root_id=0, rng_seed=rng_seed)

    # -- queries --------------------------------------------------------

    @property
    def root(self) -> GraphNode:
        return self.nodes[self.root_id]

    def out_edges(self, node_id: int) -> list[GraphEdge]:
        return [e for e in self.edges if e.src == node_id]

    def in_edges(self, node_id: int) -> list[GraphEdge]:
        return [e for e in self.edges if e.dst == node_id]

    def out_degree(self, node_id: int) -> int:
        return sum(1 for e in self.edges if e.src == node_id)

    def in_degree(self, node_id: int) -> int:
        return sum(1 for e in self.edges if e.dst == node_id)

    def degree(self, node_id: int) -> int:
        return sum((e.src == node_id) + (e.dst == node_id) for e in self.edges)

    def unexpanded(self) -> list[GraphNode]:
        return [n for _, n in sorted(self.nodes.items()) if n.state == "unexpanded"]

    def node_by_entity(self, entity: str) -> GraphNode | None:
        for n in self.nodes.values():
            if n.entity == entity:
                return n
        return None

    def ancestors(self, node_id: int) -> set[int]:
        """Nodes with a directed path to ``node_id`` (excluding itself)."""
        parents: dict[int, list[int]] = {}
        for e in self.edges:
            parents.setdefault(e.dst, []).append(e.src)
        seen: set[int] = set()
        stack = list(parents.get(node_id, []))
        while stack:
            n = stack.pop()
            if n not in seen:
                seen.add(n)
                stack.extend(parents.get(n, []))
        return seen

    def triples(self) -> set[tuple[str, str, str]]:
        return {(self.nodes[e.src].entity, e.relation, self.nodes[e.dst].entity) for e in self.edges}

    def entities(self) -> set[str]:
        return {n.entity for n in self.nodes.values()}

    # -- persistence ----------------------------------------------------

    def to_record(self) -> dict:
        return {
            "root_id": self.root_id,
            "rng_seed": self.rng_seed,
            "rng_state": _rng_state_to_json(self.rng.getstate()),
            "nodes": [n.to_record() for _, n in sorted(self.nodes.items())],
            "edges": [e.to_record() for e in self.edges],
            "history": [h.to_record() for h in self.history],
            "marked_leaf": self.marked_leaf,
        }

    @classmethod
    def from_record(cls, rec: dict) -> KnowledgeGraph:
        graph = cls(
            nodes={n["node_id"]: GraphNode.from_record(n) for n in rec["nodes"]},
            edges=[GraphEdge(e["from"], e["relation"], e["to"], e.get("irreversibility_checked", True)) for e in rec["edges"]],
            root_id=rec["root_id"],
            rng_seed=rec["rng_seed"],
            history=[ExpansionRecord.from_record(h) for h in rec.get("history", [])],
            marked_leaf=rec.get("marked_leaf"),
        )
        if "rng_state" in rec:
            graph.rng.setstate(_rng_state_from_json(rec["rng_state"]))
        return graph

    def save(self, path: str | os.PathLike) -> None:
        Path(path).write_text(json.dumps(self.to_record(), ensure_ascii=False, indent=2), encoding="utf-8")

    @classmethod
    def load(cls, path: str | os.PathLike) -> KnowledgeGraph:
        return cls.from_record(json.loads(Path(path).read_text(encoding="utf-8")))


class FilterPolicy(Protocol):
    def select(self, graph: KnowledgeGraph, node: GraphNode, candidates: list[Attribute]) -> list[Attribute]: ...


@dataclass
class DefaultFilterPolicy:
    """At most ``max_per_node`` attributes, none at or past ``max_depth``, sparse targets first."""

    max_per_node: int = 3
    max_depth: int = 3

    def select(self, graph: KnowledgeGraph, node: GraphNode, candidates: list[Attribute]) -> list[Attribute]:
        if node.depth >= self.max_depth:
            return []
        seen: set[str] = set()
        unique = []
        for a in candidates:
            if a.key not in seen and a.target != node.entity:
                seen.add(a.key)
                unique.append(a)

        def density(a: Attribute) -> int:
            existing = graph.node_by_entity(a.target)
            return 0 if existing is None else graph.degree(existing.node_id) + 1

        return sorted(unique, key=density)[: self.max_per_node]


def _choose_random(graph: KnowledgeGraph, nodes: list[GraphNode]) -> GraphNode:
    return graph.rng.choice(nodes)


def expand_step(
    graph: KnowledgeGraph,
    source: KnowledgeSource,
    selector: FilterPolicy,
    judge: IrreversibilityJudge,
    choose: Callable[[KnowledgeGraph, list[GraphNode]], GraphNode] = _choose_random,
) -> KnowledgeGraph:
    """One expansion iteration, mutating and returning ``graph``.

    The node set grows by the targets of the admitted attributes and the
    edge set by (node, relation, target) for each of them; the node is then
    marked expanded. Targets whose entity already has a node reuse it,
    unless that would close a cycle.
    """
    pending = graph.unexpanded()
    if not pending:
        raise NoUnexpandedNode("every node is expanded")
    v = choose(graph, pending)
    candidates = source.lookup(v.entity)
    selected = list(selector.select(graph, v, list(candidates)))

    blocked = graph.ancestors(v.node_id) | {v.node_id}
    existing_edges = {(e.src, e.relation, e.dst) for e in graph.edges}
    kept: list[Attribute] = []
    for attr in selected:
        target = graph.node_by_entity(attr.target)
        if target is not None and (target.node_id in blocked or (v.node_id, attr.relation, target.node_id) in existing_edges):
            continue
        if any(k.relation == attr.relation and k.target == attr.target for k in kept):
            continue
        if check_irreversibility(attr, v.entity, judge):
            kept.append(attr)

    for attr in kept:
        target = graph.node_by_entity(attr.target)
        if target is None:
            new_id = max(graph.nodes) + 1
            target = GraphNode(new_id, attr.target, depth=v.depth + 1)
            graph.nodes[new_id] = target
        else:
            target.depth = min(target.depth, v.depth + 1)
        graph.edges.append(GraphEdge(v.node_id, attr.relation, target.node_id, irreversibility_checked=True))

    v.state = "expanded"
    graph.history.append(ExpansionRecord(v.node_id, v.entity, list(candidates), selected, kept))
    return graph


def build_graph(
    root_entity: str,
    source: KnowledgeSource,
    judge: IrreversibilityJudge,
    *,
    steps: int | None = None,
    rng_seed: int = 0,
    selector: FilterPolicy | None = None,
) -> KnowledgeGraph:
    """Expand from ``root_entity`` for ``steps`` iterations or until nothing is left to expand."""
    graph = KnowledgeGraph.new(root_entity, rng_seed)
    selector = selector or DefaultFilterPolicy()
    done = 0
    while steps is None or done < steps:
        try:
            expand_step(graph, source, selector, judge)
        except NoUnexpandedNode:
            break
        done += 1
    return graph


# --------------------------------------------------------------------------
# fuzzification, sampling, composition


def fuzzify(
    graph: KnowledgeGraph,
    source: KnowledgeSource,
    degree_threshold: int = 1,
    rng: random.Random | None = None,
    fuzzifier: ChatClient | None = None,
) -> KnowledgeGraph:
    """Replace leaf and low-degree entities by descriptions built from unused attributes."""
    rng = rng or graph.rng
    for node_id, node in sorted(graph.nodes.items()):
        if node_id == graph.root_id:
            continue
        if graph.out_degree(node_id) != 0 and graph.degree(node_id) > degree_threshold:
            continue
        used = {e.relation for e in graph.edges if node_id in (e.src, e.dst)}
        options = [
            a for a in source.lookup(node.entity) if a.relation not in used and node.entity not in a.fact
        ]
        if not options:
            node.fuzz_skipped = True
            continue
        attr = rng.choice(options)
        description = f"an entity whose {attr.fact}"
        if fuzzifier is not None:
            try:
                reply = fuzzifier.complete(FUZZ_PROMPT.format(entity=node.entity, fact=attr.fact)).strip()
            except UidAgentError:
                reply = ""
            if reply and not _refused(reply) and node.entity not in reply:
                description = reply
        node.fuzzed_as = description
        node.fuzz_attribute = attr
        node.fuzz_skipped = False
    return graph


def sample_subgraph(graph: KnowledgeGraph, rng: random.Random | None = None, max_hops: int = 2) -> KnowledgeGraph:
    """A random rooted tree inside ``graph`` no deeper than ``max_hops``, with one leaf marked."""
    rng = rng or graph.rng
    depth = {graph.root_id: 0}
    reachable = {graph.root_id: 0}
    frontier = [graph.root_id]
    while frontier:
        nxt = []
        for n in frontier:
            for e in graph.out_edges(n):
                if e.dst not in reachable and reachable[n] < max_hops:
                    reachable[e.dst] = reachable[n] + 1
                    nxt.append(e.dst)
        frontier = nxt
    budget = rng.randint(1, len(reachable) - 1) if len(reachable) > 1 else 0

    chosen: list[GraphEdge] = []
    for _ in range(budget):
        options = [e for e in graph.edges if e.src in depth and e.dst not in depth and depth[e.src] < max_hops]
        if not options:
            break
        edge = options[rng.randrange(len(options))]
        depth[edge.dst] = depth[edge.src] + 1
        chosen.append(edge)

    has_child = {e.src for e in chosen}
    leaves = sorted(n for n in depth if n not in has_child)
    marked = rng.choice(leaves)
    nodes = {}
    for n in depth:
        src = graph.nodes[n]
        nodes[n] = GraphNode(n, src.entity, src.state, depth[n], src.fuzzed_as, src.fuzz_attribute, src.fuzz_skipped)
    return KnowledgeGraph(nodes=nodes, edges=chosen, root_id=graph.root_id, rng_seed=graph.rng_seed, marked_leaf=marked)


def _path_to(graph: KnowledgeGraph, target: int) -> list[GraphEdge]:
    parent = {e.dst: e for e in graph.edges}
    path = []
    node = target
    while node != graph.root_id:
        edge = parent[node]
        path.append(edge)
        node = edge.src
    return path[::-1]


def reasoning_chain(graph: KnowledgeGraph, leaf_image: str) -> str:
    """Template description of the root through the sampled subgraph."""

    def describe(node_id: int) -> str:
        node = graph.nodes[node_id]
        if node_id == graph.marked_leaf and node_id != graph.root_id:
            return f"the entity shown in image {leaf_image}"
        clauses = [f"whose {e.relation} is {describe(e.dst)}" for e in graph.out_edges(node_id)]
        if not clauses:
            return node.fuzzed_as or node.entity
        phrase = "the entity " + " and ".join(clauses)
        if node.fuzzed_as and node_id != graph.root_id:
            phrase += f" ({node.fuzzed_as})"
        return phrase

    return describe(graph.root_id)


def compose_multihop(
    seed: QuerySeed,
    subgraph: KnowledgeGraph,
    leaf_image: str,
    composer: ChatClient | None = None,
    *,
    single_hop: SynthesizedQuestion | None = None,
    store: AssetStore | None = None,
) -> SynthesizedQuestion:
    """Splice the subgraph's reasoning chain into the single-hop question."""
    if store is not None:
        store.resolve(leaf_image)
    if subgraph.root_id not in subgraph.nodes:
        raise ValueError("subgraph does not contain the root")
    q0 = single_hop or synthesize_single_hop(seed)
    marked = subgraph.marked_leaf if subgraph.marked_leaf is not None else subgraph.root_id
    path = _path_to(subgraph, marked)
    chain = reasoning_chain(subgraph, leaf_image)

    forbidden = [n.entity for n in subgraph.nodes.values() if n.fuzzed_as]
    if marked != subgraph.root_id:
        forbidden.append(subgraph.nodes[marked].entity)
    if path:
        forbidden.append(seed.core_entity)
    forbidden = sorted(set(forbidden))

    if composer is None:
        if not path:
            text = q0.question_text
        elif seed.core_entity in q0.question_text:
            text = q0.question_text.replace(seed.core_entity, chain)
        else:
            text = f"Consider {chain}. {q0.question_text}"
    else:
        text = composer.complete(
            MULTI_HOP_PROMPT.format(entity=seed.core_entity, forbidden=", ".join(forbidden), chain=chain, question=q0.question_text)
        ).strip()
        if _refused(text):
            raise ComposerRefusal("composer refused the multi-hop question")
    leaked = [name for name in forbidden if name in text]
    if leaked:
        raise ComposerRefusal(f"question leaks hidden entities: {leaked}")
    provenance = [(subgraph.nodes[e.src].entity, e.relation, subgraph.nodes[e.dst].entity) for e in subgraph.edges]
    return SynthesizedQuestion(text, q0.answer, seed.anchor_image, hop_count=len(path) + 1, provenance=provenance)


def write_questions(path: str | os.PathLike, questions: Sequence[SynthesizedQuestion], *, append: bool = True) -> None:
    with open(path, "a" if append else "w", encoding="utf-8") as fh:
        for q in questions:
            fh.write(json.dumps(q.to_record(), ensure_ascii=False) + "\n")
