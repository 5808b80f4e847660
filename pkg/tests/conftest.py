from __future__ import annotations

import io
from functools import lru_cache

import pytest
from PIL import Image

from uidagent.assets import AssetStore


@lru_cache(maxsize=512)
def make_png(width: int = 8, height: int = 8, color: tuple[int, int, int] = (10, 20, 30)) -> bytes:
    buf = io.BytesIO()
    Image.new("RGB", (width, height), color).save(buf, format="PNG")
    return buf.getvalue()


def gradient_png(width: int, height: int) -> bytes:
    """Every pixel distinct enough that crops are easy to compare."""
    img = Image.new("RGB", (width, height))
    img.putdata([((x * 7) % 256, (y * 13) % 256, (x + y) % 256) for y in range(height) for x in range(width)])
    buf = io.BytesIO()
    img.save(buf, format="PNG")
    return buf.getvalue()


@pytest.fixture
def store(tmp_path) -> AssetStore:
    return AssetStore(tmp_path / "store")


def random_world(rng, n_entities: int = 12, max_fanout: int = 5) -> tuple[dict, dict]:
    """A random attribute table plus a candidate-count table for the judge.

    Targets are drawn from a shared pool so entities recur (exercising
    dedup and cycle avoidance); some keys are missing from the count table
    so the judge fails closed on them.
    """
    from uidagent.synthesis import Attribute

    names = [f"E{i}" for i in range(n_entities)]
    relations = ["founded_by", "located_in", "member_of", "born_in", "directed", "owns", "named_after"]
    table: dict[str, list] = {}
    counts: dict[str, int] = {}
    for name in names:
        attrs = []
        for _ in range(rng.randint(0, max_fanout)):
            rel = rng.choice(relations)
            target = rng.choice(names + [f"leaf-{rng.randint(0, 30)}"])
            attr = Attribute(rel, target, f"{rel} {target}")
            attrs.append(attr)
            roll = rng.random()
            if roll < 0.65:
                counts[attr.key] = rng.randint(2, 5000)
            elif roll < 0.85:
                counts[attr.key] = rng.randint(0, 1)
        table[name] = attrs
    return table, counts
