from __future__ import annotations

import json
import threading

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import make_png
from uidagent.assets import AssetStore, content_digest, is_url, probe_image
from uidagent.errors import UndecodableImage, UnknownUid


def test_url_is_reused_as_uid(store):
    url = "https://example.org/a.png"
    assert store.register_asset(make_png(), source_url=url) == url
    assert store.resolve(url).data == make_png()


def test_uid_without_url_is_content_addressed(store):
    data = make_png(3, 4)
    uid = store.register_asset(data)
    assert uid == f"asset://{content_digest(data)}.png"
    asset = store.resolve(uid)
    assert (asset.width, asset.height, asset.media_type) == (3, 4, "image/png")


def test_duplicate_content_is_idempotent_and_aliases(store):
    first = store.register_asset(make_png(), source_url="https://a.example/x.png")
    second = store.register_asset(make_png(), source_url="https://b.example/y.png")
    assert first == second == "https://a.example/x.png"
    assert store.canonical("https://b.example/y.png") == first
    assert store.resolve("https://b.example/y.png").uid == first
    assert len(store) == 1


def test_distinct_content_distinct_uids(store):
    a = store.register_asset(make_png(color=(1, 2, 3)))
    b = store.register_asset(make_png(color=(3, 2, 1)))
    assert a != b


def test_url_already_naming_other_content_is_not_reused(store):
    url = "https://example.org/a.png"
    store.register_asset(make_png(color=(1, 1, 1)), source_url=url)
    other = store.register_asset(make_png(color=(2, 2, 2)), source_url=url)
    assert other.startswith("asset://")
    assert store.resolve(url).data == make_png(color=(1, 1, 1))


def test_generated_assets_ignore_source_url(store):
    uid = store.register_asset(make_png(5, 5), source_url="https://x.example/p.png", provenance="generated")
    assert uid.startswith("asset://")
    assert store.resolve(uid).provenance == "generated"


def test_undecodable_payload_rejected(store):
    with pytest.raises(UndecodableImage):
        store.register_asset(b"<html>not an image</html>")
    assert len(store) == 0


def test_size_cap(tmp_path):
    small = AssetStore(tmp_path / "s", max_bytes=10)
    with pytest.raises(UndecodableImage):
        small.register_asset(make_png())


def test_unknown_uid(store):
    with pytest.raises(UnknownUid):
        store.resolve("asset://nope.png")
    with pytest.raises(KeyError):
        store.canonical("asset://nope.png")


def test_persistence_across_reopen(tmp_path):
    root = tmp_path / "store"
    s1 = AssetStore(root)
    a = s1.register_asset(make_png(color=(9, 9, 9)), source_url="https://e.example/1.png", caption="cap")
    s1.register_asset(make_png(color=(9, 9, 9)), source_url="https://e.example/alias.png")
    s1.note_reference("https://e.example/pending.png", "later")
    s2 = AssetStore(root)
    assert s2.resolve(a).caption == "cap"
    assert s2.canonical("https://e.example/alias.png") == a
    assert s2.is_pending("https://e.example/pending.png")
    assert s2.uids() == s1.uids()


def test_pending_caption_is_attached_on_fetch(store):
    url = "https://img.example/p.png"
    store.note_reference(url, "poster")
    assert store.is_pending(url) and not store.contains(url)
    assert store.register_asset(make_png(), source_url=url) == url
    assert store.resolve(url).caption == "poster"
    assert not store.is_pending(url)


def test_index_is_append_only_jsonl(store):
    store.register_asset(make_png())
    lines = store.index_path.read_text().splitlines()
    assert all(json.loads(line) for line in lines)


def test_concurrent_registration_of_same_bytes(store):
    data = make_png(6, 6, (4, 5, 6))
    results = []

    def worker():
        results.append(store.register_asset(data))

    threads = [threading.Thread(target=worker) for _ in range(16)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert len(set(results)) == 1 and len(store) == 1


def test_helpers():
    assert is_url("https://x.org/a") and not is_url("asset://abc") and not is_url(None)
    assert probe_image(make_png(2, 3))[1:] == (2, 3)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(st.integers(1, 6), st.integers(1, 6), st.integers(0, 3)), min_size=1, max_size=12))
def test_bijection_property(tmp_path_factory, specs):
    store = AssetStore(tmp_path_factory.mktemp("s"))
    by_uid = {}
    for w, h, c in specs:
        data = make_png(w, h, (c, c, c))
        uid = store.register_asset(data)
        assert store.resolve(uid).data == data
        assert by_uid.setdefault(uid, data) == data
    assert len(by_uid) == len({make_png(w, h, (c, c, c)) for w, h, c in specs})
