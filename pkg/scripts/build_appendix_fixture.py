"""Regenerate the packaged replay fixture for the "trees in the poster" case.

Writes src/uidagent/fixtures/appendix/: scripted assistant turns, search
results, two blocked pages, and synthetic stand-in images (the original
pictures are not redistributable, so flat-colour drawings with the same
dimensions take their place).

    python scripts/build_appendix_fixture.py
"""

from __future__ import annotations

import io
import json
import shutil
from pathlib import Path

from PIL import Image, ImageDraw

from uidagent.fetchers import fixture_key
from uidagent.search import SearchHit, write_replay_fixture

OUT = Path(__file__).resolve().parents[1] / "src" / "uidagent" / "fixtures" / "appendix"

TASK_ID = "visbrowse-trees"
INPUT_IMAGE = "http://rand-oss//2F%2F9bXW.jpg"
QUESTION = (
    "The image on the beverage is the logo of a food company that acquired a newspaper company in 2009. "
    "How many trees are there in the newspaper's Wikipedia poster?"
)
MEDIA_GROUP_PAGE = "https://zh.wikipedia.org/zh-cn/旺旺中时媒体集团"
TIMES_GROUP_PAGE = "https://zh.wikipedia.org/zh-cn/中国时报集团"
LOGO_IMAGE = "https://upload.wikimedia.org/wikipedia/zh/thumb/0/05/..."
POSTER_IMAGE = "https://upload.wikimedia.org/wikipedia/commons/e/ee/..."


def png(img: Image.Image) -> bytes:
    buf = io.BytesIO()
    img.save(buf, format="PNG")
    return buf.getvalue()


def beverage_image() -> bytes:
    img = Image.new("RGB", (900, 900), (235, 230, 220))
    d = ImageDraw.Draw(img)
    d.rectangle((80, 300, 380, 820), fill=(200, 40, 40))  # red can
    d.rectangle((690, 270, 880, 840), fill=(30, 90, 200))  # blue carton
    d.ellipse((730, 400, 840, 510), fill=(250, 210, 180))  # mascot face
    d.ellipse((745, 450, 770, 475), fill=(230, 60, 60))
    d.ellipse((800, 450, 825, 475), fill=(230, 60, 60))
    return png(img)


def logo_image() -> bytes:
    img = Image.new("RGB", (400, 200), (255, 255, 255))
    d = ImageDraw.Draw(img)
    d.ellipse((20, 40, 140, 160), fill=(250, 210, 180))
    for i in range(4):
        d.rectangle((170 + i * 55, 70, 215 + i * 55, 115), fill=(200, 20, 20))
    return png(img)


def poster_image() -> bytes:
    img = Image.new("RGB", (1000, 1000), (170, 200, 235))
    d = ImageDraw.Draw(img)
    d.rectangle((150, 150, 850, 780), fill=(180, 180, 175))  # building
    for x, y in ((20, 800), (200, 850), (450, 880), (550, 890), (900, 850)):
        d.rectangle((x + 10, y - 20, x + 22, y + 60), fill=(100, 70, 40))
        d.ellipse((x - 30, y - 110, x + 62, y - 10), fill=(40, 130, 50))
    return png(img)


def think(text: str) -> str:
    return f"<think>{text}</think>"


def turns() -> list[dict]:
    def call(name: str, **arguments) -> list[dict]:
        return [{"name": name, "arguments": arguments}]

    return [
        {
            "text": think("Identify the food company logo on the beverage first. Try a visual search on the input image."),
            "tool_calls": call("tool-google-search-visual_search", image_url=INPUT_IMAGE),
        },
        {
            "text": think("The visual search did not identify the logo. Zoom in on the blue carton on the right: x 670, y 250, width 300, height 400."),
            "tool_calls": call("tool-image-processing-zoom_in", image_url=INPUT_IMAGE, x=670, y=250, width=300, height=400),
        },
        {
            "text": think("The region must fit in 900x900: x + width <= 900 and y + height <= 900. Use x=670, y=250, width=220, height=600."),
            "tool_calls": call("tool-image-processing-zoom_in", image_url=INPUT_IMAGE, x=670, y=250, width=220, height=600),
        },
        {
            "text": think("The mascot is Want Want's. Check which newspaper Want Want acquired in 2009."),
            "tool_calls": call("tool-google-search-google_search", q="Want Want acquired newspaper 2009"),
        },
        {
            "text": think("The newspaper company is China Times Group. Look for its Wikipedia page."),
            "tool_calls": call("tool-google-search-google_search", q="Want Want acquired newspaper 2009"),
        },
        {
            "text": think("Open the Wikipedia page of the media group and count the trees in the infobox image."),
            "tool_calls": call(
                "jina_scrape_llm_summary-scrape_and_extract_info",
                url=MEDIA_GROUP_PAGE,
                info_to_extract="Count the number of trees in the Wikipedia poster of 旺旺中时媒体集团",
            ),
        },
        {
            "text": think("403 Forbidden. Find the infobox image through image search instead."),
            "tool_calls": call("tool-google-search-image_search", q="旺旺中时媒体集团 维基百科 图片"),
        },
        {
            "text": think("The first hit looks like the media group's logo. Fetch it and check for trees."),
            "tool_calls": call("tool-fetch-image-fetch_image", url=LOGO_IMAGE),
        },
        {
            "text": think("No trees in the logo. The poster may belong to the China Times Group page instead."),
            "tool_calls": call("tool-google-search-google_search", q="中国时报集团 维基百科"),
        },
        {
            "text": think("Maybe the page is listed under a shorter name."),
            "tool_calls": call("tool-google-search-google_search", q="中时集团 维基百科"),
        },
        {
            "text": think("Scrape the China Times Group page and look for the infobox image."),
            "tool_calls": call(
                "jina_scrape_llm_summary-scrape_and_extract_info",
                url=TIMES_GROUP_PAGE,
                info_to_extract="Find the infobox image (poster) on the Wikipedia page for 中国时报集团 and count the number of trees in it.",
            ),
        },
        {
            "text": think("403 again. Search images for the infobox directly."),
            "tool_calls": call("tool-google-search-image_search", q="中国时报集团 维基百科 infobox"),
        },
        {
            "text": think("The first image is the China Times building with trees in front. Fetch it."),
            "tool_calls": call("tool-fetch-image-fetch_image", url=POSTER_IMAGE),
        },
        {
            "text": think(
                "Counting trees in front of the building: (20, 800), (200, 850), (450, 880), (550, 890), (900, 850). That is 5 trees."
            )
            + "\nThe food company is Want Want, which acquired the **China Times Group** in 2009. "
            "The Wikipedia infobox poster for this newspaper shows **5 distinct trees** in front of its headquarters building.",
        },
        {
            "text": think(
                "Summarizing: the logo is Want Want's mascot, Want Want acquired China Times Group in 2009, "
                "and its Wikipedia poster shows 5 trees. So the answer is boxed{5}."
            ),
        },
    ]


def main() -> None:
    if OUT.exists():
        shutil.rmtree(OUT)
    (OUT / "model").mkdir(parents=True)
    (OUT / "pages").mkdir()
    (OUT / "images").mkdir()

    task = {"task_id": TASK_ID, "question": QUESTION, "image_url": INPUT_IMAGE, "gold_answer": "5"}
    (OUT / "task.json").write_text(json.dumps(task, ensure_ascii=False, indent=2), encoding="utf-8")
    bench_item = {
        "item_id": TASK_ID,
        "question": QUESTION,
        "input_image_urls": [INPUT_IMAGE],
        "gold_answer": "5",
        "benchmark_label": "VisBrowse",
    }
    (OUT / "items.jsonl").write_text(json.dumps(bench_item, ensure_ascii=False) + "\n", encoding="utf-8")
    (OUT / "model" / f"{TASK_ID}.json").write_text(
        json.dumps({"turns": turns()}, ensure_ascii=False, indent=2), encoding="utf-8"
    )

    images = {INPUT_IMAGE: ("input.png", beverage_image()), LOGO_IMAGE: ("logo.png", logo_image()), POSTER_IMAGE: ("poster.png", poster_image())}
    for name, data in images.values():
        (OUT / "images" / name).write_bytes(data)
    (OUT / "images" / "index.json").write_text(
        json.dumps({url: name for url, (name, _) in images.items()}, ensure_ascii=False, indent=2), encoding="utf-8"
    )

    for url in (MEDIA_GROUP_PAGE, TIMES_GROUP_PAGE):
        rec = {"source_url": url, "error": {"status": 403}}
        (OUT / "pages" / f"{fixture_key(url)}.json").write_text(json.dumps(rec, ensure_ascii=False, indent=2), encoding="utf-8")

    write_replay_fixture(
        OUT,
        "visual_search",
        INPUT_IMAGE,
        [[
            SearchHit("Giay tu cong bo san pham FROZEN COLA", image_url="https://wantwant.vn/vnt..", source_url="https://wantwant.vn/cn/gi.."),
            SearchHit("Facts For Kids- France", image_url="https://www.oocities.org/...", source_url="https://www.oocities.org/..."),
        ]],
    )
    write_replay_fixture(
        OUT,
        "google_search",
        "Want Want acquired newspaper 2009",
        [
            [
                SearchHit(
                    "China Times Group is sold to Want Want",
                    link="https://www.taipeitimes.com/News/biz/...",
                    snippet="It owns the Chinese-language newspapers China Times...",
                ),
                SearchHit(
                    "China Times Joins a Snack-food Empire|Industry|2009-03-05",
                    link="https://english.cw.com.tw/article/...",
                    snippet="A month after Want Want Holdings chairman Tsai Eng-meng ...",
                ),
            ],
            [
                SearchHit("旺旺中时媒体集团 - 维基百科", link="https://zh.wikipedia.org/zh-cn/旺旺中时媒体集团"),
                SearchHit("可靠来源/常见/旺旺中时媒体集团 - 维基百科", link="https://zh.wikipedia.org/zh-cn/..."),
            ],
        ],
    )
    write_replay_fixture(
        OUT,
        "image_search",
        "旺旺中时媒体集团 维基百科 图片",
        [[
            SearchHit("旺旺中时媒体集团- 维基百科，自由的百科全书", image_url=LOGO_IMAGE, source_url="https://zh.wikipedia.org/zh-tw/..."),
            SearchHit("旺旺集团- 维基百科，自由的百科全书", image_url="https://upload.wikimedia.org/wikipedia/commons/7/74/...", source_url="https://zh.wikipedia.org/zh-tw/..."),
        ]],
    )
    write_replay_fixture(
        OUT,
        "google_search",
        "中国时报集团 维基百科",
        [[
            SearchHit("讨论:中国时报集团- 维基百科，自由的百科全书", link="https://zh.wikipedia.org/zh-my/..."),
            SearchHit("中时新闻网", link="https://www.wikiwand.com/zh-hant/..."),
        ]],
    )
    write_replay_fixture(
        OUT,
        "google_search",
        "中时集团 维基百科",
        [[
            SearchHit("中国时报集团- 维基百科，自由的百科全书", link=TIMES_GROUP_PAGE),
            SearchHit("旺旺中时媒体集团 - 维基百科", link=MEDIA_GROUP_PAGE),
        ]],
    )
    write_replay_fixture(
        OUT,
        "image_search",
        "中国时报集团 维基百科 infobox",
        [[
            SearchHit("中国时报集团- 维基百科，自由的百科全书", image_url=POSTER_IMAGE, source_url="https://zh.wikipedia.org/zh-tw/..."),
            SearchHit("中国时报- 维基百科，自由的百科全书", image_url="https://upload.wikimedia.org/wikipedia/zh/9/9b/...", source_url="https://zh.wikipedia.org/zh-cn/..."),
        ]],
    )
    print(f"wrote {OUT}")


if __name__ == "__main__":
    main()
