"""Regenerate the committed test fixtures.

Everything here is deterministic: rerunning the script reproduces the
same bytes. Two outputs:

  tests/fixtures/pages/    standalone pages for sanitizer/condenser tests
                           (15 small edge-case pages + 6 "swde-*" pages at
                           realistic boilerplate-to-content ratios)
  tests/fixtures/corpus/   2 verticals x 2 sites x 8 pages with ground
                           truth, templated so one XPath per field
                           generalizes across each site

Run from the repository root:  python3 tools/make_fixtures.py
"""
from __future__ import annotations

import json
import random
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "tests" / "fixtures"

WORDS = (
    "zoom sensor lens pixel shutter aperture tripod flash macro prime "
    "battery viewfinder bracket filter hood strap remote charger body kit"
).split()


def _lorem(rng: random.Random, n: int) -> str:
    return " ".join(rng.choice(WORDS) for _ in range(n))


# ---------------------------------------------------------------------------
# small edge-case pages

NOISE_HEAD = """<head>
<meta name="generator" content="fixture-writer 1.0">
<style>
  body { margin: 0; font: 13px/1.4 sans-serif; }
  .hidden { display: none; } .muted { color: #999; }
  table td { border: 1px solid #ddd; padding: 2px 6px; }
</style>
<script type="text/javascript">
  (function () { var q = []; for (var i = 0; i < 32; i++) { q.push(i * i); }
    window.__fixture = { queue: q, flag: "on" }; })();
</script>
</head>"""

SMALL_PAGES = {
    "comments": """<!DOCTYPE html>
<html><head><title>c</title></head>
<body>
<!-- navigation starts -->
<div class="nav"><!-- inner --><a href="/">Home</a></div>
<!-- a
multi-line
comment -->
<p>Visible <!-- hidden note --> text.</p>
</body></html>
""",
    "hidden-style": """<html><head><style>.x{color:red}</style></head>
<body>
<div style="display:none">secret one</div>
<div style="visibility: hidden">secret two</div>
<div style="display: block">shown <span style="DISPLAY:NONE">gone</span> tail</div>
</body></html>
""",
    "empty-cascade": f"""<html>{NOISE_HEAD}<body>
<div><span><i></i></span>t</div>
<ul><li></li><li> </li><li><b></b></li></ul>
<section><article><p>kept</p><p></p></article></section>
</body></html>
""",
    "entities": f"""<html>{NOISE_HEAD}<body>
<p>Fish &amp; Chips &lt;fresh&gt;</p>
<p>Caf&eacute; price: &#36;5 &#x41;grade</p>
<p title="a&quot;b">quoted attr</p>
</body></html>
""",
    "void-and-raw": """<html><head>
<script>if (a < b && c > d) { alert("x"); }</script>
<style>p > b { font-weight: bold; }</style>
</head><body>
<p>before<br>after<img src="x.png" alt="pic"><input type="text" value="v"></p>
<hr>
<p>end</p>
</body></html>
""",
    "tails-after-hidden": """<html><body>
<div>alpha <script>var x = 1;</script>beta <style>.y{}</style>gamma</div>
<p>one<span style="display:none">two</span> three</p>
</body></html>
""",
    "tables": f"""<html>{NOISE_HEAD}<body>
<table border="1" cellpadding="2">
<tr><th>Name</th><th>Value</th></tr>
<tr><td>alpha</td><td>1</td></tr>
<tr><td>beta</td><td></td></tr>
</table>
</body></html>
""",
    "malformed": f"""<html>{NOISE_HEAD}<body>
<p>open paragraph
<div>div inside unclosed p</div>
</span>
<b>bold <i>both close</b></i>
<p>final
</body></html>
""",
    "attr-quoting": """<html><body>
<a href="/plain/path" id='single' data-x="a b" data-y="" checked>link one</a>
<a href="/q?x=1&amp;y=2" title="say &quot;hi&quot;">link two</a>
</body></html>
""",
    "whitespace-heavy": f"""<html>{NOISE_HEAD}<body>
    <p>
        spread
        over
        lines
    </p>
    <div>   <span>  inner  </span>   </div>
</body></html>
""",
    "visibility-nested": """<html><body>
<div style="display:none"><p>all of this</p><span>is hidden</span></div>trailing
<p>but this shows</p>
</body></html>
""",
    "noscript-template": """<html><body>
<noscript>Please enable JavaScript.</noscript>
<template><p>render me later</p></template>
<p>real content</p>
</body></html>
""",
    "headless-fragment": """<script>var standalone = "fragment page";
for (var i = 0; i < 10; i++) { standalone += i.toString(16); }</script>
<p>No html wrapper here.</p><div><b>fragment</b> body</div>
""",
    "nested-lists": f"""<html>{NOISE_HEAD}<body>
<ul class="menu">
  <li>Item one</li>
  <li>Item two
    <ul><li>Sub a</li><li>Sub b</li></ul>
  </li>
</ul>
<ol start="3"><li>third</li></ol>
</body></html>
""",
    "declared-latin": """<html><head>
<meta http-equiv="Content-Type" content="text/html; charset=iso-8859-1">
</head><body>
<p>Entrée coûte 12€? Non: café.</p>
</body></html>
""",
}


def write_small_pages(out: Path) -> None:
    for name, html in SMALL_PAGES.items():
        path = out / f"{name}.html"
        if name == "declared-latin":
            path.write_bytes(html.replace("€", "").encode("iso-8859-1"))
        else:
            path.write_bytes(html.encode("utf-8"))


# ---------------------------------------------------------------------------
# SWDE-scale pages: big heads, script/style payloads, deep attribute noise

def _swde_page(rng: random.Random, title: str, rows: int) -> str:
    head_script = "\n".join(
        f"  var v{i} = {{'k{i}': '{_lorem(rng, 3)}', 'n': {rng.randint(0, 999)}}};"
        for i in range(80)
    )
    css = "\n".join(
        f".c{i} {{ margin: {rng.randint(0, 20)}px; padding: {rng.randint(0, 9)}px; "
        f"color: #{rng.randrange(16**6):06x}; }}"
        for i in range(110)
    )
    nav = "\n".join(
        f'      <li class="nav-item n{i}" data-track="nav:{i}">'
        f'<a href="/cat/{i}?ref=hdr&amp;pos={i}" class="nav-link">{_lorem(rng, 2)}</a></li>'
        for i in range(40)
    )
    body_rows = []
    for i in range(rows):
        body_rows.append(
            f'    <div class="row r{i % 7}" id="row-{i}" data-idx="{i}" '
            f'style="border-top: 1px solid #ccc">\n'
            f'      <span class="label lab-{i % 5}">{_lorem(rng, 2)}:</span>\n'
            f'      <span class="value val-{i % 5}" data-v="{i}">{_lorem(rng, 4)}</span>\n'
            f'      <!-- row {i} generated -->\n'
            f"    </div>"
        )
    ad = (
        '<div class="ad-slot" style="display:none" data-ad="1">'
        + _lorem(rng, 120)
        + "</div>"
    )
    return f"""<!DOCTYPE html>
<html lang="en">
<head>
<meta charset="utf-8">
<meta name="viewport" content="width=device-width, initial-scale=1">
<meta name="description" content="{_lorem(rng, 18)}">
<title>{title}</title>
<link rel="stylesheet" href="/static/site.css">
<link rel="canonical" href="https://example.test/{title.lower().replace(' ', '-')}">
<script type="text/javascript">
{head_script}
</script>
<style>
{css}
</style>
</head>
<body class="page theme-light" data-page="{title}">
  <header id="masthead" class="site-header sticky">
    <ul class="nav primary-nav" role="menubar">
{nav}
    </ul>
  </header>
  {ad}
  <main id="content" class="main-wrap">
    <h1 class="page-title">{title}</h1>
{chr(10).join(body_rows)}
  </main>
  <footer class="site-footer" data-year="2014">
    <p class="fine-print">{_lorem(rng, 25)}</p>
  </footer>
<script>window.__boot = true; document.body.className += ' js';</script>
</body>
</html>
"""


def write_swde_pages(out: Path) -> None:
    rng = random.Random(20140917)
    sizes = [55, 80, 110, 70, 95, 60]
    for i, rows in enumerate(sizes):
        html = _swde_page(rng, f"Listing {i}", rows)
        (out / f"swde-listing-{i}.html").write_text(html, encoding="utf-8")


# ---------------------------------------------------------------------------
# fixture corpus: camera x {shop1, shop2}, book x {store1, store2}

CAMERA_MODELS = [
    "Canon PowerShot A495", "Nikon Coolpix L22", "Sony Cyber-shot W350",
    "Olympus Stylus 7040", "Panasonic Lumix ZS7", "Fujifilm FinePix Z70",
    "Pentax Optio H90", "Casio Exilim Z35",
]
CAMERA_PRICES = [
    "$129.99", "$89.00", "$179.95", "$219.50", "$299.99", "$149.00",
    "$139.95", "$99.99",
]
BOOK_TITLES = [
    "The Glass Meridian", "Salt and Circuitry", "A Field Guide to Echoes",
    "The Cartographer's Debt", "Winter in the Archive", "Nine Lamps",
    "The Quiet Ledger", "Harbor of Small Hours",
]
BOOK_AUTHORS = [
    "Mara Ellison", "Tomas Reyes", "Ingrid Halvorsen", "Dev Patel",
    "Cora Whitfield", "Jun Nakamura", "Alice Beaumont", "Peter Okafor",
]


def _boiler(rng: random.Random, n_blocks: int) -> str:
    blocks = []
    for i in range(n_blocks):
        items = "\n".join(
            f'        <li class="rel-{j}"><a href="/item/{i}-{j}">{_lorem(rng, 3)}</a></li>'
            for j in range(6)
        )
        blocks.append(
            f'    <div class="widget w{i}" data-slot="{i}">\n'
            f'      <h3 class="widget-head">{_lorem(rng, 2)}</h3>\n'
            f'      <ul class="widget-list">\n{items}\n      </ul>\n'
            f"    </div>"
        )
    return "\n".join(blocks)


def _site_head(rng: random.Random, title: str) -> str:
    return f"""<head>
<meta charset="utf-8">
<title>{title}</title>
<link rel="stylesheet" href="/css/main.css">
<style>{';'.join(f'.s{i}{{padding:{i}px}}' for i in range(30))}</style>
<script>var cfg = {{'page': '{title}', 'ab': {rng.randint(1, 9)}}};</script>
</head>"""


def camera_shop1(rng: random.Random, model: str, price: str) -> str:
    return f"""<!DOCTYPE html>
<html>
{_site_head(rng, 'CameraShop - ' + model)}
<body class="product-page">
  <header class="top"><ul class="crumbs">
    <li><a href="/">Home</a></li><li><a href="/cameras">Cameras</a></li>
  </ul></header>
{_boiler(rng, 4)}
  <main class="product">
    <h1 id="product-title" class="title-lg">{model}</h1>
    <div class="buy-box" data-region="buy">
      <span class="label">Price:</span>
      <span class="price">{price}</span>
      <button class="btn add" data-act="cart">Add to Cart</button>
    </div>
    <div class="desc"><p>{_lorem(rng, 30)}</p></div>
  </main>
{_boiler(rng, 3)}
  <footer class="bottom"><p>{_lorem(rng, 12)}</p></footer>
</body>
</html>
"""


def camera_shop2(rng: random.Random, model: str, price: str) -> str:
    return f"""<!DOCTYPE html>
<html>
{_site_head(rng, model + ' | ShopTwo')}
<body>
  <div id="wrap" class="grid">
{_boiler(rng, 3)}
    <div class="item-card" id="card-main">
      <h2 class="item-name">{model}</h2>
      <ul class="facts">
        <li class="fact">Availability: <b>In stock</b></li>
        <li class="fact">Price: <b>{price}</b></li>
        <li class="fact">Shipping: <b>Free</b></li>
      </ul>
      <p class="blurb">{_lorem(rng, 24)}</p>
    </div>
{_boiler(rng, 4)}
  </div>
</body>
</html>
"""


def book_store1(rng: random.Random, title: str, author: str) -> str:
    return f"""<!DOCTYPE html>
<html>
{_site_head(rng, title + ' - BookNook')}
<body class="book">
{_boiler(rng, 4)}
  <article class="book-main" itemscope>
    <h1 class="book-title">{title}</h1>
    <p class="byline">by <a class="author-link" href="/a/{author.split()[-1].lower()}">{author}</a></p>
    <div class="summary"><p>{_lorem(rng, 28)}</p></div>
  </article>
{_boiler(rng, 3)}
</body>
</html>
"""


def book_store2(rng: random.Random, title: str, author: str) -> str:
    return f"""<!DOCTYPE html>
<html>
{_site_head(rng, 'ReadMore: ' + title)}
<body>
  <section class="hero" data-k="top">
{_boiler(rng, 3)}
  </section>
  <section class="detail">
    <div id="main-title" class="t-big">{title}</div>
    <div class="meta-row">Author: <span class="by-line">{author}</span></div>
    <div class="meta-row">Format: <span class="fmt">Paperback</span></div>
    <p class="about">{_lorem(rng, 26)}</p>
  </section>
{_boiler(rng, 4)}
</body>
</html>
"""


SITES = [
    ("camera", "shop1", camera_shop1,
     {"model": CAMERA_MODELS, "price": CAMERA_PRICES}),
    ("camera", "shop2", camera_shop2,
     {"model": CAMERA_MODELS, "price": CAMERA_PRICES}),
    ("book", "store1", book_store1,
     {"title": BOOK_TITLES, "author": BOOK_AUTHORS}),
    ("book", "store2", book_store2,
     {"title": BOOK_TITLES, "author": BOOK_AUTHORS}),
]


def write_corpus(out: Path) -> None:
    for vertical, site, builder, field_values in SITES:
        rng = random.Random(f"{vertical}-{site}")
        site_dir = out / vertical / f"{vertical}-{site}"
        site_dir.mkdir(parents=True, exist_ok=True)
        gt_dir = out / "groundtruth" / vertical
        gt_dir.mkdir(parents=True, exist_ok=True)
        fields = list(field_values)
        truth: dict[str, dict[str, list[str]]] = {}
        for i in range(8):
            page_id = f"{i:04d}"
            values = [field_values[f][i] for f in fields]
            html = builder(rng, *values)
            (site_dir / f"{page_id}.htm").write_text(html, encoding="utf-8")
            truth[page_id] = {f: [v] for f, v in zip(fields, values)}
        (gt_dir / f"{site}.json").write_text(
            json.dumps(truth, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def main() -> int:
    pages_dir = FIXTURES / "pages"
    pages_dir.mkdir(parents=True, exist_ok=True)
    write_small_pages(pages_dir)
    write_swde_pages(pages_dir)
    write_corpus(FIXTURES / "corpus")

    count = len(list(pages_dir.glob("*.html")))
    print(f"wrote {count} fixture pages and the 4-site corpus under {FIXTURES}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
