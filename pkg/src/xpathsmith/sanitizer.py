"""Page reduction for the extraction stage: sanitize, minify, measure.

sanitize() drops everything an extraction model cannot use (invisible
subtrees, textless wrappers, all attributes); minify() squeezes the
serialized bytes without touching visible text; token_stats() measures the
reduction over a corpus.
"""
from __future__ import annotations

import csv
import json
import re
from dataclasses import dataclass, asdict
from html.parser import HTMLParser
from pathlib import Path
from statistics import mean, median

from .dom import (
    DomDocument, DomNode, INVISIBLE_TAGS, RAW_TEXT_TAGS, VOID_TAGS,
    parse_html, serialize, visible_text,
)

# Tags whose whole subtree is invisible to a reader, plus metadata carriers.
REMOVABLE_TAGS = frozenset({
    "script", "style", "head", "meta", "link", "noscript", "template",
})

_TOKEN_RE = re.compile(r"\S+")
_WS_RUN_RE = re.compile(r"\s+")


class EmptyCorpus(ValueError):
    """token_stats over zero pages."""


@dataclass
class SanitizationReport:
    page_id: str
    original_bytes: int
    sanitized_bytes: int
    minified_bytes: int
    ratio: float
    removed_nodes: int
    original_tokens: int
    minified_tokens: int


def _is_invisible_or_no_text(node: DomNode) -> bool:
    if node.is_comment:
        return True
    if node.tag in REMOVABLE_TAGS:
        return True
    if node.is_hidden_by_style():
        return True
    return visible_text(node) == ""


def sanitize(doc: DomDocument) -> DomDocument:
    """Prune invisible or textless nodes bottom-up and strip all attributes.

    Two stacks: the first pass flattens the tree, the second pops children
    before parents so a wrapper emptied by its children's removal is itself
    removed in the same sweep. Works on a copy; the input keeps its
    attributes for the programming stage.
    """
    out = doc.copy()
    left_stack: list[DomNode] = [out.root]
    right_stack: list[DomNode] = []
    while left_stack:
        node = left_stack.pop()
        right_stack.append(node)
        left_stack.extend(node.children)
    while right_stack:
        node = right_stack.pop()
        if _is_invisible_or_no_text(node):
            if node.parent is None:
                continue  # never drop the root element
            node.parent.remove_child(node)
        else:
            node.attributes.clear()
    return out


class _Minifier(HTMLParser):
    """Event stream copy with comments dropped and whitespace runs collapsed.

    A pending-space flag carries "there was whitespace here" across tag
    events and materializes only right before the next visible text, so the
    normalized visible text stream is byte-identical while indentation and
    inter-tag newlines disappear. A tag stack tracks invisible subtrees
    (head, noscript, hidden styles) so deferred spaces never leak into
    them; raw-text elements pass through untouched.
    """

    _HIDDEN_RE = re.compile(r"display\s*:\s*none|visibility\s*:\s*hidden", re.IGNORECASE)

    def __init__(self) -> None:
        super().__init__(convert_charrefs=False)
        self.parts: list[str] = []
        self.pending_space = False
        self.emitted_text = False
        self._raw_depth = 0
        self._stack: list[tuple[str, bool]] = []  # (tag, subtree invisible)

    def _invisible(self) -> bool:
        return bool(self._stack) and self._stack[-1][1]

    def _is_invisible_start(self, tag: str, attrs) -> bool:
        if self._invisible():
            return True
        if tag in INVISIBLE_TAGS:
            return True
        style = next((v for k, v in attrs if k == "style" and v), None)
        return bool(style and self._HIDDEN_RE.search(style))

    def _flush_space(self) -> None:
        if self.pending_space and self.emitted_text:
            self.parts.append(" ")
        self.pending_space = False

    @staticmethod
    def _format_attrs(attrs) -> str:
        out: list[str] = []
        for name, value in attrs:
            if value is None or value == "":
                out.append(f" {name}")
            elif re.fullmatch(r"[^\s\"'`=<>]+", value):
                out.append(f" {name}={value}")
            else:
                out.append(f' {name}="{value}"')
        return "".join(out)

    def handle_starttag(self, tag, attrs):
        self.parts.append(f"<{tag}{self._format_attrs(attrs)}>")
        if tag not in VOID_TAGS:
            self._stack.append((tag, self._is_invisible_start(tag, attrs)))
        if tag in RAW_TEXT_TAGS:
            self._raw_depth += 1

    def handle_endtag(self, tag):
        if tag in VOID_TAGS:
            return
        if any(entry[0] == tag for entry in self._stack):
            while self._stack and self._stack.pop()[0] != tag:
                pass
        if tag in RAW_TEXT_TAGS and self._raw_depth:
            self._raw_depth -= 1
        self.parts.append(f"</{tag}>")

    def handle_startendtag(self, tag, attrs):
        if tag in VOID_TAGS:
            self.parts.append(f"<{tag}{self._format_attrs(attrs)}>")
        else:
            self.parts.append(f"<{tag}{self._format_attrs(attrs)}/>")

    def handle_data(self, data):
        if self._raw_depth:
            self.parts.append(data)
            return
        if self._invisible():
            # collapse for size only; this text never joins the visible stream
            self.parts.append(_WS_RUN_RE.sub(" ", data))
            return
        pieces = data.split()
        if not pieces:
            self.pending_space = self.pending_space or bool(data)
            return
        if data[:1].isspace():
            self.pending_space = True
        self._flush_space()
        self.parts.append(" ".join(pieces))
        self.emitted_text = True
        self.pending_space = data[-1:].isspace()

    def handle_entityref(self, name):
        if not self._raw_depth and not self._invisible():
            self._flush_space()
            self.emitted_text = True
        self.parts.append(f"&{name};")

    def handle_charref(self, name):
        if not self._raw_depth and not self._invisible():
            self._flush_space()
            self.emitted_text = True
        self.parts.append(f"&#{name};")

    def handle_comment(self, data):
        pass

    def handle_pi(self, data):
        self.parts.append(f"<?{data}>")

    def handle_decl(self, decl):
        self.parts.append(f"<!{decl}>")


def minify(html: str) -> str:
    """Lossless-for-visible-text size squeeze over serialized HTML."""
    minifier = _Minifier()
    minifier.feed(html)
    minifier.close()
    return "".join(minifier.parts)


def sanitize_page(doc: DomDocument, page_id: str = "") -> tuple[str, SanitizationReport]:
    """Full reduction: sanitize, serialize, minify; report sizes along the way."""
    original_html = serialize(doc)
    original_bytes = doc.byte_size or len(original_html.encode("utf-8"))
    clean = sanitize(doc)
    removed = sum(1 for _ in doc.root.iter_tree()) - sum(1 for _ in clean.root.iter_tree())
    sanitized_html = serialize(clean)
    minified = minify(sanitized_html)
    minified_bytes = len(minified.encode("utf-8"))
    report = SanitizationReport(
        page_id=page_id,
        original_bytes=original_bytes,
        sanitized_bytes=len(sanitized_html.encode("utf-8")),
        minified_bytes=minified_bytes,
        ratio=minified_bytes / original_bytes if original_bytes else 0.0,
        removed_nodes=removed,
        original_tokens=len(_TOKEN_RE.findall(original_html)),
        minified_tokens=len(_TOKEN_RE.findall(minified)),
    )
    return minified, report


def token_stats(pages: list[tuple[str, bytes]], csv_path: str | Path | None = None,
                plot_path: str | Path | None = None) -> dict:
    """Per-page reports plus per-category mean/median reduction ratios.

    `pages` pairs a page id with raw bytes; the category is the id's
    directory-like prefix before the last "/" (or the whole id when flat).
    """
    if not pages:
        raise EmptyCorpus("token_stats needs at least one page")
    reports: list[SanitizationReport] = []
    for page_id, raw in pages:
        doc = parse_html(raw)
        _, report = sanitize_page(doc, page_id=page_id)
        reports.append(report)

    by_category: dict[str, list[float]] = {}
    for report in reports:
        category = report.page_id.rsplit("/", 1)[0] if "/" in report.page_id else ""
        by_category.setdefault(category, []).append(report.ratio)
    categories = {
        name: {"pages": len(ratios), "mean_ratio": mean(ratios),
               "median_ratio": median(ratios)}
        for name, ratios in sorted(by_category.items())
    }
    summary = {
        "pages": len(reports),
        "mean_ratio": mean(r.ratio for r in reports),
        "median_ratio": median(r.ratio for r in reports),
        "reports": reports,
        "categories": categories,
    }
    if csv_path is not None:
        with open(csv_path, "w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(["page_id", "original_bytes", "sanitized_bytes",
                             "minified_bytes", "ratio", "removed_nodes",
                             "original_tokens", "minified_tokens"])
            for r in reports:
                writer.writerow([r.page_id, r.original_bytes, r.sanitized_bytes,
                                 r.minified_bytes, f"{r.ratio:.6f}", r.removed_nodes,
                                 r.original_tokens, r.minified_tokens])
    if plot_path is not None:
        plot = {
            "points": [{"x": r.original_bytes, "y": r.minified_bytes,
                        "page_id": r.page_id} for r in reports],
            "categories": categories,
        }
        Path(plot_path).write_text(json.dumps(plot, indent=2, sort_keys=True))
    return summary


def report_as_dict(report: SanitizationReport) -> dict:
    return asdict(report)
