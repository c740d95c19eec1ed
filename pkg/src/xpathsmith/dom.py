"""HTML document model: error-recovering parse, traversal, mutation, serialization.

The whole pipeline shares this one tree semantics. Text is stored lxml-style
(head text on the element, tail text on each child) so positional text nodes
are well defined; comments are ordinary nodes with a reserved tag.
"""
from __future__ import annotations

import re
from html import escape
from html.parser import HTMLParser
from typing import Iterator

COMMENT_TAG = "#comment"

VOID_TAGS = frozenset({
    "area", "base", "br", "col", "embed", "hr", "img", "input", "link",
    "meta", "param", "source", "track", "wbr",
})

# Content emitted verbatim, never entity-escaped.
RAW_TEXT_TAGS = frozenset({"script", "style"})

# Subtrees that never contribute to visible text.
INVISIBLE_TAGS = frozenset({"script", "style", "template", "noscript", "head"})

_WS_RE = re.compile(r"\s+")
_HIDDEN_STYLE_RE = re.compile(r"display\s*:\s*none|visibility\s*:\s*hidden", re.IGNORECASE)
_META_CHARSET_RE = re.compile(
    rb"""charset\s*=\s*["']?\s*([A-Za-z0-9_.:-]+)""", re.IGNORECASE
)


class UndecodableInput(ValueError):
    """Raised when no candidate encoding can decode the input bytes."""


def normalize_ws(text: str) -> str:
    """Collapse every whitespace run to a single space and trim the ends."""
    return _WS_RE.sub(" ", text).strip()


class DomNode:
    """One element (or comment) in the tree.

    `text` is the content before the first child; each node's `tail` is the
    content that follows it inside its parent. Comment nodes use tag
    ``#comment`` and keep their content in `text`.
    """

    __slots__ = ("tag", "attributes", "text", "tail", "children", "parent", "node_id")

    def __init__(self, tag: str, attributes: dict[str, str] | None = None,
                 node_id: int = -1) -> None:
        self.tag = tag
        self.attributes: dict[str, str] = dict(attributes) if attributes else {}
        self.text = ""
        self.tail = ""
        self.children: list[DomNode] = []
        self.parent: DomNode | None = None
        self.node_id = node_id

    def __repr__(self) -> str:
        bits = [self.tag]
        if "id" in self.attributes:
            bits.append(f"#{self.attributes['id']}")
        return f"<DomNode {''.join(bits)} id={self.node_id}>"

    @property
    def is_comment(self) -> bool:
        return self.tag == COMMENT_TAG

    @property
    def direct_text(self) -> list[str]:
        """This element's own non-empty text segments, in document order."""
        return [seg for _, seg in self.text_slots() if seg]

    def text_slots(self) -> Iterator[tuple[int, str]]:
        """All text slots: (0, head text), then (i, tail of children[i-1])."""
        yield 0, self.text
        for i, child in enumerate(self.children):
            yield i + 1, child.tail

    def set_text_slot(self, slot: int, value: str) -> None:
        if slot == 0:
            self.text = value
        else:
            self.children[slot - 1].tail = value

    def append_child(self, child: DomNode) -> DomNode:
        child.parent = self
        self.children.append(child)
        return child

    def insert_child(self, index: int, child: DomNode) -> DomNode:
        child.parent = self
        self.children.insert(index, child)
        return child

    def remove_child(self, child: DomNode, keep_tail: bool = True) -> None:
        """Detach `child`; its tail text is merged left so no sibling text is lost."""
        idx = self.children.index(child)
        if keep_tail and child.tail:
            if idx > 0:
                self.children[idx - 1].tail += child.tail
            else:
                self.text += child.tail
        del self.children[idx]
        child.parent = None
        child.tail = ""

    def iter_tree(self) -> Iterator[DomNode]:
        """Pre-order walk including self (comments included)."""
        yield self
        for child in self.children:
            yield from child.iter_tree()

    def iter_elements(self) -> Iterator[DomNode]:
        """Pre-order walk over element nodes only."""
        for node in self.iter_tree():
            if not node.is_comment:
                yield node

    def is_hidden_by_style(self) -> bool:
        style = self.attributes.get("style")
        return bool(style and _HIDDEN_STYLE_RE.search(style))

    def copy(self) -> DomNode:
        """Deep copy; node ids are preserved (uniqueness holds within the copy)."""
        dup = DomNode(self.tag, self.attributes, self.node_id)
        dup.text = self.text
        dup.tail = self.tail
        for child in self.children:
            dup.append_child(child.copy())
        return dup


class DomDocument:
    """A parsed page: root element plus source metadata."""

    __slots__ = ("root", "source_url", "byte_size", "doctype")

    def __init__(self, root: DomNode, source_url: str | None = None,
                 byte_size: int = 0, doctype: str | None = None) -> None:
        self.root = root
        self.source_url = source_url
        self.byte_size = byte_size
        self.doctype = doctype

    def copy(self) -> DomDocument:
        return DomDocument(self.root.copy(), self.source_url, self.byte_size, self.doctype)

    def get_node(self, node_id: int) -> DomNode | None:
        """Look a node up by id with a fresh walk (stable across unrelated mutations)."""
        for node in self.root.iter_tree():
            if node.node_id == node_id:
                return node
        return None


class _TreeBuilder(HTMLParser):
    """Error-recovering builder: never raises on wild HTML."""

    def __init__(self) -> None:
        super().__init__(convert_charrefs=True)
        self.fragment = DomNode("#fragment", node_id=-1)
        self.stack = [self.fragment]
        self.doctype: str | None = None
        self._next_id = 0

    def _make(self, tag: str, attrs=None) -> DomNode:
        node = DomNode(tag, attrs, self._next_id)
        self._next_id += 1
        return node

    def _append(self, node: DomNode) -> None:
        self.stack[-1].append_child(node)

    def handle_starttag(self, tag, attrs):
        attr_map: dict[str, str] = {}
        for name, value in attrs:
            attr_map.setdefault(name, value if value is not None else "")
        node = self._make(tag, attr_map)
        self._append(node)
        if tag not in VOID_TAGS:
            self.stack.append(node)

    def handle_startendtag(self, tag, attrs):
        # <div/> parsed as an empty element rather than an open one.
        attr_map: dict[str, str] = {}
        for name, value in attrs:
            attr_map.setdefault(name, value if value is not None else "")
        self._append(self._make(tag, attr_map))

    def handle_endtag(self, tag):
        if tag in VOID_TAGS:
            return
        for depth in range(len(self.stack) - 1, 0, -1):
            if self.stack[depth].tag == tag:
                del self.stack[depth:]
                return
        # stray end tag: ignore

    def handle_data(self, data):
        top = self.stack[-1]
        if top.children:
            top.children[-1].tail += data
        else:
            top.text += data

    def handle_comment(self, data):
        node = self._make(COMMENT_TAG)
        node.text = data
        self._append(node)

    def handle_decl(self, decl):
        if self.doctype is None:
            self.doctype = decl


def _move_content(source_text: str, nodes: list[DomNode], target: DomNode,
                  at_start: bool) -> None:
    """Adopt a (text, children-with-tails) run into `target`, preserving order."""
    if at_start:
        if nodes:
            last = nodes[-1]
            last.tail += target.text
            target.text = source_text
            for i, node in enumerate(nodes):
                target.insert_child(i, node)
        else:
            target.text = source_text + target.text
    else:
        if target.children:
            target.children[-1].tail += source_text
        else:
            target.text += source_text
        for node in nodes:
            target.append_child(node)


def _normalize_tree(builder: _TreeBuilder) -> DomNode:
    """Ensure an html/body skeleton; idempotent on re-parse of our own output."""
    fragment = builder.fragment
    html = next((c for c in fragment.children if c.tag == "html"), None)

    if html is None:
        html = builder._make("html")
        body = builder._make("body")
        _move_content(fragment.text, list(fragment.children), body, at_start=False)
        html.append_child(body)
        return html

    idx = fragment.children.index(html)
    pre_nodes = fragment.children[:idx]
    post_nodes = fragment.children[idx + 1:]
    pre_text = fragment.text
    post_text = html.tail
    html.tail = ""
    for node in pre_nodes + post_nodes:
        node.parent = None

    body = next((c for c in html.children if c.tag == "body"), None)
    if body is None:
        head = next((c for c in html.children if c.tag == "head"), None)
        body = builder._make("body")
        loose = [c for c in html.children if c is not head]
        for node in loose:
            node.parent = None
        loose_text = html.text if head is None else head.tail
        if head is not None:
            head.tail = ""
            html.text = ""
        else:
            html.text = ""
        html.children = [head] if head is not None else []
        if head is not None:
            head.parent = html
        _move_content(loose_text, loose, body, at_start=False)
        html.append_child(body)

    if pre_nodes or pre_text:
        _move_content(pre_text, pre_nodes, body, at_start=True)
    if post_nodes or post_text:
        _move_content(post_text, post_nodes, body, at_start=False)
    return html


def _decode(data: bytes) -> str:
    candidates: list[str] = []
    match = _META_CHARSET_RE.search(data[:2048])
    if match:
        candidates.append(match.group(1).decode("ascii", "ignore"))
    candidates += ["utf-8", "cp1252"]
    seen: set[str] = set()
    for encoding in candidates:
        key = encoding.lower()
        if key in seen:
            continue
        seen.add(key)
        try:
            return data.decode(encoding)
        except (UnicodeDecodeError, LookupError):
            continue
    raise UndecodableInput(f"no candidate encoding decodes the input (tried {candidates})")


def parse_html(data: bytes | str, source_url: str | None = None) -> DomDocument:
    """Parse HTML bytes or text into a normalized document.

    Never rejects malformed markup; unmatched tags are recovered in place.
    Raises UndecodableInput only when byte input defeats every candidate
    encoding (declared charset, UTF-8, cp1252).
    """
    if isinstance(data, bytes):
        byte_size = len(data)
        text = _decode(data)
    else:
        byte_size = len(data.encode("utf-8"))
        text = data
    builder = _TreeBuilder()
    builder.feed(text)
    builder.close()
    root = _normalize_tree(builder)
    root.parent = None
    return DomDocument(root, source_url=source_url, byte_size=byte_size,
                       doctype=builder.doctype)


def _serialize_node(node: DomNode, parts: list[str]) -> None:
    if node.is_comment:
        parts.append(f"<!--{node.text}-->")
        return
    parts.append(f"<{node.tag}")
    for name, value in node.attributes.items():
        parts.append(f' {name}="{escape(value, quote=True)}"')
    parts.append(">")
    if node.tag in VOID_TAGS and not node.children and not node.text:
        return
    raw = node.tag in RAW_TEXT_TAGS
    parts.append(node.text if raw else escape(node.text, quote=False))
    for child in node.children:
        _serialize_node(child, parts)
        parts.append(child.tail if raw else escape(child.tail, quote=False))
    parts.append(f"</{node.tag}>")


def serialize(doc: DomDocument | DomNode) -> str:
    """Render back to HTML text; parse_html(serialize(d)) is structurally equal to d."""
    parts: list[str] = []
    if isinstance(doc, DomDocument):
        if doc.doctype:
            parts.append(f"<!{doc.doctype}>")
        _serialize_node(doc.root, parts)
    else:
        _serialize_node(doc, parts)
    return "".join(parts)


def _collect_visible(node: DomNode, out: list[str]) -> None:
    if node.is_comment or node.tag in INVISIBLE_TAGS or node.is_hidden_by_style():
        return
    out.append(node.text)
    for child in node.children:
        _collect_visible(child, out)
        out.append(child.tail)


def visible_text(node: DomNode) -> str:
    """Whitespace-normalized text of the subtree, skipping invisible content.

    Invisible means: comments, script/style/template/noscript/head, and
    elements inline-styled display:none or visibility:hidden. The sanitizer
    and the XPath string-value share this definition.
    """
    out: list[str] = []
    _collect_visible(node, out)
    return normalize_ws("".join(out))


def structurally_equal(a: DomDocument | DomNode, b: DomDocument | DomNode) -> bool:
    """Tag/attribute/text equality, attribute order included; ids ignored."""
    if isinstance(a, DomDocument):
        a = a.root
    if isinstance(b, DomDocument):
        b = b.root
    if a.tag != b.tag or a.text != b.text or a.tail != b.tail:
        return False
    if list(a.attributes.items()) != list(b.attributes.items()):
        return False
    if len(a.children) != len(b.children):
        return False
    return all(structurally_equal(x, y) for x, y in zip(a.children, b.children))
