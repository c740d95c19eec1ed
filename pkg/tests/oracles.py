"""Independent reference implementations used to cross-check the package.

Deliberately different shapes from the package code: the XPath oracle
filters one flat document-order item list per axis instead of walking
the tree, the sanitizer oracle is plain post-order recursion instead of
an explicit two-stack loop, the minifier oracle emits from the tree
instead of re-parsing serialized HTML, and the condenser oracle scores
every (element, segment, target) pair with a full-matrix edit distance.
Slow is fine here; obvious is the point.
"""
from __future__ import annotations

import math
import random
import re

from xpathsmith.dom import COMMENT_TAG, VOID_TAGS, DomDocument, DomNode
from xpathsmith.xpath_engine import (
    BinaryOp, FunctionCall, Literal, LocationPath, NameTest, NodeTypeTest,
    Number, PathUnion, Step,
)


class OracleError(Exception):
    """Evaluation failure in the oracle (mirrors XPathEvaluationError cases)."""


def _norm(text: str) -> str:
    return " ".join(text.split())


# ---------------------------------------------------------------------------
# visible text, reimplemented

_HIDDEN_RE = re.compile(r"display\s*:\s*none|visibility\s*:\s*hidden", re.I)
_SKIP_TAGS = frozenset({"script", "style", "template", "noscript", "head"})


def _is_invisible(node: DomNode) -> bool:
    if node.tag == COMMENT_TAG or node.tag in _SKIP_TAGS:
        return True
    style = node.attributes.get("style", "")
    return bool(_HIDDEN_RE.search(style))


def oracle_visible_text(node: DomNode) -> str:
    def pieces(n: DomNode) -> list[str]:
        if _is_invisible(n):
            return []
        acc = [n.text]
        for child in n.children:
            acc += pieces(child)
            acc.append(child.tail)
        return acc

    return _norm("".join(pieces(node)))


# ---------------------------------------------------------------------------
# XPath oracle: flat item list + relation filtering
#
# Items are plain tuples:
#   ("root",)                    the document root above the html element
#   ("elem", node)               element or comment node
#   ("text", owner, slot)        slot 0 = head text, slot i = children[i-1].tail
#   ("attr", owner, name)

def _key(item: tuple) -> tuple:
    kind = item[0]
    if kind == "root":
        return ("root",)
    if kind == "elem":
        return ("elem", id(item[1]))
    if kind == "text":
        return ("text", id(item[1]), item[2])
    return ("attr", id(item[1]), item[2])


class BruteXPath:
    """Evaluate the dialect by filtering one document-order list of items."""

    def __init__(self, doc: DomDocument) -> None:
        self.doc = doc
        self.items: list[tuple] = []
        self.parent: dict[tuple, tuple | None] = {}
        self._build(doc.root)
        self.pos = {_key(it): i for i, it in enumerate(self.items)}

    def _build(self, root: DomNode) -> None:
        def add(item: tuple, parent: tuple | None) -> None:
            self.items.append(item)
            self.parent[_key(item)] = parent

        add(("root",), None)
        def rec(node: DomNode, parent: tuple | None) -> None:
            me = ("elem", node)
            add(me, parent)
            if node.tag == COMMENT_TAG:
                return
            for name in node.attributes:
                add(("attr", node, name), me)
            if node.text:
                add(("text", node, 0), me)
            for i, child in enumerate(node.children):
                rec(child, me)
                if child.tail:
                    add(("text", node, i + 1), me)

        rec(root, ("root",))

    # -- relations ------------------------------------------------------

    def _ancestors(self, item: tuple) -> list[tuple]:
        chain = []
        current = self.parent[_key(item)]
        while current is not None:
            chain.append(current)
            current = self.parent[_key(current)]
        return chain

    def _in_order(self, items: list[tuple]) -> list[tuple]:
        unique: dict[tuple, tuple] = {}
        for it in items:
            unique.setdefault(_key(it), it)
        return sorted(unique.values(), key=lambda it: self.pos[_key(it)])

    def axis(self, item: tuple, name: str) -> list[tuple]:
        key = _key(item)
        if name == "self":
            return [item]
        if name == "parent":
            p = self.parent[key]
            return [] if p is None else [p]
        if name == "ancestor":
            return self._ancestors(item)
        if name == "ancestor-or-self":
            return [item] + self._ancestors(item)
        if name == "child":
            return [it for it in self.items
                    if it[0] != "attr" and self.parent[_key(it)] is not None
                    and _key(self.parent[_key(it)]) == key]
        if name == "descendant":
            return [it for it in self.items
                    if it[0] != "attr"
                    and any(_key(a) == key for a in self._ancestors(it))]
        if name == "descendant-or-self":
            return self._in_order([item] + self.axis(item, "descendant"))
        if name in ("following-sibling", "preceding-sibling"):
            if item[0] == "attr":
                return []
            p = self.parent[key]
            if p is None:
                return []
            sibs = self.axis(p, "child")
            idx = next(i for i, s in enumerate(sibs) if _key(s) == key)
            if name == "following-sibling":
                return sibs[idx + 1:]
            return list(reversed(sibs[:idx]))
        if name == "attribute":
            if item[0] == "elem" and item[1].tag != COMMENT_TAG:
                return [("attr", item[1], n) for n in item[1].attributes]
            return []
        raise OracleError(f"unknown axis {name}")

    # -- node tests and values -------------------------------------------

    @staticmethod
    def matches(test, item: tuple, axis: str) -> bool:
        kind = item[0]
        if isinstance(test, NodeTypeTest):
            if test.kind == "node":
                return True
            if test.kind == "text":
                return kind == "text"
            return kind == "elem" and item[1].tag == COMMENT_TAG
        if axis == "attribute":
            return kind == "attr" and test.name in ("*", item[2])
        return (kind == "elem" and item[1].tag != COMMENT_TAG
                and test.name in ("*", item[1].tag))

    def string_value(self, item: tuple) -> str:
        kind = item[0]
        if kind == "root":
            return oracle_visible_text(self.doc.root)
        if kind == "elem":
            node = item[1]
            if node.tag == COMMENT_TAG:
                return _norm(node.text)
            return oracle_visible_text(node)
        if kind == "text":
            owner, slot = item[1], item[2]
            raw = owner.text if slot == 0 else owner.children[slot - 1].tail
            return _norm(raw)
        return item[1].attributes[item[2]]

    # -- expression evaluation ---------------------------------------------

    def evaluate(self, ast):
        return self._eval(ast, (("root",), 1, 1))

    def _eval(self, node, ctx):
        item, position, size = ctx
        if isinstance(node, Literal):
            return node.value
        if isinstance(node, Number):
            return node.value
        if isinstance(node, FunctionCall):
            return self._function(node, ctx)
        if isinstance(node, BinaryOp):
            return self._binary(node, ctx)
        if isinstance(node, PathUnion):
            out: list[tuple] = []
            for path in node.paths:
                out += self._path(path, ctx)
            return self._in_order(out)
        if isinstance(node, LocationPath):
            return self._path(node, ctx)
        raise OracleError(f"cannot evaluate {node!r}")

    def _path(self, path: LocationPath, ctx) -> list[tuple]:
        current = [("root",)] if path.absolute else [ctx[0]]
        for step in path.steps:
            collected: list[tuple] = []
            for origin in current:
                cands = [it for it in self.axis(origin, step.axis)
                         if self.matches(step.test, it, step.axis)]
                for pred in step.predicates:
                    survivors = []
                    for i, cand in enumerate(cands):
                        value = self._eval(pred, (cand, i + 1, len(cands)))
                        if isinstance(value, float):
                            keep = value == i + 1
                        else:
                            keep = self.to_bool(value)
                        if keep:
                            survivors.append(cand)
                    cands = survivors
                collected += cands
            current = self._in_order(collected)
        return current

    def _function(self, call: FunctionCall, ctx):
        if call.name == "position":
            return float(ctx[1])
        args = [self._eval(a, ctx) for a in call.args]
        if call.name == "normalize-space":
            base = self.to_str(args[0]) if args else self.string_value(ctx[0])
            return _norm(base)
        a, b = self.to_str(args[0]), self.to_str(args[1])
        if call.name == "contains":
            return b in a
        if call.name == "starts-with":
            return a[:len(b)] == b
        if call.name == "ends-with":
            return a[len(a) - len(b):] == b if b else True
        if call.name == "substring-before":
            return a.split(b, 1)[0] if b in a else ""
        if call.name == "substring-after":
            return a.split(b, 1)[1] if b in a else ""
        raise OracleError(f"unknown function {call.name}")

    def _binary(self, node: BinaryOp, ctx):
        if node.op in ("or", "and"):
            left = self.to_bool(self._eval(node.left, ctx))
            if node.op == "or" and left:
                return True
            if node.op == "and" and not left:
                return False
            return self.to_bool(self._eval(node.right, ctx))
        left = self._eval(node.left, ctx)
        right = self._eval(node.right, ctx)
        return self._compare(node.op, left, right)

    def _compare(self, op, left, right) -> bool:
        if isinstance(left, list) and isinstance(right, list):
            lvals = [self.string_value(n) for n in left]
            rvals = [self.string_value(n) for n in right]
            return any(self._cmp_scalar(op, a, b) for a in lvals for b in rvals)
        if isinstance(left, list) or isinstance(right, list):
            nodes, other, node_side = (
                (left, right, "l") if isinstance(left, list) else (right, left, "r"))
            if isinstance(other, bool):
                as_bool = self.to_bool(nodes)
                pair = (as_bool, other) if node_side == "l" else (other, as_bool)
                return self._cmp_scalar(op, *pair)
            for n in nodes:
                sv = self.string_value(n)
                pair = (sv, other) if node_side == "l" else (other, sv)
                if self._cmp_scalar(op, *pair):
                    return True
            return False
        return self._cmp_scalar(op, left, right)

    def _cmp_scalar(self, op, a, b) -> bool:
        import operator
        ops = {"=": operator.eq, "!=": operator.ne, "<": operator.lt,
               "<=": operator.le, ">": operator.gt, ">=": operator.ge}
        if op in ("=", "!="):
            if isinstance(a, bool) or isinstance(b, bool):
                return ops[op](self.to_bool(a), self.to_bool(b))
            if isinstance(a, float) or isinstance(b, float):
                x, y = self.to_num(a), self.to_num(b)
                if math.isnan(x) or math.isnan(y):
                    return op == "!="
                return ops[op](x, y)
            return ops[op](a, b)
        x, y = self.to_num(a), self.to_num(b)
        if math.isnan(x) or math.isnan(y):
            return False
        return ops[op](x, y)

    # -- conversions ------------------------------------------------------

    def to_str(self, value) -> str:
        if isinstance(value, list):
            if len(value) != 1:
                raise OracleError(f"string() over node-set of size {len(value)}")
            return self.string_value(value[0])
        if isinstance(value, bool):
            return "true" if value else "false"
        if isinstance(value, float):
            return oracle_format_number(value)
        return value

    @staticmethod
    def to_bool(value) -> bool:
        if isinstance(value, list):
            return len(value) > 0
        if isinstance(value, bool):
            return value
        if isinstance(value, float):
            return not math.isnan(value) and value != 0.0
        return len(value) > 0

    @staticmethod
    def to_num(value) -> float:
        if isinstance(value, bool):
            return float(value)
        if isinstance(value, float):
            return value
        if isinstance(value, list):
            raise OracleError("unexpected node-set to number")
        try:
            return float(value.strip())
        except ValueError:
            return math.nan


def oracle_format_number(value: float) -> str:
    if math.isnan(value):
        return "NaN"
    as_int = int(value)
    if float(as_int) == value:
        return str(as_int)
    return repr(value)


def oracle_outcome(doc: DomDocument, ast) -> tuple:
    """("ok", result lines) or ("error",), the shape compared across
    implementations; error texts are allowed to differ."""
    oracle = BruteXPath(doc)
    try:
        value = oracle.evaluate(ast)
    except OracleError:
        return ("error",)
    if isinstance(value, list):
        lines, seen = [], set()
        for item in value:
            text = oracle.string_value(item)
            if text not in seen:
                seen.add(text)
                lines.append(text)
        return ("ok", lines)
    if isinstance(value, bool):
        return ("ok", ["true" if value else "false"])
    if isinstance(value, float):
        return ("ok", [oracle_format_number(value)])
    return ("ok", [value])


# ---------------------------------------------------------------------------
# sanitizer oracle: plain post-order recursion

_REMOVABLE = frozenset({"script", "style", "head", "meta", "link",
                        "noscript", "template"})


def _drop_keep_tail(node: DomNode) -> None:
    parent = node.parent
    idx = parent.children.index(node)
    if node.tail:
        if idx > 0:
            parent.children[idx - 1].tail += node.tail
        else:
            parent.text += node.tail
    parent.children.pop(idx)
    node.parent = None


def oracle_sanitize(doc: DomDocument) -> DomDocument:
    doc = doc.copy()

    def rec(node: DomNode) -> None:
        for child in list(node.children):
            rec(child)
        removable = (node.tag == COMMENT_TAG or node.tag in _REMOVABLE
                     or _HIDDEN_RE.search(node.attributes.get("style", ""))
                     or oracle_visible_text(node) == "")
        if removable and node.parent is not None:
            _drop_keep_tail(node)
        else:
            node.attributes.clear()

    rec(doc.root)
    return doc


# ---------------------------------------------------------------------------
# minifier oracle: tree emitter with deferred word boundaries
#
# Only supports what sanitized trees contain: attribute-free visible
# elements. Text escaping and the space-deferral rule (a whitespace run
# becomes one space emitted just before the next visible text, dropped at
# the ends) must match the streaming implementation byte for byte.

_ESCAPES = {"&": "&amp;", "<": "&lt;", ">": "&gt;"}


def oracle_minify_tree(root: DomNode) -> str:
    out: list[str] = []
    state = {"pending": False, "started": False}

    def text(raw: str) -> None:
        for token in re.split(r"(\s+)", raw):
            if not token:
                continue
            if token.isspace():
                state["pending"] = True
                continue
            if state["pending"] and state["started"]:
                out.append(" ")
            state["pending"] = False
            state["started"] = True
            out.append("".join(_ESCAPES.get(c, c) for c in token))

    def walk(node: DomNode) -> None:
        if node.attributes:
            raise ValueError("minifier oracle expects attribute-free trees")
        out.append(f"<{node.tag}>")
        text(node.text)
        for child in node.children:
            walk(child)
            text(child.tail)
        if node.tag not in VOID_TAGS:
            out.append(f"</{node.tag}>")

    walk(root)
    return "".join(out)


def oracle_sanitize_minify(doc: DomDocument) -> str:
    """The full reference pipeline behind the sanitizer goldens."""
    return oracle_minify_tree(oracle_sanitize(doc).root)


# ---------------------------------------------------------------------------
# condenser oracle: exhaustive pairing

def oracle_levenshtein(a: str, b: str) -> int:
    rows = len(a) + 1
    cols = len(b) + 1
    grid = [[0] * cols for _ in range(rows)]
    for i in range(rows):
        grid[i][0] = i
    for j in range(cols):
        grid[0][j] = j
    for i in range(1, rows):
        for j in range(1, cols):
            cost = 0 if a[i - 1] == b[j - 1] else 1
            grid[i][j] = min(grid[i - 1][j] + 1, grid[i][j - 1] + 1,
                             grid[i - 1][j - 1] + cost)
    return grid[-1][-1]


def oracle_distance(a: str, b: str) -> float:
    na, nb = _norm(a), _norm(b)
    if na == nb:
        return 0.0
    if nb and nb in na:
        return 0.0
    return oracle_levenshtein(na, nb) / max(len(na), len(nb))


def oracle_condense_pairs(doc: DomDocument, targets: list[str]):
    """All (element, segment, target) pairs scored exhaustively.

    Returns ({target: best distance or None}, {target: [node, ...]}) with
    ties kept in document order, using the same target list cleanup as the
    condenser (whitespace-only and duplicate targets dropped).
    """
    cleaned: list[str] = []
    for t in targets:
        if _norm(t) and t not in cleaned:
            cleaned.append(t)
    elements = [n for n in doc.root.iter_tree() if n.tag != COMMENT_TAG]
    distances: dict[str, float | None] = {}
    kept: dict[str, list[DomNode]] = {}
    for target in cleaned:
        scored = []
        for element in elements:
            segs = [_norm(s) for s in [element.text] +
                    [c.tail for c in element.children]]
            segs = [s for s in segs if s]
            if not segs:
                continue
            best_for_element = min(oracle_distance(s, target) for s in segs)
            scored.append((best_for_element, element))
        if not scored:
            distances[target] = None
            kept[target] = []
            continue
        best = min(d for d, _ in scored)
        distances[target] = best
        kept[target] = [e for d, e in scored if d == best]
    return distances, kept


# ---------------------------------------------------------------------------
# random generators (seeded by the caller)

_GEN_TAGS = ["div", "span", "p", "a", "b", "li", "ul", "i", "em", "td"]
_GEN_TEXTS = ["", "aa", "bb", "a b", " x ", "Price:", "$100.00", "12", "3.5",
              "zz yy", "n/a"]
_GEN_WORDS = ["aa", "bb", "x", "Price:", "$100.00", "12", "zz", "q"]
_GEN_ATTR_NAMES = ["id", "class", "href", "title"]


def random_document(rng: random.Random, max_nodes: int = 50) -> DomDocument:
    root = DomNode("html")
    elements = [root]
    depth = {id(root): 0}
    for n in range(rng.randint(1, max_nodes - 1)):
        parent = rng.choice([e for e in elements if depth[id(e)] < 5])
        if rng.random() < 0.08:
            comment = DomNode(COMMENT_TAG)
            comment.text = rng.choice(_GEN_WORDS)
            comment.tail = rng.choice(_GEN_TEXTS)
            parent.append_child(comment)
            continue
        child = DomNode(rng.choice(_GEN_TAGS))
        child.text = rng.choice(_GEN_TEXTS)
        child.tail = rng.choice(_GEN_TEXTS)
        if rng.random() < 0.4:
            name = rng.choice(_GEN_ATTR_NAMES)
            child.attributes[name] = rng.choice(["v1", "v2", f"u{n}", "a b"])
        if rng.random() < 0.05:
            child.attributes["style"] = "display:none"
        parent.append_child(child)
        elements.append(child)
        depth[id(child)] = depth[id(parent)] + 1
    if rng.random() < 0.5:
        root.text = rng.choice(_GEN_TEXTS)
    return DomDocument(root, source_url="random", byte_size=0)


def attribute_stress_document(rng: random.Random,
                              max_nodes: int = 50) -> DomDocument:
    """Trees skewed toward repeated class/id values on same-tag siblings.

    random_document rarely puts the same class on two siblings behind a
    differently-classed one, which is exactly where attribute steps need a
    positional tie-break; this generator makes that layout common.
    """
    root = DomNode("html")
    elements = [root]
    depth = {id(root): 0}
    for n in range(rng.randint(2, max_nodes - 1)):
        parent = rng.choice([e for e in elements if depth[id(e)] < 4])
        child = DomNode(rng.choice(["div", "span", "li"]))
        child.text = rng.choice(_GEN_TEXTS)
        roll = rng.random()
        if roll < 0.6:
            child.attributes["class"] = rng.choice(["row", "row", "hd", "ft"])
        elif roll < 0.7:
            child.attributes["id"] = rng.choice(["a", "b", f"u{n}"])
        parent.append_child(child)
        elements.append(child)
        depth[id(child)] = depth[id(parent)] + 1
    return DomDocument(root, source_url="stress", byte_size=0)


def random_expression(rng: random.Random):
    roll = rng.random()
    if roll < 0.72:
        return _random_path(rng, depth=3)
    if roll < 0.82:
        return PathUnion((_random_path(rng, 2), _random_path(rng, 2)))
    if roll < 0.92:
        return _random_function(rng, depth=2)
    return BinaryOp(rng.choice(["=", "!=", "<", "<=", ">", ">="]),
                    _random_path(rng, 2), _random_scalar(rng))


def _random_path(rng: random.Random, depth: int) -> LocationPath:
    steps = tuple(_random_step(rng, depth) for _ in range(rng.randint(1, 3)))
    return LocationPath(rng.random() < 0.7, steps)


def _random_step(rng: random.Random, depth: int) -> Step:
    axis = rng.choices(
        ["child", "descendant", "descendant-or-self", "self", "parent",
         "ancestor", "ancestor-or-self", "following-sibling",
         "preceding-sibling", "attribute"],
        weights=[38, 10, 8, 4, 4, 5, 3, 9, 9, 10])[0]
    if axis == "attribute":
        test = NameTest(rng.choice(_GEN_ATTR_NAMES + ["*"]))
    else:
        roll = rng.random()
        if roll < 0.62:
            test = NameTest(rng.choice(_GEN_TAGS + ["*"]))
        elif roll < 0.82:
            test = NodeTypeTest("text")
        elif roll < 0.94:
            test = NodeTypeTest("node")
        else:
            test = NodeTypeTest("comment")
    n_preds = rng.choices([0, 1, 2], weights=[55, 35, 10])[0] if depth > 0 else 0
    preds = tuple(_random_predicate(rng, depth - 1) for _ in range(n_preds))
    return Step(axis, test, preds)


def _random_predicate(rng: random.Random, depth: int):
    roll = rng.random()
    if roll < 0.34:
        return Number(float(rng.randint(1, 4)))
    if roll < 0.52:
        return BinaryOp(rng.choice(["=", "!=", "<", "<=", ">", ">="]),
                        _random_path(rng, max(depth, 0)), _random_scalar(rng))
    if roll < 0.72:
        return _random_function(rng, depth)
    if roll < 0.84 and depth > 0:
        return BinaryOp(rng.choice(["and", "or"]),
                        _random_predicate(rng, depth - 1),
                        _random_predicate(rng, depth - 1))
    return _random_path(rng, max(depth, 0))


def _random_scalar(rng: random.Random):
    if rng.random() < 0.55:
        return Literal(rng.choice(_GEN_WORDS))
    return Number(float(rng.randint(0, 5)))


def _random_function(rng: random.Random, depth: int) -> FunctionCall:
    name = rng.choice(["contains", "starts-with", "ends-with",
                       "substring-before", "substring-after",
                       "normalize-space", "position"])
    if name == "position":
        return FunctionCall("position", ())
    dot = LocationPath(False, (Step("self", NodeTypeTest("node")),))
    if name == "normalize-space":
        if rng.random() < 0.5:
            return FunctionCall(name, ())
        arg = dot if rng.random() < 0.6 else _first_arg(rng, depth)
        return FunctionCall(name, (arg,))
    return FunctionCall(name, (_first_arg(rng, depth),
                               Literal(rng.choice(_GEN_WORDS))))


def _first_arg(rng: random.Random, depth: int):
    roll = rng.random()
    if roll < 0.5:
        return LocationPath(False, (Step("self", NodeTypeTest("node")),))
    if roll < 0.8 and depth > 0:
        return _random_path(rng, depth - 1)
    return Literal(rng.choice(_GEN_WORDS))
