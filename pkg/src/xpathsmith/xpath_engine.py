"""Parse and evaluate the XPath subset the programming prompts license.

Anything outside the subset fails at parse time with a position, so the
repair loop gets a crisp invalid-expression signal instead of a silent
semantic change. Evaluation follows XPath 1.0 for what is supported, with
one extension: ends-with(a, b).
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Union as TUnion

from .dom import COMMENT_TAG, DomDocument, DomNode, normalize_ws, visible_text

AXES = frozenset({
    "child", "descendant", "descendant-or-self", "self", "parent",
    "ancestor", "ancestor-or-self", "following-sibling",
    "preceding-sibling", "attribute",
})

# name -> (min arity, max arity); everything else is a parse error
FUNCTIONS = {
    "contains": (2, 2),
    "starts-with": (2, 2),
    "ends-with": (2, 2),
    "substring-before": (2, 2),
    "substring-after": (2, 2),
    "normalize-space": (0, 1),
    "position": (0, 0),
}

NODE_TYPE_TESTS = frozenset({"text", "node", "comment"})


class XPathSyntaxError(ValueError):
    """Parse failure; `position` is a 0-based offset into the expression."""

    def __init__(self, message: str, position: int) -> None:
        super().__init__(f"{message} at position {position}")
        self.message = message
        self.position = position


class XPathEvaluationError(ValueError):
    """Runtime type mismatch, e.g. a string function over a node-set of size != 1."""


# ---------------------------------------------------------------------------
# AST

@dataclass(frozen=True)
class Literal:
    value: str


@dataclass(frozen=True)
class Number:
    value: float


@dataclass(frozen=True)
class NameTest:
    name: str  # element or attribute name, or "*"


@dataclass(frozen=True)
class NodeTypeTest:
    kind: str  # "text" | "node" | "comment"


@dataclass(frozen=True)
class Step:
    axis: str
    test: TUnion[NameTest, NodeTypeTest]
    predicates: tuple = ()


@dataclass(frozen=True)
class LocationPath:
    absolute: bool
    steps: tuple


@dataclass(frozen=True)
class PathUnion:
    paths: tuple


@dataclass(frozen=True)
class FunctionCall:
    name: str
    args: tuple


@dataclass(frozen=True)
class BinaryOp:
    op: str  # "or" | "and" | "=" | "!=" | "<" | "<=" | ">" | ">="
    left: object
    right: object


AstNode = TUnion[Literal, Number, LocationPath, PathUnion, FunctionCall, BinaryOp]

_DESCENDANT_SHORTHAND = Step("descendant-or-self", NodeTypeTest("node"), ())


@dataclass(frozen=True)
class XPathExpr:
    """Immutable parsed expression; share freely across threads."""

    source: str
    ast: AstNode = field(compare=False)

    def __str__(self) -> str:
        return to_string(self.ast)


# ---------------------------------------------------------------------------
# Lexer

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>\d+(?:\.\d+)?|\.\d+)
  | (?P<string>'[^']*'|"[^"]*")
  | (?P<name>[A-Za-z_][A-Za-z0-9_.-]*)
  | (?P<op>//|::|\.\.|!=|<=|>=|[/\[\]()@,|=<>.*])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Token:
    kind: str  # "number" | "string" | "name" | "op" | "eof"
    value: str
    pos: int


def _tokenize(source: str) -> list[_Token]:
    tokens: list[_Token] = []
    pos = 0
    while pos < len(source):
        match = _TOKEN_RE.match(source, pos)
        if match is None:
            raise XPathSyntaxError(f"unexpected character {source[pos]!r}", pos)
        kind = match.lastgroup
        if kind != "ws":
            text = match.group()
            if kind == "string":
                text = text[1:-1]
            tokens.append(_Token(kind, text, pos))
        pos = match.end()
    tokens.append(_Token("eof", "", len(source)))
    return tokens


# ---------------------------------------------------------------------------
# Parser (recursive descent)

class _Parser:
    def __init__(self, source: str) -> None:
        self.source = source
        self.tokens = _tokenize(source)
        self.index = 0

    @property
    def current(self) -> _Token:
        return self.tokens[self.index]

    def _peek_op(self, *values: str) -> bool:
        tok = self.current
        return tok.kind == "op" and tok.value in values

    def _take(self) -> _Token:
        tok = self.current
        self.index += 1
        return tok

    def _expect_op(self, value: str, what: str) -> _Token:
        tok = self.current
        if tok.kind != "op" or tok.value != value:
            raise XPathSyntaxError(f"expected {what}", tok.pos)
        return self._take()

    def _fail(self, message: str) -> XPathSyntaxError:
        return XPathSyntaxError(message, self.current.pos)

    def parse(self) -> AstNode:
        node = self.parse_expr()
        if self.current.kind != "eof":
            raise self._fail(f"unexpected trailing {self.current.value!r}")
        return node

    def parse_expr(self) -> AstNode:
        return self._parse_or()

    def _parse_or(self) -> AstNode:
        node = self._parse_and()
        while self.current.kind == "name" and self.current.value == "or":
            self._take()
            node = BinaryOp("or", node, self._parse_and())
        return node

    def _parse_and(self) -> AstNode:
        node = self._parse_comparison()
        while self.current.kind == "name" and self.current.value == "and":
            self._take()
            node = BinaryOp("and", node, self._parse_comparison())
        return node

    def _parse_comparison(self) -> AstNode:
        node = self._parse_union()
        if self._peek_op("=", "!=", "<", "<=", ">", ">="):
            op = self._take().value
            node = BinaryOp(op, node, self._parse_union())
        return node

    def _parse_union(self) -> AstNode:
        node = self._parse_path_or_primary()
        if not self._peek_op("|"):
            return node
        paths = [node]
        while self._peek_op("|"):
            self._take()
            paths.append(self._parse_path_or_primary())
        for operand in paths:
            if not isinstance(operand, LocationPath):
                raise XPathSyntaxError("union operands must be location paths",
                                       self.tokens[self.index - 1].pos)
        return PathUnion(tuple(paths))

    def _parse_path_or_primary(self) -> AstNode:
        tok = self.current
        if tok.kind == "op" and tok.value in ("/", "//"):
            return self._parse_location_path(absolute=True)
        if tok.kind == "op" and tok.value in (".", "..", "@", "*"):
            return self._parse_location_path(absolute=False)
        if tok.kind == "op" and tok.value == "(":
            self._take()
            inner = self.parse_expr()
            self._expect_op(")", "')'")
            self._reject_path_continuation()
            return inner
        if tok.kind == "string":
            self._take()
            self._reject_path_continuation()
            return Literal(tok.value)
        if tok.kind == "number":
            self._take()
            self._reject_path_continuation()
            return Number(float(tok.value))
        if tok.kind == "name":
            nxt = self.tokens[self.index + 1]
            if nxt.kind == "op" and nxt.value == "(" and tok.value not in NODE_TYPE_TESTS:
                call = self._parse_function_call()
                self._reject_path_continuation()
                return call
            return self._parse_location_path(absolute=False)
        raise self._fail("expected an expression")

    def _reject_path_continuation(self) -> None:
        if self._peek_op("/", "//", "["):
            raise self._fail("path steps after a non-path expression are not supported")

    def _parse_function_call(self) -> FunctionCall:
        name_tok = self._take()
        name = name_tok.value
        if name not in FUNCTIONS:
            raise XPathSyntaxError(f"unsupported function {name}()", name_tok.pos)
        self._expect_op("(", "'('")
        args: list[AstNode] = []
        if not self._peek_op(")"):
            args.append(self.parse_expr())
            while self._peek_op(","):
                self._take()
                args.append(self.parse_expr())
        self._expect_op(")", "')'")
        low, high = FUNCTIONS[name]
        if not low <= len(args) <= high:
            wanted = str(low) if low == high else f"{low}..{high}"
            raise XPathSyntaxError(
                f"{name}() takes {wanted} argument(s), got {len(args)}", name_tok.pos)
        return FunctionCall(name, tuple(args))

    def _parse_location_path(self, absolute: bool) -> LocationPath:
        steps: list[Step] = []
        if absolute:
            lead = self._take()  # "/" or "//"
            if lead.value == "//":
                steps.append(_DESCENDANT_SHORTHAND)
            elif not self._at_step_start():
                # bare "/" selects the document root
                return LocationPath(True, ())
        steps.append(self._parse_step())
        while self._peek_op("/", "//"):
            sep = self._take()
            if sep.value == "//":
                steps.append(_DESCENDANT_SHORTHAND)
            steps.append(self._parse_step())
        return LocationPath(absolute, tuple(steps))

    def _at_step_start(self) -> bool:
        tok = self.current
        if tok.kind == "name":
            return True
        return tok.kind == "op" and tok.value in (".", "..", "@", "*")

    def _parse_step(self) -> Step:
        tok = self.current
        if tok.kind == "op" and tok.value == ".":
            self._take()
            return Step("self", NodeTypeTest("node"), ())
        if tok.kind == "op" and tok.value == "..":
            self._take()
            return Step("parent", NodeTypeTest("node"), ())
        axis = "child"
        if tok.kind == "op" and tok.value == "@":
            self._take()
            axis = "attribute"
        elif tok.kind == "name" and self.tokens[self.index + 1].value == "::" \
                and self.tokens[self.index + 1].kind == "op":
            axis_tok = self._take()
            if axis_tok.value not in AXES:
                raise XPathSyntaxError(f"unsupported axis {axis_tok.value}", axis_tok.pos)
            axis = axis_tok.value
            self._take()  # "::"
        test = self._parse_node_test(axis)
        predicates: list[AstNode] = []
        while self._peek_op("["):
            self._take()
            predicates.append(self.parse_expr())
            self._expect_op("]", "']' to close the predicate")
        return Step(axis, test, tuple(predicates))

    def _parse_node_test(self, axis: str) -> TUnion[NameTest, NodeTypeTest]:
        tok = self.current
        if tok.kind == "op" and tok.value == "*":
            self._take()
            return NameTest("*")
        if tok.kind != "name":
            raise self._fail("expected a node test")
        name_tok = self._take()
        if self._peek_op("("):
            if name_tok.value not in NODE_TYPE_TESTS:
                raise XPathSyntaxError(
                    f"unsupported node test {name_tok.value}()", name_tok.pos)
            self._take()
            self._expect_op(")", "')' after node type test")
            if axis == "attribute":
                raise XPathSyntaxError(
                    "node type tests are not valid on the attribute axis", name_tok.pos)
            return NodeTypeTest(name_tok.value)
        return NameTest(name_tok.value)


def parse_xpath(expr: str) -> XPathExpr:
    """Parse into an immutable AST; raises XPathSyntaxError outside the subset."""
    if not isinstance(expr, str):
        raise XPathSyntaxError("expression must be a string", 0)
    if not expr.strip():
        raise XPathSyntaxError("empty expression", 0)
    ast = _Parser(expr).parse()
    return XPathExpr(source=expr, ast=ast)


# ---------------------------------------------------------------------------
# Pretty printer

def _quote_literal(value: str) -> str:
    if "'" not in value:
        return f"'{value}'"
    if '"' not in value:
        return f'"{value}"'
    raise ValueError("a string literal cannot contain both quote kinds")


def format_number(value: float) -> str:
    if math.isnan(value):
        return "NaN"
    if value == int(value):
        return str(int(value))
    return repr(value)


def _test_to_string(test: TUnion[NameTest, NodeTypeTest]) -> str:
    if isinstance(test, NameTest):
        return test.name
    return f"{test.kind}()"


def _step_to_string(step: Step) -> str:
    if step.axis == "self" and step.test == NodeTypeTest("node") and not step.predicates:
        return "."
    if step.axis == "parent" and step.test == NodeTypeTest("node") and not step.predicates:
        return ".."
    if step.axis == "attribute":
        base = "@" + _test_to_string(step.test)
    elif step.axis == "child":
        base = _test_to_string(step.test)
    else:
        base = f"{step.axis}::{_test_to_string(step.test)}"
    return base + "".join(f"[{to_string(p)}]" for p in step.predicates)


def _path_to_string(path: LocationPath) -> str:
    if path.absolute and not path.steps:
        return "/"
    parts: list[str] = []
    steps = list(path.steps)
    i = 0
    first = True
    while i < len(steps):
        step = steps[i]
        # A leading // implies absolute, so a relative path may only use the
        # shorthand after its first step.
        collapse = path.absolute or not first
        if step == _DESCENDANT_SHORTHAND and i + 1 < len(steps) and collapse:
            parts.append("//")
            parts.append(_step_to_string(steps[i + 1]))
            i += 2
        else:
            if not first or path.absolute:
                parts.append("/")
            parts.append(_step_to_string(step))
            i += 1
        first = False
    return "".join(parts)


def to_string(node: AstNode) -> str:
    """Canonical rendering; parse_xpath(to_string(ast)).ast == ast."""
    if isinstance(node, Literal):
        return _quote_literal(node.value)
    if isinstance(node, Number):
        return format_number(node.value)
    if isinstance(node, LocationPath):
        return _path_to_string(node)
    if isinstance(node, PathUnion):
        return " | ".join(to_string(p) for p in node.paths)
    if isinstance(node, FunctionCall):
        return f"{node.name}({', '.join(to_string(a) for a in node.args)})"
    if isinstance(node, BinaryOp):
        left = to_string(node.left)
        right = to_string(node.right)
        if isinstance(node.left, BinaryOp):
            left = f"({left})"
        if isinstance(node.right, BinaryOp):
            right = f"({right})"
        return f"{left} {node.op} {right}"
    raise TypeError(f"not an AST node: {node!r}")


# ---------------------------------------------------------------------------
# Evaluation items

class RootItem:
    """Virtual document root sitting above the html element."""

    __slots__ = ("element",)

    def __init__(self, element: DomNode) -> None:
        self.element = element

    def __repr__(self) -> str:
        return "<RootItem>"


class TextItem:
    """One non-empty text slot; slot 0 is head text, slot k is children[k-1].tail."""

    __slots__ = ("owner", "slot")

    def __init__(self, owner: DomNode, slot: int) -> None:
        self.owner = owner
        self.slot = slot

    @property
    def content(self) -> str:
        if self.slot == 0:
            return self.owner.text
        return self.owner.children[self.slot - 1].tail

    def __eq__(self, other: object) -> bool:
        return (isinstance(other, TextItem) and other.owner is self.owner
                and other.slot == self.slot)

    def __hash__(self) -> int:
        return hash((id(self.owner), self.slot))

    def __repr__(self) -> str:
        return f"<TextItem {self.content!r}>"


class AttributeItem:
    __slots__ = ("owner", "name")

    def __init__(self, owner: DomNode, name: str) -> None:
        self.owner = owner
        self.name = name

    @property
    def value(self) -> str:
        return self.owner.attributes[self.name]

    def __eq__(self, other: object) -> bool:
        return (isinstance(other, AttributeItem) and other.owner is self.owner
                and other.name == self.name)

    def __hash__(self) -> int:
        return hash((id(self.owner), self.name))

    def __repr__(self) -> str:
        return f"<AttributeItem {self.name}={self.value!r}>"


Item = TUnion[DomNode, RootItem, TextItem, AttributeItem]


def string_value(item: Item) -> str:
    """One text definition across the pipeline: elements use visible_text."""
    if isinstance(item, RootItem):
        return visible_text(item.element)
    if isinstance(item, DomNode):
        if item.is_comment:
            return normalize_ws(item.text)
        return visible_text(item)
    if isinstance(item, TextItem):
        return normalize_ws(item.content)
    return item.value


def _item_key(item: Item) -> tuple:
    if isinstance(item, RootItem):
        return ("r",)
    if isinstance(item, DomNode):
        return ("e", id(item))
    if isinstance(item, TextItem):
        return ("t", id(item.owner), item.slot)
    return ("a", id(item.owner), item.name)


@dataclass
class XPathResult:
    """Evaluation outcome: a document-ordered node list or one scalar."""

    kind: str  # "node-set" | "string" | "number" | "boolean"
    nodes: list = field(default_factory=list)
    value: object = None

    def __bool__(self) -> bool:
        if self.kind == "node-set":
            return bool(self.nodes)
        return bool(self.value)


def result_strings(result: XPathResult) -> list[str]:
    """Per-node string-values (deduplicated, order kept) or the scalar as text."""
    if result.kind == "node-set":
        out: list[str] = []
        seen: set[str] = set()
        for node in result.nodes:
            text = string_value(node)
            if text not in seen:
                seen.add(text)
                out.append(text)
        return out
    if result.kind == "number":
        return [format_number(result.value)]
    if result.kind == "boolean":
        return ["true" if result.value else "false"]
    return [result.value]


# ---------------------------------------------------------------------------
# Evaluator

@dataclass(frozen=True)
class _Context:
    item: Item
    position: int
    size: int


class _Evaluator:
    def __init__(self, doc: DomDocument) -> None:
        self.root_item = RootItem(doc.root)
        self.order: dict[tuple, int] = {}
        self._index_document(doc.root)

    def _index_document(self, root: DomNode) -> None:
        counter = [0]

        def assign(item: Item) -> None:
            self.order[_item_key(item)] = counter[0]
            counter[0] += 1

        def walk(node: DomNode) -> None:
            assign(node)
            if node.is_comment:
                return
            for name in node.attributes:
                assign(AttributeItem(node, name))
            if node.text:
                assign(TextItem(node, 0))
            for i, child in enumerate(node.children):
                walk(child)
                if child.tail:
                    assign(TextItem(node, i + 1))

        assign(self.root_item)
        walk(root)

    def _sorted(self, items) -> list[Item]:
        seen: dict[tuple, Item] = {}
        for item in items:
            seen.setdefault(_item_key(item), item)
        return sorted(seen.values(), key=lambda it: self.order[_item_key(it)])

    # -- axes ---------------------------------------------------------------

    def _child_items(self, item: Item) -> list[Item]:
        if isinstance(item, RootItem):
            return [item.element]
        if not isinstance(item, DomNode) or item.is_comment:
            return []
        out: list[Item] = []
        if item.text:
            out.append(TextItem(item, 0))
        for i, child in enumerate(item.children):
            out.append(child)
            if child.tail:
                out.append(TextItem(item, i + 1))
        return out

    def _descendants(self, item: Item) -> list[Item]:
        out: list[Item] = []
        stack = list(reversed(self._child_items(item)))
        while stack:
            current = stack.pop()
            out.append(current)
            stack.extend(reversed(self._child_items(current)))
        return out

    def _parent_of(self, item: Item) -> Item | None:
        if isinstance(item, RootItem):
            return None
        if isinstance(item, (TextItem, AttributeItem)):
            return item.owner
        if item.parent is None:
            return self.root_item
        return item.parent

    def _siblings(self, item: Item) -> tuple[list[Item], int]:
        parent = self._parent_of(item)
        if parent is None or isinstance(item, AttributeItem):
            return [item], 0
        sibs = self._child_items(parent)
        for i, candidate in enumerate(sibs):
            if candidate == item:  # identity for elements, (owner, slot) for text
                return sibs, i
        return [item], 0

    def _axis_items(self, item: Item, axis: str) -> list[Item]:
        if axis == "child":
            return self._child_items(item)
        if axis == "descendant":
            return self._descendants(item)
        if axis == "descendant-or-self":
            return [item] + self._descendants(item)
        if axis == "self":
            return [item]
        if axis == "parent":
            parent = self._parent_of(item)
            return [] if parent is None else [parent]
        if axis in ("ancestor", "ancestor-or-self"):
            out: list[Item] = [item] if axis == "ancestor-or-self" else []
            current = self._parent_of(item)
            while current is not None:
                out.append(current)
                current = self._parent_of(current)
            return out  # nearest first (reverse axis order)
        if axis == "following-sibling":
            sibs, idx = self._siblings(item)
            return sibs[idx + 1:]
        if axis == "preceding-sibling":
            sibs, idx = self._siblings(item)
            return list(reversed(sibs[:idx]))  # nearest first
        if axis == "attribute":
            if isinstance(item, DomNode) and not item.is_comment:
                return [AttributeItem(item, name) for name in item.attributes]
            return []
        raise XPathEvaluationError(f"unknown axis {axis}")

    @staticmethod
    def _test_matches(test, item: Item, axis: str) -> bool:
        if isinstance(test, NodeTypeTest):
            if test.kind == "node":
                return True
            if test.kind == "text":
                return isinstance(item, TextItem)
            return isinstance(item, DomNode) and item.is_comment
        if axis == "attribute":
            return isinstance(item, AttributeItem) and (
                test.name == "*" or item.name == test.name)
        return (isinstance(item, DomNode) and not item.is_comment
                and (test.name == "*" or item.tag == test.name))

    # -- expression evaluation ----------------------------------------------

    def eval(self, node: AstNode, ctx: _Context):
        if isinstance(node, Literal):
            return node.value
        if isinstance(node, Number):
            return node.value
        if isinstance(node, LocationPath):
            return self._eval_path(node, ctx)
        if isinstance(node, PathUnion):
            merged: list[Item] = []
            for path in node.paths:
                merged.extend(self._eval_path(path, ctx))
            return self._sorted(merged)
        if isinstance(node, FunctionCall):
            return self._eval_function(node, ctx)
        if isinstance(node, BinaryOp):
            return self._eval_binary(node, ctx)
        raise XPathEvaluationError(f"cannot evaluate {node!r}")

    def _eval_path(self, path: LocationPath, ctx: _Context) -> list[Item]:
        current: list[Item] = [self.root_item] if path.absolute else [ctx.item]
        for step in path.steps:
            gathered: list[Item] = []
            for origin in current:
                candidates = [it for it in self._axis_items(origin, step.axis)
                              if self._test_matches(step.test, it, step.axis)]
                for predicate in step.predicates:
                    size = len(candidates)
                    kept = []
                    for position, candidate in enumerate(candidates, start=1):
                        value = self.eval(predicate, _Context(candidate, position, size))
                        if self._predicate_truth(value, position):
                            kept.append(candidate)
                    candidates = kept
                gathered.extend(candidates)
            current = self._sorted(gathered)
        return current

    @staticmethod
    def _predicate_truth(value, position: int) -> bool:
        if isinstance(value, float):
            return value == position
        return _to_boolean(value)

    def _eval_function(self, call: FunctionCall, ctx: _Context):
        if call.name == "position":
            return float(ctx.position)
        args = [self.eval(a, ctx) for a in call.args]
        if call.name == "normalize-space":
            raw = args[0] if args else string_value(ctx.item)
            return normalize_ws(self._to_string(raw))
        a = self._to_string(args[0])
        b = self._to_string(args[1])
        if call.name == "contains":
            return b in a
        if call.name == "starts-with":
            return a.startswith(b)
        if call.name == "ends-with":
            return a.endswith(b)
        if call.name == "substring-before":
            index = a.find(b)
            return a[:index] if index >= 0 else ""
        if call.name == "substring-after":
            index = a.find(b)
            return a[index + len(b):] if index >= 0 else ""
        raise XPathEvaluationError(f"unknown function {call.name}")

    @staticmethod
    def _to_string(value) -> str:
        if isinstance(value, list):
            if len(value) != 1:
                raise XPathEvaluationError(
                    f"expected a single node for string conversion, got {len(value)}")
            return string_value(value[0])
        if isinstance(value, bool):
            return "true" if value else "false"
        if isinstance(value, float):
            return format_number(value)
        return value

    def _eval_binary(self, node: BinaryOp, ctx: _Context):
        if node.op == "or":
            return _to_boolean(self.eval(node.left, ctx)) or \
                _to_boolean(self.eval(node.right, ctx))
        if node.op == "and":
            return _to_boolean(self.eval(node.left, ctx)) and \
                _to_boolean(self.eval(node.right, ctx))
        left = self.eval(node.left, ctx)
        right = self.eval(node.right, ctx)
        return _compare(node.op, left, right)


def _to_boolean(value) -> bool:
    if isinstance(value, list):
        return bool(value)
    if isinstance(value, bool):
        return value
    if isinstance(value, float):
        return value != 0 and not math.isnan(value)
    return bool(value)


def _to_number(value) -> float:
    if isinstance(value, bool):
        return 1.0 if value else 0.0
    if isinstance(value, float):
        return value
    try:
        return float(value.strip())
    except (ValueError, AttributeError):
        return math.nan


_CMP = {
    "=": lambda a, b: a == b,
    "!=": lambda a, b: a != b,
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
}


def _scalar_compare(op: str, left, right) -> bool:
    if op in ("=", "!="):
        if isinstance(left, bool) or isinstance(right, bool):
            return _CMP[op](_to_boolean(left), _to_boolean(right))
        if isinstance(left, float) or isinstance(right, float):
            a, b = _to_number(left), _to_number(right)
            if math.isnan(a) or math.isnan(b):
                return op == "!="
            return _CMP[op](a, b)
        return _CMP[op](left, right)
    a, b = _to_number(left), _to_number(right)
    if math.isnan(a) or math.isnan(b):
        return False
    return _CMP[op](a, b)


def _compare(op: str, left, right) -> bool:
    left_set = isinstance(left, list)
    right_set = isinstance(right, list)
    if left_set and right_set:
        rights = [string_value(n) for n in right]
        return any(_scalar_compare(op, string_value(l), r)
                   for l in left for r in rights)
    if left_set or right_set:
        nodes, scalar = (left, right) if left_set else (right, left)
        if isinstance(scalar, bool):
            ordered = (_to_boolean(nodes), scalar) if left_set else (scalar, _to_boolean(nodes))
            return _scalar_compare(op, *ordered)
        for node in nodes:
            text = string_value(node)
            pair = (text, scalar) if left_set else (scalar, text)
            if _scalar_compare(op, *pair):
                return True
        return False
    return _scalar_compare(op, left, right)


def evaluate(doc: DomDocument, expr: XPathExpr) -> XPathResult:
    """Run a parsed expression against a document.

    Read-only over the document; safe to call concurrently on a shared tree.
    Raises XPathEvaluationError on type mismatches such as string functions
    over multi-node sets.
    """
    evaluator = _Evaluator(doc)
    value = evaluator.eval(expr.ast, _Context(evaluator.root_item, 1, 1))
    if isinstance(value, list):
        return XPathResult("node-set", nodes=value)
    if isinstance(value, bool):
        return XPathResult("boolean", value=value)
    if isinstance(value, float):
        return XPathResult("number", value=value)
    return XPathResult("string", value=value)


def evaluate_strings(doc: DomDocument, xpath: str) -> list[str]:
    """Parse + evaluate + string-value conversion in one call."""
    return result_strings(evaluate(doc, parse_xpath(xpath)))
