"""Deterministic absolute XPaths, built bottom-up from a node.

These paths anchor the programming stage: rigid enough to resolve to exactly
one node, attribute-enriched (id beats class beats position) so the model
sees the strongest stable hooks a page offers.
"""
from __future__ import annotations

from .dom import DomNode
from .xpath_engine import (
    LocationPath, NameTest, Number, Step, parse_xpath, to_string,
)


class DetachedNode(ValueError):
    """generate_xpath over a node with no document root above it."""


class NoCommonPrefix(ValueError):
    """relativize over paths that do not share a leading step."""


def _quote(value: str) -> str | None:
    if "'" not in value:
        return f"'{value}'"
    if '"' not in value:
        return f'"{value}"'
    return None  # not expressible as an XPath 1.0 literal


def _step_for(node: DomNode) -> str:
    parent = node.parent
    if parent is None:
        if node.tag != "html":
            raise DetachedNode(f"no document root above <{node.tag}>")
        return "html"
    same_tag = [c for c in parent.children if not c.is_comment and c.tag == node.tag]
    position = same_tag.index(node) + 1
    # head/body directly under the root are singular in well-formed pages
    structural = (node.tag in ("head", "body") and parent.tag == "html"
                  and parent.parent is None)

    for attr in ("id", "class"):
        value = node.attributes.get(attr)
        if not value:
            continue
        quoted = _quote(value)
        if quoted is None:
            continue
        matching = [c for c in same_tag if c.attributes.get(attr) == value]
        step = f"{node.tag}[@{attr}={quoted}]"
        if len(matching) > 1:
            # successive predicates re-index within the filtered set, so the
            # tie-break position counts attribute-matching siblings only
            step += f"[{matching.index(node) + 1}]"
        return step

    if structural and len(same_tag) == 1:
        return node.tag
    return f"{node.tag}[{position}]"


def generate_xpath(node: DomNode) -> str:
    """Absolute path evaluating to exactly {node} on its document.

    One child step per ancestor; raises DetachedNode when the walk upward
    does not end at an html root.
    """
    steps: list[str] = []
    current: DomNode | None = node
    while current is not None:
        steps.append(_step_for(current))
        current = current.parent
    return "/" + "/".join(reversed(steps))


def _dialect_steps(xpath: str) -> list[Step]:
    try:
        ast = parse_xpath(xpath).ast
    except ValueError as exc:
        raise NoCommonPrefix(f"not an absolute step path: {xpath!r} ({exc})") from exc
    if not isinstance(ast, LocationPath) or not ast.absolute:
        raise NoCommonPrefix(f"not an absolute step path: {xpath!r}")
    for step in ast.steps:
        if step.axis != "child" or not isinstance(step.test, NameTest):
            raise NoCommonPrefix(f"not a child-step path: {xpath!r}")
    return list(ast.steps)


def _step_str(step: Step) -> str:
    return to_string(LocationPath(False, (step,)))


def _positional(step: Step) -> int | None:
    if len(step.predicates) == 1 and isinstance(step.predicates[0], Number):
        value = step.predicates[0].value
        if value == int(value):
            return int(value)
    return None


def relativize(xpath: str, anchor_xpath: str) -> str:
    """Express `xpath` as steps relative to `anchor_xpath`.

    Appending the result to the anchor with "/" selects the same node-set
    as the absolute target path. Sibling targets of the same tag come out
    as one following-/preceding-sibling step; everything else walks up
    with ".." and back down.
    """
    target = _dialect_steps(xpath)
    anchor = _dialect_steps(anchor_xpath)
    common = 0
    for a, b in zip(target, anchor):
        if a != b:
            break
        common += 1
    if common == 0:
        raise NoCommonPrefix(f"{xpath!r} and {anchor_xpath!r} share no leading step")
    if target == anchor:
        return "self::node()"
    if common == len(anchor):
        # anchor is an ancestor: pure descent
        return "/".join(_step_str(s) for s in target[common:])
    if len(target) == len(anchor) and common == len(anchor) - 1:
        last_t, last_a = target[-1], anchor[-1]
        pos_t, pos_a = _positional(last_t), _positional(last_a)
        if (last_t.test == last_a.test and isinstance(last_t.test, NameTest)
                and pos_t is not None and pos_a is not None):
            name = last_t.test.name
            if pos_t > pos_a:
                return f"following-sibling::{name}[{pos_t - pos_a}]"
            return f"preceding-sibling::{name}[{pos_a - pos_t}]"
    ups = [".."] * (len(anchor) - common)
    downs = [_step_str(s) for s in target[common:]]
    return "/".join(ups + downs)
