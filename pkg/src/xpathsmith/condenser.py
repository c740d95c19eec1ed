"""Shrink a page around target texts for the programming stage.

Every element whose own text sits nearest (by a text distance) to some
target survives with its whole subtree and attributes; ancestors of
survivors stay intact as scaffolding; everything else collapses to a
"..." stub. The output keeps attributes because the next stage writes
XPath against it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .distance import levenshtein
from .dom import DomDocument, DomNode, normalize_ws
from .static_xpath import generate_xpath

PLACEHOLDER = "..."


class NoTargets(ValueError):
    """condense called without any usable target text."""


def default_distance(a: str, b: str) -> float:
    """0.0 on normalized equality or when b occurs inside a; else edit distance
    normalized by the longer length, in [0, 1]."""
    na, nb = normalize_ws(a), normalize_ws(b)
    if na == nb:
        return 0.0
    if nb and nb in na:
        return 0.0
    longer = max(len(na), len(nb))
    return levenshtein(na, nb) / longer


@dataclass
class CondensePlan:
    """What the condenser decided: per target, the best distance found and
    the absolute xpaths of every element tied at that distance."""

    target_texts: list[str]
    distances: dict[str, float | None] = field(default_factory=dict)
    kept_xpaths: dict[str, list[str]] = field(default_factory=dict)


def _match_targets(root: DomNode, targets: list[str],
                   d) -> tuple[dict[str, float], dict[str, list[DomNode]]]:
    """Minimum-distance elements per target, all ties kept."""
    best_dist: dict[str, float] = {t: math.inf for t in targets}
    best_nodes: dict[str, list[DomNode]] = {t: [] for t in targets}
    for element in root.iter_elements():
        for segment in element.direct_text:
            text = normalize_ws(segment)
            if not text:
                continue
            for target in targets:
                dist = d(text, target)
                if dist < best_dist[target]:
                    best_dist[target] = dist
                    best_nodes[target] = [element]
                elif dist == best_dist[target] and \
                        all(element is not n for n in best_nodes[target]):
                    best_nodes[target].append(element)
    return best_dist, best_nodes


def _stub(node: DomNode) -> None:
    for child in node.children:
        child.parent = None
    node.children = []
    node.text = PLACEHOLDER


def _collapse_stub_runs(parent: DomNode, stub_ids: set[int]) -> None:
    """Merge consecutive sibling stubs into one, where only whitespace
    separates them; non-whitespace tails break a run and survive."""
    i = 0
    while i < len(parent.children):
        child = parent.children[i]
        if id(child) not in stub_ids:
            i += 1
            continue
        while (i + 1 < len(parent.children)
               and id(parent.children[i + 1]) in stub_ids
               and not normalize_ws(parent.children[i].tail)):
            parent.remove_child(parent.children[i + 1], keep_tail=True)
        i += 1


def build_plan(doc: DomDocument, target_texts: list[str],
               d=default_distance) -> CondensePlan:
    """Matching only; the document is untouched."""
    plan, _ = _plan_against(doc.root, target_texts, d)
    return plan


def _plan_against(root: DomNode, target_texts: list[str],
                  d) -> tuple[CondensePlan, list[DomNode]]:
    targets: list[str] = []
    for t in target_texts:
        if normalize_ws(t) and t not in targets:
            targets.append(t)
    if not targets:
        raise NoTargets("no non-empty target texts")
    dists, matches = _match_targets(root, targets, d)
    plan = CondensePlan(target_texts=targets)
    kept: list[DomNode] = []
    for target in targets:
        nodes = matches[target]
        plan.kept_xpaths[target] = [generate_xpath(n) for n in nodes]
        plan.distances[target] = dists[target] if nodes else None
        for node in nodes:
            if all(node is not k for k in kept):
                kept.append(node)
    return plan, kept


def condense_with_plan(doc: DomDocument, target_texts: list[str],
                       d=default_distance) -> tuple[DomDocument, CondensePlan]:
    """Condense a copy of `doc`; the caller's document keeps its content.

    The plan's xpaths are generated before any mutation, so they resolve on
    both the original and (for surviving nodes) the condensed copy.
    """
    out = doc.copy()
    plan, kept = _plan_against(out.root, target_texts, d)

    keep_subtree: set[int] = set()   # kept elements and their descendants
    chain: set[int] = set()          # proper ancestors of kept elements
    for node in kept:
        for member in node.iter_tree():
            keep_subtree.add(id(member))
        parent = node.parent
        while parent is not None:
            chain.add(id(parent))
            parent = parent.parent
    chain -= keep_subtree

    if not keep_subtree:
        _stub(out.root)
        return out, plan

    stub_ids: set[int] = set()
    stack = [out.root]  # the root is always kept or on an ancestor chain here
    while stack:
        node = stack.pop()
        if id(node) in keep_subtree:
            continue
        for child in node.children:
            if child.is_comment:
                continue
            if id(child) in keep_subtree or id(child) in chain:
                stack.append(child)
            else:
                _stub(child)
                stub_ids.add(id(child))
        _collapse_stub_runs(node, stub_ids)
    return out, plan


def condense(doc: DomDocument, target_texts: list[str],
             d=default_distance) -> DomDocument:
    """Algorithm entry point; see condense_with_plan for the plan variant."""
    out, _ = condense_with_plan(doc, target_texts, d)
    return out
