"""Target-anchored page condensation: matching, stubbing, plan output."""
import json
import random

import pytest

from xpathsmith.condenser import (
    NoTargets, build_plan, condense, condense_with_plan, default_distance,
)
from xpathsmith.corpus import load_corpus
from xpathsmith.dom import parse_html, serialize, structurally_equal, visible_text
from xpathsmith.static_xpath import generate_xpath
from xpathsmith.xpath_engine import evaluate, parse_xpath

from conftest import CORPUS, GOLDENS
from oracles import oracle_condense_pairs, random_document


def corpus_pairs(limit=None):
    pairs = []
    for task in load_corpus(CORPUS):
        for page_id, path in task.pages:
            doc = parse_html(path.read_bytes(), source_url=page_id)
            targets = [v for values in task.truth[page_id].values()
                       for v in values]
            pairs.append((task.task_id, page_id, doc, targets))
    return pairs[:limit] if limit else pairs


class TestDefaultDistance:
    def test_identity(self):
        assert default_distance("$100.00", "$100.00") == 0.0

    def test_containment_shortcut(self):
        assert default_distance("Price: $100.00", "$100.00") == 0.0
        # not symmetric: the candidate must contain the target
        assert default_distance("$100.00", "Price: $100.00") > 0.0

    def test_normalized_edit_distance(self):
        assert default_distance("abc", "abd") == pytest.approx(1 / 3)

    def test_whitespace_normalized_before_comparison(self):
        assert default_distance("a  b\n c", "a b c") == 0.0


class TestCondense:
    def test_single_match_stubs_the_rest(self):
        items = "".join(f'<li class="i{k}">item {k}</li>' for k in range(1, 11))
        doc = parse_html(f"<html><body><ul>{items}</ul></body></html>")
        out = condense(doc, ["item 4"])
        ul = out.root.children[0].children[0]
        # runs of 1-3 and 5-10 each collapse to one placeholder sibling
        assert [li.text for li in ul.children] == ["...", "item 4", "..."]
        assert ul.children[1].attributes == {"class": "i4"}
        assert ul.children[0].attributes == {"class": "i1"}
        assert ul.children[2].attributes == {"class": "i5"}

    def test_tied_matches_all_kept(self):
        doc = parse_html("<html><body><p>dup</p><i>x</i><p>dup</p>"
                         "</body></html>")
        out = condense(doc, ["dup"])
        texts = [c.text for c in out.root.children[0].children]
        assert texts == ["dup", "...", "dup"]

    def test_kept_subtree_survives_whole(self):
        doc = parse_html("<html><body><div><p>hit<b>bold</b>tail</p></div>"
                         "<div><p>miss</p></div></body></html>")
        out = condense(doc, ["hit"])
        body = out.root.children[0]
        kept = body.children[0].children[0]
        assert serialize(kept) == "<p>hit<b>bold</b>tail</p>"
        assert body.children[1].text == "..."

    def test_nonwhitespace_tail_breaks_stub_run(self):
        doc = parse_html("<html><body><div><p>x</p>-<p>y</p>"
                         "<span>keep</span></div></body></html>")
        out = condense(doc, ["keep"])
        div = out.root.children[0].children[0]
        assert [c.text for c in div.children] == ["...", "...", "keep"]
        assert div.children[0].tail == "-"

    def test_whitespace_tail_merges_stub_run(self):
        doc = parse_html("<html><body><div><p>x</p> <p>y</p>"
                         "<span>keep</span></div></body></html>")
        out = condense(doc, ["keep"])
        div = out.root.children[0].children[0]
        assert [c.text for c in div.children] == ["...", "keep"]

    def test_subtree_outside_ancestor_chain_collapses_whole(self):
        doc = parse_html("<html><body><div><p>x</p>-<p>y</p></div>"
                         "<span>keep</span></body></html>")
        out = condense(doc, ["keep"])
        body = out.root.children[0]
        assert serialize(body.children[0]) == "<div>...</div>"

    def test_comments_left_alone(self):
        doc = parse_html("<html><body><!-- note --><p>keep</p><p>other</p>"
                         "</body></html>")
        out = condense(doc, ["keep"])
        body = out.root.children[0]
        assert body.children[0].is_comment

    def test_source_untouched(self):
        doc = parse_html("<html><body><p>a</p><p>b</p></body></html>")
        before = serialize(doc.root)
        condense(doc, ["a"])
        assert serialize(doc.root) == before

    def test_no_targets(self):
        doc = parse_html("<html><body><p>x</p></body></html>")
        with pytest.raises(NoTargets):
            condense(doc, [])
        with pytest.raises(NoTargets):
            condense(doc, ["  ", ""])

    def test_deterministic(self):
        doc = parse_html(CORPUS.joinpath(
            "camera", "camera-shop1", "0000.htm").read_bytes())
        runs = {serialize(condense(doc, ["Price:"]).root) for _ in range(3)}
        assert len(runs) == 1


class TestPlan:
    def test_plan_shape(self):
        doc = parse_html("<html><body><p>alpha</p><p>beta</p></body></html>")
        plan = build_plan(doc, ["alpha", "alpha", " "])
        assert plan.target_texts == ["alpha"]  # dedup + empty dropped
        assert plan.distances["alpha"] == 0.0
        assert len(plan.kept_xpaths["alpha"]) == 1

    def test_kept_xpaths_resolve_uniquely_in_source(self):
        for _, _, doc, targets in corpus_pairs(limit=4):
            plan = build_plan(doc, targets)
            for xpaths in plan.kept_xpaths.values():
                for xpath in xpaths:
                    assert len(evaluate(doc, parse_xpath(xpath)).nodes) == 1

    def test_plan_matches_exhaustive_oracle_on_corpus(self):
        for task_id, page_id, doc, targets in corpus_pairs(limit=6):
            plan = build_plan(doc, targets)
            dists, kept = oracle_condense_pairs(doc, targets)
            assert plan.distances == pytest.approx(dists), (task_id, page_id)
            expect = {t: [generate_xpath(n) for n in nodes]
                      for t, nodes in kept.items()}
            assert plan.kept_xpaths == expect, (task_id, page_id)

    def test_plan_matches_exhaustive_oracle_on_random_docs(self):
        rng = random.Random(90125)
        checked = 0
        for _ in range(120):
            doc = random_document(rng)
            texts = [t for e in doc.root.iter_elements()
                     for t in e.direct_text if t.strip()]
            if not texts:
                continue
            targets = rng.sample(texts, k=min(len(texts), rng.randint(1, 3)))
            plan = build_plan(doc, targets)
            dists, kept = oracle_condense_pairs(doc, targets)
            assert plan.distances == pytest.approx(dists)
            assert plan.kept_xpaths == {
                t: [generate_xpath(n) for n in nodes]
                for t, nodes in kept.items()}
            checked += 1
        assert checked >= 80


class TestGoldensAndInvariants:
    def test_condensed_goldens(self):
        pairs = {(t, p): (doc, targets)
                 for t, p, doc, targets in corpus_pairs()}
        goldens = sorted((GOLDENS / "condensed").glob("*.html"))
        assert len(goldens) == 8
        for golden in goldens:
            task_id, page_id = golden.stem.split("--")
            doc, targets = pairs[(task_id, page_id)]
            condensed, plan = condense_with_plan(doc, targets)
            assert serialize(condensed.root) == golden.read_text(), golden.name
            frozen = json.loads(
                golden.with_suffix(".plan.json").read_text())
            assert frozen == {"target_texts": plan.target_texts,
                              "distances": plan.distances,
                              "kept_xpaths": plan.kept_xpaths}

    def test_completeness_on_corpus(self):
        for task_id, page_id, doc, targets in corpus_pairs():
            vt = visible_text(condense(doc, targets).root)
            for target in targets:
                assert target in vt, (task_id, page_id, target)

    def test_ancestry_preserved(self):
        for _, _, doc, targets in corpus_pairs(limit=4):
            condensed, plan = condense_with_plan(doc, targets)
            for xpaths in plan.kept_xpaths.values():
                for xpath in xpaths:
                    source = evaluate(doc, parse_xpath(xpath)).nodes
                    kept = evaluate(condensed, parse_xpath(xpath)).nodes
                    assert len(source) == len(kept) == 1
                    a, b = source[0], kept[0]
                    while a is not None:
                        assert b is not None
                        assert a.tag == b.tag and a.attributes == b.attributes
                        a, b = a.parent, b.parent
                    assert b is None

    def test_size_reduction(self):
        for task_id, page_id, doc, targets in corpus_pairs():
            original = len(serialize(doc.root))
            condensed = len(serialize(condense(doc, targets).root))
            assert condensed <= original
            assert condensed / original <= 0.30, (task_id, page_id)

    def test_reduction_never_grows_on_random_docs(self):
        rng = random.Random(777)
        for _ in range(60):
            doc = random_document(rng)
            texts = [t for e in doc.root.iter_elements()
                     for t in e.direct_text if t.strip()]
            if not texts:
                continue
            out = condense(doc, [rng.choice(texts)])
            assert len(serialize(out.root)) <= len(serialize(doc.root))
