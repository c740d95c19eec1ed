"""Stage 2: propose an XPath, score it on the seed pages, repair by feedback.

The conversation is bounded at three completions per field. Every parseable
reply becomes a scored candidate even when its XPath is broken (Invalid
feedback, score 0); only a run with zero parseable replies errors out. The
best candidate wins, ties to the earliest round.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

from .condenser import condense_with_plan
from .dom import DomDocument, normalize_ws, serialize
from .ie_stage import FieldQuery, FieldTargets, MalformedJson
from .llm_gateway import (
    ChatMessage, LlmConfig, complete, render_feedback_prompt,
    render_program_prompts,
)
from .xpath_engine import (
    XPathEvaluationError, XPathSyntaxError, evaluate, parse_xpath, result_strings,
)

MAX_ROUNDS = 3

STATUS_CORRECT = "Correct"
STATUS_MISSING = "Missing"
STATUS_SURPLUS = "Surplus"
STATUS_INVALID = "Invalid"

Seed = tuple[DomDocument, list[str]]  # (page, that page's target values)


class NoViableCandidate(RuntimeError):
    """Every round failed to produce a parseable {thought, xpath} reply."""


@dataclass
class EvaluationFeedback:
    page_id: str
    extracted: list[str] = field(default_factory=list)
    missing: list[str] = field(default_factory=list)
    redundant: list[str] = field(default_factory=list)
    status: str = STATUS_CORRECT
    message: str = ""


@dataclass
class XPathCandidate:
    xpath: str
    thought: str
    iteration: int  # 0-based round index
    score: float
    per_page_feedback: list[EvaluationFeedback] = field(default_factory=list)


def _page_id(doc: DomDocument, index: int) -> str:
    return doc.source_url or f"page{index}"


def _matches(extracted: str, target: str) -> bool:
    """Equality or containment after whitespace normalization: an extracted
    node may carry a label prefix around the bare value."""
    a, b = normalize_ws(extracted), normalize_ws(target)
    return bool(b) and (a == b or b in a)


def _feedback_message(fb: EvaluationFeedback, error: str = "") -> str:
    if fb.status == STATUS_INVALID:
        return f"Invalid: {error}"
    if fb.status == STATUS_MISSING:
        message = f"Missing: target value(s) {json.dumps(fb.missing)} were not extracted"
        if fb.redundant:
            message += f"; also extracted extraneous value(s) {json.dumps(fb.redundant)}"
        return message
    if fb.status == STATUS_SURPLUS:
        return f"Surplus: extraneous value(s) {json.dumps(fb.redundant)} were extracted"
    return "Correct: extracted values match the target values"


def evaluate_xpath(xpath: str, seeds: list[Seed]) -> list[EvaluationFeedback]:
    """Run one xpath over every seed page and classify the outcome.

    Never raises: syntax and evaluation errors become Invalid feedback whose
    message carries the parser/evaluator complaint (including the position
    for syntax errors).
    """
    try:
        expr = parse_xpath(xpath)
    except XPathSyntaxError as exc:
        return [EvaluationFeedback(page_id=_page_id(doc, i), status=STATUS_INVALID,
                                   message=f"Invalid: {exc}")
                for i, (doc, _) in enumerate(seeds)]
    feedbacks = []
    for i, (doc, targets) in enumerate(seeds):
        fb = EvaluationFeedback(page_id=_page_id(doc, i))
        try:
            fb.extracted = result_strings(evaluate(doc, expr))
        except XPathEvaluationError as exc:
            fb.status = STATUS_INVALID
            fb.message = _feedback_message(fb, str(exc))
            feedbacks.append(fb)
            continue
        fb.missing = [t for t in targets
                      if not any(_matches(e, t) for e in fb.extracted)]
        fb.redundant = [e for e in fb.extracted
                        if not any(_matches(e, t) for t in targets)]
        if fb.missing:
            fb.status = STATUS_MISSING
        elif fb.redundant:
            fb.status = STATUS_SURPLUS
        else:
            fb.status = STATUS_CORRECT
        fb.message = _feedback_message(fb)
        feedbacks.append(fb)
    return feedbacks


def _page_f1(fb: EvaluationFeedback, target_count: int) -> float:
    if fb.status == STATUS_INVALID:
        return 0.0
    extracted_count = len(fb.extracted)
    matched_extracted = extracted_count - len(fb.redundant)
    covered_targets = target_count - len(fb.missing)
    if target_count == 0:
        return 1.0 if extracted_count == 0 else 0.0
    if extracted_count == 0:
        return 0.0
    precision = matched_extracted / extracted_count
    recall = covered_targets / target_count
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


def score_candidate(feedbacks: list[EvaluationFeedback],
                    seeds: list[Seed]) -> float:
    """Mean per-page F1 of extracted-vs-target sets; Invalid pages score 0."""
    if not feedbacks:
        raise ValueError("score_candidate needs at least one feedback")
    total = 0.0
    for fb, (_, targets) in zip(feedbacks, seeds):
        total += _page_f1(fb, len(targets))
    return total / len(feedbacks)


def parse_program_response(raw: str) -> tuple[str, str]:
    """Extract the strict {"thought": ..., "xpath": ...} object from a reply.

    Scans forward over "{" positions so markdown fences and prose are
    ignored; anything other than exactly those two string keys is
    MalformedJson.
    """
    decoder = json.JSONDecoder()
    start = raw.find("{")
    payload = None
    while start >= 0:
        try:
            payload, _ = decoder.raw_decode(raw[start:])
            break
        except json.JSONDecodeError:
            start = raw.find("{", start + 1)
    if payload is None:
        raise MalformedJson("no JSON object in response")
    if not isinstance(payload, dict) or set(payload) != {"thought", "xpath"}:
        raise MalformedJson(f"expected exactly thought+xpath keys, got {sorted(payload) if isinstance(payload, dict) else type(payload).__name__}")
    thought, xpath = payload["thought"], payload["xpath"]
    if not isinstance(thought, str) or not isinstance(xpath, str):
        raise MalformedJson("thought and xpath must both be strings")
    return thought, xpath


def _invalid_round_feedback(seeds: list[Seed], error: str) -> list[EvaluationFeedback]:
    feedbacks = []
    for i, (doc, _) in enumerate(seeds):
        fb = EvaluationFeedback(page_id=_page_id(doc, i), status=STATUS_INVALID)
        fb.message = f"Invalid: response was not the required JSON object ({error})"
        feedbacks.append(fb)
    return feedbacks


def program_xpath(fquery: FieldQuery, seeds: list[Seed], extraction: FieldTargets,
                  config: LlmConfig) -> XPathCandidate:
    """The conversational loop for one field.

    Pages are condensed once around the merged values + cues and reused
    across rounds; evaluation always runs against the original documents
    with that page's own extracted values as targets.
    """
    condensed_pages: list[tuple[str, str]] = []
    static_xpaths: list[str] = []
    for i, (doc, _) in enumerate(seeds):
        condensed, plan = condense_with_plan(doc, extraction.all_targets)
        condensed_pages.append((_page_id(doc, i), serialize(condensed.root)))
        for target in plan.target_texts:
            for xp in plan.kept_xpaths[target]:
                if xp not in static_xpaths:
                    static_xpaths.append(xp)

    messages = render_program_prompts(
        condensed_pages=condensed_pages,
        field=fquery.field_name,
        targets=extraction.values,
        cue=extraction.cue_text,
        static_xpaths=static_xpaths,
    )
    candidates: list[XPathCandidate] = []
    last_parse_error = "no rounds ran"
    for iteration in range(MAX_ROUNDS):
        response = complete(config, messages)
        messages = messages + [ChatMessage("assistant", response)]
        try:
            thought, xpath = parse_program_response(response)
        except MalformedJson as exc:
            last_parse_error = str(exc)
            feedbacks = _invalid_round_feedback(seeds, last_parse_error)
        else:
            feedbacks = evaluate_xpath(xpath, seeds)
            score = score_candidate(feedbacks, seeds)
            candidates.append(XPathCandidate(
                xpath=xpath, thought=thought, iteration=iteration,
                score=score, per_page_feedback=feedbacks))
            if score == 1.0:
                break
        if iteration + 1 < MAX_ROUNDS:
            messages = messages + [ChatMessage("user", render_feedback_prompt(feedbacks))]
    if not candidates:
        raise NoViableCandidate(
            f"no parseable reply in {MAX_ROUNDS} rounds (last error: {last_parse_error})")
    return max(candidates, key=lambda c: (c.score, -c.iteration))
