"""Stage 1: ask the model for field values and cue texts on each seed page.

Pages go in sanitized and minified; answers come back as a Thought/
Conclusion block whose JSON tail is parsed defensively. Values that do not
occur in the page (the prompt demands character-level consistency) are
dropped here rather than poisoning stage 2.
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field

from .dom import DomDocument, normalize_ws, serialize, visible_text
from .llm_gateway import ChatMessage, LlmConfig, complete, render_ie_prompt
from .sanitizer import minify, sanitize

log = logging.getLogger(__name__)

CONCLUSION_MARKER = "Conclusion:"


class NoConclusion(ValueError):
    """The response never reached a Conclusion: line."""


class MalformedJson(ValueError):
    """The text after Conclusion: does not contain a JSON object."""


@dataclass(frozen=True)
class FieldQuery:
    field_name: str
    question: str
    expected_multiplicity: str = "single"  # "single" | "multiple"

    def __post_init__(self) -> None:
        if not self.field_name:
            raise ValueError("field_name must be non-empty")
        if self.expected_multiplicity not in ("single", "multiple"):
            raise ValueError(f"bad multiplicity {self.expected_multiplicity!r}")


@dataclass
class FieldExtraction:
    values: list[str] = field(default_factory=list)
    cue_text: str = ""


@dataclass
class ExtractionResult:
    page_id: str
    fields: dict[str, FieldExtraction] = field(default_factory=dict)


@dataclass
class FieldTargets:
    """Merged stage-2 input for one field across all seed pages."""

    field_name: str
    values: list[str] = field(default_factory=list)
    cue_texts: list[str] = field(default_factory=list)

    @property
    def cue_text(self) -> str:
        return self.cue_texts[0] if self.cue_texts else ""

    @property
    def all_targets(self) -> list[str]:
        return self.values + [c for c in self.cue_texts if c not in self.values]


def build_query_text(queries: list[FieldQuery]) -> str:
    return "\n".join(f"- {q.field_name}: {q.question}" for q in queries)


def build_json_example(queries: list[FieldQuery]) -> str:
    example = {q.field_name: {"value": [""], "cue_text": ""} for q in queries}
    return json.dumps(example, ensure_ascii=True)


def _coerce_values(payload) -> tuple[list[str], str]:
    """Accept the documented {"value": [...], "cue_text": ...} shape plus the
    obvious degenerate shapes a model may emit (bare list, bare string)."""
    if isinstance(payload, dict):
        raw_values = payload.get("value", [])
        cue = payload.get("cue_text", "")
    elif isinstance(payload, list):
        raw_values, cue = payload, ""
    else:
        raw_values, cue = [payload], ""
    if not isinstance(raw_values, list):
        raw_values = [raw_values]
    values = []
    for v in raw_values:
        if v is None:
            continue
        text = v if isinstance(v, str) else json.dumps(v, ensure_ascii=True)
        if text:
            values.append(text)
    if not isinstance(cue, str):
        cue = ""
    return values, cue


def parse_ie_response(raw: str, expected_fields: list[FieldQuery]) -> ExtractionResult:
    """Parse the assistant's Thought/Conclusion answer.

    Only the JSON object after the last Conclusion: marker counts. Unknown
    fields are dropped; expected fields missing from the JSON come back
    empty, because the prompt forbids mentioning fields without answers.
    """
    marker = raw.rfind(CONCLUSION_MARKER)
    if marker < 0:
        raise NoConclusion(f"no {CONCLUSION_MARKER!r} marker in response")
    tail = raw[marker + len(CONCLUSION_MARKER):]
    start = tail.find("{")
    if start < 0:
        raise MalformedJson("no JSON object after the conclusion marker")
    try:
        payload, _ = json.JSONDecoder().raw_decode(tail[start:])
    except json.JSONDecodeError as exc:
        raise MalformedJson(f"unparseable conclusion JSON: {exc}") from exc
    if not isinstance(payload, dict):
        raise MalformedJson("conclusion JSON is not an object")

    result = ExtractionResult(page_id="")
    for query in expected_fields:
        extraction = FieldExtraction()
        if query.field_name in payload:
            extraction.values, extraction.cue_text = _coerce_values(payload[query.field_name])
        result.fields[query.field_name] = extraction
    return result


def _consistency_filter(result: ExtractionResult, page_text: str, page_id: str) -> None:
    """Drop values (and cues) that do not occur in the page, modulo whitespace."""
    normalized_page = normalize_ws(page_text)
    for name, extraction in result.fields.items():
        kept = []
        for value in extraction.values:
            if normalize_ws(value) and normalize_ws(value) in normalized_page:
                kept.append(value)
            else:
                log.warning("page %s field %s: extracted value %r not found in page, dropped",
                            page_id, name, value)
        extraction.values = kept
        if extraction.cue_text and normalize_ws(extraction.cue_text) not in normalized_page:
            log.warning("page %s field %s: cue text %r not found in page, dropped",
                        page_id, name, extraction.cue_text)
            extraction.cue_text = ""


def extract_page(page: DomDocument, queries: list[FieldQuery],
                 config: LlmConfig, page_id: str = "") -> ExtractionResult:
    """Sanitize, prompt, parse, and consistency-check one page.

    Parse failures retry the completion up to config.max_retries times
    before the error propagates.
    """
    clean = sanitize(page)
    context = minify(serialize(clean))
    prompt = render_ie_prompt(
        query=build_query_text(queries),
        context=context,
        json_example=build_json_example(queries),
    )
    messages = [ChatMessage("user", prompt)]
    last_error: Exception | None = None
    for _attempt in range(config.max_retries + 1):
        response = complete(config, messages)
        try:
            result = parse_ie_response(response, queries)
            break
        except (NoConclusion, MalformedJson) as exc:
            last_error = exc
            log.warning("page %s: unparseable extraction response (%s), retrying", page_id, exc)
    else:
        raise last_error
    result.page_id = page_id
    _consistency_filter(result, visible_text(clean.root), page_id)
    return result


def merge_extractions(results: list[ExtractionResult], field_name: str) -> FieldTargets:
    """Union of a field's values and cues across pages, deduplicated on the
    whitespace-normalized form, insertion-ordered."""
    targets = FieldTargets(field_name=field_name)
    seen_values: set[str] = set()
    seen_cues: set[str] = set()
    for result in results:
        extraction = result.fields.get(field_name)
        if extraction is None:
            continue
        for value in extraction.values:
            normalized = normalize_ws(value)
            if normalized and normalized not in seen_values:
                seen_values.add(normalized)
                targets.values.append(normalized)
        cue = normalize_ws(extraction.cue_text)
        if cue and cue not in seen_cues:
            seen_cues.add(cue)
            targets.cue_texts.append(cue)
    return targets
