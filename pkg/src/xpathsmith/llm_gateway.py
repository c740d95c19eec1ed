"""Prompt rendering and chat-endpoint transport.

The three templates below are the load-bearing text of the whole system;
tests pin them byte-for-byte (typos and trailing whitespace included), so
do not "fix" their wording. complete() speaks an OpenAI-compatible chat
JSON shape and supports two transports: live HTTP and a replay directory
keyed by a content hash of the full message list, which makes every test
run deterministic and makes any prompt drift fail loudly.
"""
from __future__ import annotations

import hashlib
import json
import os
import re
import threading
import time
from dataclasses import dataclass

import jinja2
import requests

IE_TEMPLATE = 'Extract the information and cues from the given context that are required by the question, and present the results in JSON format. When presenting the results, ensure character-level consistency with the extracted text, do not make any modifications. The given context may be incomplete or may not have the answer, so, the final JSON conclusion must not include any fields that have not been mentioned.\n\nWhen there are multiple similar expressions, prioritize them according to the following rules (from high to low):\n1. The label of the target text is more important in HTML semantics.\n2. The target text is completely within a tag, rather than within a sentence or paragraph.\n3. The target text is closer to other fields to be extracted.\n4. If these expressions can complement each other, please extract them all.\n\nCue Text (cue_text, from high to low):\n1. Cue Text: In HTML, the indicative text that signals the upcoming extraction of the target text, such as `Phone number` or `Address:`.\n2. When there is no cue text, use an empty string.\n\n# Question:\n{{ query }}\n\n# Context:\n```html\n{{ context }}\n```\n\n# Answer Format (ignore the format requirements in the `Question`, strictly follow the answer format of cue_text and value):\nThought: ...(Your thoughts, about fields mentioned in the context and their cues)...\nConclusion: ...(Strictly follow the JSON example format to answer: {{ json_example }})...\n\n# Your Answer:\n'

PROGRAM_SYSTEM_PROMPT = 'You are a pro software engineer, your task is reading the HTML code that user sent, and then response **one** Xpath (wrapped in JSON) that can recognize the element in the HTML to extract `target value`. \n\nHere\'re some hints:\n1. Do not output the xpath with exact value or element appears in the HTML.\n2. Reference to the `target value` and the generated the xpath (if exists) to get more context.\n3. When using text predication, always using `contains(., \'value\')` instead of `text()=\'value\'`.\n4. If the target xpath ends with `text()[n]`, where n is not 1, please do not ignore it.\n5. If cue text exist, using cue text and cue xpath to compose a new xpath might be a better idea.\n6. String functions are allowed, such as `starts-with()`, `ends-with()`, `substring-before()`, `substring-after()`. Use it in caution, since it can only be used on `text()` node.\n\nPlease always response in the following Json format:\n{\n  "thought": "", # a brief thought of how to confirm the value and generate the xpath\n  "xpath": "" # a workable xpath to extract the value in the HTML\n}    \n'

FEEDBACK_TEMPLATE = 'Following the feedbacks to refine the xpath you provided:\n\n1. Extend the xpath to include the missing information if `Missing`.\n2. Restrict the xpath to exclude the irrelevant information if `Surplus`.\n3. Correct the xpath grammer if `Invalid`.\n4. Response same xpath if no better solution.\n\n{% for feedback in feedbacks %}\n#### Evaluated on Fragment {{ feedback.id }}:\nExtracted (JSON encoded): `{{ feedback.extracted | tojson }}`\nFeedback Message: `{{ feedback.message }}`\n{% endfor %}\n'


PROGRAM_USER_TEMPLATE = """\
Program **one** Xpath to extract `target value` from all HTML fragments below.

# Field:
{{ field }}

# Target values (JSON encoded):
{{ targets | tojson }}

# Cue text:
{{ cue }}

# Generated xpath (for reference):
{% for xp in static_xpaths %}- `{{ xp }}`
{% endfor %}
{% for page in pages %}#### Fragment {{ page.id }}:
```html
{{ page.html }}
```

{% endfor %}"""


class TransportError(RuntimeError):
    """Endpoint unreachable or persistently failing."""


class RateLimited(TransportError):
    """429 responses survived every retry."""


class MalformedResponse(ValueError):
    """Endpoint answered, but not in chat-completion shape."""


class ReplayMiss(LookupError):
    """No canned response recorded for this exact message list."""


class EmptyFeedback(ValueError):
    """render_feedback_prompt needs at least one evaluation."""


@dataclass(frozen=True)
class ChatMessage:
    role: str  # "system" | "user" | "assistant"
    content: str

    def __post_init__(self) -> None:
        if self.role not in ("system", "user", "assistant"):
            raise ValueError(f"bad role {self.role!r}")
        if not self.content:
            raise ValueError("empty message content")


@dataclass
class LlmConfig:
    endpoint_url: str = ""
    model_name: str = ""
    api_key: str = ""
    temperature: float = 0.0
    max_retries: int = 2
    timeout: float = 60.0
    transport: str = "live"  # "live" | "replay"
    replay_dir: str | None = None
    requests_per_minute: float | None = None
    ledger_path: str | None = None

    def __post_init__(self) -> None:
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")
        if self.transport not in ("live", "replay"):
            raise ValueError(f"unknown transport {self.transport!r}")
        if self.transport == "replay" and not self.replay_dir:
            raise ValueError("replay transport needs replay_dir")


_env = jinja2.Environment(undefined=jinja2.StrictUndefined, keep_trailing_newline=True)
_env.filters["tojson"] = lambda value: json.dumps(value, ensure_ascii=True)

_IE = _env.from_string(IE_TEMPLATE)
_FEEDBACK = _env.from_string(FEEDBACK_TEMPLATE)
_PROGRAM_USER = _env.from_string(PROGRAM_USER_TEMPLATE)


def render_ie_prompt(query: str, context: str, json_example: str) -> str:
    """Slot substitution only; everything around the three slots is fixed text."""
    return _IE.render(query=query, context=context, json_example=json_example)


def render_program_prompts(condensed_pages: list[tuple[str, str]], field: str,
                           targets: list[str], cue: str,
                           static_xpaths: list[str]) -> list[ChatMessage]:
    """System prompt plus one user message carrying every condensed fragment."""
    pages = [{"id": page_id, "html": html} for page_id, html in condensed_pages]
    user = _PROGRAM_USER.render(field=field, targets=targets, cue=cue,
                                static_xpaths=static_xpaths, pages=pages)
    return [ChatMessage("system", PROGRAM_SYSTEM_PROMPT), ChatMessage("user", user)]


def render_feedback_prompt(feedbacks: list) -> str:
    """One block per evaluated fragment; raises EmptyFeedback on an empty list."""
    if not feedbacks:
        raise EmptyFeedback("no evaluations to report")
    rows = [{"id": f.page_id, "extracted": f.extracted, "message": f.message}
            for f in feedbacks]
    return _FEEDBACK.render(feedbacks=rows)


def messages_hash(messages: list[ChatMessage]) -> str:
    """Content hash keying the replay store; any prompt drift changes it."""
    canonical = json.dumps([{"role": m.role, "content": m.content} for m in messages],
                           ensure_ascii=True, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


_WS_TOKENS = re.compile(r"\S+")

_ledger_lock = threading.Lock()


def _write_ledger(config: LlmConfig, messages: list[ChatMessage], response: str,
                  digest: str) -> None:
    if not config.ledger_path:
        return
    prompt_text = "".join(m.content for m in messages)
    entry = {
        "ts": round(time.time(), 3),
        "transport": config.transport,
        "model": config.model_name,
        "hash": digest,
        "prompt_chars": len(prompt_text),
        "prompt_tokens": len(_WS_TOKENS.findall(prompt_text)),
        "response_chars": len(response),
        "response_tokens": len(_WS_TOKENS.findall(response)),
    }
    line = json.dumps(entry, sort_keys=True)
    with _ledger_lock:
        with open(config.ledger_path, "a") as handle:
            handle.write(line + "\n")


class _TokenBucket:
    """Shared requests-per-minute limiter; acquire() blocks until a slot frees."""

    def __init__(self, per_minute: float) -> None:
        self.capacity = max(per_minute, 1.0)
        self.tokens = self.capacity
        self.rate = per_minute / 60.0
        self.updated = time.monotonic()
        self.lock = threading.Lock()

    def acquire(self) -> None:
        while True:
            with self.lock:
                now = time.monotonic()
                self.tokens = min(self.capacity, self.tokens + (now - self.updated) * self.rate)
                self.updated = now
                if self.tokens >= 1.0:
                    self.tokens -= 1.0
                    return
                wait = (1.0 - self.tokens) / self.rate
            time.sleep(wait)


_buckets: dict[tuple[str, float], _TokenBucket] = {}
_buckets_lock = threading.Lock()


def _bucket_for(config: LlmConfig) -> _TokenBucket | None:
    if not config.requests_per_minute:
        return None
    key = (config.endpoint_url, config.requests_per_minute)
    with _buckets_lock:
        if key not in _buckets:
            _buckets[key] = _TokenBucket(config.requests_per_minute)
        return _buckets[key]


def _complete_replay(config: LlmConfig, digest: str,
                     messages: list[ChatMessage]) -> str:
    path = os.path.join(config.replay_dir, f"{digest}.txt")
    if not os.path.exists(path):
        tail = messages[-1].content
        preview = tail[:200] + ("..." if len(tail) > 200 else "")
        raise ReplayMiss(
            f"no canned response {digest}.txt in {config.replay_dir} "
            f"({len(messages)} messages; last starts: {preview!r})")
    with open(path, encoding="utf-8") as handle:
        return handle.read()


def _complete_live(config: LlmConfig, messages: list[ChatMessage]) -> str:
    body = {
        "model": config.model_name,
        "messages": [{"role": m.role, "content": m.content} for m in messages],
        "temperature": config.temperature,
    }
    headers = {"Content-Type": "application/json"}
    if config.api_key:
        headers["Authorization"] = f"Bearer {config.api_key}"
    bucket = _bucket_for(config)
    last_status = None
    for attempt in range(config.max_retries + 1):
        if attempt:
            time.sleep(min(2 ** attempt, 30))
        if bucket is not None:
            bucket.acquire()
        try:
            resp = requests.post(config.endpoint_url, json=body, headers=headers,
                                 timeout=config.timeout)
        except requests.RequestException as exc:
            raise TransportError(f"request to {config.endpoint_url} failed: {exc}") from exc
        last_status = resp.status_code
        if resp.status_code == 429 or resp.status_code >= 500:
            continue
        if resp.status_code != 200:
            raise TransportError(f"endpoint returned HTTP {resp.status_code}: {resp.text[:200]}")
        try:
            payload = resp.json()
            content = payload["choices"][0]["message"]["content"]
        except (ValueError, LookupError, TypeError) as exc:
            raise MalformedResponse(f"unexpected response shape: {resp.text[:200]}") from exc
        if not isinstance(content, str):
            raise MalformedResponse("choice content is not a string")
        return content
    if last_status == 429:
        raise RateLimited(f"still rate limited after {config.max_retries} retries")
    raise TransportError(
        f"endpoint kept failing (HTTP {last_status}) after {config.max_retries} retries")


def complete(config: LlmConfig, messages: list[ChatMessage]) -> str:
    """One chat completion; thread-safe, rate-limited, ledger-recorded."""
    if not messages:
        raise ValueError("complete() needs at least one message")
    digest = messages_hash(messages)
    if config.transport == "replay":
        response = _complete_replay(config, digest, messages)
    else:
        response = _complete_live(config, messages)
    _write_ledger(config, messages, response, digest)
    return response
