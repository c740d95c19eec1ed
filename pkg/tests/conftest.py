"""Shared fixture paths and helpers for the test suite."""
from __future__ import annotations

from pathlib import Path

import pytest

from xpathsmith.dom import DomDocument, parse_html
from xpathsmith.llm_gateway import LlmConfig

FIXTURES = Path(__file__).parent / "fixtures"
PAGES = FIXTURES / "pages"
GOLDENS = FIXTURES / "goldens"
CORPUS = FIXTURES / "corpus"
TASKS = FIXTURES / "tasks"
REPLAY = FIXTURES / "replay"
REPLAY_CONFIG = FIXTURES / "replay_config.json"


def load_page(path: Path, page_id: str | None = None) -> DomDocument:
    return parse_html(path.read_bytes(), source_url=page_id or path.stem)


def make_replay_config(**overrides) -> LlmConfig:
    base = dict(
        endpoint_url="https://replay.invalid/v1/chat/completions",
        model_name="scripted-model",
        transport="replay",
        replay_dir=str(REPLAY),
    )
    base.update(overrides)
    return LlmConfig(**base)


@pytest.fixture
def fixture_pages() -> list[Path]:
    pages = sorted(PAGES.glob("*.html"))
    assert len(pages) >= 20, "fixture corpus must hold at least 20 pages"
    return pages
