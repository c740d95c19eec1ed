"""Freeze golden files for the byte-level regression tests.

Sanitizer goldens come from the independent recursive oracle in
tests/oracles.py, NOT from the package, so the byte comparison in the
test suite is a real cross-check. Condenser and prompt goldens freeze
current pipeline output; their correctness is established by separate
property tests, and the goldens guard against silent drift.

Run from the repository root:  python3 tools/make_goldens.py
"""
from __future__ import annotations

import json
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "tests"))

from oracles import oracle_sanitize_minify  # noqa: E402

from xpathsmith.condenser import condense_with_plan  # noqa: E402
from xpathsmith.corpus import load_corpus  # noqa: E402
from xpathsmith.dom import parse_html, serialize  # noqa: E402
from xpathsmith.ie_stage import (  # noqa: E402
    FieldQuery, build_json_example, build_query_text,
)
from xpathsmith.llm_gateway import (  # noqa: E402
    render_feedback_prompt, render_ie_prompt, render_program_prompts,
)
from xpathsmith.programmer_stage import EvaluationFeedback  # noqa: E402
from xpathsmith.sanitizer import minify, sanitize  # noqa: E402

FIXTURES = ROOT / "tests" / "fixtures"
GOLDENS = FIXTURES / "goldens"


def write(path: Path, content: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(content, encoding="utf-8")


def sanitizer_goldens() -> int:
    count = 0
    for page in sorted((FIXTURES / "pages").glob("*.html")):
        doc = parse_html(page.read_bytes(), source_url=page.stem)
        write(GOLDENS / "sanitized" / f"{page.stem}.html",
              oracle_sanitize_minify(doc))
        count += 1
    return count


def condenser_goldens() -> int:
    count = 0
    for task in load_corpus(FIXTURES / "corpus"):
        for page_id, path in task.pages[:2]:
            doc = parse_html(path.read_bytes(), source_url=page_id)
            targets = [v for values in task.truth[page_id].values()
                       for v in values]
            condensed, plan = condense_with_plan(doc, targets)
            stem = f"{task.task_id}--{page_id}"
            write(GOLDENS / "condensed" / f"{stem}.html",
                  serialize(condensed.root))
            write(GOLDENS / "condensed" / f"{stem}.plan.json",
                  json.dumps({"target_texts": plan.target_texts,
                              "distances": plan.distances,
                              "kept_xpaths": plan.kept_xpaths},
                             indent=2, sort_keys=True) + "\n")
            count += 1
    return count


def prompt_goldens() -> int:
    page = FIXTURES / "corpus" / "camera" / "camera-shop1" / "0000.htm"
    doc = parse_html(page.read_bytes(), source_url="0000")
    context = minify(serialize(sanitize(doc).root))
    queries = [
        FieldQuery("model", "What is the camera model name?"),
        FieldQuery("price", "What is the current price?"),
    ]
    write(GOLDENS / "prompts" / "ie_prompt.txt",
          render_ie_prompt(build_query_text(queries), context,
                           build_json_example(queries)))

    truth = json.loads((FIXTURES / "corpus" / "groundtruth" / "camera" /
                        "shop1.json").read_text())
    targets = truth["0000"]["price"]
    condensed, plan = condense_with_plan(doc, targets + ["Price:"])
    statics = [xp for t in plan.kept_xpaths.values() for xp in t]
    system, user = render_program_prompts(
        condensed_pages=[("0000", serialize(condensed.root))],
        field="price", targets=targets, cue="Price:", static_xpaths=statics)
    write(GOLDENS / "prompts" / "program_system.txt", system.content)
    write(GOLDENS / "prompts" / "program_user.txt", user.content)

    feedbacks = [
        EvaluationFeedback("0000", ["$129.99", "$5.00"], [], ["$5.00"],
                           "Surplus", "Surplus: extraneous value(s) "
                           "[\"$5.00\"] were extracted."),
        EvaluationFeedback("0001", [], ["$89.00"], [], "Missing",
                           "Missing: target value(s) [\"$89.00\"] "
                           "not extracted."),
    ]
    write(GOLDENS / "prompts" / "feedback.txt",
          render_feedback_prompt(feedbacks))
    return 4


def main() -> int:
    n_pages = sanitizer_goldens()
    n_cond = condenser_goldens()
    n_prompts = prompt_goldens()
    print(f"wrote {n_pages} sanitizer, {n_cond} condenser, "
          f"{n_prompts} prompt goldens under {GOLDENS}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
