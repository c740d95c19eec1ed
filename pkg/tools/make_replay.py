"""Record the canned model responses behind the replay-transport tests.

The recorder patches the replay lookup so that a miss falls through to a
scripted responder whose answer is written under the miss's content hash.
Driving the real pipeline through that patch records exactly the prompts
the pipeline produces, with zero duplicated orchestration logic. A second
unpatched pass proves the recording is complete.

Also writes the committed task files and replay config the tests use.
Rerun after any change that alters prompt bytes (templates, sanitizer,
condenser, sampling): python3 tools/make_replay.py
"""
from __future__ import annotations

import json
import re
import shutil
import sys
import tempfile
from collections import Counter, deque
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "tests"))

from loop_scenarios import (  # noqa: E402
    SCENARIOS, scenario_query, scenario_seeds, scenario_targets,
)

import xpathsmith.llm_gateway as gw  # noqa: E402
from xpathsmith import corpus as corpus_mod  # noqa: E402
from xpathsmith.cli import main as cli_main  # noqa: E402
from xpathsmith.cli import run_task  # noqa: E402
from xpathsmith.programmer_stage import program_xpath  # noqa: E402

FIXTURES = ROOT / "tests" / "fixtures"
REPLAY = FIXTURES / "replay"
TASKS = FIXTURES / "tasks"
CONFIG = FIXTURES / "replay_config.json"

N_SEEDS, N_EVAL, RNG_SEED = 3, 5, 0

QUESTIONS = {
    "camera": {"model": "What is the camera model name?",
               "price": "What is the current price of the camera?"},
    "book": {"title": "What is the book title?",
             "author": "Who wrote the book?"},
}
CUES = {
    "camera-shop1": {"model": "", "price": "Price:"},
    "camera-shop2": {"model": "", "price": "Price:"},
    "book-store1": {"title": "", "author": "by"},
    "book-store2": {"title": "", "author": "Author:"},
}
GOOD_XPATHS = {
    "camera-shop1": {"model": "//h1[@id='product-title']",
                     "price": "//span[@class='price']"},
    "camera-shop2": {"model": "//h2[@class='item-name']",
                     "price": "//li[contains(., 'Price:')]/b"},
    "book-store1": {"title": "//h1[@class='book-title']",
                    "author": "//a[@class='author-link']"},
    "book-store2": {"title": "//div[@id='main-title']",
                    "author": "//span[@class='by-line']"},
}
# camera-shop1 price converges in two rounds so the feedback path is
# exercised end to end; everything else is right on the first try
BAD_FIRST = {("camera-shop1", "price"): "//span[@class='cost']"}

_FIELD_RE = re.compile(r"# Field:\n(.+)\n")


class Responder:
    """Answers any pipeline prompt from the fixture ground truth."""

    def __init__(self) -> None:
        self.site = ""
        self.truth: dict = {}
        self.program_calls: Counter = Counter()
        self.queue: deque | None = None

    def __call__(self, messages) -> str:
        if self.queue is not None:
            return self.queue.popleft()
        last = messages[-1].content
        if "# Your Answer:" in last:
            return self._ie_answer(last)
        field = _FIELD_RE.search(messages[1].content).group(1)
        key = (self.site, field)
        good = json.dumps({"thought": f"select the {field} element",
                           "xpath": GOOD_XPATHS[self.site][field]})
        if last.startswith("Following the feedbacks"):
            return good
        self.program_calls[key] += 1
        if key in BAD_FIRST and self.program_calls[key] == 1:
            return json.dumps({"thought": "guess a likely class name",
                               "xpath": BAD_FIRST[key]})
        return good

    def _ie_answer(self, prompt: str) -> str:
        for page_id, fields in self.truth.items():
            if all(v in prompt for values in fields.values() for v in values):
                payload = {
                    name: {"value": values, "cue_text": CUES[self.site][name]}
                    for name, values in fields.items()
                }
                return ("Scanning the fragment for each requested field.\n"
                        "Conclusion: " + json.dumps(payload))
        raise AssertionError(f"prompt matches no {self.site} page")


def write_tasks() -> list[tuple[Path, "corpus_mod.CorpusTask"]]:
    TASKS.mkdir(parents=True, exist_ok=True)
    out = []
    for task in corpus_mod.load_corpus(FIXTURES / "corpus"):
        seeds, evals = corpus_mod.sample(task, N_SEEDS, N_EVAL, RNG_SEED)
        base = f"../corpus/{task.vertical}/{task.task_id}"
        spec = {
            "task_id": task.task_id,
            "fields": [{"name": f, "question": QUESTIONS[task.vertical][f]}
                       for f in task.fields],
            "seed_pages": [f"{base}/{pid}.htm" for pid, _ in seeds],
            "eval_pages": [f"{base}/{pid}.htm" for pid, _ in evals],
            "truth": f"../corpus/groundtruth/{task.vertical}/{task.site}.json",
        }
        path = TASKS / f"{task.task_id}.json"
        path.write_text(json.dumps(spec, indent=2) + "\n", encoding="utf-8")
        out.append((path, task))
    return out


def write_config() -> None:
    CONFIG.write_text(json.dumps({
        "endpoint_url": "https://replay.invalid/v1/chat/completions",
        "model_name": "scripted-model",
        "transport": "replay",
        "ie": {"model_name": "scripted-ie"},
        "programmer": {"model_name": "scripted-programmer"},
    }, indent=2) + "\n", encoding="utf-8")


def main() -> int:
    if REPLAY.exists():
        shutil.rmtree(REPLAY)
    REPLAY.mkdir(parents=True)
    write_config()
    task_files = write_tasks()

    responder = Responder()
    real_lookup = gw._complete_replay
    recorded = Counter()

    def recording_lookup(config, digest, messages):
        try:
            return real_lookup(config, digest, messages)
        except gw.ReplayMiss:
            response = responder(messages)
            (REPLAY / f"{digest}.txt").write_text(response, encoding="utf-8")
            recorded["files"] += 1
            return response

    gw._complete_replay = recording_lookup
    try:
        overrides = {"replay_dir": str(REPLAY)}
        for task_file, task in task_files:
            responder.site = task.task_id
            responder.truth = task.truth
            with tempfile.TemporaryDirectory() as tmp:
                code = run_task(task_file, CONFIG, tmp, overrides)
                assert code == 0, f"{task_file.stem} exited {code}"

        # the bench subcommand asks the field name as its own question, so
        # its stage-1 prompts hash differently from the task files above;
        # record them one site at a time (sites share truth values, so the
        # responder needs an unambiguous site)
        for _, task in task_files:
            responder.site = task.task_id
            responder.truth = task.truth
            with tempfile.TemporaryDirectory() as tmp:
                root = Path(tmp) / "corpus"
                site_dir = root / task.vertical / task.task_id
                shutil.copytree(FIXTURES / "corpus" / task.vertical / task.task_id,
                                site_dir)
                gt_dir = root / "groundtruth" / task.vertical
                gt_dir.mkdir(parents=True)
                shutil.copy(FIXTURES / "corpus" / "groundtruth" / task.vertical /
                            f"{task.site}.json", gt_dir / f"{task.site}.json")
                code = cli_main(["bench", str(root), "--config", str(CONFIG),
                                 "--out", str(Path(tmp) / "out"),
                                 "--replay-dir", str(REPLAY)])
                assert code == 0, f"bench recording for {task.task_id} exited {code}"

        prog_config = gw.LlmConfig(
            endpoint_url="https://replay.invalid/v1/chat/completions",
            model_name="scripted-programmer", transport="replay",
            replay_dir=str(REPLAY))
        for tag, responses in SCENARIOS.items():
            responder.queue = deque(responses)
            program_xpath(scenario_query(tag), scenario_seeds(tag),
                          scenario_targets(tag), prog_config)
            assert not responder.queue, f"scenario {tag} left responses unused"
            responder.queue = None
    finally:
        gw._complete_replay = real_lookup

    # completeness proof: pure replay passes must not miss
    with tempfile.TemporaryDirectory() as tmp:
        code = run_task(task_files[0][0], CONFIG, tmp,
                        {"replay_dir": str(REPLAY)})
        assert code == 0, "verification replay pass failed"
    with tempfile.TemporaryDirectory() as tmp:
        code = cli_main(["bench", str(FIXTURES / "corpus"),
                         "--config", str(CONFIG), "--out", tmp,
                         "--replay-dir", str(REPLAY)])
        assert code == 0, "verification bench replay pass failed"

    print(f"recorded {recorded['files']} response files into {REPLAY}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
