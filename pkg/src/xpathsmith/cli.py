"""Command-line surface: the full pipeline plus per-stage utilities.

Subcommands:
    run            execute a task file end to end, writing artifacts
    sanitize       reduce one page for extraction
    condense       condense one page around target texts
    stats          corpus-wide size-reduction statistics
    xpath eval     evaluate an expression against a page
    bench          run every corpus task and emit a summary table
    corpus convert-swde    convert original SWDE layout + ground truth

Every artifact except the ledger (which carries timestamps) is
byte-stable across reruns with the replay transport.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import re
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict
from pathlib import Path

from . import corpus as corpus_mod
from .condenser import CondensePlan, NoTargets, condense_with_plan
from .dom import DomDocument, parse_html, serialize
from .ie_stage import (
    ExtractionResult, FieldQuery, extract_page, merge_extractions,
)
from .llm_gateway import (
    LlmConfig, MalformedResponse, RateLimited, ReplayMiss, TransportError,
)
from .metrics import MetricsReport, evaluate_task, format_table, report_as_dict
from .programmer_stage import NoViableCandidate, program_xpath
from .sanitizer import EmptyCorpus, sanitize_page, token_stats
from .xpath_engine import (
    XPathEvaluationError, XPathSyntaxError, evaluate, parse_xpath, result_strings,
)

log = logging.getLogger("xpathsmith")

FATAL_ERRORS = (
    ReplayMiss, TransportError, RateLimited, MalformedResponse,
    corpus_mod.LayoutError, corpus_mod.InsufficientPages,
    FileNotFoundError, NotADirectoryError, json.JSONDecodeError, ValueError,
)

_ENV_RE = re.compile(r"\$\{([A-Za-z_][A-Za-z0-9_]*)\}")


def _interpolate(value):
    if isinstance(value, str):
        return _ENV_RE.sub(lambda m: os.environ.get(m.group(1), ""), value)
    if isinstance(value, dict):
        return {k: _interpolate(v) for k, v in value.items()}
    if isinstance(value, list):
        return [_interpolate(v) for v in value]
    return value


def load_config(path: str | Path) -> dict:
    with open(path, encoding="utf-8") as handle:
        return _interpolate(json.load(handle))


_LLM_KEYS = ("endpoint_url", "model_name", "api_key", "temperature",
             "max_retries", "timeout", "transport", "replay_dir",
             "requests_per_minute")


def stage_config(config: dict, stage: str, ledger_path: str | None = None,
                 overrides: dict | None = None) -> LlmConfig:
    """Top-level keys are defaults; the per-stage section ("ie" or
    "programmer") overrides them, CLI flags override both."""
    merged = {k: config[k] for k in _LLM_KEYS if k in config}
    merged.update({k: v for k, v in config.get(stage, {}).items() if k in _LLM_KEYS})
    if overrides:
        merged.update({k: v for k, v in overrides.items() if v is not None})
    return LlmConfig(ledger_path=ledger_path, **merged)


def _write_json(path: Path, payload) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n",
                    encoding="utf-8")


def _load_page(path: Path, page_id: str | None = None) -> DomDocument:
    return parse_html(path.read_bytes(), source_url=page_id or path.stem)


def _load_task_file(path: Path) -> dict:
    task = json.loads(path.read_text(encoding="utf-8"))
    for key in ("task_id", "fields", "seed_pages"):
        if key not in task:
            raise ValueError(f"task file {path} is missing {key!r}")
    base = path.parent
    task["seed_pages"] = [(base / p) for p in task["seed_pages"]]
    task["eval_pages"] = [(base / p) for p in task.get("eval_pages", [])]
    truth = task.get("truth")
    if isinstance(truth, str):
        task["truth"] = json.loads((base / truth).read_text(encoding="utf-8"))
    return task


def _plan_payload(plan: CondensePlan) -> dict:
    return {
        "target_texts": plan.target_texts,
        "distances": plan.distances,
        "kept_xpaths": plan.kept_xpaths,
    }


class TaskRunner:
    """One task end to end; every stage leaves an inspectable artifact."""

    def __init__(self, task: dict, config: dict, out_dir: Path,
                 overrides: dict | None = None, workers: int = 1) -> None:
        self.task = task
        self.config = config
        self.out = out_dir
        self.workers = max(1, workers)
        self.out.mkdir(parents=True, exist_ok=True)
        ledger = self.out / "ledger.jsonl"
        ledger.unlink(missing_ok=True)
        self.ie_config = stage_config(config, "ie", str(ledger), overrides)
        self.prog_config = stage_config(config, "programmer", str(ledger), overrides)
        self.queries = [FieldQuery(f["name"], f.get("question", f["name"]),
                                   f.get("multiplicity", "single"))
                        for f in task["fields"]]
        self.failed_fields: dict[str, str] = {}

    def run(self) -> int:
        seeds = [(p.stem, _load_page(p)) for p in self.task["seed_pages"]]
        extractions = self._stage_one(seeds)
        xpaths = self._stage_two(seeds, extractions)
        self._evaluate(xpaths)
        self._summary(xpaths)
        return 2 if self.failed_fields else 0

    # -- stage 1 -------------------------------------------------------------

    def _stage_one(self, seeds) -> list[ExtractionResult]:
        sanitized_dir = self.out / "sanitized"
        sanitized_dir.mkdir(parents=True, exist_ok=True)
        reports = {}
        for page_id, doc in seeds:
            minified, report = sanitize_page(doc, page_id=page_id)
            (sanitized_dir / f"{page_id}.html").write_text(minified, encoding="utf-8")
            reports[page_id] = asdict(report)
        _write_json(self.out / "sanitize_reports.json", reports)

        def one(arg):
            page_id, doc = arg
            return extract_page(doc, self.queries, self.ie_config, page_id=page_id)

        extractions = list(self._map(one, seeds))
        payload = {
            r.page_id: {name: {"values": fx.values, "cue_text": fx.cue_text}
                        for name, fx in sorted(r.fields.items())}
            for r in extractions
        }
        _write_json(self.out / "extraction.json", payload)
        return extractions

    # -- stage 2 -------------------------------------------------------------

    def _stage_two(self, seeds, extractions) -> dict[str, str]:
        condensed_root = self.out / "condensed"
        plans: dict[str, dict[str, dict]] = {}
        xpaths: dict[str, dict] = {}
        by_page = {r.page_id: r for r in extractions}

        def one_field(query: FieldQuery):
            targets = merge_extractions(extractions, query.field_name)
            if not targets.values:
                raise NoTargets(f"no values extracted for field {query.field_name}")
            field_dir = condensed_root / query.field_name
            field_dir.mkdir(parents=True, exist_ok=True)
            field_plans = {}
            seed_tuples = []
            for page_id, doc in seeds:
                condensed, plan = condense_with_plan(doc, targets.all_targets)
                (field_dir / f"{page_id}.html").write_text(
                    serialize(condensed.root), encoding="utf-8")
                field_plans[page_id] = _plan_payload(plan)
                page_values = by_page[page_id].fields[query.field_name].values
                seed_tuples.append((doc, page_values))
            candidate = program_xpath(query, seed_tuples, targets, self.prog_config)
            return query.field_name, field_plans, candidate

        for query in self.queries:
            try:
                name, field_plans, candidate = one_field(query)
            except (NoViableCandidate, NoTargets) as exc:
                self.failed_fields[query.field_name] = str(exc)
                print(f"error: field {query.field_name}: {exc}", file=sys.stderr)
                continue
            plans[name] = field_plans
            xpaths[name] = {
                "xpath": candidate.xpath,
                "thought": candidate.thought,
                "score": candidate.score,
                "iterations": candidate.iteration + 1,
                "per_page_feedback": [asdict(fb) for fb in candidate.per_page_feedback],
            }
        _write_json(self.out / "condense_plans.json", plans)
        _write_json(self.out / "xpaths.json", xpaths)
        return {name: payload["xpath"] for name, payload in xpaths.items()}

    # -- evaluation ----------------------------------------------------------

    def _evaluate(self, xpaths: dict[str, str]) -> None:
        truth = self.task.get("truth") or {}
        eval_paths = self.task.get("eval_pages") or []
        if not xpaths or not eval_paths or not truth:
            _write_json(self.out / "metrics.json",
                        {"note": "no evaluation pages or truth supplied"})
            return
        pages = []
        for path in eval_paths:
            page_id = path.stem
            pages.append((_load_page(path), truth.get(page_id, {})))
        report = evaluate_task(xpaths, pages)
        _write_json(self.out / "metrics.json", report_as_dict(report))
        rows = [("overall", report)]
        rows += [(name, sub) for name, sub in sorted(report.per_field.items())]
        (self.out / "metrics.txt").write_text(format_table(rows), encoding="utf-8")

    def _summary(self, xpaths: dict[str, str]) -> None:
        _write_json(self.out / "run_summary.json", {
            "task_id": self.task["task_id"],
            "fields": [q.field_name for q in self.queries],
            "seed_pages": [p.stem for p in self.task["seed_pages"]],
            "eval_pages": [p.stem for p in self.task.get("eval_pages", [])],
            "xpaths": xpaths,
            "failed_fields": self.failed_fields,
        })

    def _map(self, fn, items):
        if self.workers == 1 or len(items) <= 1:
            return [fn(item) for item in items]
        with ThreadPoolExecutor(max_workers=self.workers) as pool:
            return list(pool.map(fn, items))


def run_task(task_file: str | Path, config_file: str | Path, out_dir: str | Path,
             overrides: dict | None = None, workers: int = 1) -> int:
    task = _load_task_file(Path(task_file))
    config = load_config(config_file)
    runner = TaskRunner(task, config, Path(out_dir), overrides, workers)
    return runner.run()


# ---------------------------------------------------------------------------
# subcommand handlers

def _cmd_run(args) -> int:
    overrides = {"transport": args.transport, "replay_dir": args.replay_dir}
    return run_task(args.task, args.config, args.out, overrides, args.workers)


def _cmd_sanitize(args) -> int:
    doc = _load_page(Path(args.input))
    minified, report = sanitize_page(doc, page_id=Path(args.input).stem)
    if args.out:
        Path(args.out).write_text(minified, encoding="utf-8")
    else:
        print(minified)
    if args.report:
        _write_json(Path(args.report), asdict(report))
    return 0


def _cmd_condense(args) -> int:
    doc = _load_page(Path(args.input))
    targets = json.loads(Path(args.targets).read_text(encoding="utf-8"))
    if not isinstance(targets, list):
        raise ValueError("targets file must be a JSON array of strings")
    condensed, plan = condense_with_plan(doc, [str(t) for t in targets])
    html = serialize(condensed.root)
    if args.out:
        Path(args.out).write_text(html, encoding="utf-8")
    else:
        print(html)
    if args.plan:
        _write_json(Path(args.plan), _plan_payload(plan))
    return 0


def _cmd_stats(args) -> int:
    root = Path(args.corpus_dir)
    if not root.is_dir():
        raise NotADirectoryError(f"not a directory: {root}")
    pages = []
    for path in sorted(root.rglob("*.htm*")):
        pages.append((str(path.relative_to(root)), path.read_bytes()))
    try:
        summary = token_stats(pages, csv_path=args.out, plot_path=args.plot)
    except EmptyCorpus:
        print(f"error: no .htm/.html pages under {root}", file=sys.stderr)
        return 1
    print(f"pages: {summary['pages']}  mean ratio: {summary['mean_ratio']:.4f}  "
          f"median ratio: {summary['median_ratio']:.4f}")
    return 0


def _cmd_xpath_eval(args) -> int:
    doc = _load_page(Path(args.file))
    try:
        result = evaluate(doc, parse_xpath(args.expr))
    except (XPathSyntaxError, XPathEvaluationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for line in result_strings(result):
        print(line)
    return 0


def _cmd_bench(args) -> int:
    config = load_config(args.config)
    overrides = {"transport": args.transport, "replay_dir": args.replay_dir}
    tasks = corpus_mod.load_corpus(args.corpus_root)
    out_root = Path(args.out)
    out_root.mkdir(parents=True, exist_ok=True)
    from .metrics import PageCounts, aggregate  # summary-level reaggregation

    rows = []
    total_counts: list[PageCounts] = []
    per_task: dict[str, dict] = {}
    exit_code = 0
    for task in tasks:
        seeds, eval_pages = corpus_mod.sample(
            task, n_seeds=args.seeds, n_eval=args.eval, rng_seed=args.rng_seed)
        task_spec = {
            "task_id": task.task_id,
            "fields": [{"name": f, "question": f} for f in task.fields],
            "seed_pages": [p for _, p in seeds],
            "eval_pages": [p for _, p in eval_pages],
            "truth": task.truth,
        }
        runner = TaskRunner(task_spec, config, out_root / task.task_id,
                            overrides, args.workers)
        code = runner.run()
        exit_code = max(exit_code, code)
        metrics_file = out_root / task.task_id / "metrics.json"
        payload = json.loads(metrics_file.read_text(encoding="utf-8"))
        per_task[task.task_id] = payload
        if "tp" in payload:
            total_counts.append(PageCounts(payload["tp"], payload["fp"], payload["fn"]))

    model = config.get("programmer", {}).get("model_name") or \
        config.get("model_name", "model")
    if total_counts:
        overall = aggregate(total_counts)
        rows.append((model, overall))
        table = format_table(rows)
    else:
        table = "no evaluable tasks\n"
    (out_root / "bench.txt").write_text(table, encoding="utf-8")
    _write_json(out_root / "bench.json", {
        "model": model,
        "sample": {"seeds": args.seeds, "eval": args.eval,
                   "rng_seed": args.rng_seed},
        "tasks": per_task,
    })
    print(table, end="")
    return exit_code


def _cmd_convert_swde(args) -> int:
    count = corpus_mod.convert_swde(args.swde_root, args.out_root)
    print(f"converted {count} site task(s) into {args.out_root}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="xpathsmith",
        description="Generate reusable field XPaths from a few seed pages.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a task file end to end")
    run.add_argument("task", help="task JSON file")
    run.add_argument("--config", required=True, help="config JSON file")
    run.add_argument("--out", required=True, help="output directory")
    run.add_argument("--workers", type=int, default=1)
    run.add_argument("--transport", choices=["live", "replay"], default=None)
    run.add_argument("--replay-dir", default=None)
    run.set_defaults(handler=_cmd_run)

    san = sub.add_parser("sanitize", help="sanitize and minify one page")
    san.add_argument("input")
    san.add_argument("-o", "--out", default=None)
    san.add_argument("--report", default=None, help="write a size report JSON")
    san.set_defaults(handler=_cmd_sanitize)

    con = sub.add_parser("condense", help="condense one page around targets")
    con.add_argument("input")
    con.add_argument("--targets", required=True, help="JSON array of target strings")
    con.add_argument("-o", "--out", default=None)
    con.add_argument("--plan", default=None, help="write the condense plan JSON")
    con.set_defaults(handler=_cmd_condense)

    stats = sub.add_parser("stats", help="size-reduction statistics over a corpus")
    stats.add_argument("corpus_dir")
    stats.add_argument("--out", required=True, help="CSV output path")
    stats.add_argument("--plot", default=None, help="optional plot-data JSON path")
    stats.set_defaults(handler=_cmd_stats)

    xp = sub.add_parser("xpath", help="expression utilities")
    xp_sub = xp.add_subparsers(dest="xpath_command", required=True)
    xp_eval = xp_sub.add_parser("eval", help="evaluate an expression on a page")
    xp_eval.add_argument("expr")
    xp_eval.add_argument("file")
    xp_eval.set_defaults(handler=_cmd_xpath_eval)

    bench = sub.add_parser("bench", help="run every corpus task and summarize")
    bench.add_argument("corpus_root")
    bench.add_argument("--config", required=True)
    bench.add_argument("--out", required=True)
    bench.add_argument("--seeds", type=int, default=3)
    bench.add_argument("--eval", type=int, default=32)
    bench.add_argument("--rng-seed", type=int, default=0)
    bench.add_argument("--workers", type=int, default=1)
    bench.add_argument("--transport", choices=["live", "replay"], default=None)
    bench.add_argument("--replay-dir", default=None)
    bench.set_defaults(handler=_cmd_bench)

    corpus = sub.add_parser("corpus", help="corpus utilities")
    corpus_sub = corpus.add_subparsers(dest="corpus_command", required=True)
    conv = corpus_sub.add_parser("convert-swde", help="convert an SWDE tree")
    conv.add_argument("swde_root")
    conv.add_argument("out_root")
    conv.set_defaults(handler=_cmd_convert_swde)

    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=os.environ.get("XPATHSMITH_LOG", "WARNING"),
                        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except FATAL_ERRORS as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
