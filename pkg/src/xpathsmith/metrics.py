"""Set-matching evaluation of final XPaths on held-out pages.

Predictions and truth are compared as whitespace-normalized unordered
sets, counted at label level (tp/fp/fn; there are no true negatives),
micro-averaged across pages. accuracy = tp/(tp+fp+fn); whole-set
correctness is reported separately as exact_match_rate.
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field

from .dom import DomDocument, normalize_ws
from .xpath_engine import (
    XPathEvaluationError, XPathSyntaxError, evaluate, parse_xpath, result_strings,
)

log = logging.getLogger(__name__)


class EmptyInput(ValueError):
    """aggregate over zero pages."""


@dataclass
class PageCounts:
    tp: int
    fp: int
    fn: int

    @property
    def exact_match(self) -> bool:
        return self.fp == 0 and self.fn == 0


@dataclass
class MetricsReport:
    precision: float
    recall: float
    f1: float
    accuracy: float
    exact_match_rate: float
    page_count: int
    tp: int = 0
    fp: int = 0
    fn: int = 0
    zero_division: list[str] = field(default_factory=list)
    per_field: dict[str, "MetricsReport"] = field(default_factory=dict)
    skipped_blank_truth: int = 0


def _normalized_set(values: list[str]) -> set[str]:
    return {normalize_ws(v) for v in values if normalize_ws(v)}


def page_counts(predicted: list[str], truth: list[str]) -> PageCounts:
    """Label-level counts over order-insensitive, deduplicated sets."""
    pred = _normalized_set(predicted)
    gold = _normalized_set(truth)
    return PageCounts(tp=len(pred & gold), fp=len(pred - gold), fn=len(gold - pred))


def aggregate(counts: list[PageCounts]) -> MetricsReport:
    """Micro-average: sum counts first, then apply the four formulas.

    A zero denominator reports the metric as 0 and records which metric
    was degenerate in `zero_division`.
    """
    if not counts:
        raise EmptyInput("aggregate needs at least one page")
    tp = sum(c.tp for c in counts)
    fp = sum(c.fp for c in counts)
    fn = sum(c.fn for c in counts)
    flags: list[str] = []

    def ratio(num: int, den: int, name: str) -> float:
        if den == 0:
            flags.append(name)
            return 0.0
        return num / den

    precision = ratio(tp, tp + fp, "precision")
    recall = ratio(tp, tp + fn, "recall")
    if precision + recall > 0:
        f1 = 2 * precision * recall / (precision + recall)
    else:
        flags.append("f1")
        f1 = 0.0
    accuracy = ratio(tp, tp + fp + fn, "accuracy")
    exact = sum(1 for c in counts if c.exact_match) / len(counts)
    return MetricsReport(precision=precision, recall=recall, f1=f1,
                         accuracy=accuracy, exact_match_rate=exact,
                         page_count=len(counts), tp=tp, fp=fp, fn=fn,
                         zero_division=flags)


def _predict(doc: DomDocument, xpath: str) -> list[str]:
    try:
        return result_strings(evaluate(doc, parse_xpath(xpath)))
    except (XPathSyntaxError, XPathEvaluationError) as exc:
        log.warning("xpath %r failed on %s: %s", xpath, doc.source_url, exc)
        return []


def evaluate_task(xpaths: dict[str, str],
                  pages: list[tuple[DomDocument, dict[str, list[str]]]]) -> MetricsReport:
    """Apply one final XPath per field to every page and aggregate.

    Pages with blank truth for a field are skipped (and counted); an
    unparseable or failing xpath predicts the empty set rather than
    erroring out.
    """
    per_field_counts: dict[str, list[PageCounts]] = {name: [] for name in xpaths}
    skipped = 0
    for doc, truth in pages:
        for name, xpath in xpaths.items():
            gold = truth.get(name, [])
            if not _normalized_set(gold):
                skipped += 1
                continue
            per_field_counts[name].append(page_counts(_predict(doc, xpath), gold))
    if skipped:
        log.info("skipped %d blank-truth (field, page) pairs", skipped)

    all_counts: list[PageCounts] = []
    per_field: dict[str, MetricsReport] = {}
    for name, counts in per_field_counts.items():
        if counts:
            per_field[name] = aggregate(counts)
        all_counts.extend(counts)
    if not all_counts:
        report = MetricsReport(precision=0.0, recall=0.0, f1=0.0, accuracy=0.0,
                               exact_match_rate=0.0, page_count=0,
                               zero_division=["precision", "recall", "f1", "accuracy"])
    else:
        report = aggregate(all_counts)
    report.per_field = per_field
    report.skipped_blank_truth = skipped
    return report


def report_as_dict(report: MetricsReport) -> dict:
    out = {
        "precision": report.precision,
        "recall": report.recall,
        "f1": report.f1,
        "accuracy": report.accuracy,
        "exact_match_rate": report.exact_match_rate,
        "page_count": report.page_count,
        "tp": report.tp,
        "fp": report.fp,
        "fn": report.fn,
        "zero_division": report.zero_division,
        "skipped_blank_truth": report.skipped_blank_truth,
    }
    if report.per_field:
        out["per_field"] = {name: report_as_dict(sub)
                            for name, sub in sorted(report.per_field.items())}
    return out


def report_as_json(report: MetricsReport) -> str:
    return json.dumps(report_as_dict(report), indent=2, sort_keys=True)


def format_table(rows: list[tuple[str, MetricsReport]]) -> str:
    """Aligned columns, one row per model/run label."""
    header = ("Model", "Accuracy", "Precision", "Recall", "F1")
    body = [(label, f"{r.accuracy:.4f}", f"{r.precision:.4f}",
             f"{r.recall:.4f}", f"{r.f1:.4f}") for label, r in rows]
    widths = [max(len(col[i]) for col in [header] + body) for i in range(5)]
    lines = []
    for row in [header] + body:
        lines.append("  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)).rstrip())
    return "\n".join(lines) + "\n"
