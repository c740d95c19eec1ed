"""Disk corpus handling: SWDE-style layout, truth files, deterministic sampling.

Expected layout:
    <root>/<vertical>/<vertical>-<site>/<page_id>.htm
    <root>/groundtruth/<vertical>/<site>.json

The truth JSON maps page_id -> field -> list of values. The original
tab-separated SWDE ground truth converts via convert_swde().
"""
from __future__ import annotations

import json
import logging
import random
import re
from dataclasses import dataclass, field
from pathlib import Path

log = logging.getLogger(__name__)

GROUNDTRUTH_DIR = "groundtruth"

_SITE_DIR_RE = re.compile(r"^(?P<vertical>[^-]+)-(?P<site>.+)$")
_SWDE_GT_ROW_RE = re.compile(r"^\d{4}\t")
_SWDE_DIR_SUFFIX_RE = re.compile(r"\(\d+\)$")
_SWDE_NULL = "<NULL>"


class LayoutError(ValueError):
    """Corpus directory does not follow the documented layout."""


class InsufficientPages(ValueError):
    """sample() asked for more seed pages than the task has."""


@dataclass
class CorpusTask:
    vertical: str
    site: str
    pages: list[tuple[str, Path]] = field(default_factory=list)
    truth: dict[str, dict[str, list[str]]] = field(default_factory=dict)

    @property
    def task_id(self) -> str:
        return f"{self.vertical}-{self.site}"

    @property
    def fields(self) -> list[str]:
        names: list[str] = []
        for per_field in self.truth.values():
            for name in per_field:
                if name not in names:
                    names.append(name)
        return names


def load_corpus(root_dir: str | Path) -> list[CorpusTask]:
    """One task per site directory; pages without a truth entry are dropped
    with a warning. Raises LayoutError naming the offending path."""
    root = Path(root_dir)
    if not root.is_dir():
        raise LayoutError(f"corpus root is not a directory: {root}")
    tasks: list[CorpusTask] = []
    for vertical_dir in sorted(p for p in root.iterdir() if p.is_dir()):
        if vertical_dir.name == GROUNDTRUTH_DIR:
            continue
        for site_dir in sorted(p for p in vertical_dir.iterdir() if p.is_dir()):
            match = _SITE_DIR_RE.match(site_dir.name)
            if not match or match.group("vertical") != vertical_dir.name:
                raise LayoutError(
                    f"site directory {site_dir} must be named "
                    f"{vertical_dir.name}-<site>")
            site = match.group("site")
            truth_path = root / GROUNDTRUTH_DIR / vertical_dir.name / f"{site}.json"
            if not truth_path.is_file():
                raise LayoutError(f"missing truth file {truth_path}")
            try:
                truth = json.loads(truth_path.read_text())
            except json.JSONDecodeError as exc:
                raise LayoutError(f"unreadable truth file {truth_path}: {exc}") from exc
            task = CorpusTask(vertical=vertical_dir.name, site=site, truth=truth)
            for page_path in sorted(site_dir.glob("*.htm*")):
                page_id = page_path.stem
                if page_id not in truth:
                    log.warning("page %s has no truth entry, dropped", page_path)
                    continue
                task.pages.append((page_id, page_path))
            tasks.append(task)
    return tasks


def sample(task: CorpusTask, n_seeds: int = 3, n_eval: int = 32,
           rng_seed: int = 0) -> tuple[list[tuple[str, Path]], list[tuple[str, Path]]]:
    """Deterministic disjoint (seeds, eval) split.

    Page ids are sorted, shuffled by rng_seed, then split: first n_seeds
    are seeds, the next up-to-n_eval are evaluation pages.
    """
    if len(task.pages) < n_seeds:
        raise InsufficientPages(
            f"task {task.task_id} has {len(task.pages)} pages, needs {n_seeds}")
    by_id = dict(task.pages)
    ids = sorted(by_id)
    random.Random(rng_seed).shuffle(ids)
    seed_ids = ids[:n_seeds]
    eval_ids = ids[n_seeds:n_seeds + n_eval]
    return ([(i, by_id[i]) for i in seed_ids], [(i, by_id[i]) for i in eval_ids])


def convert_swde(swde_root: str | Path, out_root: str | Path) -> int:
    """One-shot conversion of an original SWDE tree to the documented layout.

    SWDE site directories carry a "(N)" page-count suffix and its ground
    truth is tab-separated with header lines before the 4-digit page rows;
    <NULL> marks blank answers. Returns the number of tasks converted.
    """
    swde = Path(swde_root)
    out = Path(out_root)
    if not swde.is_dir():
        raise LayoutError(f"not a directory: {swde}")
    gt_root = swde / GROUNDTRUTH_DIR
    if not gt_root.is_dir():
        raise LayoutError(f"missing {gt_root}")

    converted = 0
    for vertical_dir in sorted(p for p in swde.iterdir()
                               if p.is_dir() and p.name != GROUNDTRUTH_DIR):
        vertical = vertical_dir.name
        # collect truth per site: field name comes from the gt file name
        # <vertical>-<site>-<field>.txt
        truth: dict[str, dict[str, dict[str, list[str]]]] = {}
        for gt_file in sorted((gt_root / vertical).glob("*.txt")):
            parts = gt_file.stem.split("-")
            if len(parts) < 3 or parts[0] != vertical:
                raise LayoutError(f"unrecognized truth file name {gt_file}")
            site = parts[1]
            fname = "-".join(parts[2:])
            site_truth = truth.setdefault(site, {})
            for line in gt_file.read_text(encoding="utf-8", errors="replace").splitlines():
                if not _SWDE_GT_ROW_RE.match(line):
                    continue  # header / metadata line
                cells = line.rstrip("\n").split("\t")
                page_id, values = cells[0], cells[2:]
                clean = [v for v in values if v and v != _SWDE_NULL]
                site_truth.setdefault(page_id, {})[fname] = clean

        for site_dir in sorted(p for p in vertical_dir.iterdir() if p.is_dir()):
            name = _SWDE_DIR_SUFFIX_RE.sub("", site_dir.name).strip()
            match = _SITE_DIR_RE.match(name)
            if not match:
                raise LayoutError(f"unrecognized site directory {site_dir}")
            site = match.group("site")
            if site not in truth:
                log.warning("site %s has no ground truth, skipped", site_dir)
                continue
            dest = out / vertical / f"{vertical}-{site}"
            dest.mkdir(parents=True, exist_ok=True)
            for page in sorted(site_dir.glob("*.htm*")):
                (dest / page.name).write_bytes(page.read_bytes())
            truth_dir = out / GROUNDTRUTH_DIR / vertical
            truth_dir.mkdir(parents=True, exist_ok=True)
            (truth_dir / f"{site}.json").write_text(
                json.dumps(truth[site], indent=2, sort_keys=True))
            converted += 1
    return converted
