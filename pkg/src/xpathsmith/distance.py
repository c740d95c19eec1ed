"""Edit distance with an optional compiled kernel.

levenshtein() is the only hot loop in the pipeline (the condenser calls it
for every element-text/target pair on every page). A Cython build of the
same two-row algorithm is picked up at import when available; everything
else in the package is pure Python.
"""
from __future__ import annotations


def _levenshtein_py(a: str, b: str) -> int:
    """Two-row dynamic programming; O(len(a)*len(b)) time, O(len(b)) space."""
    if a == b:
        return 0
    if not a:
        return len(b)
    if not b:
        return len(a)
    if len(a) < len(b):
        a, b = b, a
    previous = list(range(len(b) + 1))
    current = [0] * (len(b) + 1)
    for i, ca in enumerate(a, start=1):
        current[0] = i
        for j, cb in enumerate(b, start=1):
            cost = 0 if ca == cb else 1
            current[j] = min(previous[j] + 1,
                             current[j - 1] + 1,
                             previous[j - 1] + cost)
        previous, current = current, previous
    return previous[len(b)]


try:
    from ._speedups import levenshtein as _levenshtein_c
    USING_EXTENSION = True
except ImportError:
    _levenshtein_c = None
    USING_EXTENSION = False


def levenshtein(a: str, b: str) -> int:
    """Minimum number of single-character edits turning `a` into `b`."""
    if _levenshtein_c is not None:
        return _levenshtein_c(a, b)
    return _levenshtein_py(a, b)


def backend_name() -> str:
    return "cython" if USING_EXTENSION else "python"
