"""Compare the compiled levenshtein kernel against the pure-Python fallback.

The condenser calls levenshtein() for every (element text, target) pair on
every page, which makes it the only hot loop in the pipeline. Run:

    python3 benchmarks/bench_distance.py [--pairs N] [--max-len N]

The numbers are wall-clock over identical randomized workloads; both
backends run regardless of which one the package picked at import.
"""
from __future__ import annotations

import argparse
import random
import string
import sys
import time

from xpathsmith.distance import _levenshtein_py, backend_name

try:
    from xpathsmith._speedups import levenshtein as _levenshtein_c
except ImportError:
    _levenshtein_c = None


def make_pairs(n: int, max_len: int, seed: int) -> list[tuple[str, str]]:
    rng = random.Random(seed)
    alphabet = string.ascii_lowercase + string.digits + " .$:-"
    def word():
        return "".join(rng.choice(alphabet)
                       for _ in range(rng.randint(0, max_len)))
    return [(word(), word()) for _ in range(n)]


def run(fn, pairs) -> tuple[float, int]:
    start = time.perf_counter()
    checksum = 0
    for a, b in pairs:
        checksum += fn(a, b)
    return time.perf_counter() - start, checksum


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--pairs", type=int, default=20000)
    parser.add_argument("--max-len", type=int, default=40)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    pairs = make_pairs(args.pairs, args.max_len, args.seed)
    print(f"workload: {args.pairs} pairs, strings up to {args.max_len} chars")
    print(f"active backend at import: {backend_name()}")

    py_time, py_sum = run(_levenshtein_py, pairs)
    print(f"pure python : {py_time:8.3f}s  ({args.pairs / py_time:10.0f} pairs/s)")
    if _levenshtein_c is None:
        print("compiled    : not built (pip install -e . rebuilds it)")
        return 0
    c_time, c_sum = run(_levenshtein_c, pairs)
    print(f"compiled    : {c_time:8.3f}s  ({args.pairs / c_time:10.0f} pairs/s)")
    if py_sum != c_sum:
        print("MISMATCH: backends disagree on the workload", file=sys.stderr)
        return 1
    print(f"speedup     : {py_time / c_time:8.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
