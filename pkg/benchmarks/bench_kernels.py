"""Compiled vs pure-Python kernels on the hot paths.

    python benchmarks/bench_kernels.py [--repeat 3]

Prints one line per workload with the best-of-``repeat`` time of each
backend and the speedup.  Both backends must return identical results;
a mismatch aborts.
"""

import argparse
import random
import sys
import time

from cubicpref import _backend, _kernels_py, grayenum


def best_time(fn, repeat):
    best, out = float("inf"), None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def workloads():
    rng = random.Random(1)
    mats6 = [grayenum.random_cubic(6, rng.randrange(2**32)).rows for _ in range(20)]
    unit = grayenum.work_units(5, 12)[0]
    return [
        ("character, 20 cubic n=6", lambda k: [k.character_masks(r, 6) for r in mats6]),
        ("count_paths n=4", lambda k: k.count_paths(4, [15])),
        ("tally_characters n=4", lambda k: k.tally_characters(4, [15])),
        ("tally n=5 unit (depth 12)", lambda k: k.tally_characters(5, unit)),
    ]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    compiled = _backend.compiled()
    if compiled is None:
        print("compiled kernel not built; nothing to compare", file=sys.stderr)
        return 1
    print(f"{'workload':34} {'cython':>10} {'python':>10} {'speedup':>9}")
    for name, fn in workloads():
        tc, rc = best_time(lambda: fn(compiled), args.repeat)
        tp, rp = best_time(lambda: fn(_kernels_py), args.repeat)
        if rc != rp:
            print(f"{name}: backends disagree", file=sys.stderr)
            return 2
        print(f"{name:34} {tc * 1e3:8.2f}ms {tp * 1e3:8.2f}ms {tp / tc:8.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
