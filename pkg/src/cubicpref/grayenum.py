"""Enumeration and classification of cubic preference matrices.

Path classes are enumerated by a depth-first search over Hamiltonian paths
of the ``n``-cube that starts at the all-ones vertex and only lets a
question change for the first time if it is the lowest question not yet
changed.  Every orbit under the signed-permutation group has exactly one
such path (its canonical form, see :func:`hyperoct.canonicalize`), so the
search emits each path class once without isomorph rejection.
"""

from __future__ import annotations

import itertools
import logging
import math
import os
import random
import time
import warnings
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

from . import _backend
from .prefcore import (
    Character,
    PreferenceMatrix,
    character_class_key,
    is_intersection_closed,
    is_nested,
    parse_class_key,
    permute_mask,
)

log = logging.getLogger(__name__)

ENUMERATE_MAX_N = 6
ALL_PATHS_MAX_N = 4
SPLIT_DEPTH = 8
THREADS_ENV = "CUBICPREF_THREADS"
# from here on random_cubic tries low-degree neighbours first (ties stay random)
WARNSDORFF_N = 6

# search nodes visited by the canonical search (dead-end pruning on)
SEARCH_NODES = {1: 2, 2: 4, 3: 16, 4: 1861, 5: 1_131_256_494}


class ResourceRefused(RuntimeError):
    """The request would be too expensive without an explicit opt-in."""


def group_order(n: int) -> int:
    return (1 << n) * math.factorial(n)


def default_workers() -> int:
    value = os.environ.get(THREADS_ENV)
    if value:
        try:
            return max(1, int(value))
        except ValueError:
            log.warning("ignoring non-integer %s=%r", THREADS_ENV, value)
    return 1


@dataclass
class ClassificationTable:
    n: int
    rows: dict[str, tuple[int, int]] = field(default_factory=dict)

    def add(self, key: str, path_classes: int) -> None:
        pc, _ = self.rows.get(key, (0, 0))
        pc += path_classes
        self.rows[key] = (pc, pc * group_order(self.n))

    @property
    def total_path_classes(self) -> int:
        return sum(pc for pc, _ in self.rows.values())

    @property
    def total_matrices(self) -> int:
        return sum(m for _, m in self.rows.values())

    def sorted_rows(self) -> list[tuple[str, int, int]]:
        """``(key, matrices, path_classes)``, most matrices first, then by key."""
        items = [(k, m, pc) for k, (pc, m) in self.rows.items()]
        items.sort(key=lambda r: (-r[1], r[0]))
        return items

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "group_order": group_order(self.n),
            "classes": [
                {"class": k, "matrices": m, "path_classes": pc}
                for k, m, pc in self.sorted_rows()
            ],
            "total_matrices": self.total_matrices,
            "total_path_classes": self.total_path_classes,
        }


def _start(n: int) -> int:
    return (1 << n) - 1


def work_units(n: int, depth: int = SPLIT_DEPTH) -> list[list[int]]:
    """Canonical path prefixes after ``depth`` moves; their subtrees are disjoint.

    Prefixes that cannot reach ``depth`` moves (too small a cube) are
    returned whole, so the union of subtrees is always the full search.
    """
    size = 1 << n
    depth = min(depth, size - 1)
    out: list[list[int]] = []
    path = [_start(n)]
    seen = {path[0]}

    def rec(used: int) -> None:
        if len(path) - 1 == depth:
            out.append(list(path))
            return
        cur = path[-1]
        top = used + 1 if used < n else n
        for q in range(top):
            v = cur ^ (1 << (n - 1 - q))
            if v in seen:
                continue
            path.append(v)
            seen.add(v)
            rec(used + 1 if q >= used else used)
            seen.discard(v)
            path.pop()

    rec(0)
    return out


def _check_enum_n(n: int) -> None:
    if not 1 <= n <= ENUMERATE_MAX_N:
        raise ValueError(f"enumeration supports 1 <= n <= {ENUMERATE_MAX_N}, got {n}")
    if n == ENUMERATE_MAX_N:
        warnings.warn("n=6 enumeration has no runtime bound", RuntimeWarning, stacklevel=3)


def _tally_unit(args) -> tuple[dict[int, int], int]:
    n, prefix = args
    counts = _backend.impl.tally_characters(n, prefix)
    return counts, sum(counts.values())


def _count_unit(args) -> int:
    n, prefix = args
    return _backend.impl.count_paths(n, prefix)[0]


def _run_units(
    fn,
    n: int,
    workers: int,
    progress: Callable[[int, int, int, float], None] | None,
    leaves_of: Callable,
):
    units = work_units(n) if (workers > 1 or progress) else [[_start(n)]]
    tasks = [(n, u) for u in units]
    t0 = time.monotonic()
    leaves = 0
    results = []
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            it = pool.map(fn, tasks, chunksize=1)
            for i, r in enumerate(it, start=1):
                results.append(r)
                leaves += leaves_of(r)
                if progress:
                    progress(i, len(tasks), leaves, time.monotonic() - t0)
    else:
        for i, task in enumerate(tasks, start=1):
            r = fn(task)
            results.append(r)
            leaves += leaves_of(r)
            if progress:
                progress(i, len(tasks), leaves, time.monotonic() - t0)
    return results


def count_path_classes(n: int, workers: int | None = None, progress=None) -> int:
    _check_enum_n(n)
    workers = workers or default_workers()
    return sum(_run_units(_count_unit, n, workers, progress, lambda r: r))


def enumerate_path_classes(
    n: int, visitor: Callable[[PreferenceMatrix], object] | None = None, workers: int | None = None
) -> int:
    """Visit the canonical representative of every path class; return the count.

    Delivery to ``visitor`` is serialised in the calling process.  Without a
    visitor the count is computed by the kernel directly (in parallel when
    ``workers > 1``).  A visitor returning a truthy value stops the search.
    """
    _check_enum_n(n)
    if visitor is None:
        return count_path_classes(n, workers)
    return _backend.impl.visit_paths(
        n, [_start(n)], lambda rows: visitor(PreferenceMatrix(n, rows))
    )


def enumerate_all_paths(n: int, visitor: Callable[[PreferenceMatrix], object] | None = None) -> int:
    """Visit every cubic matrix on ``n`` questions (all starts, no symmetry)."""
    if not 1 <= n <= ALL_PATHS_MAX_N:
        raise ValueError(f"full enumeration supports 1 <= n <= {ALL_PATHS_MAX_N}, got {n}")
    total = 0
    for start in range(1 << n):
        if visitor is None:
            total += _backend.impl.count_paths(n, [start], False)[0]
        else:
            total += _backend.impl.visit_paths(
                n, [start], lambda rows: visitor(PreferenceMatrix(n, rows)), False
            )
    return total


def cost_estimate(n: int) -> str:
    nodes = SEARCH_NODES.get(n)
    leaves = f"{nodes:,} search nodes" if nodes else "an unknown number of search nodes"
    speed = "about 2 minutes per core with the compiled kernel"
    if _backend.BACKEND != "cython":
        speed = "many hours with the pure-Python fallback (compiled kernel not built)"
    return f"n={n} classification visits {leaves}; {speed}"


def character_counts(n: int, *, workers: int | None = None, progress=None) -> dict[int, int]:
    """Path classes per exact character bitset of the canonical representatives."""
    _check_enum_n(n)
    workers = workers or default_workers()
    merged: Counter[int] = Counter()
    for counts, _ in _run_units(_tally_unit, n, workers, progress, lambda r: r[1]):
        merged.update(counts)
    return dict(merged)


def classify(
    n: int,
    deep: bool = False,
    *,
    workers: int | None = None,
    progress: Callable[[int, int, int, float], None] | None = None,
    check: bool = True,
) -> ClassificationTable:
    """Count path classes and matrices per character class.

    ``n >= 5`` is refused unless ``deep`` is set.  With ``check`` every
    distinct character met is asserted nested and intersection closed.
    """
    if n >= 5 and not deep:
        raise ResourceRefused(cost_estimate(n) + "; pass deep=True (--deep) to run it")
    if n > 5:
        raise ResourceRefused("exact classification is limited to n <= 5")
    table = ClassificationTable(n)
    for bits, count in sorted(character_counts(n, workers=workers, progress=progress).items()):
        c = Character.from_bits(n, bits)
        if check and not (is_nested(c) and is_intersection_closed(c)):
            raise AssertionError(f"character {c} breaks nestedness or intersection closure")
        table.add(character_class_key(c), count)
    return table


def class_targets(n: int, key: str) -> set[int]:
    """Bitsets of every character in the class named ``key``."""
    base = parse_class_key(key, n)
    out = set()
    for sigma in itertools.permutations(range(1, n + 1)):
        bits = 0
        for m in base.masks:
            bits |= 1 << permute_mask(n, m, sigma)
        out.add(bits)
    return out


_rep_cache: dict[tuple[int, str], PreferenceMatrix | None] = {}


def find_representative(n: int, key: str, node_budget: int | None = None) -> PreferenceMatrix | None:
    """A canonical cubic matrix whose character class is ``key``, if one exists.

    Exhaustive for ``n <= 4``.  For ``n = 5`` the search stops after
    ``node_budget`` nodes (default 2e8) and ``None`` then means "not found".
    """
    if not 1 <= n <= 5:
        raise ValueError(f"representative search supports 1 <= n <= 5, got {n}")
    targets = class_targets(n, key)
    cache_key = (n, character_class_key(parse_class_key(key, n)))
    if cache_key in _rep_cache:
        return _rep_cache[cache_key]
    if n == 5 and node_budget is None:
        node_budget = 200_000_000
    rows = _backend.impl.find_path(n, [_start(n)], targets, True, node_budget or 0)
    rep = PreferenceMatrix(n, rows) if rows is not None else None
    if rep is not None or n <= 4:
        _rep_cache[cache_key] = rep
    return rep


def random_cubic(n: int, seed, max_restarts: int = 1000) -> PreferenceMatrix:
    """Random cubic matrix from a randomised depth-first search.

    Each attempt picks a random start vertex and explores neighbours in a
    random order, abandoning the attempt after a node budget; the result is
    a deterministic function of ``seed``.  For ``n >= 6`` neighbours are
    additionally ordered by remaining degree, otherwise the search rarely
    completes.
    """
    if not 1 <= n <= 7:
        raise ValueError(f"random_cubic supports 1 <= n <= 7, got {n}")
    rng = random.Random(seed)
    size = 1 << n
    budget = 50 * size * n
    for _ in range(max_restarts):
        path = _random_attempt(n, size, rng, budget, n >= WARNSDORFF_N)
        if path is not None:
            return PreferenceMatrix(n, tuple(path))
    raise RuntimeError("random_cubic exhausted its restarts")


def _random_attempt(n: int, size: int, rng: random.Random, budget: int, warnsdorff: bool):
    start = rng.randrange(size)
    visited = [False] * size
    deg = [n] * size
    path: list[int] = []
    nodes = 0

    def enter(v):
        visited[v] = True
        path.append(v)
        ok = True
        last = len(path) >= size - 1
        for j in range(n):
            w = v ^ (1 << j)
            deg[w] -= 1
            if deg[w] == 0 and not visited[w] and not last:
                ok = False
        return ok

    def leave(v):
        for j in range(n):
            deg[v ^ (1 << j)] += 1
        visited[v] = False
        path.pop()

    def dfs() -> bool:
        nonlocal nodes
        nodes += 1
        if len(path) == size:
            return True
        if nodes > budget:
            return False
        cur = path[-1]
        moves = [cur ^ (1 << j) for j in range(n)]
        rng.shuffle(moves)
        if warnsdorff:
            moves.sort(key=deg.__getitem__)
        for v in moves:
            if visited[v]:
                continue
            ok = enter(v)
            if ok and dfs():
                return True
            leave(v)
            if nodes > budget:
                return False
        return False

    enter(start)
    return list(path) if dfs() else None
