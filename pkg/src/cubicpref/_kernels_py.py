"""Pure-Python kernels; the fallback when the compiled extension is missing.

Same API as ``_kernels.pyx``.  Row words follow the package bit convention
(question ``j`` of ``n`` at bit ``n - j``).  Search functions take a path
``prefix`` (a list of vertices starting the path) and extend it to every
Hamiltonian path of the ``n``-cube.  With ``canonical`` set, a step that
changes a question never changed before is only allowed if it is the
lowest-numbered such question.
"""

from __future__ import annotations

MAX_SEARCH_N = 6

BACKEND = "python"


def is_separable_rows(rows, n, s):
    full = (1 << n) - 1
    f = full & ~s
    if s == 0 or f == 0:
        return True
    buckets = {}
    for r in rows:
        buckets.setdefault(r & f, []).append(r & s)
    it = iter(buckets.values())
    ref = next(it)
    return all(b == ref for b in it)


def character_masks(rows, n):
    return [s for s in range(1 << n) if is_separable_rows(rows, n, s)]


def character_bits(rows, n):
    out = 0
    for s in character_masks(rows, n):
        out |= 1 << s
    return out


def prefix_state(n, prefix, canonical):
    """Validate ``prefix``; return the number of distinct questions it changes."""
    if not 1 <= n <= MAX_SEARCH_N:
        raise ValueError(f"path search supports 1 <= n <= {MAX_SEARCH_N}, got {n}")
    size = 1 << n
    prefix = list(prefix)
    if not prefix:
        raise ValueError("prefix must contain at least the start vertex")
    if len(set(prefix)) != len(prefix) or any(not 0 <= v < size for v in prefix):
        raise ValueError("prefix vertices must be distinct outcomes")
    used = 0
    for a, b in zip(prefix, prefix[1:]):
        d = a ^ b
        if d == 0 or d & (d - 1):
            raise ValueError("prefix vertices must be adjacent")
        q = n - d.bit_length()
        if q >= used:
            if canonical and q != used:
                raise ValueError("prefix violates the first-change ordering rule")
            used = max(used, q + 1)
    return prefix, used


class _Search:
    def __init__(self, n, prefix, canonical):
        self.n = n
        self.size = 1 << n
        self.canonical = canonical
        prefix, self.used = prefix_state(n, prefix, canonical)
        self.visited = [False] * self.size
        self.deg = [n] * self.size
        self.path = [0] * self.size
        self.nodes = 0
        self.leaves = 0
        self.node_limit = 0
        self.ok = True
        for depth, v in enumerate(prefix):
            if not self.enter(v, depth):
                self.ok = False
        self.depth = len(prefix)

    def enter(self, v, depth):
        # False if some unvisited neighbour is left with no way out
        self.visited[v] = True
        self.path[depth] = v
        deg = self.deg
        ok = True
        last = depth + 1 >= self.size - 1
        for j in range(self.n):
            w = v ^ (1 << j)
            deg[w] -= 1
            if deg[w] == 0 and not self.visited[w] and not last:
                ok = False
        return ok

    def leave(self, v):
        for j in range(self.n):
            self.deg[v ^ (1 << j)] += 1
        self.visited[v] = False

    def run(self, on_leaf):
        """Depth-first search; ``on_leaf(path)`` returning True stops it."""
        if not self.ok:
            return
        n, size, canonical = self.n, self.size, self.canonical
        visited, path = self.visited, self.path
        stop = False

        def dfs(depth, cur, used):
            nonlocal stop
            self.nodes += 1
            if self.node_limit and self.nodes > self.node_limit:
                stop = True
                return
            if depth == size:
                self.leaves += 1
                if on_leaf is not None and on_leaf(path):
                    stop = True
                return
            top = used + 1 if canonical and used < n else n
            for q in range(top):
                v = cur ^ (1 << (n - 1 - q))
                if visited[v]:
                    continue
                if self.enter(v, depth):
                    dfs(depth + 1, v, used + 1 if q >= used else used)
                self.leave(v)
                if stop:
                    return

        dfs(self.depth, path[self.depth - 1], self.used)


def count_paths(n, prefix, canonical=True):
    """Return ``(leaves, nodes)`` for the search below ``prefix``."""
    s = _Search(n, prefix, canonical)
    s.run(None)
    return s.leaves, s.nodes


def tally_characters(n, prefix, canonical=True):
    """Map character bitset -> number of completed paths with that character.

    Bit ``m`` of a bitset is set when question mask ``m`` is separable.
    """
    s = _Search(n, prefix, canonical)
    counts = {}

    def leaf(path):
        bits = character_bits(path, n)
        counts[bits] = counts.get(bits, 0) + 1

    s.run(leaf)
    return counts


def visit_paths(n, prefix, callback, canonical=True):
    """Call ``callback(tuple_of_rows)`` per path; a truthy return stops early."""
    s = _Search(n, prefix, canonical)
    s.run(lambda path: callback(tuple(path)))
    return s.leaves


def find_path(n, prefix, targets, canonical=True, node_limit=0):
    """First completed path whose character bitset is in ``targets``, else None."""
    s = _Search(n, prefix, canonical)
    s.node_limit = node_limit
    targets = set(targets)
    found = []

    def leaf(path):
        if character_bits(path, n) in targets:
            found.append(tuple(path))
            return True
        return False

    s.run(leaf)
    return found[0] if found else None
