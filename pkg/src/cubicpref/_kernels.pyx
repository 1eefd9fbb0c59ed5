# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels: Hamiltonian path search on the n-cube and separability.

Drop-in replacement for ``_kernels_py``; see that module for the contract.
"""

from libc.stdint cimport uint64_t, int64_t
from libc.stdlib cimport malloc, calloc, free
from libc.string cimport memset

from cubicpref._kernels_py import prefix_state

MAX_SEARCH_N = 6

BACKEND = "cython"

cdef enum:
    MAXV = 64

cdef enum Mode:
    MODE_COUNT = 0
    MODE_TALLY = 1
    MODE_FIND = 2


# ---------------------------------------------------------------- hash table

cdef struct Table:
    uint64_t* keys      # 0 marks an empty slot; character bitsets are never 0
    int64_t* vals
    Py_ssize_t cap
    Py_ssize_t size


cdef int _table_init(Table* t, Py_ssize_t cap) noexcept nogil:
    t.keys = <uint64_t*> calloc(cap, sizeof(uint64_t))
    t.vals = <int64_t*> calloc(cap, sizeof(int64_t))
    t.cap = cap
    t.size = 0
    if t.keys == NULL or t.vals == NULL:
        return -1
    return 0


cdef void _table_free(Table* t) noexcept nogil:
    free(t.keys)
    free(t.vals)
    t.keys = NULL
    t.vals = NULL


cdef inline Py_ssize_t _slot(Table* t, uint64_t key) noexcept nogil:
    cdef uint64_t h = key * <uint64_t> 0x9E3779B97F4A7C15ULL
    cdef Py_ssize_t i = <Py_ssize_t> ((h >> 17) & <uint64_t> (t.cap - 1))
    while t.keys[i] != 0 and t.keys[i] != key:
        i = (i + 1) & (t.cap - 1)
    return i


cdef int _table_grow(Table* t) noexcept nogil:
    cdef Table bigger
    cdef Py_ssize_t i, j
    if _table_init(&bigger, t.cap * 2) < 0:
        _table_free(&bigger)
        return -1
    for i in range(t.cap):
        if t.keys[i] != 0:
            j = _slot(&bigger, t.keys[i])
            bigger.keys[j] = t.keys[i]
            bigger.vals[j] = t.vals[i]
    bigger.size = t.size
    _table_free(t)
    t[0] = bigger
    return 0


cdef int _table_add(Table* t, uint64_t key, int64_t amount) noexcept nogil:
    cdef Py_ssize_t i
    if 2 * (t.size + 1) > t.cap:
        if _table_grow(t) < 0:
            return -1
    i = _slot(t, key)
    if t.keys[i] == 0:
        t.keys[i] = key
        t.size += 1
    t.vals[i] += amount
    return 0


cdef inline bint _table_has(Table* t, uint64_t key) noexcept nogil:
    return t.keys[_slot(t, key)] == key


# ------------------------------------------------------------- separability

cdef bint _sep_small(const int* rows, int N, int s) noexcept nogil:
    """Separability of mask ``s`` for N <= 64 rows."""
    cdef int f = (N - 1) & ~s
    cdef int i, k, m, x0, y0
    cdef uint64_t seen = 0
    cdef int seq[MAXV]
    cdef int cnt[MAXV]
    if s == 0 or f == 0:
        return True
    # the first row of every bucket must carry the top row's S-part
    x0 = rows[0] & s
    for i in range(N):
        k = rows[i] & f
        if not (seen >> k) & 1:
            if (rows[i] & s) != x0:
                return False
            seen |= (<uint64_t> 1) << k
    y0 = rows[0] & f
    m = 0
    for i in range(N):
        if (rows[i] & f) == y0:
            seq[m] = rows[i] & s
            m += 1
    memset(cnt, 0, N * sizeof(int))
    for i in range(N):
        k = rows[i] & f
        if (rows[i] & s) != seq[cnt[k]]:
            return False
        cnt[k] += 1
    return True


cdef bint _sep_large(const int* rows, int N, int s, int* seq, int* cnt) noexcept nogil:
    cdef int f = (N - 1) & ~s
    cdef int i, k, m, y0
    if s == 0 or f == 0:
        return True
    y0 = rows[0] & f
    m = 0
    for i in range(N):
        if (rows[i] & f) == y0:
            seq[m] = rows[i] & s
            m += 1
    memset(cnt, 0, N * sizeof(int))
    for i in range(N):
        k = rows[i] & f
        if (rows[i] & s) != seq[cnt[k]]:
            return False
        cnt[k] += 1
    return True


cdef uint64_t _char_bits_small(const int* rows, int N) noexcept nogil:
    cdef uint64_t bits = 1 | ((<uint64_t> 1) << (N - 1))
    cdef int s
    for s in range(1, N - 1):
        if _sep_small(rows, N, s):
            bits |= (<uint64_t> 1) << s
    return bits


cdef int* _load_rows(rows, int n) except NULL:
    cdef int N = 1 << n
    cdef int i
    if len(rows) != N:
        raise ValueError(f"expected {N} rows, got {len(rows)}")
    cdef int* buf = <int*> malloc(N * sizeof(int))
    if buf == NULL:
        raise MemoryError()
    for i in range(N):
        buf[i] = rows[i]
    return buf


def is_separable_rows(rows, int n, int s):
    cdef int N = 1 << n
    cdef int* buf = _load_rows(rows, n)
    cdef int* seq
    cdef int* cnt
    cdef bint out
    try:
        if N <= MAXV:
            return bool(_sep_small(buf, N, s))
        seq = <int*> malloc(N * sizeof(int))
        cnt = <int*> malloc(N * sizeof(int))
        if seq == NULL or cnt == NULL:
            free(seq)
            free(cnt)
            raise MemoryError()
        out = _sep_large(buf, N, s, seq, cnt)
        free(seq)
        free(cnt)
        return bool(out)
    finally:
        free(buf)


def character_masks(rows, int n):
    cdef int N = 1 << n
    cdef int* buf = _load_rows(rows, n)
    cdef int* seq = NULL
    cdef int* cnt = NULL
    cdef int s
    cdef list out = []
    try:
        if N <= MAXV:
            for s in range(N):
                if _sep_small(buf, N, s):
                    out.append(s)
            return out
        seq = <int*> malloc(N * sizeof(int))
        cnt = <int*> malloc(N * sizeof(int))
        if seq == NULL or cnt == NULL:
            raise MemoryError()
        for s in range(N):
            if _sep_large(buf, N, s, seq, cnt):
                out.append(s)
        return out
    finally:
        free(buf)
        free(seq)
        free(cnt)


def character_bits(rows, int n):
    # Python ints: n = 7 has 128 masks
    out = 0
    for s in character_masks(rows, n):
        out |= 1 << s
    return out


# ------------------------------------------------------------------- search

cdef struct Search:
    int n
    int N
    bint canonical
    int start_depth
    int start_used
    bint ok
    int path[MAXV]
    unsigned char vis[MAXV]
    int deg[MAXV]
    int64_t leaves
    int64_t nodes
    int64_t node_limit
    bint stop
    int mode
    int error
    Table table
    int found[MAXV]
    bint have_found


cdef inline bint _enter(Search* s, int v, int depth) noexcept nogil:
    cdef int j, w
    cdef bint ok = True
    cdef bint last = depth + 1 >= s.N - 1
    s.vis[v] = 1
    s.path[depth] = v
    for j in range(s.n):
        w = v ^ (1 << j)
        s.deg[w] -= 1
        if s.deg[w] == 0 and not s.vis[w] and not last:
            ok = False
    return ok


cdef inline void _leave(Search* s, int v) noexcept nogil:
    cdef int j
    for j in range(s.n):
        s.deg[v ^ (1 << j)] += 1
    s.vis[v] = 0


cdef void _leaf(Search* s) noexcept nogil:
    cdef uint64_t bits
    cdef int j
    s.leaves += 1
    if s.mode == MODE_TALLY:
        bits = _char_bits_small(s.path, s.N)
        if _table_add(&s.table, bits, 1) < 0:
            s.error = 1
            s.stop = True
    elif s.mode == MODE_FIND:
        bits = _char_bits_small(s.path, s.N)
        if _table_has(&s.table, bits):
            for j in range(s.N):
                s.found[j] = s.path[j]
            s.have_found = True
            s.stop = True


cdef void _dfs(Search* s, int depth, int cur, int used) noexcept nogil:
    cdef int q, v, top
    s.nodes += 1
    if s.node_limit > 0 and s.nodes > s.node_limit:
        s.stop = True
        return
    if depth == s.N:
        _leaf(s)
        return
    top = used + 1 if (s.canonical and used < s.n) else s.n
    for q in range(top):
        v = cur ^ (1 << (s.n - 1 - q))
        if s.vis[v]:
            continue
        if _enter(s, v, depth):
            _dfs(s, depth + 1, v, used + 1 if q >= used else used)
        _leave(s, v)
        if s.stop:
            return


cdef tuple _path_tuple(Search* s):
    cdef int i
    return tuple([s.path[i] for i in range(s.N)])


cdef int _visit(Search* s, int depth, int cur, int used, object callback) except -1:
    cdef int q, v, top
    s.nodes += 1
    if depth == s.N:
        s.leaves += 1
        if callback(_path_tuple(s)):
            s.stop = True
        return 0
    top = used + 1 if (s.canonical and used < s.n) else s.n
    for q in range(top):
        v = cur ^ (1 << (s.n - 1 - q))
        if s.vis[v]:
            continue
        try:
            if _enter(s, v, depth):
                _visit(s, depth + 1, v, used + 1 if q >= used else used, callback)
        finally:
            _leave(s, v)
        if s.stop:
            return 0
    return 0


cdef Search* _new_search(int n, prefix, bint canonical, int mode) except NULL:
    prefix, used = prefix_state(n, prefix, canonical)
    cdef Search* s = <Search*> calloc(1, sizeof(Search))
    cdef int i
    if s == NULL:
        raise MemoryError()
    s.n = n
    s.N = 1 << n
    s.canonical = canonical
    s.mode = mode
    s.ok = True
    for i in range(s.N):
        s.deg[i] = n
    for i, v in enumerate(prefix):
        if not _enter(s, v, i):
            s.ok = False
    s.start_depth = len(prefix)
    s.start_used = used
    if mode != MODE_COUNT and _table_init(&s.table, 1024) < 0:
        _table_free(&s.table)
        free(s)
        raise MemoryError()
    return s


cdef void _free_search(Search* s) noexcept:
    _table_free(&s.table)
    free(s)


cdef void _run(Search* s) noexcept nogil:
    if s.ok:
        _dfs(s, s.start_depth, s.path[s.start_depth - 1], s.start_used)


def count_paths(int n, prefix, bint canonical=True):
    cdef Search* s = _new_search(n, prefix, canonical, MODE_COUNT)
    try:
        with nogil:
            _run(s)
        return s.leaves, s.nodes
    finally:
        _free_search(s)


def tally_characters(int n, prefix, bint canonical=True):
    cdef Search* s = _new_search(n, prefix, canonical, MODE_TALLY)
    cdef Py_ssize_t i
    try:
        with nogil:
            _run(s)
        if s.error:
            raise MemoryError("character table allocation failed")
        return {s.table.keys[i]: s.table.vals[i] for i in range(s.table.cap) if s.table.keys[i] != 0}
    finally:
        _free_search(s)


def visit_paths(int n, prefix, callback, bint canonical=True):
    cdef Search* s = _new_search(n, prefix, canonical, MODE_COUNT)
    try:
        if s.ok:
            _visit(s, s.start_depth, s.path[s.start_depth - 1], s.start_used, callback)
        return s.leaves
    finally:
        _free_search(s)


def find_path(int n, prefix, targets, bint canonical=True, long long node_limit=0):
    cdef Search* s = _new_search(n, prefix, canonical, MODE_FIND)
    cdef int i
    try:
        for t in targets:
            if _table_add(&s.table, <uint64_t> t, 1) < 0:
                raise MemoryError()
        s.node_limit = node_limit
        with nogil:
            _run(s)
        if not s.have_found:
            return None
        return tuple([s.found[i] for i in range(s.N)])
    finally:
        _free_search(s)
