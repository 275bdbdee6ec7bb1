# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Hot-path search kernels, compiled lane.

Twin of ``tourkit.kernels._pure``: same algorithms, same neighbor scan
order, same tie-breaking, bit-identical results. Keep the two modules in
sync; the kernel tests compare them directly.
"""

from libc.math cimport INFINITY, sqrt
from libc.stdlib cimport free as cfree
from libc.stdlib cimport malloc, realloc

import numpy as np

cdef double SQRT2 = sqrt(2.0)

# Relaxation order; matches _pure._STEPS.
cdef int[8] STEP_DR = [-1, -1, -1, 0, 0, 1, 1, 1]
cdef int[8] STEP_DC = [-1, 0, 1, -1, 1, -1, 0, 1]
cdef double[8] STEP_W = [SQRT2, 1.0, SQRT2, 1.0, 1.0, SQRT2, 1.0, SQRT2]

# Circular 8-neighborhood ring (N, NE, E, SE, S, SW, W, NW); matches _pure._RING.
cdef int[8] RING_DR = [-1, -1, 0, 1, 1, 1, 0, -1]
cdef int[8] RING_DC = [0, 1, 1, 1, 0, -1, -1, -1]


# ---------------------------------------------------------------------------
# Binary min-heap on (key, tie) pairs with an int payload.
# ---------------------------------------------------------------------------

cdef struct Heap:
    double* key
    long long* tie
    long long* val
    Py_ssize_t n
    Py_ssize_t cap


cdef inline int heap_init(Heap* h, Py_ssize_t cap) except -1:
    if cap < 16:
        cap = 16
    h.key = <double*> malloc(cap * sizeof(double))
    h.tie = <long long*> malloc(cap * sizeof(long long))
    h.val = <long long*> malloc(cap * sizeof(long long))
    if h.key == NULL or h.tie == NULL or h.val == NULL:
        raise MemoryError()
    h.n = 0
    h.cap = cap
    return 0


cdef inline void heap_dealloc(Heap* h) noexcept:
    if h.key != NULL:
        cfree(h.key)
    if h.tie != NULL:
        cfree(h.tie)
    if h.val != NULL:
        cfree(h.val)
    h.key = NULL
    h.tie = NULL
    h.val = NULL
    h.n = 0
    h.cap = 0


cdef inline bint heap_lt(Heap* h, Py_ssize_t i, Py_ssize_t j) noexcept:
    if h.key[i] != h.key[j]:
        return h.key[i] < h.key[j]
    return h.tie[i] < h.tie[j]


cdef inline void heap_swap(Heap* h, Py_ssize_t i, Py_ssize_t j) noexcept:
    cdef double k = h.key[i]
    cdef long long t = h.tie[i]
    cdef long long v = h.val[i]
    h.key[i] = h.key[j]
    h.tie[i] = h.tie[j]
    h.val[i] = h.val[j]
    h.key[j] = k
    h.tie[j] = t
    h.val[j] = v


cdef inline int heap_push(Heap* h, double key, long long tie, long long val) except -1:
    cdef Py_ssize_t i, p
    cdef Py_ssize_t cap
    if h.n == h.cap:
        cap = h.cap * 2
        h.key = <double*> realloc(h.key, cap * sizeof(double))
        h.tie = <long long*> realloc(h.tie, cap * sizeof(long long))
        h.val = <long long*> realloc(h.val, cap * sizeof(long long))
        if h.key == NULL or h.tie == NULL or h.val == NULL:
            raise MemoryError()
        h.cap = cap
    i = h.n
    h.key[i] = key
    h.tie[i] = tie
    h.val[i] = val
    h.n += 1
    while i > 0:
        p = (i - 1) // 2
        if heap_lt(h, i, p):
            heap_swap(h, i, p)
            i = p
        else:
            break
    return 0


cdef inline void heap_pop(Heap* h, double* key, long long* tie, long long* val) noexcept:
    cdef Py_ssize_t i = 0
    cdef Py_ssize_t l, r, sm
    key[0] = h.key[0]
    tie[0] = h.tie[0]
    val[0] = h.val[0]
    h.n -= 1
    if h.n == 0:
        return
    h.key[0] = h.key[h.n]
    h.tie[0] = h.tie[h.n]
    h.val[0] = h.val[h.n]
    while True:
        l = 2 * i + 1
        r = l + 1
        sm = i
        if l < h.n and heap_lt(h, l, sm):
            sm = l
        if r < h.n and heap_lt(h, r, sm):
            sm = r
        if sm == i:
            break
        heap_swap(h, i, sm)
        i = sm


# ---------------------------------------------------------------------------
# Kernels
# ---------------------------------------------------------------------------

def astar_grid(const unsigned char[:, ::1] free, start, goal):
    """Optimal 8-connected path between two cells; see _pure.astar_grid."""
    cdef Py_ssize_t h = free.shape[0]
    cdef Py_ssize_t w = free.shape[1]
    cdef Py_ssize_t sr = start[0], sc = start[1]
    cdef Py_ssize_t gr = goal[0], gc = goal[1]
    cdef Py_ssize_t s = sr * w + sc
    cdef Py_ssize_t g_ = gr * w + gc
    if not free[sr, sc] or not free[gr, gc]:
        return None
    if s == g_:
        return 0, 0, np.array([s], dtype=np.int64)

    cdef Py_ssize_t n = h * w
    cdef double* gdist = <double*> malloc(n * sizeof(double))
    cdef long long* parent = <long long*> malloc(n * sizeof(long long))
    cdef char* closed = <char*> malloc(n)
    cdef Heap heap
    heap.key = NULL
    heap.tie = NULL
    heap.val = NULL
    if gdist == NULL or parent == NULL or closed == NULL:
        if gdist != NULL:
            cfree(gdist)
        if parent != NULL:
            cfree(parent)
        if closed != NULL:
            cfree(closed)
        raise MemoryError()

    cdef Py_ssize_t i
    for i in range(n):
        gdist[i] = INFINITY
        parent[i] = -1
        closed[i] = 0

    cdef double dx, dy, gcur, ng, hn, popk
    cdef long long counter = 1, popt, cur
    cdef Py_ssize_t r, c, nr, nc, nb, k
    cdef bint found = False

    try:
        heap_init(&heap, 1024)
        gdist[s] = 0.0
        dx = <double> ((sr - gr) * (sr - gr) + (sc - gc) * (sc - gc))
        heap_push(&heap, sqrt(dx), 0, s)
        while heap.n > 0:
            heap_pop(&heap, &popk, &popt, &cur)
            if closed[cur]:
                continue
            closed[cur] = 1
            if cur == g_:
                found = True
                break
            r = cur // w
            c = cur % w
            gcur = gdist[cur]
            for k in range(8):
                nr = r + STEP_DR[k]
                nc = c + STEP_DC[k]
                if nr < 0 or nr >= h or nc < 0 or nc >= w:
                    continue
                nb = nr * w + nc
                if closed[nb] or not free[nr, nc]:
                    continue
                ng = gcur + STEP_W[k]
                if ng < gdist[nb]:
                    gdist[nb] = ng
                    parent[nb] = cur
                    dy = <double> ((nr - gr) * (nr - gr) + (nc - gc) * (nc - gc))
                    hn = sqrt(dy)
                    heap_push(&heap, ng + hn, counter, nb)
                    counter += 1
        if not found:
            return None

        # Walk parents back to the start, then count step kinds.
        flat = []
        cur = g_
        while cur != -1:
            flat.append(cur)
            cur = parent[cur]
        flat.reverse()
        path = np.array(flat, dtype=np.int64)
        n_axis = 0
        n_diag = 0
        for i in range(1, path.shape[0]):
            if abs(path[i - 1] // w - path[i] // w) + abs(path[i - 1] % w - path[i] % w) == 2:
                n_diag += 1
            else:
                n_axis += 1
        return n_axis, n_diag, path
    finally:
        cfree(gdist)
        cfree(parent)
        cfree(closed)
        heap_dealloc(&heap)


def dijkstra_mask(const unsigned char[:, ::1] mask, source):
    """Single-source shortest paths over a mask; see _pure.dijkstra_mask."""
    cdef Py_ssize_t h = mask.shape[0]
    cdef Py_ssize_t w = mask.shape[1]
    cdef Py_ssize_t sr = source[0], sc = source[1]
    cdef Py_ssize_t s = sr * w + sc
    if not mask[sr, sc]:
        raise ValueError("dijkstra source cell is outside the mask")

    cdef Py_ssize_t n = h * w
    na_arr = np.full(n, -1, dtype=np.int32)
    nd_arr = np.full(n, -1, dtype=np.int32)
    parent_arr = np.full(n, -1, dtype=np.int32)
    dist_arr = np.full(n, np.inf)
    cdef int[::1] na = na_arr
    cdef int[::1] nd = nd_arr
    cdef int[::1] parent = parent_arr
    cdef double[::1] dist = dist_arr

    cdef Heap heap
    heap.key = NULL
    heap.tie = NULL
    heap.val = NULL
    cdef double d, ndist, popk
    cdef long long cur, popt
    cdef Py_ssize_t r, c, nr, nc, nb, k

    try:
        heap_init(&heap, 1024)
        dist[s] = 0.0
        na[s] = 0
        nd[s] = 0
        heap_push(&heap, 0.0, s, s)
        while heap.n > 0:
            heap_pop(&heap, &popk, &popt, &cur)
            if popk > dist[cur]:
                continue
            d = dist[cur]
            r = cur // w
            c = cur % w
            for k in range(8):
                nr = r + STEP_DR[k]
                nc = c + STEP_DC[k]
                if nr < 0 or nr >= h or nc < 0 or nc >= w:
                    continue
                if not mask[nr, nc]:
                    continue
                nb = nr * w + nc
                ndist = d + STEP_W[k]
                if ndist < dist[nb]:
                    dist[nb] = ndist
                    parent[nb] = <int> cur
                    if STEP_W[k] == 1.0:
                        na[nb] = na[cur] + 1
                        nd[nb] = nd[cur]
                    else:
                        na[nb] = na[cur]
                        nd[nb] = nd[cur] + 1
                    heap_push(&heap, ndist, nb, nb)
    finally:
        heap_dealloc(&heap)

    return na_arr.reshape(h, w), nd_arr.reshape(h, w), parent_arr


cdef inline bint deletable(unsigned char* skel, Py_ssize_t idx, Py_ssize_t h, Py_ssize_t w) noexcept:
    cdef Py_ssize_t r = idx // w
    cdef Py_ssize_t c = idx % w
    cdef int[8] a
    cdef int nn = 0
    cdef Py_ssize_t k, nr, nc
    for k in range(8):
        nr = r + RING_DR[k]
        nc = c + RING_DC[k]
        if 0 <= nr < h and 0 <= nc < w and skel[nr * w + nc]:
            a[k] = 1
            nn += 1
        else:
            a[k] = 0
    if nn <= 1:
        return False
    cdef int cross = 0
    for k in range(0, 8, 2):
        if not a[k]:
            cross += 1 - (1 - a[(k + 1) % 8]) * (1 - a[(k + 2) % 8])
    return cross == 1


def thin_mask(const unsigned char[:, ::1] free, const double[:, ::1] clearance):
    """Clearance-ordered thinning to a unit-width ridge; see _pure.thin_mask."""
    cdef Py_ssize_t h = free.shape[0]
    cdef Py_ssize_t w = free.shape[1]
    cdef Py_ssize_t n = h * w

    out = np.empty((h, w), dtype=np.uint8)
    cdef unsigned char[:, ::1] out_mv = out
    cdef Py_ssize_t i, r, c
    for r in range(h):
        for c in range(w):
            out_mv[r, c] = 1 if free[r, c] else 0
    cdef unsigned char* skel = &out_mv[0, 0]

    cdef Heap heap
    heap.key = NULL
    heap.tie = NULL
    heap.val = NULL
    cdef double popk
    cdef long long popt, cur
    cdef Py_ssize_t nr, nc, nb, k

    try:
        heap_init(&heap, n + 16)
        for i in range(n):
            if skel[i]:
                heap_push(&heap, clearance[i // w, i % w], i, i)
        while heap.n > 0:
            heap_pop(&heap, &popk, &popt, &cur)
            if not skel[cur]:
                continue
            if deletable(skel, cur, h, w):
                skel[cur] = 0
                r = cur // w
                c = cur % w
                for k in range(8):
                    nr = r + STEP_DR[k]
                    nc = c + STEP_DC[k]
                    if 0 <= nr < h and 0 <= nc < w:
                        nb = nr * w + nc
                        if skel[nb]:
                            heap_push(&heap, clearance[nr, nc], nb, nb)
    finally:
        heap_dealloc(&heap)

    return out


def held_karp_route(const double[:, ::1] cost, pre):
    """Minimum-cost route over all sites with precedence; see _pure.held_karp_route."""
    cdef Py_ssize_t m = cost.shape[0] - 1
    if m == 0:
        return 0.0, np.empty(0, dtype=np.int32)
    if m > 20:
        raise ValueError("held_karp_route is capped at 20 sites")

    cdef long long full = (1 << m) - 1
    dp_arr = np.full((full + 1, m), np.inf)
    cdef double[:, ::1] dp = dp_arr
    cdef long long[::1] pre_mv = np.asarray(pre, dtype=np.int64)

    cdef Py_ssize_t i, j
    cdef long long mask, nm, bit
    cdef double v, best
    cdef bint any_finite

    for j in range(m):
        if pre_mv[j] == 0:
            dp[1 << j, j] = cost[0, j + 1]

    for mask in range(1, full + 1):
        any_finite = False
        for i in range(m):
            if dp[mask, i] < INFINITY:
                any_finite = True
                break
        if not any_finite:
            continue
        for j in range(m):
            bit = 1 << j
            if mask & bit or (pre_mv[j] & mask) != pre_mv[j]:
                continue
            v = INFINITY
            for i in range(m):
                if dp[mask, i] + cost[i + 1, j + 1] < v:
                    v = dp[mask, i] + cost[i + 1, j + 1]
            nm = mask | bit
            if v < dp[nm, j]:
                dp[nm, j] = v

    best = INFINITY
    cdef Py_ssize_t best_j = -1
    for j in range(m):
        v = dp[full, j] + cost[j + 1, 0]
        if v < best:
            best = v
            best_j = j
    if best_j < 0:
        return None

    order = [best_j]
    mask = full
    cdef Py_ssize_t curj = best_j
    cdef Py_ssize_t prev
    cdef long long pm
    cdef double target
    while mask != (1 << curj):
        pm = mask ^ (1 << curj)
        target = dp[mask, curj]
        prev = -1
        for i in range(m):
            if pm & (1 << i) and dp[pm, i] + cost[i + 1, curj + 1] == target:
                prev = i
                break
        order.append(prev)
        mask = pm
        curj = prev
    order.reverse()
    return float(best), np.array(order, dtype=np.int32)
