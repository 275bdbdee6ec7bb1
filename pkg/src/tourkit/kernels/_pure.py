"""Hot-path search kernels, pure-Python lane.

``tourkit.kernels`` prefers the compiled build of these routines
(``tourkit.kernels._native``) and falls back to this module when the
extension is unavailable. Both lanes implement the same algorithms with
the same scan order and tie-breaking, so they return bit-identical
results; the test suite asserts this.

All routines work in cell units: an axis step costs 1.0 and a diagonal
step costs sqrt(2). Callers convert to meters via the grid resolution.
"""

import math
from heapq import heapify, heappop, heappush

import numpy as np

SQRT2 = math.sqrt(2.0)

# Neighbor scan order is part of the kernel contract: both lanes relax
# neighbors in exactly this order so tie-breaking matches.
_STEPS = (
    (-1, -1, SQRT2),
    (-1, 0, 1.0),
    (-1, 1, SQRT2),
    (0, -1, 1.0),
    (0, 1, 1.0),
    (1, -1, SQRT2),
    (1, 0, 1.0),
    (1, 1, SQRT2),
)

# 8-neighborhood ring in circular order (N, NE, E, SE, S, SW, W, NW); the
# crossing-number test below walks it pairwise.
_RING = ((-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1), (0, -1), (-1, -1))


def astar_grid(free, start, goal):
    """Optimal 8-connected path between two cells of a boolean grid.

    ``free`` is a (H, W) uint8/bool array, nonzero = traversable. Returns
    ``(n_axis, n_diag, path)`` with ``path`` as flat int64 cell indices
    from start to goal inclusive, or ``None`` when no path exists.
    """
    h, w = free.shape
    sr, sc = start
    gr, gc = goal
    cells = free.ravel().tolist()
    s = sr * w + sc
    g_ = gr * w + gc
    if not cells[s] or not cells[g_]:
        return None
    if s == g_:
        return 0, 0, np.array([s], dtype=np.int64)

    inf = math.inf
    gdist = [inf] * (h * w)
    parent = [-1] * (h * w)
    closed = bytearray(h * w)
    gdist[s] = 0.0
    h0 = math.sqrt(float((sr - gr) * (sr - gr) + (sc - gc) * (sc - gc)))
    heap = [(h0, 0, s)]
    counter = 1
    found = False
    while heap:
        _, _, cur = heappop(heap)
        if closed[cur]:
            continue
        closed[cur] = 1
        if cur == g_:
            found = True
            break
        r, c = divmod(cur, w)
        gcur = gdist[cur]
        for dr, dc, wt in _STEPS:
            nr = r + dr
            nc = c + dc
            if nr < 0 or nr >= h or nc < 0 or nc >= w:
                continue
            nb = nr * w + nc
            if closed[nb] or not cells[nb]:
                continue
            ng = gcur + wt
            if ng < gdist[nb]:
                gdist[nb] = ng
                parent[nb] = cur
                hn = math.sqrt(float((nr - gr) * (nr - gr) + (nc - gc) * (nc - gc)))
                heappush(heap, (ng + hn, counter, nb))
                counter += 1
    if not found:
        return None

    path = []
    cur = g_
    while cur != -1:
        path.append(cur)
        cur = parent[cur]
    path.reverse()
    n_axis = 0
    n_diag = 0
    for k in range(1, len(path)):
        a, b = path[k - 1], path[k]
        if abs(a // w - b // w) + abs(a % w - b % w) == 2:
            n_diag += 1
        else:
            n_axis += 1
    return n_axis, n_diag, np.array(path, dtype=np.int64)


def dijkstra_mask(mask, source):
    """Single-source shortest paths over the nonzero cells of a mask.

    Returns ``(n_axis, n_diag, parent)``: int32 (H, W) step-count arrays
    (-1 where unreached) and flat int32 parent indices (-1 at the source
    and at unreached cells). The canonical distance of a reached cell is
    ``n_axis + n_diag * sqrt(2)`` in cell units.
    """
    h, w = mask.shape
    cells = mask.ravel().tolist()
    sr, sc = source
    s = sr * w + sc
    if not cells[s]:
        raise ValueError("dijkstra source cell is outside the mask")

    inf = math.inf
    dist = [inf] * (h * w)
    na = [-1] * (h * w)
    nd = [-1] * (h * w)
    parent = [-1] * (h * w)
    dist[s] = 0.0
    na[s] = 0
    nd[s] = 0
    heap = [(0.0, s)]
    while heap:
        d, cur = heappop(heap)
        if d > dist[cur]:
            continue
        r, c = divmod(cur, w)
        for dr, dc, wt in _STEPS:
            nr = r + dr
            nc = c + dc
            if nr < 0 or nr >= h or nc < 0 or nc >= w:
                continue
            nb = nr * w + nc
            if not cells[nb]:
                continue
            ndist = d + wt
            if ndist < dist[nb]:
                dist[nb] = ndist
                parent[nb] = cur
                if wt == 1.0:
                    na[nb] = na[cur] + 1
                    nd[nb] = nd[cur]
                else:
                    na[nb] = na[cur]
                    nd[nb] = nd[cur] + 1
                heappush(heap, (ndist, nb))

    na_arr = np.array(na, dtype=np.int32).reshape(h, w)
    nd_arr = np.array(nd, dtype=np.int32).reshape(h, w)
    parent_arr = np.array(parent, dtype=np.int32)
    return na_arr, nd_arr, parent_arr


def _deletable(skel, idx, h, w):
    # A cell may be removed when its deletion keeps the local foreground
    # 8-connected (crossing number 1) and it is not a chain endpoint.
    r, c = divmod(idx, w)
    a = []
    nn = 0
    for dr, dc in _RING:
        nr = r + dr
        nc = c + dc
        v = 1 if (0 <= nr < h and 0 <= nc < w and skel[nr * w + nc]) else 0
        a.append(v)
        nn += v
    if nn <= 1:
        return False
    cross = 0
    for k in (0, 2, 4, 6):
        if not a[k]:
            cross += 1 - (1 - a[(k + 1) % 8]) * (1 - a[(k + 2) % 8])
    return cross == 1


def thin_mask(free, clearance):
    """Clearance-ordered thinning of a free-space mask to a unit-width ridge.

    Cells are deleted in increasing (clearance, index) order whenever the
    deletion preserves 8-connectivity and the cell is not an endpoint, so
    survivors trace the high-clearance ridge of each free component.
    Returns a uint8 (H, W) skeleton mask.
    """
    h, w = free.shape
    skel = bytearray(1 if v else 0 for v in free.ravel().tolist())
    clr = clearance.ravel().tolist()
    heap = [(clr[idx], idx) for idx in range(h * w) if skel[idx]]
    heapify(heap)
    while heap:
        _, idx = heappop(heap)
        if not skel[idx]:
            continue
        if _deletable(skel, idx, h, w):
            skel[idx] = 0
            r, c = divmod(idx, w)
            for dr, dc, _ in _STEPS:
                nr = r + dr
                nc = c + dc
                if 0 <= nr < h and 0 <= nc < w:
                    nb = nr * w + nc
                    if skel[nb]:
                        heappush(heap, (clr[nb], nb))
    return np.frombuffer(bytes(skel), dtype=np.uint8).reshape(h, w).copy()


def held_karp_route(cost, pre):
    """Minimum-cost depot-anchored route visiting every site exactly once.

    ``cost`` is a (m+1, m+1) float64 matrix with the depot at row/col 0;
    ``pre[j]`` is a bitmask of sites that must be visited before site j.
    Returns ``(travel_cost, order)`` with ``order`` as 0-based int32 site
    positions (depot excluded). Subset DP, capped at 20 sites.
    """
    m = cost.shape[0] - 1
    if m == 0:
        return 0.0, np.empty(0, dtype=np.int32)
    if m > 20:
        raise ValueError("held_karp_route is capped at 20 sites")

    full = (1 << m) - 1
    dp = np.full((full + 1, m), np.inf)
    inner = np.ascontiguousarray(cost[1:, 1:])
    pre = [int(p) for p in pre]
    for j in range(m):
        if pre[j] == 0:
            dp[1 << j, j] = cost[0, j + 1]
    for mask in range(1, full + 1):
        row = dp[mask]
        if not np.isfinite(row).any():
            continue
        ext = np.min(row[:, None] + inner, axis=0)
        for j in range(m):
            bit = 1 << j
            if mask & bit or (pre[j] & mask) != pre[j]:
                continue
            nm = mask | bit
            if ext[j] < dp[nm, j]:
                dp[nm, j] = ext[j]

    best = math.inf
    best_j = -1
    for j in range(m):
        v = dp[full, j] + cost[j + 1, 0]
        if v < best:
            best = v
            best_j = j
    if best_j < 0:
        return None

    order = [best_j]
    mask = full
    cur = best_j
    while mask != (1 << cur):
        pm = mask ^ (1 << cur)
        target = dp[mask, cur]
        prev = -1
        for i in range(m):
            if pm & (1 << i) and dp[pm, i] + inner[i, cur] == target:
                prev = i
                break
        order.append(prev)
        mask = pm
        cur = prev
    order.reverse()
    return float(best), np.array(order, dtype=np.int32)
