"""AOI anchoring, shortest paths, travel-time matrices, and the
graph-vs-grid planner benchmark.

Two routing backends produce travel-time matrices between sites:

* ``graph`` anchors every site to the skeleton and runs one Dijkstra tree
  per source over the skeleton cells (the tree is reused for all targets);
* ``grid`` runs an independent 8-connected A* over the free grid for every
  pair, which is what a naive grid planner would do.

Lengths are canonical: ``(n_axis + n_diag*sqrt2) * resolution``.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import ndimage

from tourkit import kernels
from tourkit.occupancy import FREE, OccupancyGrid
from tourkit.skeleton import SkeletonGraph

SQRT2 = math.sqrt(2.0)


class NoRouteError(RuntimeError):
    """No path exists between the requested sites."""


class UnanchorableError(RuntimeError):
    """An AOI pose cannot be connected to the skeleton."""


@dataclass(frozen=True)
class AOI:
    """A visitable pose with dwell time and popularity rank."""

    id: int
    x: float
    y: float
    heading: float
    dwell: float
    rank: int
    label: str = ""

    def __post_init__(self):
        if self.dwell <= 0:
            raise ValueError(f"AOI {self.id}: dwell_time must be > 0")
        if self.rank < 0:
            raise ValueError(f"AOI {self.id}: popularity_rank must be >= 0")


@dataclass(frozen=True)
class AnchoredSite:
    """An AOI (or the depot) tied to its closest line-of-sight skeleton cell."""

    site_id: int
    x: float
    y: float
    anchor: tuple[int, int]
    stub_length: float
    stub_cells: tuple[tuple[int, int], ...]


@dataclass(frozen=True, eq=False)
class TravelTimeMatrix:
    """Pairwise site travel times in seconds; index 0 is the depot."""

    times: np.ndarray
    speed: float
    backend: str

    def __post_init__(self):
        object.__setattr__(self, "times", np.ascontiguousarray(self.times, dtype=np.float64))
        self.times.setflags(write=False)

    @property
    def n(self):
        return self.times.shape[0]

    def has_unreachable(self):
        return bool(np.isinf(self.times).any())

    def validate(self, tol=1e-9):
        """Raise unless the matrix satisfies the metric axioms."""
        t = self.times
        n = self.n
        if t.shape != (n, n):
            raise ValueError("travel matrix must be square")
        if self.speed <= 0:
            raise ValueError("speed must be > 0")
        if np.isnan(t).any():
            raise ValueError("travel matrix contains NaN")
        if (np.diag(t) != 0).any():
            raise ValueError("travel matrix diagonal must be zero")
        if (t < 0).any():
            raise ValueError("travel times must be nonnegative")
        if not np.array_equal(t, t.T):
            raise ValueError("travel matrix must be symmetric")
        finite = np.isfinite(t)
        if finite.all():
            via = t[:, :, None] + t[None, :, :]  # via[i, k, j] = t_ik + t_kj
            if (t[:, None, :] > via.transpose(0, 2, 1) + tol).any():
                raise ValueError("travel matrix violates the triangle inequality")
        else:
            for k in range(n):
                via = t[:, k : k + 1] + t[k : k + 1, :]
                bad = t > via + tol
                if bad.any():
                    raise ValueError("travel matrix violates the triangle inequality")


@dataclass(frozen=True)
class RouteBenchReport:
    """Wall times of all-pairs matrix builds per backend and node count."""

    node_counts: tuple[int, ...]
    grid_s: tuple[float, ...]
    graph_s: tuple[float, ...]
    improvement_pct: tuple[float, ...]
    single_threaded: bool = True


# ---------------------------------------------------------------------------
# Line-of-sight tracing (supercover: every cell the segment touches)
# ---------------------------------------------------------------------------

def trace_cells(grid: OccupancyGrid, x0, y0, x1, y1):
    """Cells touched by the segment (x0,y0)-(x1,y1), in traversal order."""
    res = grid.resolution
    ox, oy = grid.origin
    fx0 = (x0 - ox) / res
    fy0 = (y0 - oy) / res
    fx1 = (x1 - ox) / res
    fy1 = (y1 - oy) / res
    c = int(math.floor(fx0))
    r = int(math.floor(fy0))
    c_end = int(math.floor(fx1))
    r_end = int(math.floor(fy1))
    cells = [(r, c)]
    dx = fx1 - fx0
    dy = fy1 - fy0
    sc = 1 if dx > 0 else -1
    sr = 1 if dy > 0 else -1
    inf = math.inf
    t_max_x = ((c + (sc > 0)) - fx0) / dx if dx != 0 else inf
    t_max_y = ((r + (sr > 0)) - fy0) / dy if dy != 0 else inf
    t_dx = abs(1.0 / dx) if dx != 0 else inf
    t_dy = abs(1.0 / dy) if dy != 0 else inf
    limit = 2 * (abs(c_end - c) + abs(r_end - r)) + 8
    steps = 0
    while (r, c) != (r_end, c_end) and steps < limit:
        steps += 1
        if t_max_x < t_max_y:
            c += sc
            t_max_x += t_dx
        elif t_max_y < t_max_x:
            r += sr
            t_max_y += t_dy
        else:
            # Exact corner: include both side cells, then step diagonally.
            cells.append((r, c + sc))
            cells.append((r + sr, c))
            c += sc
            r += sr
            t_max_x += t_dx
            t_max_y += t_dy
        cells.append((r, c))
    return cells


def line_of_sight(grid: OccupancyGrid, x0, y0, x1, y1):
    cells = trace_cells(grid, x0, y0, x1, y1)
    g = grid.cells
    h, w = g.shape
    for r, c in cells:
        if not (0 <= r < h and 0 <= c < w) or g[r, c] != FREE:
            return None
    return cells


# ---------------------------------------------------------------------------
# Anchoring
# ---------------------------------------------------------------------------

def anchor_point(graph: SkeletonGraph, grid: OccupancyGrid, x, y, site_id=-1) -> AnchoredSite:
    """Anchor an arbitrary pose to the skeleton (depot or AOI)."""
    row, col = grid.world_to_cell(x, y)
    if not grid.contains(row, col) or grid.cells[row, col] != FREE:
        raise UnanchorableError(
            f"site {site_id}: pose ({x:.3f}, {y:.3f}) is not on a free cell"
        )
    mask = graph.mask
    if mask[row, col]:
        return AnchoredSite(site_id, x, y, (row, col), 0.0, ((row, col),))

    cells = np.argwhere(mask != 0)
    if len(cells) == 0:
        raise UnanchorableError(f"site {site_id}: unanchorable AOI (empty skeleton)")
    ox, oy = grid.origin
    cx = ox + (cells[:, 1] + 0.5) * grid.resolution
    cy = oy + (cells[:, 0] + 0.5) * grid.resolution
    dist = np.hypot(cx - x, cy - y)
    flat = cells[:, 0] * grid.width + cells[:, 1]
    order = np.lexsort((flat, dist))
    for k in order.tolist():
        r, c = int(cells[k, 0]), int(cells[k, 1])
        stub = line_of_sight(grid, x, y, *grid.cell_center(r, c))
        if stub is not None:
            return AnchoredSite(site_id, x, y, (r, c), float(dist[k]), tuple(stub))
    raise UnanchorableError(f"site {site_id}: unanchorable AOI (no line of sight)")


def anchor_aoi(graph: SkeletonGraph, grid: OccupancyGrid, aoi: AOI) -> AnchoredSite:
    return anchor_point(graph, grid, aoi.x, aoi.y, site_id=aoi.id)


# ---------------------------------------------------------------------------
# Shortest paths
# ---------------------------------------------------------------------------

def _walk_parents(parent, target_flat, width):
    path = []
    cur = target_flat
    while cur >= 0:
        path.append((cur // width, cur % width))
        cur = int(parent[cur])
    path.reverse()
    return path


def graph_shortest_path(graph: SkeletonGraph, a: AnchoredSite, b: AnchoredSite):
    """Shortest route along the skeleton between two anchored sites.

    Returns (polyline cells, length in meters); length includes both
    connector stubs.
    """
    if a == b:
        return [a.anchor], 0.0
    res = graph.resolution
    na, nd, parent = kernels.dijkstra_mask(graph.mask, a.anchor)
    tr, tc = b.anchor
    if na[tr, tc] < 0:
        raise NoRouteError(f"no route between sites {a.site_id} and {b.site_id}")
    skel_len = (int(na[tr, tc]) + int(nd[tr, tc]) * SQRT2) * res
    cell_path = _walk_parents(parent, tr * graph.mask.shape[1] + tc, graph.mask.shape[1])
    poly = list(a.stub_cells) + cell_path[1:]
    back = list(reversed(b.stub_cells))
    if back and poly and back[0] == poly[-1]:
        back = back[1:]
    poly += back
    return poly, a.stub_length + skel_len + b.stub_length


def grid_astar(grid: OccupancyGrid, start, goal):
    """Optimal 8-connected grid path between two world poses.

    Returns (cell path, length in meters). Raises NoRouteError when the
    goal is unreachable.
    """
    sr, sc = grid.world_to_cell(start[0], start[1])
    gr, gc = grid.world_to_cell(goal[0], goal[1])
    for name, (r, c) in (("start", (sr, sc)), ("goal", (gr, gc))):
        if not grid.contains(r, c) or grid.cells[r, c] != FREE:
            raise ValueError(f"{name} pose is not on a free cell")
    free = (grid.cells == FREE).astype(np.uint8)
    result = kernels.astar_grid(free, (sr, sc), (gr, gc))
    if result is None:
        raise NoRouteError("no route")
    n_axis, n_diag, flat = result
    w = grid.width
    path = [(int(p) // w, int(p) % w) for p in flat.tolist()]
    return path, (n_axis + n_diag * SQRT2) * grid.resolution


# ---------------------------------------------------------------------------
# Travel-time matrices
# ---------------------------------------------------------------------------

GRAPH_BACKEND = "graph"
GRID_BACKEND = "grid"


def build_travel_matrix(
    graph: SkeletonGraph,
    grid: OccupancyGrid,
    aois,
    depot,
    speed=0.5,
    backend=GRAPH_BACKEND,
) -> TravelTimeMatrix:
    """All-pairs travel times over [depot] + aois, in seconds.

    Unreachable pairs become +inf. The graph backend reuses one Dijkstra
    tree per source; the grid backend runs an independent A* per pair.
    """
    if speed <= 0:
        raise ValueError("speed must be > 0")
    poses = [(depot[0], depot[1])] + [(a.x, a.y) for a in aois]
    n = len(poses)
    lengths = np.zeros((n, n))

    if backend == GRAPH_BACKEND:
        anchors = [anchor_point(graph, grid, x, y, site_id=i - 1) for i, (x, y) in enumerate(poses)]
        res = graph.resolution
        for i in range(n - 1):
            na, nd, _parent = kernels.dijkstra_mask(graph.mask, anchors[i].anchor)
            for j in range(i + 1, n):
                tr, tc = anchors[j].anchor
                if na[tr, tc] < 0:
                    d = math.inf
                else:
                    d = (
                        anchors[i].stub_length
                        + (int(na[tr, tc]) + int(nd[tr, tc]) * SQRT2) * res
                        + anchors[j].stub_length
                    )
                lengths[i, j] = lengths[j, i] = d
    elif backend == GRID_BACKEND:
        free = (grid.cells == FREE).astype(np.uint8)
        cells = [grid.world_to_cell(x, y) for x, y in poses]
        for r, c in cells:
            if not grid.contains(r, c) or grid.cells[r, c] != FREE:
                raise ValueError("site pose is not on a free cell")
        for i in range(n - 1):
            for j in range(i + 1, n):
                result = kernels.astar_grid(free, cells[i], cells[j])
                if result is None:
                    d = math.inf
                else:
                    n_axis, n_diag, _path = result
                    d = (n_axis + n_diag * SQRT2) * grid.resolution
                lengths[i, j] = lengths[j, i] = d
    else:
        raise ValueError(f"unknown backend {backend!r}")

    return TravelTimeMatrix(times=lengths / speed, speed=speed, backend=backend)


def bench_matrix_runtimes(
    grid: OccupancyGrid,
    graph: SkeletonGraph,
    depot,
    node_counts=(20, 30, 40, 50),
    seed=0,
    speed=0.5,
    dwell=30.0,
) -> RouteBenchReport:
    """Time graph-backend vs grid-backend matrix builds over random sites.

    Sites are sampled uniformly from anchorable free cells in the depot's
    connected component; the timed sections run single-threaded.
    """
    rng = np.random.default_rng(seed)
    free = grid.free_mask()
    labels, _ = ndimage.label(free, structure=np.ones((3, 3), dtype=np.uint8))
    dr, dc = grid.world_to_cell(depot[0], depot[1])
    if not free[dr, dc]:
        raise ValueError("depot is not on a free cell")
    eligible = np.flatnonzero((labels == labels[dr, dc]).ravel())

    grid_s = []
    graph_s = []
    improvement = []
    for count in node_counts:
        aois = []
        while len(aois) < count:
            idx = int(eligible[int(rng.integers(0, len(eligible)))])
            r, c = idx // grid.width, idx % grid.width
            x, y = grid.cell_center(r, c)
            try:
                anchor_point(graph, grid, x, y)
            except UnanchorableError:
                continue
            aois.append(AOI(id=len(aois), x=x, y=y, heading=0.0, dwell=dwell, rank=len(aois)))
        t0 = time.perf_counter()
        build_travel_matrix(graph, grid, aois, depot, speed=speed, backend=GRAPH_BACKEND)
        t1 = time.perf_counter()
        build_travel_matrix(graph, grid, aois, depot, speed=speed, backend=GRID_BACKEND)
        t2 = time.perf_counter()
        graph_s.append(t1 - t0)
        grid_s.append(t2 - t1)
        improvement.append(100.0 * ((t2 - t1) - (t1 - t0)) / (t2 - t1))
    return RouteBenchReport(
        node_counts=tuple(node_counts),
        grid_s=tuple(grid_s),
        graph_s=tuple(graph_s),
        improvement_pct=tuple(improvement),
    )


# ---------------------------------------------------------------------------
# Plain-text I/O
# ---------------------------------------------------------------------------

def write_aois(path, aois):
    lines = ["# id, x_m, y_m, heading_rad, dwell_s, popularity_rank, label"]
    for a in aois:
        lines.append(
            f"{a.id}, {a.x:.6f}, {a.y:.6f}, {a.heading:.6f}, {a.dwell:.6f}, {a.rank}, {a.label}"
        )
    Path(path).write_text("\n".join(lines) + "\n")


def read_aois(path):
    aois = []
    for raw in Path(path).read_text().splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = [p.strip() for p in line.split(",")]
        if len(parts) < 6:
            raise ValueError(f"bad AOI record: {raw!r}")
        label = parts[6] if len(parts) > 6 else ""
        aois.append(
            AOI(
                id=int(parts[0]),
                x=float(parts[1]),
                y=float(parts[2]),
                heading=float(parts[3]),
                dwell=float(parts[4]),
                rank=int(parts[5]),
                label=label,
            )
        )
    ranks = sorted(a.rank for a in aois)
    if ranks != list(range(len(aois))):
        raise ValueError("popularity ranks must be a permutation of 0..N-1")
    return aois


def write_matrix(path, ttm: TravelTimeMatrix):
    lines = [f"# backend {ttm.backend} speed {ttm.speed:.6f} n {ttm.n}"]
    for row in ttm.times:
        lines.append(",".join(format(v, ".9g") for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


def read_matrix(path) -> TravelTimeMatrix:
    text = Path(path).read_text().splitlines()
    if not text or not text[0].startswith("#"):
        raise ValueError("matrix file is missing its header line")
    header = text[0].lstrip("# ").split()
    fields = dict(zip(header[::2], header[1::2]))
    rows = [
        [float(v) for v in line.split(",")]
        for line in text[1:]
        if line.strip() and not line.startswith("#")
    ]
    times = np.array(rows)
    return TravelTimeMatrix(
        times=times,
        speed=float(fields.get("speed", 0.5)),
        backend=fields.get("backend", GRAPH_BACKEND),
    )


def write_bench_report(path, report: RouteBenchReport):
    lines = ["# timing single-threaded", "nodes,grid_s,graph_s,improvement_pct"]
    for k, n in enumerate(report.node_counts):
        lines.append(
            f"{n},{report.grid_s[k]:.6f},{report.graph_s[k]:.6f},{report.improvement_pct[k]:.3f}"
        )
    Path(path).write_text("\n".join(lines) + "\n")
