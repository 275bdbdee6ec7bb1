"""Free-space skeletonization and its topological graph.

The skeleton is the clearance-ridge of the free space, thinned to unit
width (see ``tourkit.kernels.thin_mask``). Cells of skeleton-degree 1 are
places (destinations), cells of degree >= 3 are decision points, and
maximal degree-2 chains between them become pathway edges carrying their
cell polyline.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from tourkit import kernels
from tourkit.occupancy import ClearanceField, OccupancyGrid

SQRT2 = math.sqrt(2.0)

PLACE = "place"
DECISION_POINT = "decision"

_NEIGH = ((-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1))
_DEG_KERNEL = np.array([[1, 1, 1], [1, 0, 1], [1, 1, 1]], dtype=np.uint8)
_EIGHT = np.ones((3, 3), dtype=np.uint8)


@dataclass(frozen=True)
class SkeletonNode:
    id: int
    cell: tuple[int, int]
    x: float
    y: float
    clearance: float
    kind: str
    degree: int
    component: int
    artificial: bool = False


@dataclass(frozen=True)
class SkeletonEdge:
    id: int
    node_a: int
    node_b: int
    polyline: tuple[tuple[int, int], ...]
    length: float
    n_axis: int
    n_diag: int


@dataclass(frozen=True, eq=False)
class SkeletonGraph:
    """Sparse pathway graph plus the skeleton cell mask it was built from."""

    resolution: float
    origin: tuple[float, float]
    nodes: tuple[SkeletonNode, ...]
    edges: tuple[SkeletonEdge, ...]
    mask: np.ndarray
    adjacency: dict[int, list[tuple[int, int]]] = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "mask", np.ascontiguousarray(self.mask, dtype=np.uint8))
        self.mask.setflags(write=False)
        adj: dict[int, list[tuple[int, int]]] = {n.id: [] for n in self.nodes}
        for e in self.edges:
            adj[e.node_a].append((e.node_b, e.id))
            if e.node_b != e.node_a:
                adj[e.node_b].append((e.node_a, e.id))
        object.__setattr__(self, "adjacency", adj)

    @property
    def n_places(self):
        return sum(1 for n in self.nodes if n.kind == PLACE)

    @property
    def n_decision_points(self):
        return sum(1 for n in self.nodes if n.kind == DECISION_POINT)


def skeleton_degrees(mask: np.ndarray) -> np.ndarray:
    """8-neighbor degree of every cell, restricted to the mask."""
    m = (np.asarray(mask) != 0).astype(np.uint8)
    deg = ndimage.convolve(m, _DEG_KERNEL, mode="constant", cval=0)
    deg[m == 0] = 0
    return deg.astype(np.int32)


def step_length(a: tuple[int, int], b: tuple[int, int], resolution: float) -> float:
    if abs(a[0] - b[0]) + abs(a[1] - b[1]) == 2:
        return resolution * SQRT2
    return resolution


def polyline_length(cells, resolution: float) -> float:
    """Canonical polyline length: (n_axis + n_diag*sqrt2) * resolution."""
    n_axis = 0
    n_diag = 0
    for k in range(1, len(cells)):
        if abs(cells[k - 1][0] - cells[k][0]) + abs(cells[k - 1][1] - cells[k][1]) == 2:
            n_diag += 1
        else:
            n_axis += 1
    return (n_axis + n_diag * SQRT2) * resolution


# ---------------------------------------------------------------------------
# Extraction and pruning
# ---------------------------------------------------------------------------

def extract_skeleton(grid: OccupancyGrid, clearance: ClearanceField) -> np.ndarray:
    """Thin the free space to a one-cell-wide, 8-connected ridge mask.

    Every free connected component keeps at least one skeleton cell, so
    connectivity of the free space is preserved component for component.
    """
    if grid.cells.shape != clearance.meters.shape:
        raise ValueError("clearance field shape does not match the grid")
    free = grid.free_mask().astype(np.uint8)
    if not free.any():
        return np.zeros_like(free)
    return kernels.thin_mask(free, clearance.meters)


def prune_skeleton(
    skeleton: np.ndarray,
    clearance: ClearanceField,
    min_branch_length: float,
    min_clearance: float,
) -> np.ndarray:
    """Iteratively remove leaf branches that are short or end near walls.

    A leaf branch is dropped when its tip-to-junction length is below
    ``min_branch_length`` or its tip clearance is below ``min_clearance``.
    Only spurs are removed, so connectivity among surviving cells is
    unchanged; a pure-path component below threshold disappears entirely.
    """
    skel = (np.asarray(skeleton) != 0).astype(np.uint8)
    h, w = skel.shape
    clr = clearance.meters
    res = clearance.resolution

    while True:
        deg = skeleton_degrees(skel)
        leaves = np.flatnonzero((skel.ravel() != 0) & (deg.ravel() <= 1))
        to_remove: set[tuple[int, int]] = set()
        for leaf in leaves.tolist():
            tip = (leaf // w, leaf % w)
            branch = [tip]
            length = 0.0
            prev = None
            cur = tip
            # Walk away from the tip through degree-2 cells. The walk ends
            # at a junction (excluded from the branch) or at the far leaf
            # of a pure-path component (included).
            while deg[cur] <= 2:
                nxt = None
                for dr, dc in _NEIGH:
                    nr, nc = cur[0] + dr, cur[1] + dc
                    if 0 <= nr < h and 0 <= nc < w and skel[nr, nc] and (nr, nc) != prev:
                        nxt = (nr, nc)
                        break
                if nxt is None:
                    break
                length += step_length(cur, nxt, res)
                if deg[nxt] >= 3:
                    break
                branch.append(nxt)
                if deg[nxt] <= 1:
                    break
                prev, cur = cur, nxt
            if length < min_branch_length or float(clr[tip]) < min_clearance:
                to_remove.update(branch)
        if not to_remove:
            break
        for cell in to_remove:
            skel[cell] = 0
    return skel


# ---------------------------------------------------------------------------
# Topology
# ---------------------------------------------------------------------------

def _chain_walk(skel, node_set, start, first, w, h):
    """Follow a degree-2 chain from node cell `start` through `first`.

    Stops at the first node cell reached (which may be `start` again for
    a self-loop chain).
    """
    poly = [start, first]
    prev, cur = start, first
    while cur not in node_set:
        nxt = None
        for dr, dc in _NEIGH:
            nr, nc = cur[0] + dr, cur[1] + dc
            if 0 <= nr < h and 0 <= nc < w and skel[nr, nc] and (nr, nc) != prev:
                nxt = (nr, nc)
                break
        if nxt is None:  # broken chain; treat cur as terminal
            break
        poly.append(nxt)
        prev, cur = cur, nxt
    return poly


def _cluster_path(members: set, rep, attach):
    """Deterministic shortest cell path from rep to attach inside a cluster."""
    if rep == attach:
        return [rep]
    parent = {rep: None}
    frontier = [rep]
    while frontier:
        nxt_frontier = []
        for cur in frontier:
            for dr, dc in _NEIGH:
                nb = (cur[0] + dr, cur[1] + dc)
                if nb in members and nb not in parent:
                    parent[nb] = cur
                    if nb == attach:
                        path = [nb]
                        while parent[path[-1]] is not None:
                            path.append(parent[path[-1]])
                        path.reverse()
                        return path
                    nxt_frontier.append(nb)
        frontier = nxt_frontier
    raise RuntimeError("attach cell not in cluster")  # clusters are connected


def _poly_steps(poly):
    n_axis = 0
    n_diag = 0
    for k in range(1, len(poly)):
        if abs(poly[k - 1][0] - poly[k][0]) + abs(poly[k - 1][1] - poly[k][1]) == 2:
            n_diag += 1
        else:
            n_axis += 1
    return n_axis, n_diag


def build_topology(
    skeleton: np.ndarray,
    clearance: ClearanceField,
    resolution: float,
    origin: tuple[float, float] = (0.0, 0.0),
) -> SkeletonGraph:
    """Collapse a skeleton mask into nodes and polyline edges.

    Cells of skeleton-degree != 2 are node cells; mutually adjacent node
    cells (the unavoidable thick spots of 8-connected crossings) are
    contracted into a single node anchored at their smallest cell, and
    edge polylines are routed through the cluster so lengths stay
    consistent. A component with no degree!=2 cell (a pure cycle) gets
    one artificial decision point at its smallest cell. Residual
    degree-2 nodes are spliced into through-edges; clusters with no
    incident pathway (isolated specks) are left out of the graph.
    """
    skel = (np.asarray(skeleton) != 0).astype(np.uint8)
    h, w = skel.shape
    if not skel.any():
        return SkeletonGraph(resolution, origin, (), (), skel)

    deg = skeleton_degrees(skel)
    comp, _ = ndimage.label(skel, structure=_EIGHT)

    node_flags = (skel != 0) & (deg != 2)
    # Components made only of degree-2 cells are pure cycles: anchor one node.
    cycle_comps = np.setdiff1d(np.unique(comp[skel != 0]), np.unique(comp[node_flags]))
    artificial_cells = set()
    for label in cycle_comps.tolist():
        anchor = int(np.flatnonzero((comp == label).ravel())[0])
        node_flags[anchor // w, anchor % w] = True
        artificial_cells.add((anchor // w, anchor % w))

    # Contract adjacent node cells into clusters.
    cluster_lab, n_clusters = ndimage.label(node_flags, structure=_EIGHT)
    members: dict[int, set] = {k: set() for k in range(1, n_clusters + 1)}
    for r, c in np.argwhere(node_flags).tolist():
        members[int(cluster_lab[r, c])].add((r, c))
    rep = {k: min(cells) for k, cells in members.items()}
    node_set = set().union(*members.values()) if members else set()

    # Walk chains leaving every node cell; keep inter-cluster chains and
    # genuine loops (chains with interior cells).
    raw_edges = []
    seen = set()
    for cell in sorted(node_set):
        for dr, dc in _NEIGH:
            nr, nc = cell[0] + dr, cell[1] + dc
            if not (0 <= nr < h and 0 <= nc < w) or not skel[nr, nc]:
                continue
            if (nr, nc) in node_set:
                continue  # intra-cluster adjacency, not a pathway
            poly = _chain_walk(skel, node_set, cell, (nr, nc), w, h)
            if poly[-1] not in node_set:
                continue  # broken chain; no terminal node
            canon = min(tuple(poly), tuple(reversed(poly)))
            if canon in seen:
                continue
            seen.add(canon)
            ka = int(cluster_lab[canon[0]])
            kb = int(cluster_lab[canon[-1]])
            pa = _cluster_path(members[ka], rep[ka], canon[0])
            pb = _cluster_path(members[kb], rep[kb], canon[-1])
            full = pa + list(canon[1:-1]) + list(reversed(pb))
            raw_edges.append([ka, kb, tuple(full)])

    # Splice out degree-2 clusters (two distinct non-loop incidences).
    incident: dict[int, list] = {k: [] for k in members}
    for e in raw_edges:
        incident[e[0]].append(e)
        if e[1] != e[0]:
            incident[e[1]].append(e)
    changed = True
    while changed:
        changed = False
        for k in sorted(members):
            inc = [e for e in incident[k] if e[2] is not None]
            if len(inc) != 2 or inc[0][0] == inc[0][1] or inc[1][0] == inc[1][1]:
                continue
            e1, e2 = inc
            p1 = list(e1[2]) if e1[1] == k else list(reversed(e1[2]))  # ends at k's rep
            p2 = list(e2[2]) if e2[0] == k else list(reversed(e2[2]))  # starts at k's rep
            other1 = e1[0] if e1[1] == k else e1[1]
            other2 = e2[1] if e2[0] == k else e2[0]
            merged = [other1, other2, tuple(p1 + p2[1:])]
            e1[2] = None
            e2[2] = None
            incident[k] = []
            for kk in {other1, other2}:
                incident[kk] = [e for e in incident[kk] if e[2] is not None]
            incident[other1].append(merged)
            if other2 != other1:
                incident[other2].append(merged)
            raw_edges.append(merged)
            changed = True
    final_edges = [e for e in raw_edges if e[2] is not None]

    # Keep clusters with at least one incident pathway.
    degree = {k: 0 for k in members}
    for ka, kb, _poly in final_edges:
        degree[ka] += 1
        degree[kb] += 1  # self-loops count twice
    live = [k for k in sorted(members, key=lambda k: rep[k]) if degree[k] > 0]
    node_id = {k: i for i, k in enumerate(live)}

    ox, oy = origin
    node_objs = []
    for k in live:
        cell = rep[k]
        d = degree[k]
        artificial = bool(members[k] & artificial_cells)
        kind = PLACE if d == 1 else DECISION_POINT
        node_objs.append(
            SkeletonNode(
                id=node_id[k],
                cell=cell,
                x=ox + (cell[1] + 0.5) * resolution,
                y=oy + (cell[0] + 0.5) * resolution,
                clearance=float(clearance.meters[cell]),
                kind=kind,
                degree=d,
                component=int(comp[cell]),
                artificial=artificial,
            )
        )

    staged = []
    for ka, kb, poly in final_edges:
        a, b = node_id[ka], node_id[kb]
        if poly[0] != rep[ka]:  # orient polyline from node_a's rep
            a, b = node_id[kb], node_id[ka]
        if a > b or (a == b and tuple(reversed(poly)) < poly):
            a, b = b, a
            poly = tuple(reversed(poly))
        n_axis, n_diag = _poly_steps(poly)
        staged.append((a, b, poly, (n_axis + n_diag * SQRT2) * resolution, n_axis, n_diag))
    staged.sort(key=lambda e: (e[0], e[1], e[3], e[2]))

    edge_objs = tuple(
        SkeletonEdge(
            id=i, node_a=a, node_b=b, polyline=poly, length=length, n_axis=na, n_diag=nd
        )
        for i, (a, b, poly, length, na, nd) in enumerate(staged)
    )
    return SkeletonGraph(resolution, origin, tuple(node_objs), edge_objs, skel)


# ---------------------------------------------------------------------------
# Graph dump (bit-stable plain text)
# ---------------------------------------------------------------------------

def graph_dump(graph: SkeletonGraph) -> str:
    lines = [
        "# skeleton graph",
        f"# resolution {graph.resolution:.6f}",
        f"# nodes {len(graph.nodes)} edges {len(graph.edges)}",
    ]
    for n in graph.nodes:
        lines.append(f"node {n.id} {n.x:.6f} {n.y:.6f} {n.kind} {n.clearance:.6f}")
    for e in graph.edges:
        lines.append(f"edge {e.node_a} {e.node_b} {e.length:.6f} {len(e.polyline)}")
    return "\n".join(lines) + "\n"


def write_graph_dump(path, graph: SkeletonGraph):
    from pathlib import Path

    Path(path).write_text(graph_dump(graph))
