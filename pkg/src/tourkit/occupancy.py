"""Occupancy grids: graymap I/O, footprint inflation, obstacle clearance.

Conventions used throughout the package:

* cells are addressed (row, col); image row 0 is grid row 0 (no flip);
* the world position of a cell center is
  ``(origin_x + (col + 0.5) * resolution, origin_y + (row + 0.5) * resolution)``;
* unknown space is treated as an obstacle everywhere downstream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import ndimage

FREE = 0
OCCUPIED = 1
UNKNOWN = 2

STATE_NAMES = {FREE: "free", OCCUPIED: "occupied", UNKNOWN: "unknown"}


class MapFormatError(ValueError):
    """Malformed map image or metadata."""


@dataclass(frozen=True)
class MapMetadata:
    """Sidecar record describing how to interpret a graymap."""

    resolution: float
    origin_x: float = 0.0
    origin_y: float = 0.0
    free_thresh: float = 0.196
    occupied_thresh: float = 0.65
    negate: int = 0

    def __post_init__(self):
        if self.resolution <= 0:
            raise MapFormatError(f"resolution must be > 0, got {self.resolution}")
        if not (0.0 <= self.free_thresh < self.occupied_thresh <= 1.0):
            raise MapFormatError(
                "thresholds must satisfy 0 <= free_thresh < occupied_thresh <= 1, "
                f"got {self.free_thresh}, {self.occupied_thresh}"
            )
        if self.negate not in (0, 1):
            raise MapFormatError(f"negate must be 0 or 1, got {self.negate}")


@dataclass(frozen=True, eq=False)
class OccupancyGrid:
    """Tri-state cell raster with metric resolution.

    ``cells`` is a (height, width) uint8 array of FREE/OCCUPIED/UNKNOWN.
    """

    resolution: float
    origin: tuple[float, float]
    cells: np.ndarray

    def __post_init__(self):
        if self.resolution <= 0:
            raise ValueError("resolution must be > 0")
        if self.cells.ndim != 2 or self.cells.size == 0:
            raise ValueError("cells must be a nonempty 2-D array")
        if not np.isin(self.cells, (FREE, OCCUPIED, UNKNOWN)).all():
            raise ValueError("cells must contain only FREE/OCCUPIED/UNKNOWN")
        object.__setattr__(self, "cells", np.ascontiguousarray(self.cells, dtype=np.uint8))
        self.cells.setflags(write=False)

    @property
    def height(self):
        return self.cells.shape[0]

    @property
    def width(self):
        return self.cells.shape[1]

    def free_mask(self):
        return self.cells == FREE

    def cell_center(self, row, col):
        ox, oy = self.origin
        return (ox + (col + 0.5) * self.resolution, oy + (row + 0.5) * self.resolution)

    def world_to_cell(self, x, y):
        ox, oy = self.origin
        col = int(math.floor((x - ox) / self.resolution))
        row = int(math.floor((y - oy) / self.resolution))
        return row, col

    def contains(self, row, col):
        return 0 <= row < self.height and 0 <= col < self.width


@dataclass(frozen=True, eq=False)
class ClearanceField:
    """Per-cell Euclidean distance (meters) to the nearest non-free cell.

    Exactly zero on non-free cells; infinite when the grid has no
    obstacle at all.
    """

    resolution: float
    meters: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "meters", np.ascontiguousarray(self.meters, dtype=np.float64))
        self.meters.setflags(write=False)


# ---------------------------------------------------------------------------
# Portable graymap + metadata I/O
# ---------------------------------------------------------------------------

def parse_pgm(data: bytes):
    """Decode a P2 (ASCII) or P5 (binary) graymap into (array, maxval)."""
    if not isinstance(data, (bytes, bytearray)):
        raise MapFormatError("graymap content must be bytes")
    magic = data[:2]
    if magic not in (b"P2", b"P5"):
        raise MapFormatError(f"not a portable graymap (magic {magic!r})")

    # Header token scan; '#' starts a comment running to end of line.
    tokens = []
    pos = 2
    while len(tokens) < 3 and pos < len(data):
        ch = data[pos : pos + 1]
        if ch == b"#":
            nl = data.find(b"\n", pos)
            pos = len(data) if nl < 0 else nl + 1
        elif ch.isspace():
            pos += 1
        else:
            end = pos
            while end < len(data) and not data[end : end + 1].isspace() and data[end : end + 1] != b"#":
                end += 1
            tokens.append(data[pos:end])
            pos = end
    if len(tokens) < 3:
        raise MapFormatError("truncated graymap header")
    try:
        width, height, maxval = (int(t) for t in tokens)
    except ValueError as exc:
        raise MapFormatError(f"bad graymap header: {exc}") from None
    if width <= 0 or height <= 0 or not (0 < maxval < 65536):
        raise MapFormatError(f"bad graymap dimensions {width}x{height} maxval {maxval}")

    if magic == b"P5":
        pos += 1  # single whitespace after maxval
        nbytes = width * height * (2 if maxval > 255 else 1)
        raster = data[pos : pos + nbytes]
        if len(raster) != nbytes:
            raise MapFormatError("graymap raster shorter than header promises")
        dtype = ">u2" if maxval > 255 else np.uint8
        img = np.frombuffer(raster, dtype=dtype).astype(np.int32)
    else:
        try:
            values = [int(t) for t in data[pos:].split()]
        except ValueError as exc:
            raise MapFormatError(f"bad ASCII raster: {exc}") from None
        if len(values) != width * height:
            raise MapFormatError(
                f"ASCII raster has {len(values)} samples, expected {width * height}"
            )
        img = np.array(values, dtype=np.int32)
    if img.min() < 0 or img.max() > maxval:
        raise MapFormatError("raster sample out of range")
    return img.reshape(height, width), maxval


def write_pgm(path, img, maxval=255):
    """Write a uint8 image as a binary (P5) graymap."""
    img = np.ascontiguousarray(img, dtype=np.uint8)
    header = f"P5\n{img.shape[1]} {img.shape[0]}\n{maxval}\n".encode()
    Path(path).write_bytes(header + img.tobytes())


_META_KEYS = {"resolution", "origin_x", "origin_y", "free_thresh", "occupied_thresh", "negate"}


def parse_metadata(text: str) -> MapMetadata:
    """Parse a sidecar metadata file (``key: value`` or ``key value`` lines)."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        for sep in (":", "="):
            if sep in line:
                key, _, val = line.partition(sep)
                break
        else:
            parts = line.split(None, 1)
            if len(parts) != 2:
                raise MapFormatError(f"metadata line {lineno} is not key/value: {raw!r}")
            key, val = parts
        key = key.strip()
        if key not in _META_KEYS:
            raise MapFormatError(f"unknown metadata key {key!r} on line {lineno}")
        values[key] = val.strip()
    if "resolution" not in values:
        raise MapFormatError("metadata is missing 'resolution'")
    try:
        return MapMetadata(
            resolution=float(values["resolution"]),
            origin_x=float(values.get("origin_x", 0.0)),
            origin_y=float(values.get("origin_y", 0.0)),
            free_thresh=float(values.get("free_thresh", 0.196)),
            occupied_thresh=float(values.get("occupied_thresh", 0.65)),
            negate=int(values.get("negate", 0)),
        )
    except ValueError as exc:
        raise MapFormatError(f"bad metadata value: {exc}") from None


def write_metadata(path, meta: MapMetadata):
    lines = [
        f"resolution: {meta.resolution}",
        f"origin_x: {meta.origin_x}",
        f"origin_y: {meta.origin_y}",
        f"free_thresh: {meta.free_thresh}",
        f"occupied_thresh: {meta.occupied_thresh}",
        f"negate: {meta.negate}",
    ]
    Path(path).write_text("\n".join(lines) + "\n")


def load_grid(map_image, metadata) -> OccupancyGrid:
    """Build an OccupancyGrid from graymap content plus its metadata.

    ``map_image`` may be bytes or a path; ``metadata`` a MapMetadata or a
    path to the sidecar file. With negate=0 a pixel of value v maps to
    occupancy p = (maxval - v)/maxval; p > occupied_thresh is OCCUPIED,
    p < free_thresh is FREE, anything between is UNKNOWN. negate=1 uses
    p = v/maxval.
    """
    if isinstance(map_image, (str, Path)):
        map_image = Path(map_image).read_bytes()
    if isinstance(metadata, (str, Path)):
        metadata = parse_metadata(Path(metadata).read_text())
    img, maxval = parse_pgm(map_image)

    if metadata.negate:
        occ = img / float(maxval)
    else:
        occ = (maxval - img) / float(maxval)
    cells = np.full(img.shape, UNKNOWN, dtype=np.uint8)
    cells[occ > metadata.occupied_thresh] = OCCUPIED
    cells[occ < metadata.free_thresh] = FREE
    return OccupancyGrid(
        resolution=metadata.resolution,
        origin=(metadata.origin_x, metadata.origin_y),
        cells=cells,
    )


# ---------------------------------------------------------------------------
# Clearance and inflation
# ---------------------------------------------------------------------------

def compute_clearance(grid: OccupancyGrid) -> ClearanceField:
    """Exact Euclidean distance transform of the free space, in meters.

    Distances are measured center to center against the nearest occupied
    or unknown cell.
    """
    free = grid.free_mask()
    if free.all():
        meters = np.full(grid.cells.shape, np.inf)
    else:
        meters = ndimage.distance_transform_edt(free, sampling=grid.resolution)
    return ClearanceField(resolution=grid.resolution, meters=meters)


def inflate_grid(grid: OccupancyGrid, robot_radius: float) -> OccupancyGrid:
    """Erode free space by the robot footprint.

    A cell stays FREE only when it was FREE and its clearance exceeds
    ``robot_radius``; everything else (including UNKNOWN) becomes
    OCCUPIED.
    """
    if robot_radius < 0:
        raise ValueError("robot_radius must be >= 0")
    clearance = compute_clearance(grid)
    free = grid.free_mask() & (clearance.meters > robot_radius)
    cells = np.where(free, FREE, OCCUPIED).astype(np.uint8)
    return OccupancyGrid(resolution=grid.resolution, origin=grid.origin, cells=cells)
