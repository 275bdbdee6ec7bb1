"""Bundled synthetic facility map and its areas of interest.

A deterministic 400x400 grid at 0.05 m/cell (20 m x 20 m): a lobby, an
east-west main corridor, three north-south corridors, and rooms off the
corridors. Twenty labeled AOIs sit in the rooms, the lobby, and along
the corridors, ranked by popularity. The assets/ copies of the map and
AOI files are generated from this module (see write_assets).
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from tourkit.occupancy import (
    FREE,
    OCCUPIED,
    UNKNOWN,
    MapMetadata,
    OccupancyGrid,
    write_metadata,
    write_pgm,
)
from tourkit.routing import AOI, write_aois

RESOLUTION = 0.05
SIZE = 400  # cells per side
ORIGIN = (0.0, 0.0)
DEPOT = (14.0, 16.0, 0.0)  # lobby floor, (x, y, heading)

# Free-space rectangles in meters, (x0, y0, x1, y1).
_CORRIDORS = [
    (1.0, 9.2, 19.0, 10.8),  # main east-west corridor
    (3.0, 1.0, 4.6, 19.0),  # west corridor
    (9.2, 1.0, 10.8, 19.0),  # center corridor
    (15.4, 1.0, 17.0, 9.2),  # east corridor (upper half)
]
_LOBBY = (11.6, 12.4, 19.0, 19.0)

# Rooms: (x0, y0, x1, y1) plus the door rectangle connecting them.
_ROOMS = [
    ((1.0, 1.0, 2.6, 4.4), (2.6, 2.2, 3.0, 3.2)),  # west wing, off west corridor
    ((1.0, 4.8, 2.6, 8.6), (2.6, 6.2, 3.0, 7.2)),
    ((5.0, 1.0, 8.8, 4.4), (4.6, 2.2, 5.0, 3.2)),  # between west and center
    ((5.0, 4.8, 8.8, 8.6), (8.8, 6.2, 9.2, 7.2)),
    ((11.2, 1.0, 15.0, 4.4), (10.8, 2.2, 11.2, 3.2)),  # between center and east
    ((11.2, 4.8, 15.0, 8.6), (15.0, 6.2, 15.4, 7.2)),
    ((17.4, 1.0, 19.0, 4.4), (17.0, 2.2, 17.4, 3.2)),  # east wing
    ((17.4, 4.8, 19.0, 8.6), (17.0, 6.2, 17.4, 7.2)),
    ((1.0, 11.2, 2.6, 15.0), (2.6, 12.6, 3.0, 13.6)),  # south of main corridor
    ((1.0, 15.4, 2.6, 19.0), (2.6, 16.6, 3.0, 17.6)),
    ((5.0, 11.2, 8.8, 15.0), (8.8, 12.6, 9.2, 13.6)),
    ((5.0, 15.4, 8.8, 19.0), (8.8, 16.6, 9.2, 17.6)),
]
_LOBBY_DOORS = [
    (13.2, 10.8, 14.8, 12.4),  # lobby to main corridor
    (10.8, 15.2, 11.6, 16.8),  # lobby to center corridor
]
# Unreachable pocket kept UNKNOWN (unmapped storage space).
_UNKNOWN_POCKETS = [(17.6, 10.0, 19.0, 11.8)]

# AOIs: (x, y, heading, rank, label). Dwell is uniform 30 s.
_AOIS = [
    (14.6, 17.2, 0.0, 0, "lobby_fountain"),
    (17.8, 14.0, 3.14, 1, "lobby_gallery_wall"),
    (12.4, 13.4, 1.57, 2, "reception_desk"),
    (6.9, 2.7, 0.0, 3, "exhibit_hall_north"),
    (13.1, 2.7, 3.14, 4, "auditorium"),
    (6.9, 6.7, 1.57, 5, "workshop_a"),
    (13.1, 6.7, 4.71, 6, "workshop_b"),
    (6.9, 13.1, 0.0, 7, "cafe"),
    (6.9, 17.2, 1.57, 8, "reading_room"),
    (1.8, 2.7, 0.0, 9, "office_w1"),
    (1.8, 6.7, 0.0, 10, "office_w2"),
    (18.2, 2.7, 3.14, 11, "office_e1"),
    (18.2, 6.7, 3.14, 12, "office_e2"),
    (1.8, 13.1, 0.0, 13, "archive_a"),
    (1.8, 17.2, 0.0, 14, "archive_b"),
    (3.8, 5.0, 1.57, 15, "west_corridor_display"),
    (10.0, 3.4, 1.57, 16, "center_corridor_display"),
    (16.2, 5.0, 1.57, 17, "east_corridor_display"),
    (5.4, 10.0, 0.0, 18, "main_corridor_west_sign"),
    (12.2, 10.0, 0.0, 19, "main_corridor_east_sign"),
]

DWELL_DEFAULT = 30.0


def _cells(rect):
    x0, y0, x1, y1 = rect
    c0 = int(round(x0 / RESOLUTION))
    r0 = int(round(y0 / RESOLUTION))
    c1 = int(round(x1 / RESOLUTION))
    r1 = int(round(y1 / RESOLUTION))
    return r0, c0, r1, c1


def build_facility_grid() -> OccupancyGrid:
    """The bundled facility as an in-memory occupancy grid."""
    cells = np.full((SIZE, SIZE), OCCUPIED, dtype=np.uint8)
    for rect in _CORRIDORS + [_LOBBY] + _LOBBY_DOORS:
        r0, c0, r1, c1 = _cells(rect)
        cells[r0:r1, c0:c1] = FREE
    for room, door in _ROOMS:
        for rect in (room, door):
            r0, c0, r1, c1 = _cells(rect)
            cells[r0:r1, c0:c1] = FREE
    for rect in _UNKNOWN_POCKETS:
        r0, c0, r1, c1 = _cells(rect)
        cells[r0:r1, c0:c1] = UNKNOWN
    return OccupancyGrid(resolution=RESOLUTION, origin=ORIGIN, cells=cells)


def facility_metadata() -> MapMetadata:
    return MapMetadata(resolution=RESOLUTION, origin_x=ORIGIN[0], origin_y=ORIGIN[1])


def facility_image() -> np.ndarray:
    """Graymap pixels for the bundled grid (free 254, occupied 0, unknown 205)."""
    grid = build_facility_grid()
    img = np.zeros((SIZE, SIZE), dtype=np.uint8)
    img[grid.cells == FREE] = 254
    img[grid.cells == UNKNOWN] = 205
    return img


def facility_aois() -> list[AOI]:
    return [
        AOI(id=i, x=x, y=y, heading=heading, dwell=DWELL_DEFAULT, rank=rank, label=label)
        for i, (x, y, heading, rank, label) in enumerate(_AOIS)
    ]


def asset_dir() -> Path:
    return Path(__file__).parent / "assets"


def asset_paths() -> dict[str, Path]:
    base = asset_dir()
    return {
        "map": base / "facility.pgm",
        "meta": base / "facility_meta.txt",
        "aois": base / "facility_aois.csv",
    }


def write_assets(directory=None) -> dict[str, Path]:
    """Regenerate the bundled asset files; returns their paths."""
    base = Path(directory) if directory else asset_dir()
    base.mkdir(parents=True, exist_ok=True)
    paths = {
        "map": base / "facility.pgm",
        "meta": base / "facility_meta.txt",
        "aois": base / "facility_aois.csv",
    }
    write_pgm(paths["map"], facility_image())
    write_metadata(paths["meta"], facility_metadata())
    write_aois(paths["aois"], facility_aois())
    return paths
