"""Kernel lane selection.

The compiled extension (built from ``_native.pyx``) is used when present;
otherwise the pure-Python twin takes over. Set ``TOURKIT_PURE=1`` to force
the pure lane, e.g. for the lane benchmark or debugging.
"""

import os

from tourkit.kernels import _pure

if os.environ.get("TOURKIT_PURE"):
    _impl = _pure
    IMPLEMENTATION = "pure"
else:
    try:
        from tourkit.kernels import _native as _impl

        IMPLEMENTATION = "native"
    except ImportError:
        _impl = _pure
        IMPLEMENTATION = "pure"

SQRT2 = _pure.SQRT2

astar_grid = _impl.astar_grid
dijkstra_mask = _impl.dijkstra_mask
thin_mask = _impl.thin_mask
held_karp_route = _impl.held_karp_route


def available_lanes():
    """Importable kernel lanes by name; always includes 'pure'."""
    lanes = {"pure": _pure}
    try:
        from tourkit.kernels import _native

        lanes["native"] = _native
    except ImportError:
        pass
    return lanes
