"""tourkit: topological mapping and time-budgeted tour planning on 2D grids.

The toolkit turns an occupancy grid into a pruned skeleton graph of the
free space, computes travel-time matrices between areas of interest over
either the skeleton or the raw grid, and plans visit tours under a time
budget with per-client demands, dropped-demand penalties, and sequence
constraints (exactly, plus greedy and unconstrained baselines).
"""

from tourkit.kernels import IMPLEMENTATION as KERNEL_IMPLEMENTATION

__version__ = "0.1.0"

__all__ = ["KERNEL_IMPLEMENTATION", "__version__"]
