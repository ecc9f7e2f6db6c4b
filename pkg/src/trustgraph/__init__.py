"""Trust graphs for sensor-network key predistribution.

Build candidate trust graphs, simulate random deployments and path-key
establishment, and compare measurements against closed-form bounds.
"""

from .graph import (
    NO_NONADJACENT_PAIRS,
    UNREACHABLE,
    DistanceSummary,
    TGraph,
    bfs_distances,
    degree_stats,
    distance_summary,
    load_edge_list,
    min_disjoint_paths,
    save_edge_list,
    vertex_disjoint_paths,
)

__version__ = "0.1.0"
