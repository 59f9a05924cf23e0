"""
dyncrowd - dynamic clustering of dense-crowd pedestrian tracks.

Compresses tracker output into cluster-centroid trajectories and measures
what the compression costs in accuracy.
"""

__version__ = "0.1.0"
