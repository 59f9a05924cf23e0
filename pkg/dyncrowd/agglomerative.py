"""
Threshold-cut agglomerative clustering.

Complete linkage, so the cut threshold is a hard bound on cluster diameter.
``nested_cluster`` composes two cuts: headings first (``theta_th``), then
locations inside every heading group (``d_th``).
"""

from dataclasses import dataclass
from typing import Any, Callable, List, Sequence, Tuple

import numpy as np

from .core.config import EngineConfig
from .core.exceptions import ClusteringError
from .core.types import PedestrianState
from .geometry import angular_distance_matrix, pairwise_distances


@dataclass(frozen=True)
class ClusterAssignment:
    """
    Flat partition of n inputs.

    ``labels[i]`` is the cluster of input i. Labels are dense and numbered in
    order of each cluster's smallest input index, so equal partitions compare
    equal.
    """
    labels: Tuple[int, ...]

    @property
    def n_clusters(self) -> int:
        return len(set(self.labels))

    def groups(self) -> List[List[int]]:
        """Input indices of every cluster, in label order."""
        groups: List[List[int]] = [[] for _ in range(self.n_clusters)]
        for index, label in enumerate(self.labels):
            groups[label].append(index)
        return groups

    @classmethod
    def from_groups(cls, groups: Sequence[Sequence[int]], n: int) -> "ClusterAssignment":
        labels = [-1] * n
        ordered = sorted((sorted(g) for g in groups if g), key=lambda g: g[0])
        for label, group in enumerate(ordered):
            for index in group:
                labels[index] = label
        if -1 in labels:
            raise ClusteringError(f"input {labels.index(-1)} left unlabeled")
        return cls(tuple(labels))


def complete_linkage_cut(matrix: Any, threshold: float) -> ClusterAssignment:
    """
    Cluster from a pairwise distance matrix.

    Only the upper triangle of ``matrix`` is read. Clusters keep merging while
    the smallest complete-linkage distance is <= ``threshold``; equal
    distances merge the pair with the smallest (min-label, max-label), where a
    cluster's label is its smallest input index.
    """
    upper = np.asarray(matrix, dtype=float)
    if upper.ndim != 2 or upper.shape[0] != upper.shape[1]:
        raise ClusteringError(f"distance matrix must be square, got shape {upper.shape}")
    n = upper.shape[0]
    if n == 0:
        raise ClusteringError("cannot cluster an empty input")
    if not threshold > 0:
        raise ClusteringError(f"threshold must be positive, got {threshold}")

    rows, cols = np.triu_indices(n, 1)
    values = upper[rows, cols]
    if np.isnan(values).any() or (values < 0).any():
        raise ClusteringError("distances must be non-negative numbers")

    linkage = np.full((n, n), np.inf)
    linkage[rows, cols] = values
    linkage[cols, rows] = values

    members = {i: [i] for i in range(n)}
    while len(members) > 1:
        # row-major argmin over a symmetric matrix returns the
        # lexicographically smallest (i, j), i < j, among equal minima
        i, j = divmod(int(np.argmin(linkage)), n)
        if not linkage[i, j] <= threshold:
            break
        merged = np.maximum(linkage[i], linkage[j])
        linkage[i, :] = merged
        linkage[:, i] = merged
        linkage[i, i] = np.inf
        linkage[j, :] = np.inf
        linkage[:, j] = np.inf
        members[i].extend(members.pop(j))

    return ClusterAssignment.from_groups(list(members.values()), n)


def agglomerative_threshold(
    points: Sequence[Any],
    dist: Callable[[Any, Any], float],
    threshold: float,
) -> ClusterAssignment:
    """Complete-linkage threshold cut of ``points`` under any symmetric ``dist``."""
    n = len(points)
    if n == 0:
        raise ClusteringError("cannot cluster an empty input")
    matrix = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            matrix[i, j] = dist(points[i], points[j])
    return complete_linkage_cut(matrix, threshold)


def nested_cluster(peds: Sequence[PedestrianState], cfg: EngineConfig) -> ClusterAssignment:
    """
    Two-stage clustering: heading groups cut at ``theta_th``, then location
    groups cut at ``d_th`` inside each heading group.

    Pedestrians without a heading form one heading group of their own.
    Singletons are allowed.
    """
    peds = list(peds)
    if not peds:
        raise ClusteringError("cannot cluster an empty pedestrian set")

    defined = [i for i, p in enumerate(peds) if p.theta is not None]
    undefined = [i for i, p in enumerate(peds) if p.theta is None]

    heading_groups: List[List[int]] = []
    if defined:
        by_heading = complete_linkage_cut(
            angular_distance_matrix([peds[i].theta for i in defined]), cfg.theta_th
        )
        heading_groups = [[defined[k] for k in group] for group in by_heading.groups()]
    if undefined:
        heading_groups.append(undefined)

    final: List[List[int]] = []
    for group in heading_groups:
        by_location = complete_linkage_cut(
            pairwise_distances([peds[i].location for i in group]), cfg.d_th
        )
        final.extend([group[k] for k in sub] for sub in by_location.groups())

    return ClusterAssignment.from_groups(final, len(peds))
