"""
Local Outlier Factor scoring of cluster members.

Members are scored on location (divided by ``d_th``) and heading (embedded on
the unit circle, weighted by ``lof_heading_weight``). A member is flagged only
when its score clears ``lof_score_gate`` and it ranks within the top
``lof_contamination`` share of the cluster.
"""

import math
from dataclasses import dataclass
from typing import FrozenSet, Optional, Sequence, Set

import numpy as np
from scipy.spatial.distance import cdist

from .core.config import EngineConfig
from .core.exceptions import InsufficientMembersError
from .core.types import ClusterState, PedestrianState

# stands in for an infinite density when all k nearest neighbours coincide
LRD_SENTINEL = 1e12
# score noise allowed above the gate before a member counts as an outlier
SCORE_TOLERANCE = 1e-9
MIN_EVALUATED_MEMBERS = 3


@dataclass(frozen=True)
class LofResult:
    """Scores of every member and the indices flagged as outliers"""
    scores: np.ndarray
    outliers: FrozenSet[int]


def lof_scores(features: Sequence[Sequence[float]], k: int) -> np.ndarray:
    """
    Local outlier factor of every row of ``features``.

    The k-distance neighbourhood includes ties, so a point may have more than
    k neighbours. A point whose neighbours all coincide with it gets the
    sentinel density, which makes co-duplicated points score exactly 1
    against each other.
    """
    X = np.asarray(features, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    n = X.shape[0]
    if n < 2:
        raise InsufficientMembersError("insufficient members", details={"n": n})
    if not 1 <= k <= n - 1:
        raise InsufficientMembersError(f"k must be in [1, {n - 1}], got {k}", details={"n": n, "k": k})

    dist = cdist(X, X)
    np.fill_diagonal(dist, np.inf)
    k_distance = np.sort(dist, axis=1)[:, k - 1]
    neighbors = dist <= k_distance[:, None]
    counts = neighbors.sum(axis=1)

    # reach[p, q] = max(k-distance(q), d(p, q))
    reach = np.maximum(dist, k_distance[None, :])
    mean_reach = np.where(neighbors, reach, 0.0).sum(axis=1) / counts

    lrd = np.full(n, LRD_SENTINEL)
    positive = mean_reach > 0
    lrd[positive] = 1.0 / mean_reach[positive]

    ratio = lrd[None, :] / lrd[:, None]
    return np.where(neighbors, ratio, 0.0).sum(axis=1) / counts


def flag_outliers(scores: Sequence[float], contamination: float, gate: float = 1.0) -> FrozenSet[int]:
    """Indices of the highest scores above ``gate``, at most ceil(contamination * n)."""
    scores = np.asarray(scores, dtype=float)
    limit = math.ceil(contamination * len(scores) - 1e-9)
    candidates = [i for i in range(len(scores)) if scores[i] > gate + SCORE_TOLERANCE]
    candidates.sort(key=lambda i: (-scores[i], i))
    return frozenset(candidates[:limit])


def detect_outliers(features: Sequence[Sequence[float]], k: int, contamination: float,
                    gate: float = 1.0) -> LofResult:
    scores = lof_scores(features, k)
    return LofResult(scores=scores, outliers=flag_outliers(scores, contamination, gate))


def lof_features(members: Sequence[PedestrianState], cfg: EngineConfig,
                 fallback_theta: Optional[float] = None) -> np.ndarray:
    """
    Rows of (x/d_th, y/d_th, w*cos(theta), w*sin(theta)).

    Members without a heading borrow ``fallback_theta`` (the cluster heading)
    so a missing heading never reads as a deviation.
    """
    rows = []
    weight = cfg.lof_heading_weight
    for ped in members:
        theta = ped.theta if ped.theta is not None else fallback_theta
        if theta is None:
            hx = hy = 0.0
        else:
            radians = math.radians(theta)
            hx, hy = weight * math.cos(radians), weight * math.sin(radians)
        rows.append((ped.x / cfg.d_th, ped.y / cfg.d_th, hx, hy))
    return np.asarray(rows, dtype=float)


def evaluate_cluster(cluster: ClusterState, members: Sequence[PedestrianState],
                     cfg: EngineConfig) -> Set[int]:
    """Pedestrian ids of ``members`` flagged as outliers; clusters under 3 members are skipped."""
    members = list(members)
    n = len(members)
    if n < MIN_EVALUATED_MEMBERS:
        return set()
    k = min(n - 1, max(1, int(math.floor(cfg.lof_neighbor_fraction * n))))
    result = detect_outliers(
        lof_features(members, cfg, cluster.centroid.theta), k, cfg.lof_contamination, cfg.lof_score_gate
    )
    return {members[i].id for i in result.outliers}
