"""
Cluster quality and prediction metrics.

- CTEO / CTEL: how often, and by how much, a centroid track jumps by more
  than a threshold between consecutive frames
- CMDD: mean member-to-centroid deviation over (frame, cluster) pairs
- ADE / FDE: average and final displacement error of a prediction
- Count series, cluster census and plot-data helpers for reports

Thresholds and deviations are pixels for the location variants and degrees
for the direction variants. CTEO is a fraction in [0, 1].
"""

import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .core.config import EngineConfig
from .core.events import Memberships
from .core.exceptions import MetricsError
from .core.types import CentroidSample, CentroidTrack, ObservationStream, Point
from .geometry import direction_angle, smallest_angular_distance

LOCATION = "location"
DIRECTION = "direction"
_MODES = (LOCATION, DIRECTION)

# (frame, cluster id, deviation)
Deviation = Tuple[int, int, float]


@dataclass(frozen=True)
class ClusterFrame:
    """One cluster at one frame: its centroid and its observed members"""
    frame: int
    cluster_id: int
    centroid: CentroidSample
    member_ids: Tuple[int, ...]
    locations: np.ndarray
    headings: Tuple[Optional[float], ...]

    @property
    def size(self) -> int:
        return len(self.member_ids)


@dataclass
class MetricsReport:
    """
    Evaluation of one clustering run.

    Metric fields are None when the run has nothing to measure (no cluster
    track with two samples, no qualifying cluster frame).
    """
    cmdd_location: Optional[float]
    cmdd_direction: Optional[float]
    cteo_location: Optional[float]
    cteo_direction: Optional[float]
    ctel_location: Optional[float]
    ctel_direction: Optional[float]
    location_threshold: float
    direction_threshold: float
    min_members: int
    n_clusters_single: int
    n_clusters_multi: int
    n_peds: int
    count_series: List[Tuple[int, int, int]] = field(default_factory=list)
    ade: Optional[float] = None
    fde: Optional[float] = None

    @property
    def n_clusters(self) -> int:
        return self.n_clusters_single + self.n_clusters_multi

    @property
    def has_clusters(self) -> bool:
        return self.n_clusters > 0

    def summary(self) -> Dict[str, object]:
        """Scalar fields, in report order."""
        return {
            "n_clusters_single": self.n_clusters_single,
            "n_clusters_multi": self.n_clusters_multi,
            "n_peds": self.n_peds,
            "cmdd_location": self.cmdd_location,
            "cmdd_direction": self.cmdd_direction,
            "cteo_location": self.cteo_location,
            "cteo_direction": self.cteo_direction,
            "ctel_location": self.ctel_location,
            "ctel_direction": self.ctel_direction,
            "location_threshold": self.location_threshold,
            "direction_threshold": self.direction_threshold,
            "min_members": self.min_members,
            "ade": self.ade,
            "fde": self.fde,
        }


# ----------------------------------------------------------------------
# trajectory error

def step_distances(track: Iterable[CentroidSample], mode: str = LOCATION) -> np.ndarray:
    """
    Consecutive-frame change of a centroid track.

    Location steps are Euclidean pixels. Direction steps are the wrapped
    heading difference; a step with an undefined heading counts as 0.
    """
    if mode not in _MODES:
        raise MetricsError(f"unknown metric mode '{mode}'")
    samples = list(track)
    if mode == LOCATION:
        xy = np.array([(s.X, s.Y) for s in samples], dtype=float).reshape(-1, 2)
        return np.hypot(*np.diff(xy, axis=0).T)
    return np.array([
        0.0 if a.theta is None or b.theta is None else smallest_angular_distance(b.theta, a.theta)
        for a, b in zip(samples, samples[1:])
    ])


def _exceedances(tracks: Iterable[CentroidTrack], T: float, mode: str) -> List[np.ndarray]:
    if not T > 0:
        raise MetricsError(f"threshold must be positive, got {T}")
    steps = [step_distances(track, mode) for track in tracks if len(track) >= 2]
    if not steps:
        raise MetricsError("no centroid track has at least two samples")
    return steps


def cteo(tracks: Iterable[CentroidTrack], T: float, mode: str = LOCATION) -> float:
    """Mean over tracks of the fraction of steps larger than ``T``."""
    return float(np.mean([np.mean(steps > T) for steps in _exceedances(tracks, T, mode)]))


def ctel(tracks: Iterable[CentroidTrack], T: float, mode: str = LOCATION) -> float:
    """Mean over tracks of the summed size of steps larger than ``T``."""
    return float(np.mean([steps[steps > T].sum() for steps in _exceedances(tracks, T, mode)]))


def ade_fde(predicted: Sequence[Point], truth: Sequence[Point]) -> Tuple[float, float]:
    """Average and final Euclidean error of ``predicted`` against ``truth``."""
    predicted = np.asarray(predicted, dtype=float).reshape(-1, 2)
    truth = np.asarray(truth, dtype=float).reshape(-1, 2)
    if len(predicted) != len(truth):
        raise MetricsError(f"trajectory lengths differ: {len(predicted)} vs {len(truth)}")
    if len(truth) == 0:
        raise MetricsError("empty trajectory")
    errors = np.hypot(*(predicted - truth).T)
    return float(errors.mean()), float(errors[-1])


# ----------------------------------------------------------------------
# cluster deviation

def pedestrian_headings(observations: ObservationStream) -> Dict[int, Dict[int, Optional[float]]]:
    """
    Heading of every observation, frame -> id -> degrees.

    Taken from the previous observation of the same id; undefined on first
    sight and kept from before when the pedestrian did not move.
    """
    last: Dict[int, Tuple[float, float, Optional[float]]] = {}
    headings: Dict[int, Dict[int, Optional[float]]] = {}
    for frame in sorted(observations):
        current: Dict[int, Optional[float]] = {}
        for pid, (x, y) in sorted(observations[frame].items()):
            theta = None
            if pid in last:
                px, py, prev_theta = last[pid]
                theta = direction_angle(x - px, y - py)
                if theta is None:
                    theta = prev_theta
            current[pid] = theta
            last[pid] = (x, y, theta)
        headings[frame] = current
    return headings


def cluster_frames(
    tracks: Mapping[int, CentroidTrack],
    memberships: Memberships,
    observations: ObservationStream,
) -> List[ClusterFrame]:
    """
    Every (frame, cluster) pair with its centroid and observed members.

    Members absent from a frame are left out of it; pairs without a centroid
    sample are skipped.
    """
    headings = pedestrian_headings(observations)
    result: List[ClusterFrame] = []
    for frame in sorted(memberships):
        observed = observations.get(frame, {})
        for cid, members in sorted(memberships[frame].items()):
            track = tracks.get(cid)
            centroid = track.at(frame) if track is not None else None
            if centroid is None:
                continue
            ids = tuple(sorted(pid for pid in members if pid in observed))
            result.append(ClusterFrame(
                frame=frame,
                cluster_id=cid,
                centroid=centroid,
                member_ids=ids,
                locations=np.array([observed[pid] for pid in ids], dtype=float).reshape(-1, 2),
                headings=tuple(headings.get(frame, {}).get(pid) for pid in ids),
            ))
    return result


def cmdd_samples(frames: Iterable[ClusterFrame], min_members: int = 2) -> Tuple[List[Deviation], List[Deviation]]:
    """
    Per (frame, cluster) mean member-to-centroid deviation, for clusters with
    at least ``min_members`` observed members.

    Returns the location and the direction samples as (frame, cluster id,
    deviation); a pair contributes a direction sample only when the centroid
    and some member have headings.
    """
    location: List[Deviation] = []
    direction: List[Deviation] = []
    for cf in frames:
        if cf.size < min_members:
            continue
        c = cf.centroid
        location.append((cf.frame, cf.cluster_id,
                         float(np.hypot(cf.locations[:, 0] - c.X, cf.locations[:, 1] - c.Y).mean())))
        if c.theta is None:
            continue
        angles = [smallest_angular_distance(h, c.theta) for h in cf.headings if h is not None]
        if angles:
            direction.append((cf.frame, cf.cluster_id, float(np.mean(angles))))
    return location, direction


def cmdd(frames: Iterable[ClusterFrame], min_members: int = 2) -> Tuple[float, float]:
    """
    Location and direction CMDD.

    The direction value is nan when no qualifying pair has headings.
    """
    location, direction = cmdd_samples(frames, min_members)
    if not location:
        raise MetricsError(f"no cluster frame has at least {min_members} members")
    return _mean_deviation(location), _mean_deviation(direction) if direction else math.nan


def _mean_deviation(samples: Sequence[Deviation]) -> float:
    return float(np.mean([value for _, _, value in samples]))


# ----------------------------------------------------------------------
# counts and plot data

def count_series(memberships: Memberships, observations: ObservationStream) -> List[Tuple[int, int, int]]:
    """(frame, clustered, raw) for every frame of ``memberships``."""
    series = []
    for frame in sorted(memberships):
        observed = observations.get(frame, {})
        clustered = sum(1 for members in memberships[frame].values() for pid in members if pid in observed)
        series.append((frame, clustered, len(observed)))
    return series


def cluster_census(memberships: Memberships) -> Tuple[int, int]:
    """Number of single-member and multi-member clusters by peak membership."""
    peak: Dict[int, int] = {}
    for clusters in memberships.values():
        for cid, members in clusters.items():
            peak[cid] = max(peak.get(cid, 0), len(members))
    single = sum(1 for size in peak.values() if size <= 1)
    return single, len(peak) - single


def membership_agreement(memberships: Memberships,
                         labels: Mapping[int, Mapping[int, int]]) -> List[Tuple[int, float]]:
    """
    (frame, agreement) between clusters and ground-truth group labels.

    Each true group is matched to at most one cluster and each cluster to at
    most one group, greedily by shared members. Agreement is the share of
    labelled pedestrians that sit in the cluster matched to their group;
    unclustered pedestrians never agree.
    """
    series = []
    for frame in sorted(labels):
        truth = labels[frame]
        if not truth:
            continue
        overlaps: Dict[Tuple[int, int], int] = {}
        for cid, members in memberships.get(frame, {}).items():
            for pid in members:
                if pid in truth:
                    key = (cid, truth[pid])
                    overlaps[key] = overlaps.get(key, 0) + 1
        matched = 0
        used_clusters, used_labels = set(), set()
        for (cid, label), count in sorted(overlaps.items(), key=lambda item: (-item[1], item[0])):
            if cid in used_clusters or label in used_labels:
                continue
            used_clusters.add(cid)
            used_labels.add(label)
            matched += count
        series.append((frame, matched / len(truth)))
    return series


def count_pedestrians(observations: ObservationStream) -> int:
    return len({pid for obs in observations.values() for pid in obs})


def mean_position_tracks(frames: Iterable[ClusterFrame]) -> Dict[int, List[CentroidSample]]:
    """
    Re-averaged centroid of each cluster, the plain per-frame mean of its
    observed members. Frames without observed members are left out.
    """
    tracks: Dict[int, List[CentroidSample]] = {}
    for cf in frames:
        if not cf.size:
            continue
        X, Y = cf.locations.mean(axis=0)
        tracks.setdefault(cf.cluster_id, []).append(CentroidSample(cf.frame, float(X), float(Y)))
    return tracks


def displacement_series(samples: Iterable[CentroidSample]) -> List[Tuple[int, float]]:
    """(frame, distance moved since the previous sample) for each consecutive pair."""
    samples = list(samples)
    return [
        (b.frame, math.hypot(b.X - a.X, b.Y - a.Y))
        for a, b in zip(samples, samples[1:])
        if b.frame == a.frame + 1
    ]


def _optional(func, *args) -> Optional[float]:
    try:
        value = func(*args)
    except MetricsError:
        return None
    return None if isinstance(value, float) and math.isnan(value) else value


def build_report(
    tracks: Mapping[int, CentroidTrack],
    memberships: Memberships,
    observations: ObservationStream,
    cfg: EngineConfig,
) -> MetricsReport:
    """Compute every clustering metric of one run."""
    frames = cluster_frames(tracks, memberships, observations)
    location, direction = cmdd_samples(frames, cfg.min_cmdd_members)
    single, multi = cluster_census(memberships)
    T_loc, T_dir = cfg.location_threshold, cfg.direction_threshold
    live = list(tracks.values())
    return MetricsReport(
        cmdd_location=_mean_deviation(location) if location else None,
        cmdd_direction=_mean_deviation(direction) if direction else None,
        cteo_location=_optional(cteo, live, T_loc, LOCATION),
        cteo_direction=_optional(cteo, live, T_dir, DIRECTION),
        ctel_location=_optional(ctel, live, T_loc, LOCATION),
        ctel_direction=_optional(ctel, live, T_dir, DIRECTION),
        location_threshold=T_loc,
        direction_threshold=T_dir,
        min_members=cfg.min_cmdd_members,
        n_clusters_single=single,
        n_clusters_multi=multi,
        n_peds=count_pedestrians(observations),
        count_series=count_series(memberships, observations),
    )
