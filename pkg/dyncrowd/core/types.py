"""
dyncrowd Domain Types
=====================

Shared value types for pedestrians, clusters and centroid tracks:
- PedestrianState: one pedestrian at one frame
- ClusterState: a live cluster and its members
- CentroidSample / CentroidTrack: the per-frame centroid of a cluster

All types are frozen dataclasses; engine updates replace values instead of
mutating them, so snapshots can be handed to other threads as they are.
"""

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import FrozenSet, Iterator, Mapping, Optional, Tuple

# (x, y) location of one observation, pixels
Point = Tuple[float, float]
# id -> location for every pedestrian observed in one frame
FrameObservations = Mapping[int, Point]
# frame -> observations, the whole input of one run
ObservationStream = Mapping[int, FrameObservations]


class ClusterStatus(Enum):
    """Cluster lifecycle status"""
    ACTIVE = "active"
    COASTING = "coasting"
    RETIRED = "retired"


@dataclass(frozen=True)
class PedestrianState:
    """
    One pedestrian at one frame.

    ``theta`` is None while the heading is undefined (first observation, or a
    pedestrian that has never moved). ``has_history`` is False on the first
    observation, when (vx, vy) is reported as zero.
    """
    id: int
    frame: int
    x: float
    y: float
    theta: Optional[float] = None
    vx: float = 0.0
    vy: float = 0.0
    cluster_id: Optional[int] = None
    has_history: bool = False

    @property
    def location(self) -> Point:
        return (self.x, self.y)

    def with_cluster(self, cluster_id: Optional[int]) -> "PedestrianState":
        return replace(self, cluster_id=cluster_id)


@dataclass(frozen=True)
class CentroidSample:
    """Centroid of one cluster at one frame (theta None when undefined)"""
    frame: int
    X: float
    Y: float
    theta: Optional[float] = None

    @property
    def location(self) -> Point:
        return (self.X, self.Y)


@dataclass(frozen=True)
class ClusterState:
    """A cluster, its current members and its centroid for the current frame"""
    cluster_id: int
    members: FrozenSet[int]
    centroid: CentroidSample
    created_frame: int
    status: ClusterStatus = ClusterStatus.ACTIVE

    @property
    def is_live(self) -> bool:
        return self.status is not ClusterStatus.RETIRED

    def with_members(self, members) -> "ClusterState":
        return replace(self, members=frozenset(members))


@dataclass(frozen=True)
class CentroidTrack:
    """
    Time-ordered centroid samples of one cluster.

    Frames strictly increase by one; a track never has gaps because a cluster
    emits a sample every frame while active or coasting.
    """
    cluster_id: int
    samples: Tuple[CentroidSample, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "samples", tuple(self.samples))
        for prev, curr in zip(self.samples, self.samples[1:]):
            if curr.frame != prev.frame + 1:
                raise ValueError(
                    f"cluster {self.cluster_id}: sample frame {curr.frame} does not follow {prev.frame}"
                )

    def __len__(self) -> int:
        return len(self.samples)

    def __iter__(self) -> Iterator[CentroidSample]:
        return iter(self.samples)

    @property
    def first_frame(self) -> Optional[int]:
        return self.samples[0].frame if self.samples else None

    @property
    def last_frame(self) -> Optional[int]:
        return self.samples[-1].frame if self.samples else None

    def at(self, frame: int) -> Optional[CentroidSample]:
        """Sample at ``frame`` or None when the track does not cover it."""
        if not self.samples:
            return None
        index = frame - self.samples[0].frame
        if 0 <= index < len(self.samples):
            return self.samples[index]
        return None
