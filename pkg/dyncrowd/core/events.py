"""
dyncrowd Engine Events
======================

Membership and lifecycle events emitted by the dynamic clustering engine:
- Event kinds and the immutable event record
- Per-kind statistics
- Event-sourced replay of cluster memberships
"""

from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, FrozenSet, Iterable, Mapping, Optional


class EventKind(Enum):
    """Engine event kinds"""
    MEMBER_ADDED = "member-added"
    MEMBER_EVICTED = "member-evicted"
    CLUSTER_CREATED = "cluster-created"
    CLUSTER_RETIRED = "cluster-retired"


@dataclass(frozen=True)
class EngineEvent:
    """One engine event; ``reason`` says why a member left or a cluster retired"""
    frame: int
    kind: EventKind
    cluster_id: int
    pedestrian_id: Optional[int] = None
    reason: str = ""

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            "frame": self.frame,
            "kind": self.kind.value,
            "cluster_id": self.cluster_id,
        }
        if self.pedestrian_id is not None:
            data["pedestrian_id"] = self.pedestrian_id
        if self.reason:
            data["reason"] = self.reason
        return data

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "EngineEvent":
        return cls(
            frame=int(data["frame"]),
            kind=EventKind(data["kind"]),
            cluster_id=int(data["cluster_id"]),
            pedestrian_id=None if data.get("pedestrian_id") is None else int(data["pedestrian_id"]),
            reason=str(data.get("reason", "")),
        )


@dataclass
class EventStats:
    """Event statistics"""
    total_events: int = 0
    events_by_kind: Dict[str, int] = field(default_factory=dict)
    clusters_created: int = 0
    clusters_retired: int = 0

    @classmethod
    def from_events(cls, events: Iterable[EngineEvent]) -> "EventStats":
        counts = Counter(event.kind.value for event in events)
        return cls(
            total_events=sum(counts.values()),
            events_by_kind=dict(sorted(counts.items())),
            clusters_created=counts.get(EventKind.CLUSTER_CREATED.value, 0),
            clusters_retired=counts.get(EventKind.CLUSTER_RETIRED.value, 0),
        )


# frame -> cluster id -> member ids
Memberships = Dict[int, Dict[int, FrozenSet[int]]]


def replay_memberships(events: Iterable[EngineEvent], frames: Iterable[int]) -> Memberships:
    """
    Rebuild cluster memberships at the end of each requested frame.

    Events are applied in log order; the membership reported for frame f
    reflects every event with ``event.frame <= f``. Only live clusters appear.
    """
    ordered = sorted(enumerate(events), key=lambda item: (item[1].frame, item[0]))
    current: Dict[int, set] = {}
    result: Memberships = {}
    cursor = 0
    for frame in sorted(set(frames)):
        while cursor < len(ordered) and ordered[cursor][1].frame <= frame:
            _apply(current, ordered[cursor][1])
            cursor += 1
        result[frame] = {cid: frozenset(members) for cid, members in sorted(current.items())}
    return result


def _apply(current: Dict[int, set], event: EngineEvent) -> None:
    if event.kind is EventKind.CLUSTER_CREATED:
        current.setdefault(event.cluster_id, set())
    elif event.kind is EventKind.CLUSTER_RETIRED:
        current.pop(event.cluster_id, None)
    elif event.kind is EventKind.MEMBER_ADDED:
        current.setdefault(event.cluster_id, set()).add(event.pedestrian_id)
    elif event.kind is EventKind.MEMBER_EVICTED:
        current.get(event.cluster_id, set()).discard(event.pedestrian_id)
