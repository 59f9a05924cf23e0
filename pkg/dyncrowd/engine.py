"""
dyncrowd Dynamic Clustering Engine
==================================

Streaming state machine that turns per-frame pedestrian observations into
cluster centroid tracks:
- Initialization with nested clustering over the first evaluation window
- Per-frame delta update of every live centroid
- Nearest-cluster assignment of new and unassigned pedestrians
- Periodic LOF evaluation, outlier reassignment and the temporary pool
- Cluster lifecycle (active, coasting, retired) with an event log

Frames are processed by one writer in strictly increasing order.
"""

import math
from collections import Counter
from dataclasses import dataclass, field, replace
from typing import Dict, Iterable, List, Mapping, Optional, Set, Tuple

from .agglomerative import nested_cluster
from .centroid import Displacement, delta_update, init_centroid
from .core.config import EngineConfig, validate_config
from .core.events import EngineEvent, EventKind, Memberships, replay_memberships
from .core.exceptions import EngineError, FrameOrderError, InvariantViolation
from .core.logging import get_logger
from .core.types import (
    CentroidSample,
    CentroidTrack,
    ClusterState,
    ClusterStatus,
    FrameObservations,
    PedestrianState,
)
from .geometry import direction_angle, smallest_angular_distance
from .lof import evaluate_cluster

logger = get_logger(__name__)

__all__ = [
    'DynamicClusteringEngine',
    'EngineState',
    'RunResult',
    'replay_memberships',
    'validate_partition',
]


@dataclass
class EngineState:
    """
    Mutable engine state; ``DynamicClusteringEngine.snapshot`` hands out copies.

    ``temporary`` holds ids of unassigned pedestrians; their latest states
    live in ``pedestrians`` like everyone else's.
    """
    frame: int
    clusters: Dict[int, ClusterState] = field(default_factory=dict)
    temporary: Set[int] = field(default_factory=set)
    pedestrians: Dict[int, PedestrianState] = field(default_factory=dict)
    last_seen: Dict[int, int] = field(default_factory=dict)
    coast_deltas: Dict[int, Displacement] = field(default_factory=dict)
    coast_frames: Dict[int, int] = field(default_factory=dict)
    next_cluster_id: int = 1

    def live_clusters(self) -> List[ClusterState]:
        return [c for _, c in sorted(self.clusters.items()) if c.is_live]

    def observed_ids(self) -> Set[int]:
        """Ids observed in the current frame."""
        return {pid for pid, ped in self.pedestrians.items() if ped.frame == self.frame}

    def copy(self) -> "EngineState":
        return replace(
            self,
            clusters=dict(self.clusters),
            temporary=set(self.temporary),
            pedestrians=dict(self.pedestrians),
            last_seen=dict(self.last_seen),
            coast_deltas=dict(self.coast_deltas),
            coast_frames=dict(self.coast_frames),
        )


@dataclass
class RunResult:
    """Everything one engine run produced"""
    config: EngineConfig
    tracks: Dict[int, CentroidTrack]
    events: List[EngineEvent]
    memberships: Memberships
    init_frame: int
    first_frame: int
    last_frame: int

    @property
    def frames(self) -> range:
        return range(self.first_frame, self.last_frame + 1)


def validate_partition(state: EngineState, observed: Optional[Iterable[int]] = None) -> None:
    """
    Check the membership partition of ``state``.

    Raises:
        InvariantViolation: a pedestrian in two clusters, in a cluster and the
            temporary pool, an observed pedestrian in neither, a retired
            cluster with members, or a stale ``cluster_id``
    """
    owner: Dict[int, int] = {}
    for cid, cluster in sorted(state.clusters.items()):
        if not cluster.is_live:
            if cluster.members:
                raise InvariantViolation(f"retired cluster {cid} still has members")
            continue
        for pid in cluster.members:
            if pid in owner:
                raise InvariantViolation(f"pedestrian {pid} in clusters {owner[pid]} and {cid}")
            owner[pid] = cid
            ped = state.pedestrians.get(pid)
            if ped is not None and ped.cluster_id != cid:
                raise InvariantViolation(f"pedestrian {pid} records cluster {ped.cluster_id}, member of {cid}")

    both = state.temporary & set(owner)
    if both:
        raise InvariantViolation(f"pedestrian {min(both)} is both clustered and in the temporary pool")

    observed = state.observed_ids() if observed is None else set(observed)
    missing = sorted(pid for pid in observed if pid not in owner and pid not in state.temporary)
    if missing:
        raise InvariantViolation(f"observed pedestrian {missing[0]} is neither clustered nor pooled")


class DynamicClusteringEngine:
    """
    Dynamic clustering of a pedestrian stream.

    Call ``initialize`` with the first evaluation window, then ``step`` once
    per later frame; or hand the whole stream to ``run``.
    """

    def __init__(self, cfg: Optional[EngineConfig] = None):
        self.cfg = validate_config(cfg or EngineConfig())
        self.state: Optional[EngineState] = None
        self.events: List[EngineEvent] = []
        self.memberships: Memberships = {}
        self._samples: Dict[int, List[CentroidSample]] = {}
        self._first_frame: Optional[int] = None
        self._init_frame: Optional[int] = None

    # ------------------------------------------------------------------
    # public operations

    def initialize(self, window: Mapping[int, FrameObservations]) -> EngineState:
        """
        Cluster every pedestrian observed at least twice in ``window``.

        Directions come from each pedestrian's last two observations;
        pedestrians seen once start in the temporary pool.
        """
        frames = sorted(f for f, obs in window.items() if obs)
        if not frames:
            raise EngineError("empty initialization window")
        if self.state is not None:
            raise EngineError("engine already initialized")

        state = EngineState(frame=frames[-1])
        self.state = state
        seen = Counter()
        for frame in frames:
            for pid in sorted(window[frame]):
                x, y = window[frame][pid]
                state.pedestrians[pid] = self._observe(state.pedestrians.get(pid), pid, frame, x, y)
                state.last_seen[pid] = frame
                seen[pid] += 1

        movers = [state.pedestrians[pid] for pid in sorted(seen) if seen[pid] >= 2]
        if not movers:
            self.state = None
            raise EngineError("initialization window needs a pedestrian observed at least twice")

        events: List[EngineEvent] = []
        assignment = nested_cluster(movers, self.cfg)
        for group in assignment.groups():
            self._create_cluster([movers[i] for i in group], state.frame, events)
        state.temporary = {pid for pid in seen if seen[pid] < 2}

        self._first_frame = frames[0]
        self._init_frame = state.frame
        self.events.extend(events)
        self._record(state.frame)
        logger.debug("engine_initialized", frame=state.frame, clusters=len(assignment.groups()),
                     pedestrians=len(seen), temporary=len(state.temporary))
        return state

    def step(self, frame: int, observations: FrameObservations) -> List[EngineEvent]:
        """
        Process one frame and return the events it produced.

        Skipped frame indices are processed as empty frames first, so centroid
        tracks never have gaps.
        """
        state = self._require_state()
        if frame <= state.frame:
            raise FrameOrderError(f"frame {frame} does not follow frame {state.frame}", frame=frame)
        events: List[EngineEvent] = []
        for skipped in range(state.frame + 1, frame):
            events.extend(self._advance(skipped, {}))
        events.extend(self._advance(frame, observations))
        return events

    def evaluate_tick(self) -> List[EngineEvent]:
        """
        Evaluation at the current frame.

        Drops long-absent members, re-homes LOF outliers, retries the
        temporary pool and re-clusters it once it reaches ``temp_trigger``.
        """
        state = self._require_state()
        cfg = self.cfg
        frame = state.frame
        limit = cfg.resolved_coast_limit
        events: List[EngineEvent] = []

        for cluster in state.live_clusters():
            for pid in sorted(cluster.members):
                if frame - state.last_seen[pid] >= limit:
                    self._remove_member(cluster.cluster_id, pid, frame, "absent", events)
        for pid in sorted(state.temporary):
            if frame - state.last_seen[pid] >= limit:
                state.temporary.discard(pid)
        for pid in sorted(state.pedestrians):
            if (frame - state.last_seen[pid] > limit and state.pedestrians[pid].cluster_id is None
                    and pid not in state.temporary):
                del state.pedestrians[pid]
                del state.last_seen[pid]

        observed = state.observed_ids()

        # score every cluster first, then mutate in cluster id order
        proposals: Dict[int, List[int]] = {}
        for cluster in state.live_clusters():
            present = [state.pedestrians[pid] for pid in sorted(cluster.members) if pid in observed]
            flagged = evaluate_cluster(cluster, present, cfg)
            if flagged:
                proposals[cluster.cluster_id] = sorted(flagged)

        # an outlier always leaves its cluster, for another one nearby or the pool
        moved = 0
        evicted: Set[int] = set()
        for cid, outliers in sorted(proposals.items()):
            for pid in outliers:
                self._remove_member(cid, pid, frame, "outlier", events)
                evicted.add(pid)
                target = self.assign_to_nearest(state.pedestrians[pid], exclude=cid)
                if target is not None:
                    moved += 1
                    self._add_member(target, pid, frame, events)
                else:
                    state.temporary.add(pid)

        if cfg.retry_temporary:
            for pid in sorted(state.temporary):
                if pid not in observed or pid in evicted:
                    continue
                target = self.assign_to_nearest(state.pedestrians[pid])
                if target is not None:
                    state.temporary.discard(pid)
                    self._add_member(target, pid, frame, events)

        pool = [state.pedestrians[pid] for pid in sorted(state.temporary) if pid in observed]
        created = 0
        if pool and len(pool) >= cfg.temp_trigger:
            assignment = nested_cluster(pool, cfg)
            for group in assignment.groups():
                self._create_cluster([pool[i] for i in group], frame, events)
            created = assignment.n_clusters
            state.temporary.difference_update(p.id for p in pool)

        for cluster in state.live_clusters():
            if not cluster.members:
                self._retire(cluster.cluster_id, frame, "empty", events)

        logger.debug("evaluation_tick", frame=frame, outliers=len(evicted), moved=moved,
                     created=created, temporary=len(state.temporary))
        return events

    def assign_to_nearest(self, ped: PedestrianState, exclude: Optional[int] = None) -> Optional[int]:
        """
        Live cluster other than ``exclude`` whose centroid is within ``d_th``
        and, when both headings are defined, within ``theta_th`` of ``ped``.

        Nearest centroid wins; ties go to the smaller angular distance, then
        the smaller cluster id. None when no cluster qualifies.
        """
        state = self._require_state()
        best: Optional[Tuple[float, float, int]] = None
        for cluster in state.live_clusters():
            if cluster.cluster_id == exclude:
                continue
            centroid = cluster.centroid
            distance = math.hypot(ped.x - centroid.X, ped.y - centroid.Y)
            if distance > self.cfg.d_th:
                continue
            angle = 0.0
            if ped.theta is not None and centroid.theta is not None:
                angle = smallest_angular_distance(ped.theta, centroid.theta)
                if angle > self.cfg.theta_th:
                    continue
            key = (distance, angle, cluster.cluster_id)
            if best is None or key < best:
                best = key
        return None if best is None else best[2]

    def snapshot(self) -> EngineState:
        return self._require_state().copy()

    def tracks(self) -> Dict[int, CentroidTrack]:
        return {cid: CentroidTrack(cid, tuple(samples)) for cid, samples in sorted(self._samples.items())}

    def result(self) -> RunResult:
        state = self._require_state()
        return RunResult(
            config=self.cfg,
            tracks=self.tracks(),
            events=list(self.events),
            memberships=dict(self.memberships),
            init_frame=self._init_frame,
            first_frame=self._first_frame,
            last_frame=state.frame,
        )

    def run(self, frames: Mapping[int, FrameObservations]) -> RunResult:
        """
        Initialize on the first evaluation window of ``frames`` and step
        through the rest. The window spans at least two frames.
        """
        populated = sorted(f for f, obs in frames.items() if obs)
        if not populated:
            raise EngineError("empty input")
        window_end = populated[0] + max(self.cfg.eval_period, 2)
        self.initialize({f: frames[f] for f in populated if f < window_end})
        for frame in range(self.state.frame + 1, populated[-1] + 1):
            self.step(frame, frames.get(frame, {}))
        return self.result()

    # ------------------------------------------------------------------
    # frame processing

    def _advance(self, frame: int, observations: FrameObservations) -> List[EngineEvent]:
        state = self.state
        cfg = self.cfg
        state.frame = frame
        events: List[EngineEvent] = []

        contiguous: Set[int] = set()
        present: Set[int] = set()
        for pid in sorted(observations):
            x, y = observations[pid]
            prev = state.pedestrians.get(pid)
            ped = self._observe(prev, pid, frame, x, y)
            if prev is not None and not ped.has_history:
                # back after too long: history restarts, a pooled id is offered
                # to the clusters again, a clustered one waits for the next tick
                state.temporary.discard(pid)
            if ped.has_history and prev.frame == frame - 1:
                contiguous.add(pid)
            state.pedestrians[pid] = ped
            state.last_seen[pid] = frame
            present.add(pid)

        for cluster in state.live_clusters():
            self._update_centroid(cluster, present, contiguous, events)

        for pid in sorted(present):
            if state.pedestrians[pid].cluster_id is None and pid not in state.temporary:
                target = self.assign_to_nearest(state.pedestrians[pid])
                if target is not None:
                    self._add_member(target, pid, frame, events)
                else:
                    state.temporary.add(pid)

        if frame % cfg.eval_period == 0:
            events.extend(self.evaluate_tick())

        if cfg.debug_checks:
            validate_partition(state, present)

        self.events.extend(events)
        self._record(frame)
        return events

    def _update_centroid(self, cluster: ClusterState, present: Set[int], contiguous: Set[int],
                         events: List[EngineEvent]) -> None:
        state = self.state
        cid = cluster.cluster_id
        if any(pid in present for pid in cluster.members):
            state.coast_frames[cid] = 0
            status = ClusterStatus.ACTIVE
        else:
            state.coast_frames[cid] = state.coast_frames.get(cid, 0) + 1
            if state.coast_frames[cid] > self.cfg.resolved_coast_limit:
                self._retire(cid, state.frame, "coasted", events)
                return
            status = ClusterStatus.COASTING

        displacements = [
            (state.pedestrians[pid].vx, state.pedestrians[pid].vy)
            for pid in sorted(cluster.members) if pid in contiguous
        ]
        sample, delta = delta_update(cluster.centroid, displacements, state.coast_deltas.get(cid, (0.0, 0.0)))
        if displacements:
            state.coast_deltas[cid] = delta
        state.clusters[cid] = replace(cluster, centroid=sample, status=status)
        self._samples[cid].append(sample)

    def _observe(self, prev: Optional[PedestrianState], pid: int, frame: int,
                 x: float, y: float) -> PedestrianState:
        x, y = float(x), float(y)
        if prev is not None and frame - prev.frame <= self.cfg.resolved_coast_limit:
            vx, vy = x - prev.x, y - prev.y
            theta = direction_angle(vx, vy)
            return PedestrianState(
                id=pid, frame=frame, x=x, y=y,
                theta=prev.theta if theta is None else theta,
                vx=vx, vy=vy, cluster_id=prev.cluster_id, has_history=True,
            )
        return PedestrianState(id=pid, frame=frame, x=x, y=y,
                               cluster_id=None if prev is None else prev.cluster_id)

    # ------------------------------------------------------------------
    # membership mutations

    def _create_cluster(self, members: List[PedestrianState], frame: int, events: List[EngineEvent]) -> int:
        state = self.state
        cid = state.next_cluster_id
        state.next_cluster_id += 1

        centroid = init_centroid(members, frame)
        moving = [(p.vx, p.vy) for p in members if p.has_history]
        if moving:
            state.coast_deltas[cid] = (
                sum(v[0] for v in moving) / len(moving),
                sum(v[1] for v in moving) / len(moving),
            )
        else:
            state.coast_deltas[cid] = (0.0, 0.0)
        state.coast_frames[cid] = 0
        state.clusters[cid] = ClusterState(
            cluster_id=cid,
            members=frozenset(p.id for p in members),
            centroid=centroid,
            created_frame=frame,
        )
        self._samples[cid] = [centroid]

        events.append(EngineEvent(frame, EventKind.CLUSTER_CREATED, cid))
        for ped in sorted(members, key=lambda p: p.id):
            state.pedestrians[ped.id] = state.pedestrians[ped.id].with_cluster(cid)
            events.append(EngineEvent(frame, EventKind.MEMBER_ADDED, cid, ped.id, "created"))
        logger.debug("cluster_created", cluster_id=cid, frame=frame, members=len(members))
        return cid

    def _add_member(self, cid: int, pid: int, frame: int, events: List[EngineEvent]) -> None:
        state = self.state
        cluster = state.clusters[cid]
        state.clusters[cid] = replace(cluster, members=cluster.members | {pid}, status=ClusterStatus.ACTIVE)
        state.coast_frames[cid] = 0
        state.pedestrians[pid] = state.pedestrians[pid].with_cluster(cid)
        events.append(EngineEvent(frame, EventKind.MEMBER_ADDED, cid, pid))

    def _remove_member(self, cid: int, pid: int, frame: int, reason: str, events: List[EngineEvent]) -> None:
        state = self.state
        cluster = state.clusters[cid]
        if pid not in cluster.members:
            return
        state.clusters[cid] = cluster.with_members(cluster.members - {pid})
        if pid in state.pedestrians:
            state.pedestrians[pid] = state.pedestrians[pid].with_cluster(None)
        events.append(EngineEvent(frame, EventKind.MEMBER_EVICTED, cid, pid, reason))

    def _retire(self, cid: int, frame: int, reason: str, events: List[EngineEvent]) -> None:
        state = self.state
        for pid in sorted(state.clusters[cid].members):
            self._remove_member(cid, pid, frame, "retired", events)
        state.clusters[cid] = replace(state.clusters[cid], status=ClusterStatus.RETIRED)
        state.coast_deltas.pop(cid, None)
        state.coast_frames.pop(cid, None)
        events.append(EngineEvent(frame, EventKind.CLUSTER_RETIRED, cid, reason=reason))
        logger.debug("cluster_retired", cluster_id=cid, frame=frame, reason=reason)

    # ------------------------------------------------------------------

    def _record(self, frame: int) -> None:
        self.memberships[frame] = {c.cluster_id: c.members for c in self.state.live_clusters()}

    def _require_state(self) -> EngineState:
        if self.state is None:
            raise EngineError("engine is not initialized")
        return self.state
