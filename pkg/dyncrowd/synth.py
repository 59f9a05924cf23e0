"""
dyncrowd Synthetic Scenes
=========================

Dense-crowd scene generator with tracker noise:
- Groups of pedestrians walking at constant velocity
- Leave events that turn one pedestrian away from its group
- Observation dropout, identity switches and Gaussian position jitter

Ground truth is noise free. Pedestrian ids start at 1; frames start at 0.
"""

import math
from dataclasses import dataclass, field, fields
from typing import Any, Dict, List, Mapping, Optional, Tuple

import numpy as np

from .core.exceptions import SceneSpecError
from .core.logging import get_logger
from .core.types import Point

logger = get_logger(__name__)

LAYOUTS = ("radial", "grid")


@dataclass(frozen=True)
class LeaveEvent:
    """From ``frame`` on, ``pedestrian`` walks towards ``heading`` on its own"""
    frame: int
    pedestrian: int
    heading: float


@dataclass(frozen=True)
class SceneSpec:
    """
    Scene parameters.

    ``spread`` bounds the diameter of a group at frame 0. ``separation`` is
    the distance between neighbouring group centres: along a circle for the
    ``radial`` layout (groups walk outwards by default) and on a square grid
    for ``grid`` (groups walk along +x by default). ``headings`` overrides
    the default group headings, one per group.
    ``id_switch`` is the per-frame chance that one visible pedestrian swaps
    observed ids with its nearest visible neighbour.
    """
    n_groups: int = 3
    members_per_group: Tuple[int, int] = (3, 6)
    headings: Optional[Tuple[float, ...]] = None
    speed: Tuple[float, float] = (2.0, 4.0)
    spread: float = 40.0
    separation: float = 500.0
    n_frames: int = 200
    dropout: float = 0.0
    id_switch: float = 0.0
    jitter: float = 0.0
    leave_events: Tuple[LeaveEvent, ...] = ()
    layout: str = "radial"
    head_size: float = 20.0
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "members_per_group", tuple(self.members_per_group))
        object.__setattr__(self, "speed", tuple(self.speed))
        if self.headings is not None:
            object.__setattr__(self, "headings", tuple(float(h) for h in self.headings))
        object.__setattr__(self, "leave_events", tuple(
            e if isinstance(e, LeaveEvent) else _leave_event(e) for e in self.leave_events
        ))

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "SceneSpec":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise SceneSpecError(f"unknown scene key '{unknown[0]}'", details={"key": unknown[0]})
        try:
            return cls(**data)
        except (TypeError, ValueError) as e:
            raise SceneSpecError(f"invalid scene spec: {e}", original_error=e)

    def validate(self) -> "SceneSpec":
        if self.n_groups < 1:
            raise SceneSpecError(f"n_groups must be at least 1, got {self.n_groups}")
        if self.n_frames < 1:
            raise SceneSpecError(f"n_frames must be at least 1, got {self.n_frames}")
        low, high = self.members_per_group
        if not 1 <= low <= high:
            raise SceneSpecError(f"members_per_group must satisfy 1 <= min <= max, got {self.members_per_group}")
        if not 0 <= self.speed[0] <= self.speed[1]:
            raise SceneSpecError(f"speed must satisfy 0 <= min <= max, got {self.speed}")
        if not self.separation > 0:
            raise SceneSpecError(f"separation must be positive, got {self.separation}")
        if self.spread < 0 or self.jitter < 0 or self.head_size < 0:
            raise SceneSpecError("spread, jitter and head_size must not be negative")
        for name in ("dropout", "id_switch"):
            if not 0 <= getattr(self, name) <= 1:
                raise SceneSpecError(f"{name} must be in [0, 1], got {getattr(self, name)}")
        if self.layout not in LAYOUTS:
            raise SceneSpecError(f"layout must be one of {', '.join(LAYOUTS)}, got '{self.layout}'")
        if self.headings is not None and len(self.headings) != self.n_groups:
            raise SceneSpecError(f"expected {self.n_groups} headings, got {len(self.headings)}")
        for event in self.leave_events:
            if not 0 <= event.frame < self.n_frames:
                raise SceneSpecError(f"leave event frame {event.frame} outside the scene")
        return self


def _leave_event(data: Any) -> LeaveEvent:
    if isinstance(data, Mapping):
        return LeaveEvent(int(data["frame"]), int(data["pedestrian"]), float(data["heading"]))
    frame, pedestrian, heading = data
    return LeaveEvent(int(frame), int(pedestrian), float(heading))


@dataclass
class SyntheticScene:
    """
    Generated scene.

    ``observations`` are keyed by observed id, ``truth`` and ``labels`` by true
    id; ``identities`` maps each frame's observed ids back to true ids.
    """
    spec: SceneSpec
    observations: Dict[int, Dict[int, Point]] = field(default_factory=dict)
    truth: Dict[int, Dict[int, Point]] = field(default_factory=dict)
    labels: Dict[int, Dict[int, int]] = field(default_factory=dict)
    identities: Dict[int, Dict[int, int]] = field(default_factory=dict)

    @property
    def n_pedestrians(self) -> int:
        return len(self.truth.get(0, {}))

    def observed_labels(self) -> Dict[int, Dict[int, int]]:
        """Ground-truth group of every observation, keyed by observed id."""
        return {
            frame: {oid: self.labels[frame][tid] for oid, tid in ids.items()}
            for frame, ids in self.identities.items()
        }


def _group_layout(spec: SceneSpec) -> Tuple[np.ndarray, List[float]]:
    n = spec.n_groups
    if spec.layout == "radial":
        angles = [360.0 * g / n for g in range(n)]
        radius = 0.0 if n == 1 else spec.separation / (2 * math.sin(math.pi / n))
        centres = np.array([(radius * math.cos(math.radians(a)), radius * math.sin(math.radians(a)))
                            for a in angles])
        headings = angles
    else:
        side = math.ceil(math.sqrt(n))
        centres = np.array([(spec.separation * (g % side), spec.separation * (g // side)) for g in range(n)],
                           dtype=float)
        headings = [0.0] * n
    if spec.headings is not None:
        headings = list(spec.headings)
    return centres, headings


def generate(spec: SceneSpec) -> SyntheticScene:
    """
    Generate ground truth and noisy observations for ``spec``.

    Identical specs give identical scenes.
    """
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    centres, headings = _group_layout(spec)

    positions: List[np.ndarray] = []
    velocities: List[np.ndarray] = []
    groups: List[int] = []
    low, high = spec.members_per_group
    for g in range(spec.n_groups):
        size = int(rng.integers(low, high + 1))
        speed = float(rng.uniform(*spec.speed))
        heading = math.radians(headings[g])
        velocity = speed * np.array([math.cos(heading), math.sin(heading)])
        # uniform in a disk of radius spread / 2
        radii = 0.5 * spec.spread * np.sqrt(rng.random(size))
        angles = rng.uniform(0.0, 2 * math.pi, size)
        for r, a in zip(radii, angles):
            positions.append(centres[g] + r * np.array([math.cos(a), math.sin(a)]))
            velocities.append(velocity.copy())
            groups.append(g)

    n_peds = len(positions)
    pos = np.array(positions)
    vel = np.array(velocities)
    label = np.array(groups)
    ids = np.arange(1, n_peds + 1)

    leaves: Dict[int, List[LeaveEvent]] = {}
    for event in spec.leave_events:
        if not 1 <= event.pedestrian <= n_peds:
            raise SceneSpecError(f"leave event names pedestrian {event.pedestrian}, scene has {n_peds}")
        leaves.setdefault(event.frame, []).append(event)

    scene = SyntheticScene(spec=spec)
    # observed id carried by each true pedestrian
    observed_id = ids.copy()
    next_label = spec.n_groups
    for frame in range(spec.n_frames):
        for event in leaves.get(frame, []):
            i = event.pedestrian - 1
            speed = float(np.hypot(*vel[i]))
            heading = math.radians(event.heading)
            vel[i] = speed * np.array([math.cos(heading), math.sin(heading)])
            label[i] = next_label
            next_label += 1
        if frame > 0:
            pos = pos + vel

        scene.truth[frame] = {int(ids[i]): (float(pos[i, 0]), float(pos[i, 1])) for i in range(n_peds)}
        scene.labels[frame] = {int(ids[i]): int(label[i]) for i in range(n_peds)}

        visible = rng.random(n_peds) >= spec.dropout
        if spec.id_switch > 0 and rng.random() < spec.id_switch:
            shown = np.flatnonzero(visible)
            if len(shown) >= 2:
                # the tracker confuses a pedestrian with its closest visible neighbour
                a = int(rng.choice(shown))
                others = shown[shown != a]
                b = int(others[np.argmin(np.hypot(*(pos[others] - pos[a]).T))])
                observed_id[a], observed_id[b] = observed_id[b], observed_id[a]
        noise = rng.normal(0.0, spec.jitter, size=(n_peds, 2)) if spec.jitter > 0 else np.zeros((n_peds, 2))
        noisy = pos + noise

        scene.observations[frame] = {
            int(observed_id[i]): (float(noisy[i, 0]), float(noisy[i, 1])) for i in np.flatnonzero(visible)
        }
        scene.identities[frame] = {int(observed_id[i]): int(ids[i]) for i in np.flatnonzero(visible)}

    logger.debug("scene_generated", pedestrians=n_peds, frames=spec.n_frames, groups=spec.n_groups)
    return scene
