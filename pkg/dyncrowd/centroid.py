"""
Cluster centroid initialization and delta update.

A centroid starts at the mean member location. After that it only moves by
the mean displacement of members present in both the previous and the
current frame, so members joining or leaving never make it jump.
"""

from typing import Optional, Sequence, Tuple

import numpy as np

from .core.exceptions import InsufficientMembersError
from .core.types import CentroidSample, PedestrianState
from .geometry import circular_mean, direction_angle

Displacement = Tuple[float, float]


def init_centroid(members: Sequence[PedestrianState], frame: Optional[int] = None) -> CentroidSample:
    """
    Mean member location; heading is the circular mean of member headings.

    ``frame`` defaults to the latest member frame.
    """
    members = list(members)
    if not members:
        raise InsufficientMembersError("cannot initialize a centroid without members")
    xy = np.array([(p.x, p.y) for p in members], dtype=float)
    X, Y = xy.mean(axis=0)
    theta = circular_mean(p.theta for p in members if p.theta is not None)
    return CentroidSample(
        frame=max(p.frame for p in members) if frame is None else frame,
        X=float(X),
        Y=float(Y),
        theta=theta,
    )


def delta_update(
    prev: CentroidSample,
    displacements: Sequence[Displacement],
    coast_delta: Displacement = (0.0, 0.0),
) -> Tuple[CentroidSample, Displacement]:
    """
    Advance ``prev`` by one frame.

    Moves by the mean of ``displacements``; with none it coasts on
    ``coast_delta``. The heading is recomputed from the step and kept when the
    step is zero. Returns the new sample and the step applied.
    """
    if len(displacements):
        step = np.asarray(displacements, dtype=float).reshape(-1, 2).mean(axis=0)
        dx, dy = float(step[0]), float(step[1])
    else:
        dx, dy = coast_delta
    theta = direction_angle(dx, dy)
    sample = CentroidSample(
        frame=prev.frame + 1,
        X=prev.X + dx,
        Y=prev.Y + dy,
        theta=prev.theta if theta is None else theta,
    )
    return sample, (dx, dy)
