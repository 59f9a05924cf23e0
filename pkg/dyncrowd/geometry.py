"""
Planar and angular distance primitives.

Angles are degrees, counterclockwise from the +x axis, in [0, 360). A zero
direction vector has no heading; functions return None for it.
"""

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np
from scipy.spatial.distance import cdist


@dataclass(frozen=True)
class Point2:
    """Image-plane location, pixels"""
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"non-finite point ({self.x}, {self.y})")


def _xy(p) -> Tuple[float, float]:
    if isinstance(p, Point2):
        return p.x, p.y
    return float(p[0]), float(p[1])


def direction_vector(prev, curr) -> Tuple[float, float]:
    """Componentwise ``curr - prev``."""
    px, py = _xy(prev)
    cx, cy = _xy(curr)
    return cx - px, cy - py


def normalize_angle(degrees: float) -> float:
    """Map any finite angle into [0, 360)."""
    angle = degrees % 360.0
    # -1e-17 % 360 rounds to 360.0
    return 0.0 if angle >= 360.0 else angle


def direction_angle(vx: float, vy: float) -> Optional[float]:
    """Four-quadrant heading of (vx, vy) in [0, 360), or None for a zero vector."""
    if vx == 0 and vy == 0:
        return None
    return normalize_angle(math.degrees(math.atan2(vy, vx)))


def smallest_angular_distance(a: float, b: float) -> float:
    """Wrapped absolute difference of two headings, in [0, 180]."""
    return abs(((a - b + 180.0) % 360.0) - 180.0)


def euclidean_distance(a, b) -> float:
    ax, ay = _xy(a)
    bx, by = _xy(b)
    return math.hypot(ax - bx, ay - by)


def circular_mean(angles: Iterable[float]) -> Optional[float]:
    """
    Heading of the mean unit vector of ``angles``.

    None when there are no angles or the unit vectors cancel out.
    """
    radians = np.deg2rad(np.fromiter(angles, dtype=float))
    if radians.size == 0:
        return None
    resultant = np.exp(1j * radians).sum()
    if abs(resultant) < 1e-12 * radians.size:
        return None
    return normalize_angle(math.degrees(np.angle(resultant)))


def angular_distance_matrix(angles: Sequence[float]) -> np.ndarray:
    """Pairwise smallest angular distances, shape (n, n)."""
    theta = np.asarray(angles, dtype=float)
    diff = theta[:, None] - theta[None, :]
    return np.abs(np.mod(diff + 180.0, 360.0) - 180.0)


def pairwise_distances(points: Sequence[Sequence[float]]) -> np.ndarray:
    """Pairwise Euclidean distances, shape (n, n)."""
    xy = np.asarray(points, dtype=float).reshape(-1, 2)
    return cdist(xy, xy)
