"""Ego-frame conventions and primitive planar geometry.

All coordinates are metres in a right-handed ego frame: +X points along the
vehicle's heading and +Y points to its left. Headings are radians measured
counterclockwise from +X.

Trajectories are plain ``(N, 2)`` float64 arrays; use :func:`as_trajectory`
to validate anything array-like.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DegenerateTrajectory, EmotrajError, NonFiniteInput

EPS_SEG = 1e-9


def wrap_angle(angle: float) -> float:
    """Wrap ``angle`` into ``(-pi, pi]``."""
    wrapped = math.fmod(angle + math.pi, 2.0 * math.pi)
    if wrapped <= 0.0:
        wrapped += 2.0 * math.pi
    return wrapped - math.pi


def as_point(p) -> np.ndarray:
    arr = np.asarray(p, dtype=np.float64).reshape(-1)
    if arr.shape != (2,):
        raise EmotrajError(f"expected a 2D point, got shape {np.shape(p)}")
    if not np.all(np.isfinite(arr)):
        raise NonFiniteInput(f"non-finite point {p!r}")
    return arr


def as_trajectory(points) -> np.ndarray:
    """Validate ``points`` and return them as a fresh ``(N, 2)`` array."""
    arr = np.array(points, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise EmotrajError(f"trajectory must have shape (N, 2), got {arr.shape}")
    if arr.shape[0] == 0:
        raise DegenerateTrajectory("trajectory is empty")
    if not np.all(np.isfinite(arr)):
        raise NonFiniteInput("trajectory contains non-finite coordinates")
    return arr


@dataclass(frozen=True)
class EgoPose:
    """Vehicle pose in a source (map) frame."""

    x: float
    y: float
    heading: float = 0.0

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.x, self.y, self.heading)):
            raise NonFiniteInput("pose must be finite")
        object.__setattr__(self, "heading", wrap_angle(self.heading))


@dataclass(frozen=True)
class PixelFrame:
    """Raster to metric conversion.

    ``origin`` is the pixel location of the ego centroid. ``forward_axis``
    names the pixel axis that maps to ego +X ("u" for columns, "v" for rows);
    the ``flip_*`` flags negate the resulting metric axis, e.g. ``flip_y=True``
    for images whose row index grows downward while ego +Y points up/left.
    """

    resolution: float = 10.0
    origin: tuple[float, float] = (0.0, 0.0)
    forward_axis: str = "u"
    flip_x: bool = False
    flip_y: bool = False

    def __post_init__(self):
        if not (self.resolution > 0 and math.isfinite(self.resolution)):
            raise EmotrajError("resolution must be a positive number of pixels per metre")
        if self.forward_axis not in ("u", "v"):
            raise EmotrajError("forward_axis must be 'u' or 'v'")


def global_to_ego(point, pose: EgoPose) -> np.ndarray:
    p = as_point(point)
    dx, dy = p[0] - pose.x, p[1] - pose.y
    c, s = math.cos(pose.heading), math.sin(pose.heading)
    return np.array([c * dx + s * dy, -s * dx + c * dy])


def ego_to_global(point, pose: EgoPose) -> np.ndarray:
    p = as_point(point)
    c, s = math.cos(pose.heading), math.sin(pose.heading)
    return np.array([c * p[0] - s * p[1] + pose.x, s * p[0] + c * p[1] + pose.y])


def trajectory_to_ego(points, pose: EgoPose) -> np.ndarray:
    traj = as_trajectory(points)
    c, s = math.cos(pose.heading), math.sin(pose.heading)
    rot = np.array([[c, s], [-s, c]])
    return (traj - np.array([pose.x, pose.y])) @ rot.T


def pixels_to_meters(px, frame: PixelFrame) -> np.ndarray:
    """Convert pixel coordinates ``(u, v)`` into ego-frame metres."""
    p = as_point(px)
    du = (p[0] - frame.origin[0]) / frame.resolution
    dv = (p[1] - frame.origin[1]) / frame.resolution
    x, y = (du, dv) if frame.forward_axis == "u" else (dv, du)
    if frame.flip_x:
        x = -x
    if frame.flip_y:
        y = -y
    return np.array([x, y])


def merge_close_points(traj, eps: float = EPS_SEG) -> np.ndarray:
    """Drop points closer than ``eps`` to the last kept point."""
    traj = as_trajectory(traj)
    keep = [traj[0]]
    for p in traj[1:]:
        if math.hypot(p[0] - keep[-1][0], p[1] - keep[-1][1]) >= eps:
            keep.append(p)
    return np.array(keep)


def headings(traj, eps: float = EPS_SEG) -> np.ndarray:
    pts = merge_close_points(traj, eps)
    if len(pts) < 2:
        raise DegenerateTrajectory("need at least 2 distinct points for a heading")
    d = np.diff(pts, axis=0)
    return np.arctan2(d[:, 1], d[:, 0])


def turn_angles_from_headings(theta: Sequence[float]) -> np.ndarray:
    return np.array([wrap_angle(b - a) for a, b in zip(theta[:-1], theta[1:])])


def turn_angles(traj, eps: float = EPS_SEG) -> np.ndarray:
    theta = headings(traj, eps)
    if len(theta) < 2:
        raise DegenerateTrajectory("need at least 3 distinct points for a turn")
    return turn_angles_from_headings(theta)


def path_length(traj) -> float:
    traj = as_trajectory(traj)
    if len(traj) < 2:
        return 0.0
    return float(np.sum(np.hypot(*np.diff(traj, axis=0).T)))


def point_to_segment_distance(p, a, b) -> float:
    """Distance from ``p`` to the closed segment ``[a, b]``."""
    px, py = float(p[0]), float(p[1])
    ax, ay = float(a[0]), float(a[1])
    bx, by = float(b[0]), float(b[1])
    vx, vy = bx - ax, by - ay
    denom = vx * vx + vy * vy
    if denom == 0.0:
        return math.hypot(px - ax, py - ay)
    t = ((px - ax) * vx + (py - ay) * vy) / denom
    if t <= 0.0:
        return math.hypot(px - ax, py - ay)
    if t >= 1.0:
        return math.hypot(px - bx, py - by)
    return math.hypot(px - (ax + t * vx), py - (ay + t * vy))


def resample_uniform(traj, n: int) -> np.ndarray:
    """Resample a polyline to ``n`` points evenly spaced in arc length."""
    traj = as_trajectory(traj)
    if n < 1:
        raise EmotrajError("resample size must be >= 1")
    if len(traj) == 1:
        return np.repeat(traj, n, axis=0)
    seg = np.hypot(*np.diff(traj, axis=0).T)
    s = np.concatenate([[0.0], np.cumsum(seg)])
    if s[-1] == 0.0:
        return np.repeat(traj[:1], n, axis=0)
    targets = np.linspace(0.0, s[-1], n)
    return np.column_stack([np.interp(targets, s, traj[:, 0]), np.interp(targets, s, traj[:, 1])])
