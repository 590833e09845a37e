"""Geometric descriptors of a single trajectory.

Four shape features used to relate driving behaviour to emotional intent:
straightness (chord over path length), mean absolute turning angle,
variance of turning angles, and mean lateral deviation from the chord line.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from .errors import DegenerateTrajectory
from .geometry import EPS_SEG, as_trajectory, path_length, turn_angles

EPS_CHORD = 1e-9
FEATURE_NAMES = ("straightness", "mean_turn", "angle_variance", "sinuosity")


def straightness(traj, eps: float = EPS_SEG) -> float:
    traj = as_trajectory(traj)
    if len(traj) < 2:
        raise DegenerateTrajectory("straightness needs at least 2 points")
    length = path_length(traj)
    if length < eps:
        return 1.0
    chord = math.hypot(*(traj[-1] - traj[0]))
    return min(1.0, chord / length)


def mean_turn(traj, eps: float = EPS_SEG) -> float:
    return float(np.mean(np.abs(turn_angles(traj, eps))))


def angle_variance(traj, eps: float = EPS_SEG) -> float:
    """Population variance of the wrapped turning angles (plain, not circular)."""
    delta = turn_angles(traj, eps)
    return float(np.mean((delta - delta.mean()) ** 2))


def sinuosity_lateral(traj, eps_chord: float = EPS_CHORD) -> float:
    """Mean perpendicular distance of every point to the infinite start-end line.

    Falls back to the mean distance from the first point when the chord is
    shorter than ``eps_chord``.
    """
    traj = as_trajectory(traj)
    if len(traj) < 2:
        raise DegenerateTrajectory("sinuosity needs at least 2 points")
    start = traj[0]
    chord = traj[-1] - start
    norm = math.hypot(*chord)
    rel = start - traj
    if norm < eps_chord:
        return float(np.mean(np.hypot(rel[:, 0], rel[:, 1])))
    cross = chord[0] * rel[:, 1] - chord[1] * rel[:, 0]
    return float(np.mean(np.abs(cross)) / norm)


@dataclass(frozen=True)
class FeatureVector:
    """Shape features; ``None`` marks a feature undefined for the input."""

    straightness: Optional[float]
    mean_turn: Optional[float]
    angle_variance: Optional[float]
    sinuosity: Optional[float]

    def as_dict(self) -> dict:
        return asdict(self)


def extract_features(traj, eps: float = EPS_SEG) -> FeatureVector:
    traj = as_trajectory(traj)
    if len(traj) < 2:
        return FeatureVector(None, None, None, None)
    try:
        delta = turn_angles(traj, eps)
    except DegenerateTrajectory:
        turn = var = None
    else:
        turn = float(np.mean(np.abs(delta)))
        var = float(np.mean((delta - delta.mean()) ** 2))
    return FeatureVector(
        straightness=straightness(traj, eps),
        mean_turn=turn,
        angle_variance=var,
        sinuosity=sinuosity_lateral(traj),
    )
