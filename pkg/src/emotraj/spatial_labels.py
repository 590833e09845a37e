"""Spatial supervision targets: normalized boxes, detection filtering,
coarse direction classes and depth."""

from __future__ import annotations

import enum
import math
from collections import Counter
from dataclasses import dataclass
from typing import NamedTuple, Sequence

from .errors import InvalidBox, InvalidDimensions, NonFiniteInput, ZeroCentroid
from .traj_metrics import BBox

CONFIDENCE_THRESHOLD = 0.3


class DirectionClass(str, enum.Enum):
    DIRECTLY_AHEAD = "directly_ahead"
    FRONT_LEFT = "front_left"
    FRONT_RIGHT = "front_right"
    LEFT = "left"
    RIGHT = "right"

    def mirrored(self) -> "DirectionClass":
        return _MIRROR[self]


_MIRROR = {
    DirectionClass.DIRECTLY_AHEAD: DirectionClass.DIRECTLY_AHEAD,
    DirectionClass.FRONT_LEFT: DirectionClass.FRONT_RIGHT,
    DirectionClass.FRONT_RIGHT: DirectionClass.FRONT_LEFT,
    DirectionClass.LEFT: DirectionClass.RIGHT,
    DirectionClass.RIGHT: DirectionClass.LEFT,
}


@dataclass(frozen=True)
class DirectionConfig:
    ahead_deg: float = 15.0
    side_deg: float = 60.0

    def __post_init__(self):
        if not 0.0 < self.ahead_deg < self.side_deg < 180.0:
            raise ValueError("direction boundaries need 0 < ahead_deg < side_deg < 180")


@dataclass(frozen=True)
class Detection3D:
    class_name: str
    x: float
    y: float
    confidence: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise NonFiniteInput("detection centroid must be finite")
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence must be in [0, 1], got {self.confidence}")


@dataclass(frozen=True)
class RawBBox:
    x_min: float
    y_min: float
    x_max: float
    y_max: float
    width: float
    height: float


class FilterResult(NamedTuple):
    detections: list
    ambiguous: bool


def normalize_bbox(raw: RawBBox) -> BBox:
    if not (raw.width > 0 and raw.height > 0):
        raise InvalidDimensions(f"image size must be positive, got {raw.width}x{raw.height}")
    if not (0 <= raw.x_min <= raw.x_max <= raw.width and 0 <= raw.y_min <= raw.y_max <= raw.height):
        raise InvalidBox(f"box {raw} does not fit the image")
    return BBox(raw.x_min / raw.width, raw.y_min / raw.height,
                raw.x_max / raw.width, raw.y_max / raw.height)


def denormalize_bbox(box: BBox, width: float, height: float) -> RawBBox:
    return RawBBox(box.x_min * width, box.y_min * height, box.x_max * width, box.y_max * height,
                   width, height)


def filter_detections(dets: Sequence[Detection3D], threshold: float = CONFIDENCE_THRESHOLD) -> FilterResult:
    """Keep detections scoring strictly above ``threshold``, then remove every
    class that still occurs more than once. ``ambiguous`` is set when any
    removal of that second kind happened."""
    if not 0.0 <= threshold <= 1.0:
        raise ValueError(f"threshold must be in [0, 1], got {threshold}")
    kept = [d for d in dets if d.confidence > threshold]
    counts = Counter(d.class_name for d in kept)
    unique = [d for d in kept if counts[d.class_name] == 1]
    return FilterResult(unique, len(unique) != len(kept))


def direction_class(x: float, y: float, config: DirectionConfig = DirectionConfig()) -> DirectionClass:
    if x == 0.0 and y == 0.0:
        raise ZeroCentroid("direction is undefined at the ego origin")
    theta = math.degrees(math.atan2(y, x))
    if abs(theta) <= config.ahead_deg:
        return DirectionClass.DIRECTLY_AHEAD
    if config.ahead_deg < theta <= config.side_deg:
        return DirectionClass.FRONT_LEFT
    if -config.side_deg <= theta < -config.ahead_deg:
        return DirectionClass.FRONT_RIGHT
    return DirectionClass.LEFT if theta > 0 else DirectionClass.RIGHT


def depth_target(target, ego=(0.0, 0.0)) -> float:
    return math.hypot(target[0] - ego[0], target[1] - ego[1])
