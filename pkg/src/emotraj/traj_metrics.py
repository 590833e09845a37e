"""Trajectory evaluation metrics: ADE, FDE, discrete Frechet, DTW, SSPD, PA_g, box IoU."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import EmotrajError, InvalidBox, InvalidGate, LengthMismatch
from .geometry import as_trajectory, point_to_segment_distance, resample_uniform

DEFAULT_GATES = (2.0, 4.0)
DISTANCE_METRICS = ("ade", "fde", "frechet", "dtw", "sspd")


def _pairwise(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    diff = a[:, None, :] - b[None, :, :]
    return np.hypot(diff[..., 0], diff[..., 1])


def ade(pred, gt) -> float:
    pred, gt = as_trajectory(pred), as_trajectory(gt)
    if len(pred) != len(gt):
        raise LengthMismatch(f"ADE needs equal lengths, got {len(pred)} and {len(gt)}")
    return float(np.mean(np.hypot(*(pred - gt).T)))


def fde(pred, gt) -> float:
    pred, gt = as_trajectory(pred), as_trajectory(gt)
    return math.hypot(*(pred[-1] - gt[-1]))


def discrete_frechet(a, b) -> float:
    """Discrete Frechet distance via the coupling-measure recursion.

    ``ca[i, j] = max(d(i, j), min(ca[i-1, j], ca[i, j-1], ca[i-1, j-1]))``
    """
    a, b = as_trajectory(a), as_trajectory(b)
    d = _pairwise(a, b)
    n, m = d.shape
    ca = np.empty_like(d)
    for i in range(n):
        for j in range(m):
            if i == 0 and j == 0:
                prev = 0.0
            elif i == 0:
                prev = ca[0, j - 1]
            elif j == 0:
                prev = ca[i - 1, 0]
            else:
                prev = min(ca[i - 1, j], ca[i, j - 1], ca[i - 1, j - 1])
            ca[i, j] = max(d[i, j], prev)
    return float(ca[-1, -1])


def dtw(a, b) -> float:
    """Unconstrained DTW with Euclidean ground cost, returned as a raw sum."""
    a, b = as_trajectory(a), as_trajectory(b)
    d = _pairwise(a, b)
    n, m = d.shape
    acc = np.full((n + 1, m + 1), np.inf)
    acc[0, 0] = 0.0
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            acc[i, j] = d[i - 1, j - 1] + min(acc[i - 1, j], acc[i, j - 1], acc[i - 1, j - 1])
    return float(acc[n, m])


def spd(a, b) -> float:
    """Directed segment-path distance: mean over points of ``a`` of the
    distance to the polyline ``b``."""
    a, b = as_trajectory(a), as_trajectory(b)
    segs = [(b[0], b[0])] if len(b) == 1 else list(zip(b[:-1], b[1:]))
    total = 0.0
    for p in a:
        total += min(point_to_segment_distance(p, s, e) for s, e in segs)
    return total / len(a)


def sspd(a, b) -> float:
    return 0.5 * (spd(a, b) + spd(b, a))


def pa_g(pred, gt, g: float, mode: str = "final") -> float:
    """Planning accuracy within ``g`` metres.

    ``mode="final"`` returns the 0/1 indicator on the last waypoint;
    ``mode="per-point-mean"`` returns the fraction of aligned waypoints
    within the gate.
    """
    if not g > 0:
        raise InvalidGate(f"gate must be positive, got {g}")
    pred, gt = as_trajectory(pred), as_trajectory(gt)
    if mode == "final":
        return 1.0 if math.hypot(*(pred[-1] - gt[-1])) <= g else 0.0
    if mode == "per-point-mean":
        if len(pred) != len(gt):
            raise LengthMismatch("per-point PA needs equal lengths")
        return float(np.mean(np.hypot(*(pred - gt).T) <= g))
    raise EmotrajError(f"unknown PA mode {mode!r}")


@dataclass(frozen=True)
class BBox:
    x_min: float
    y_min: float
    x_max: float
    y_max: float

    def __post_init__(self):
        vals = (self.x_min, self.y_min, self.x_max, self.y_max)
        if not all(math.isfinite(v) for v in vals):
            raise InvalidBox("box coordinates must be finite")
        if self.x_min > self.x_max or self.y_min > self.y_max:
            raise InvalidBox(f"inverted box {vals}")

    @property
    def area(self) -> float:
        return (self.x_max - self.x_min) * (self.y_max - self.y_min)

    def as_list(self) -> list[float]:
        return [self.x_min, self.y_min, self.x_max, self.y_max]


def bbox_iou(a: BBox, b: BBox) -> float:
    iw = min(a.x_max, b.x_max) - max(a.x_min, b.x_min)
    ih = min(a.y_max, b.y_max) - max(a.y_min, b.y_min)
    inter = max(0.0, iw) * max(0.0, ih)
    union = a.area + b.area - inter
    if union <= 0.0:
        return 0.0
    return inter / union


@dataclass
class MetricResult:
    ade: float
    fde: float
    frechet: float
    dtw: float
    sspd: float
    pa: dict[float, float] = field(default_factory=dict)

    def as_row(self, gates: Sequence[float]) -> dict[str, float]:
        row = {name: getattr(self, name) for name in DISTANCE_METRICS}
        for g in gates:
            row[pa_column(g)] = self.pa[float(g)]
        return row


def pa_column(g: float) -> str:
    g = float(g)
    return f"pa_{int(g)}" if g.is_integer() else f"pa_{g:g}"


def evaluate_pair(pred, gt, gates=DEFAULT_GATES, pa_mode="final", resample=None) -> MetricResult:
    pred, gt = as_trajectory(pred), as_trajectory(gt)
    if resample:
        pa_pred, pa_gt = resample_uniform(pred, resample), resample_uniform(gt, resample)
        ade_val = ade(pa_pred, pa_gt)
    else:
        pa_pred, pa_gt = pred, gt
        ade_val = ade(pred, gt)
    return MetricResult(
        ade=ade_val,
        fde=fde(pred, gt),
        frechet=discrete_frechet(pred, gt),
        dtw=dtw(pred, gt),
        sspd=sspd(pred, gt),
        pa={float(g): pa_g(pa_pred, pa_gt, g, pa_mode) for g in gates},
    )


def evaluate_multi_gt(pred, gts, gates=DEFAULT_GATES, aggregate="min", pa_mode="final",
                      resample=None) -> MetricResult:
    """Score ``pred`` against several plausible ground truths.

    Distance metrics are reduced over ground truths with ``aggregate``
    (``"min"`` or ``"mean"``). PA is always taken against the ground truth
    with the smallest FDE.
    """
    if len(gts) == 0:
        raise EmotrajError("at least one ground-truth trajectory is required")
    if aggregate not in ("min", "mean"):
        raise EmotrajError(f"unknown aggregation {aggregate!r}")
    results = [evaluate_pair(pred, gt, gates, pa_mode, resample) for gt in gts]
    reduce = min if aggregate == "min" else (lambda xs: float(np.mean(xs)))
    best = min(range(len(results)), key=lambda k: results[k].fde)
    return MetricResult(
        **{name: reduce([getattr(r, name) for r in results]) for name in DISTANCE_METRICS},
        pa=dict(results[best].pa),
    )
