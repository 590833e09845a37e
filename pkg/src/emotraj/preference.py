"""Pseudo-preference pairs from emotion-augmented commands, and DPO scoring.

Trajectory log-likelihoods are supplied by the caller; nothing here
evaluates or trains a policy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Mapping, Sequence

import numpy as np

from .emotion import VadVector
from .errors import EmotrajError, EmptyVariants, MissingTrajectory, NonFiniteInput


@dataclass(frozen=True)
class CommandVariant:
    command: str
    vad: VadVector


@dataclass(frozen=True)
class AugmentedCommandSet:
    id: Any
    original: CommandVariant
    variants: tuple[CommandVariant, ...]


@dataclass(frozen=True)
class PreferencePair:
    id: Any
    preferred: Any
    rejected: Any
    k_neg: int
    vad_deviation: float
    negative_command: str = ""


@dataclass(frozen=True)
class DpoConfig:
    beta: float = 0.1

    def __post_init__(self):
        if not (self.beta > 0 and math.isfinite(self.beta)):
            raise EmotrajError(f"DPO beta must be positive, got {self.beta}")


def vad_distance(a: Sequence[float], b: Sequence[float]) -> float:
    return math.sqrt(sum((x - y) ** 2 for x, y in zip(a, b)))


def select_negative(cset: AugmentedCommandSet) -> int:
    """Index of the variant whose VAD lies farthest from the original (lowest index on ties)."""
    if not cset.variants:
        raise EmptyVariants(f"set {cset.id!r} has no variants")
    best, best_d = 0, -1.0
    for k, var in enumerate(cset.variants):
        d = vad_distance(var.vad, cset.original.vad)
        if d > best_d:
            best, best_d = k, d
    return best


def _finite(*xs):
    for x in xs:
        if not math.isfinite(x):
            raise NonFiniteInput(f"log-likelihood must be finite, got {x}")


def reward_margin(logp_preferred: float, logp_rejected: float) -> float:
    _finite(logp_preferred, logp_rejected)
    return logp_preferred - logp_rejected


def dpo_loss(logp_preferred: float, logp_rejected: float, config: DpoConfig = DpoConfig()) -> float:
    """``-log sigmoid(beta * margin)`` evaluated as a softplus without overflow."""
    z = -config.beta * reward_margin(logp_preferred, logp_rejected)
    if z > 0:
        return z + math.log1p(math.exp(-z))
    return math.log1p(math.exp(z))


def batch_scores(logp_preferred, logp_rejected, config: DpoConfig = DpoConfig()):
    """Per-pair margins and losses plus their means."""
    margins = [reward_margin(w, l) for w, l in zip(logp_preferred, logp_rejected, strict=True)]
    losses = [dpo_loss(w, l, config) for w, l in zip(logp_preferred, logp_rejected, strict=True)]
    mean_margin = float(np.mean(margins)) if margins else float("nan")
    mean_loss = float(np.mean(losses)) if losses else float("nan")
    return margins, losses, mean_margin, mean_loss


def build_pair(cset: AugmentedCommandSet, gt_traj, rejected_trajs: Mapping[int, Any]) -> PreferencePair:
    k = select_negative(cset)
    if gt_traj is None:
        raise MissingTrajectory(f"set {cset.id!r}: no ground-truth trajectory")
    if k not in rejected_trajs:
        raise MissingTrajectory(f"set {cset.id!r}: no rejected trajectory for variant {k}")
    return PreferencePair(
        id=cset.id,
        preferred=gt_traj,
        rejected=rejected_trajs[k],
        k_neg=k,
        vad_deviation=vad_distance(cset.variants[k].vad, cset.original.vad),
        negative_command=cset.variants[k].command,
    )


def build_pairs(sets: Sequence[AugmentedCommandSet], gt_trajs: Mapping[Any, Any],
                rejected_trajs: Mapping[Any, Mapping[int, Any]]) -> list[PreferencePair]:
    pairs = []
    for cset in sets:
        if cset.id not in gt_trajs:
            raise MissingTrajectory(f"set {cset.id!r}: no ground-truth trajectory")
        pairs.append(build_pair(cset, gt_trajs[cset.id], rejected_trajs.get(cset.id, {})))
    return pairs
