"""Rank correlations and emotion/geometry alignment reports."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np
from scipy.stats import rankdata

from .errors import DegenerateInput, IdMismatch, LengthMismatch, ZeroBaseline
from .traj_features import FEATURE_NAMES

FEATURE_LABELS = {
    "straightness": "Straightness",
    "mean_turn": "Mean Turn",
    "angle_variance": "Angle Var.",
    "sinuosity": "Sinuosity",
}


def _columns(xs, ys):
    x = np.asarray(xs, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise LengthMismatch(f"columns differ in shape: {x.shape} vs {y.shape}")
    if len(x) < 2:
        raise DegenerateInput("need at least 2 observations")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise DegenerateInput("columns contain non-finite values")
    if np.all(x == x[0]) or np.all(y == y[0]):
        raise DegenerateInput("a column is constant; correlation is undefined")
    return x, y


def pearson(xs, ys) -> float:
    x, y = _columns(xs, ys)
    x = x - x.mean()
    y = y - y.mean()
    r = float(np.dot(x, y) / math.sqrt(np.dot(x, x) * np.dot(y, y)))
    return max(-1.0, min(1.0, r))


def spearman(xs, ys) -> float:
    """Pearson correlation of average ranks."""
    x, y = _columns(xs, ys)
    return pearson(rankdata(x), rankdata(y))


def kendall(xs, ys) -> float:
    """Kendall tau-b, O(n^2) pair count."""
    x, y = _columns(xs, ys)
    n = len(x)
    concordant = discordant = ties_x = ties_y = 0
    for i in range(n - 1):
        dx = np.sign(x[i + 1:] - x[i])
        dy = np.sign(y[i + 1:] - y[i])
        prod = dx * dy
        concordant += int(np.sum(prod > 0))
        discordant += int(np.sum(prod < 0))
        ties_x += int(np.sum(dx == 0))
        ties_y += int(np.sum(dy == 0))
    n0 = n * (n - 1) // 2
    tau = (concordant - discordant) / math.sqrt((n0 - ties_x) * (n0 - ties_y))
    return max(-1.0, min(1.0, tau))


CORRELATIONS = {"spearman": spearman, "kendall": kendall, "pearson": pearson}


def error_reduction(err_baseline: float, err_improved: float) -> float:
    if err_baseline == 0:
        raise ZeroBaseline("baseline error is zero")
    return 100.0 * (err_baseline - err_improved) / err_baseline


def improvement(rho_old: float, rho_new: float) -> float:
    """Relative change in percent, signed baseline as denominator."""
    if rho_old == 0:
        raise ZeroBaseline("baseline correlation is zero")
    return 100.0 * (rho_new - rho_old) / rho_old


def _check_ids(*tables: Mapping) -> list:
    ids = set(tables[0])
    missing = set()
    for t in tables[1:]:
        missing |= ids.symmetric_difference(t)
    if missing:
        raise IdMismatch(f"{len(missing)} record ids are not present in every input", missing)
    return sorted(ids, key=str)


def _aligned(ids, *getters):
    """Drop records where any column is null (undefined feature)."""
    rows = [tuple(g(i) for g in getters) for i in ids]
    rows = [r for r in rows if all(v is not None for v in r)]
    return [list(c) for c in zip(*rows)] if rows else [[] for _ in getters]


@dataclass
class PanelAEntry:
    gt_corr: float
    model_corr: float

    @property
    def abs_error(self) -> float:
        return abs(self.model_corr - self.gt_corr)


@dataclass
class AlignmentReportA:
    entries: dict[str, PanelAEntry] = field(default_factory=dict)

    def errors(self) -> dict[str, float]:
        return {f: e.abs_error for f, e in self.entries.items()}


@dataclass
class AlignmentReportB:
    correlations: dict[str, float] = field(default_factory=dict)


def arousal_alignment(arousal: Mapping, features_model: Mapping, features_gt: Mapping,
                      method: str = "spearman", features: Sequence[str] = FEATURE_NAMES) -> AlignmentReportA:
    """Correlation of arousal with each shape feature, for model and GT trajectories.

    ``features_*`` map record id -> {feature name: value or None}.
    """
    ids = _check_ids(arousal, features_model, features_gt)
    corr = CORRELATIONS[method]
    report = AlignmentReportA()
    for f in features:
        a_gt, v_gt = _aligned(ids, arousal.get, lambda i: features_gt[i].get(f))
        a_m, v_m = _aligned(ids, arousal.get, lambda i: features_model[i].get(f))
        report.entries[f] = PanelAEntry(gt_corr=corr(a_gt, v_gt), model_corr=corr(a_m, v_m))
    return report


def physical_alignment(features_model: Mapping, features_gt: Mapping, method: str = "spearman",
                       features: Sequence[str] = FEATURE_NAMES) -> AlignmentReportB:
    ids = _check_ids(features_model, features_gt)
    corr = CORRELATIONS[method]
    report = AlignmentReportB()
    for f in features:
        m, g = _aligned(ids, lambda i: features_model[i].get(f), lambda i: features_gt[i].get(f))
        report.correlations[f] = corr(m, g)
    return report


# --- Table-style report --------------------------------------------------------

@dataclass
class AlignmentTable:
    """Both panels for a baseline/improved model comparison."""

    gt_corr: dict[str, float]
    baseline_corr: Optional[dict[str, float]]
    model_corr: dict[str, float]
    baseline_phys: Optional[dict[str, float]]
    model_phys: dict[str, float]
    features: tuple[str, ...] = FEATURE_NAMES

    def abs_errors(self, which: str) -> dict[str, float]:
        corr = self.model_corr if which == "model" else self.baseline_corr
        return {f: abs(corr[f] - self.gt_corr[f]) for f in self.features}

    def error_reductions(self) -> dict[str, float]:
        base, new = self.abs_errors("baseline"), self.abs_errors("model")
        return {f: error_reduction(base[f], new[f]) for f in self.features}

    def improvements(self) -> dict[str, float]:
        return {f: improvement(self.baseline_phys[f], self.model_phys[f]) for f in self.features}

    def rows(self) -> list[dict]:
        """Flat rows for CSV output."""
        out = []

        def add(panel, metric, values):
            out.append({"panel": panel, "metric": metric, **values})

        add("A", "gt_corr", self.gt_corr)
        if self.baseline_corr is not None:
            add("A", "baseline_corr", self.baseline_corr)
            add("A", "baseline_abs_error", self.abs_errors("baseline"))
        add("A", "model_corr", self.model_corr)
        add("A", "model_abs_error", self.abs_errors("model"))
        if self.baseline_corr is not None:
            add("A", "error_reduction_pct", self.error_reductions())
        if self.baseline_phys is not None:
            add("B", "baseline_corr", self.baseline_phys)
        add("B", "model_corr", self.model_phys)
        if self.baseline_phys is not None:
            add("B", "improvement_pct", self.improvements())
        return out

    def render(self) -> str:
        head = ["Metric"] + [FEATURE_LABELS.get(f, f) for f in self.features]
        lines = []

        def row(label, values, fmt="{:.3f}"):
            lines.append([label] + [fmt.format(values[f]) for f in self.features])

        lines.append(["Panel A: Arousal Alignment Error"])
        row("GT Correlation (Ref)", self.gt_corr)
        if self.baseline_corr is not None:
            row("Baseline", self.baseline_corr)
            row("  abs. error", self.abs_errors("baseline"))
        row("Model", self.model_corr)
        row("  abs. error", self.abs_errors("model"))
        if self.baseline_corr is not None:
            row("Error Reduction", self.error_reductions(), "{:.1f}%")
        lines.append(["Panel B: Physical Alignment Quality"])
        if self.baseline_phys is not None:
            row("Baseline", self.baseline_phys)
        row("Model", self.model_phys)
        if self.baseline_phys is not None:
            row("Improvement", self.improvements(), "{:+.1f}%")
        widths = [max(len(head[0]), *(len(r[0]) for r in lines))] + [
            max(len(h), 8) for h in head[1:]
        ]
        text = []

        def fmt_row(r):
            if len(r) == 1:
                return r[0]
            return "  ".join([r[0].ljust(widths[0])] + [c.rjust(w) for c, w in zip(r[1:], widths[1:])])

        text.append(fmt_row(head))
        text.append("-" * len(text[0]))
        text.extend(fmt_row(r) for r in lines)
        return "\n".join(text) + "\n"


def build_alignment_table(arousal: Mapping, features_gt: Mapping, features_model: Mapping,
                          features_baseline: Optional[Mapping] = None,
                          method: str = "spearman") -> AlignmentTable:
    model_a = arousal_alignment(arousal, features_model, features_gt, method)
    model_b = physical_alignment(features_model, features_gt, method)
    base_corr = base_phys = None
    if features_baseline is not None:
        base_a = arousal_alignment(arousal, features_baseline, features_gt, method)
        base_corr = {f: e.model_corr for f, e in base_a.entries.items()}
        base_phys = physical_alignment(features_baseline, features_gt, method).correlations
    return AlignmentTable(
        gt_corr={f: e.gt_corr for f, e in model_a.entries.items()},
        baseline_corr=base_corr,
        model_corr={f: e.model_corr for f, e in model_a.entries.items()},
        baseline_phys=base_phys,
        model_phys=model_b.correlations,
    )
