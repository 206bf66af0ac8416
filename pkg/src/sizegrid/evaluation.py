"""Confusion-matrix metrics, ROC/AUC and business-impact costing."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import LengthMismatch, MissingPrice, OneClassOnly


@dataclass(frozen=True)
class ConfusionMatrix:
    tn: int
    fp: int
    fn: int
    tp: int

    @property
    def total(self) -> int:
        return self.tn + self.fp + self.fn + self.tp

    def as_dict(self) -> dict:
        return {"tn": self.tn, "fp": self.fp, "fn": self.fn, "tp": self.tp}


def _as_binary(values, name: str) -> np.ndarray:
    arr = np.asarray(values)
    out = arr.astype(np.int64, copy=False)
    if not np.isin(out, (0, 1)).all():
        raise ValueError(f"{name} must contain only 0/1, got {np.unique(arr)}")
    return out


def confusion(y_true, y_pred) -> ConfusionMatrix:
    t = _as_binary(y_true, "y_true")
    p = _as_binary(y_pred, "y_pred")
    if t.shape != p.shape:
        raise LengthMismatch(f"y_true has {t.shape}, y_pred has {p.shape}")
    tp = int(((t == 1) & (p == 1)).sum())
    tn = int(((t == 0) & (p == 0)).sum())
    fp = int(((t == 0) & (p == 1)).sum())
    fn = int(((t == 1) & (p == 0)).sum())
    return ConfusionMatrix(tn=tn, fp=fp, fn=fn, tp=tp)


def _ratio(num: int, den: int) -> float:
    return num / den if den else 0.0


def metrics(cm: ConfusionMatrix) -> dict:
    """Headline rates from a confusion matrix.

    Misclassification uses the full row count as denominator; the correct-only
    denominator some reports use is footnoted at render time, not here.
    Ratios with an empty denominator come back as 0.0.
    """
    return {
        "accuracy": _ratio(cm.tp + cm.tn, cm.total),
        "precision": _ratio(cm.tp, cm.tp + cm.fp),
        "recall": _ratio(cm.tp, cm.tp + cm.fn),
        "specificity": _ratio(cm.tn, cm.tn + cm.fp),
        "fpr": _ratio(cm.fp, cm.fp + cm.tn),
        "misclassification": _ratio(cm.fp + cm.fn, cm.total),
    }


def roc_points(y_true, scores) -> list[tuple[float, float]]:
    """(fpr, tpr) at every distinct score threshold, from (0,0) to (1,1).

    Rows tied on score enter together, so each distinct score yields exactly
    one point.
    """
    t = _as_binary(y_true, "y_true")
    s = np.asarray(scores, dtype=float)
    if t.shape != s.shape:
        raise LengthMismatch(f"y_true has {t.shape}, scores has {s.shape}")
    pos = int(t.sum())
    neg = int(t.size - pos)
    if pos == 0 or neg == 0:
        raise OneClassOnly("ROC needs both classes in y_true")
    order = np.argsort(-s, kind="stable")
    s_sorted = s[order]
    t_sorted = t[order]
    # indices where a run of equal scores ends
    boundary = np.nonzero(np.diff(s_sorted))[0]
    ends = np.concatenate([boundary, [t.size - 1]])
    cum_tp = np.cumsum(t_sorted)[ends]
    cum_fp = (ends + 1) - cum_tp
    points = [(0.0, 0.0)]
    points.extend((fp / neg, tp / pos) for fp, tp in zip(cum_fp, cum_tp))
    return points


def roc_auc(y_true, scores) -> float:
    """Probability a random positive outscores a random negative, ties at 1/2.

    Computed as the trapezoid area under the distinct-threshold ROC curve;
    the numerator is accumulated in exact integer counts, so the value agrees
    with direct pair counting to float precision.
    """
    t = _as_binary(y_true, "y_true")
    s = np.asarray(scores, dtype=float)
    if t.shape != s.shape:
        raise LengthMismatch(f"y_true has {t.shape}, scores has {s.shape}")
    pos = int(t.sum())
    neg = int(t.size - pos)
    if pos == 0 or neg == 0:
        raise OneClassOnly("AUC needs both classes in y_true")
    order = np.argsort(-s, kind="stable")
    s_sorted = s[order]
    t_sorted = t[order]
    boundary = np.nonzero(np.diff(s_sorted))[0]
    ends = np.concatenate([boundary, [t.size - 1]])
    cum_tp = np.cumsum(t_sorted, dtype=np.int64)[ends]
    cum_fp = (ends + 1) - cum_tp
    prev_tp = np.concatenate([[0], cum_tp[:-1]])
    prev_fp = np.concatenate([[0], cum_fp[:-1]])
    # 2 * sum of (fp step) * (tp at both sides of the step)
    twice_area = int(((cum_fp - prev_fp) * (cum_tp + prev_tp)).sum())
    return twice_area / (2.0 * pos * neg)


@dataclass(frozen=True)
class ImpactReport:
    """Cost of wrong selections: lost volume and revenue for misses,
    a plain count for needless inclusions (their cost is not priced)."""

    fn_count: int
    fn_units: float
    fn_revenue: float
    fp_count: int

    def as_dict(self) -> dict:
        return {
            "fn_count": self.fn_count,
            "fn_units": self.fn_units,
            "fn_revenue": self.fn_revenue,
            "fp_count": self.fp_count,
        }


def impact_report(y_true, y_pred, demand, grid_names, prices: dict) -> ImpactReport:
    """Sum actual adjusted demand (and its revenue) over false negatives.

    `prices` maps grid name to a unit price; a false-negative row whose grid
    is missing a price raises MissingPrice rather than under-reporting.
    """
    t = _as_binary(y_true, "y_true")
    p = _as_binary(y_pred, "y_pred")
    d = np.asarray(demand, dtype=float)
    names = list(grid_names)
    if not (t.shape == p.shape == d.shape) or len(names) != t.size:
        raise LengthMismatch("outcome vectors and demand/grid names must align")
    fn_mask = (t == 1) & (p == 0)
    fp_count = int(((t == 0) & (p == 1)).sum())
    units = 0.0
    revenue = 0.0
    for idx in np.nonzero(fn_mask)[0]:
        grid = names[idx]
        if grid not in prices:
            raise MissingPrice(f"no unit price for grid {grid!r}")
        units += d[idx]
        revenue += d[idx] * prices[grid]
    return ImpactReport(
        fn_count=int(fn_mask.sum()),
        fn_units=float(units),
        fn_revenue=float(revenue),
        fp_count=fp_count,
    )
