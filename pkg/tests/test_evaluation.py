import numpy as np
import pytest

from sizegrid.errors import LengthMismatch, MissingPrice, OneClassOnly
from sizegrid.evaluation import (
    ConfusionMatrix,
    confusion,
    impact_report,
    metrics,
    roc_auc,
    roc_points,
)

# Independent oracle: AUC as an explicit pairwise win count, ties at half.
def pair_count_auc(y_true, scores):
    y = np.asarray(y_true)
    s = np.asarray(scores, dtype=float)
    pos = s[y == 1]
    neg = s[y == 0]
    wins = (pos[:, None] > neg[None, :]).sum()
    ties = (pos[:, None] == neg[None, :]).sum()
    return (wins + 0.5 * ties) / (len(pos) * len(neg))


def test_confusion_counts():
    cm = confusion([0, 0, 1, 1, 1], [0, 1, 1, 0, 1])
    assert cm == ConfusionMatrix(tn=1, fp=1, fn=1, tp=2)
    assert cm.total == 5


def test_confusion_length_mismatch():
    with pytest.raises(LengthMismatch):
        confusion([0, 1], [0])


def test_metrics_on_reference_matrix():
    cm = ConfusionMatrix(tn=173_126, fp=12, fn=697, tp=48_156)
    m = metrics(cm)
    assert m["recall"] == pytest.approx(0.9857, abs=1e-4)
    assert m["specificity"] == pytest.approx(0.9999, abs=1e-4)
    assert m["fpr"] == pytest.approx(0.0001, abs=5e-5)
    assert m["misclassification"] == pytest.approx(0.0032, abs=1e-4)
    assert m["accuracy"] == pytest.approx(0.9968, abs=1e-4)
    assert m["precision"] == pytest.approx(48_156 / 48_168)


def test_metric_identities():
    rng = np.random.default_rng(7)
    y = rng.integers(0, 2, 500)
    p = rng.integers(0, 2, 500)
    m = metrics(confusion(y, p))
    assert m["accuracy"] + m["misclassification"] == pytest.approx(1.0)
    assert m["fpr"] + m["specificity"] == pytest.approx(1.0)


def test_metrics_zero_denominators_are_zero():
    m = metrics(ConfusionMatrix(tn=3, fp=0, fn=0, tp=0))
    assert m["precision"] == 0.0
    assert m["recall"] == 0.0


def test_auc_hand_example():
    assert roc_auc([0, 0, 1, 1], [0.1, 0.4, 0.35, 0.8]) == pytest.approx(0.75)


def test_auc_perfect_separation():
    assert roc_auc([0, 0, 1, 1], [0.1, 0.2, 0.8, 0.9]) == 1.0


def test_auc_all_scores_equal_is_half():
    assert roc_auc([0, 1, 0, 1], [0.5, 0.5, 0.5, 0.5]) == pytest.approx(0.5)


def test_auc_one_class_raises():
    with pytest.raises(OneClassOnly):
        roc_auc([1, 1, 1], [0.1, 0.2, 0.3])


def test_auc_matches_pair_count_oracle():
    rng = np.random.default_rng(11)
    for _ in range(50):
        n = int(rng.integers(5, 200))
        y = rng.integers(0, 2, n)
        if y.min() == y.max():
            y[0] = 1 - y[0]
        # coarse scores force plenty of ties
        s = rng.integers(0, 8, n) / 8.0
        assert abs(roc_auc(y, s) - pair_count_auc(y, s)) < 1e-12


def test_auc_invariant_under_monotone_transform():
    rng = np.random.default_rng(3)
    y = rng.integers(0, 2, 300)
    y[:2] = [0, 1]
    s = rng.normal(size=300)
    assert roc_auc(y, s) == pytest.approx(roc_auc(y, 1 / (1 + np.exp(-3 * s))))


def test_roc_points_structure():
    pts = roc_points([0, 0, 1, 1], [0.1, 0.4, 0.35, 0.8])
    assert pts[0] == (0.0, 0.0)
    assert pts[-1] == (1.0, 1.0)
    # one point per distinct score plus the origin
    assert len(pts) == 5
    fprs = [p[0] for p in pts]
    assert fprs == sorted(fprs)


def test_roc_points_group_ties_together():
    pts = roc_points([0, 1, 0, 1], [0.5, 0.5, 0.2, 0.9])
    # thresholds: 0.9, 0.5, 0.2 -> 3 points plus origin
    assert len(pts) == 4
    assert (0.5, 1.0) in pts


def test_impact_zero_false_negatives():
    rep = impact_report([1, 0], [1, 0], [100, 50], ["G1", "G2"], {"G1": 10.0, "G2": 5.0})
    assert rep.fn_units == 0.0
    assert rep.fn_revenue == 0.0
    assert rep.fn_count == 0


def test_impact_hand_case():
    # two misses: 100 units at 10.00 plus 50 units at 10.00 -> 150 units, 1500.00
    rep = impact_report(
        [1, 1, 0, 1],
        [0, 0, 1, 1],
        [100, 50, 70, 9],
        ["G1", "G1", "G1", "G1"],
        {"G1": 10.0},
    )
    assert rep.fn_count == 2
    assert rep.fn_units == 150.0
    assert rep.fn_revenue == pytest.approx(1500.0)
    assert rep.fp_count == 1


def test_impact_oracle_recount():
    rng = np.random.default_rng(23)
    n = 400
    y = rng.integers(0, 2, n)
    p = rng.integers(0, 2, n)
    d = rng.integers(0, 300, n).astype(float)
    grids = [f"G{int(g)}" for g in rng.integers(0, 5, n)]
    prices = {f"G{i}": float(5 + 3 * i) for i in range(5)}
    rep = impact_report(y, p, d, grids, prices)
    units = sum(d[i] for i in range(n) if y[i] == 1 and p[i] == 0)
    revenue = sum(d[i] * prices[grids[i]] for i in range(n) if y[i] == 1 and p[i] == 0)
    assert rep.fn_units == pytest.approx(units)
    assert rep.fn_revenue == pytest.approx(revenue)
    assert rep.fp_count == sum(1 for i in range(n) if y[i] == 0 and p[i] == 1)


def test_impact_missing_price_raises():
    with pytest.raises(MissingPrice):
        impact_report([1], [0], [10], ["G9"], {"G1": 10.0})
