"""Model registry, cross-validated grid search and learning curves."""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import InvalidConfig, IoFailure
from .classifiers import (
    BoostedTreesModel,
    DecisionTreeModel,
    LogisticModel,
    NaiveBayesModel,
    RandomForestModel,
)

MODEL_KINDS = {
    "logistic": LogisticModel,
    "naive_bayes": NaiveBayesModel,
    "decision_tree": DecisionTreeModel,
    "random_forest": RandomForestModel,
    "boosted_trees": BoostedTreesModel,
}

# ties in grid search resolve toward the smaller value of these, in order
_TIE_PRIORITY = ("max_depth", "n_estimators", "learning_rate")


@dataclass(frozen=True)
class ModelSpec:
    """A model kind plus its hyperparameters, nothing fitted."""

    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise InvalidConfig(
                f"unknown model kind {self.kind!r}, expected one of {sorted(MODEL_KINDS)}"
            )

    def build(self):
        return MODEL_KINDS[self.kind](**self.params)


def train(spec: ModelSpec, X: np.ndarray, y: np.ndarray):
    """Fit a fresh model per the spec and return it."""
    return spec.build().fit(X, y)


def predict_scores(model, X: np.ndarray) -> np.ndarray:
    return model.predict_scores(X)


def predict_labels(model, X: np.ndarray, threshold: float = 0.5) -> np.ndarray:
    return (model.predict_scores(X) >= threshold).astype(int)


def accuracy(model, X, y) -> float:
    return float((predict_labels(model, X) == np.asarray(y)).mean())


def save_model(model, path) -> None:
    doc = {"version": 1, **model.to_dict()}
    try:
        Path(path).write_text(json.dumps(doc, sort_keys=True))
    except OSError as exc:
        raise IoFailure(f"cannot write model to {path}: {exc}") from exc


def load_model(path):
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as exc:
        raise IoFailure(f"cannot read model from {path}: {exc}") from exc
    kind = doc["kind"]
    if kind not in MODEL_KINDS:
        raise InvalidConfig(f"unknown model kind {kind!r} in {path}")
    return MODEL_KINDS[kind].from_dict(doc)


def _lattice_points(grid: dict) -> list[dict]:
    """All parameter combinations, ordered so earlier points have smaller
    values on the tie-priority axes; the first best point wins ties."""
    keys = [k for k in _TIE_PRIORITY if k in grid]
    keys += sorted(k for k in grid if k not in _TIE_PRIORITY)
    values = [sorted(grid[k]) for k in keys]
    return [dict(zip(keys, combo)) for combo in itertools.product(*values)]


def _fold_indices(n: int, k: int, seed: int) -> list[np.ndarray]:
    order = np.random.default_rng(seed).permutation(n)
    return [order[i::k] for i in range(k)]


def grid_search_cv(
    kind: str,
    grid: dict,
    X: np.ndarray,
    y: np.ndarray,
    folds: int = 3,
    seed: int = 0,
    fixed: dict | None = None,
):
    """Exhaustive search over the parameter lattice with k-fold CV accuracy.

    Returns (best ModelSpec, results) where results is one record per
    lattice point: {params, fold_accuracies, mean_accuracy}. Ties go to the
    point met first in lattice order, i.e. smaller depth, then fewer
    estimators, then lower learning rate.
    """
    if folds < 2:
        raise InvalidConfig(f"need at least 2 folds, got {folds}")
    X = np.asarray(X, dtype=float)
    y = np.asarray(y).astype(int)
    points = _lattice_points(grid)
    if not points:
        raise InvalidConfig("empty parameter grid")
    fold_idx = _fold_indices(len(y), folds, seed)
    results = []
    best_mean = -np.inf
    best_spec = None
    for params in points:
        all_params = {**(fixed or {}), **params}
        spec = ModelSpec(kind, all_params)
        fold_acc = []
        for i in range(folds):
            val_rows = fold_idx[i]
            train_rows = np.concatenate([fold_idx[j] for j in range(folds) if j != i])
            model = train(spec, X[train_rows], y[train_rows])
            fold_acc.append(accuracy(model, X[val_rows], y[val_rows]))
        mean_acc = float(np.mean(fold_acc))
        results.append(
            {"params": params, "fold_accuracies": fold_acc, "mean_accuracy": mean_acc}
        )
        if mean_acc > best_mean:
            best_mean = mean_acc
            best_spec = spec
    return best_spec, results


def learning_curve(
    spec: ModelSpec,
    X_train: np.ndarray,
    y_train: np.ndarray,
    X_val: np.ndarray,
    y_val: np.ndarray,
    sizes: list[int],
    seed: int = 0,
):
    """Training and validation accuracy at growing training-set sizes.

    Rows are drawn from a single seed-shuffled order, so each size extends
    the previous sample. The final point at the full size uses every row.
    """
    X_train = np.asarray(X_train, dtype=float)
    y_train = np.asarray(y_train).astype(int)
    order = np.random.default_rng(seed).permutation(len(y_train))
    records = []
    for size in sizes:
        size = int(min(size, len(y_train)))
        rows = order[:size] if size < len(y_train) else np.arange(len(y_train))
        model = train(spec, X_train[rows], y_train[rows])
        records.append(
            {
                "size": size,
                "train_accuracy": accuracy(model, X_train[rows], y_train[rows]),
                "validation_accuracy": accuracy(model, X_val, y_val),
            }
        )
    return records
