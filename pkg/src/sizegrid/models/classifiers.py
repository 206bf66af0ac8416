"""The four classifiers, written against numpy only.

All of them expose fit(X, y) / predict_scores(X) with scores in [0, 1] and
serialize their fitted state to plain dicts. Binary targets throughout;
training on a single-class target raises DegenerateTarget.
"""
from __future__ import annotations

import numpy as np

from ..errors import DegenerateTarget, LengthMismatch, SchemaMismatch
from ._trees import Tree, TreeContext, build_context, grow_boosting_tree, grow_classification_tree


def _check_xy(X, y):
    X = np.asarray(X, dtype=float)
    y = np.asarray(y).astype(int)
    if X.ndim != 2:
        raise SchemaMismatch(f"X must be 2-D, got shape {X.shape}")
    if len(X) != len(y):
        raise LengthMismatch(f"X has {len(X)} rows, y has {len(y)}")
    if len(np.unique(y)) < 2:
        raise DegenerateTarget("training target has a single class")
    if not np.isin(y, (0, 1)).all():
        raise SchemaMismatch("target must be binary 0/1")
    return X, y


def _check_width(model, X):
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != model.n_features_:
        raise SchemaMismatch(
            f"expected {model.n_features_} features, got {X.shape}"
        )
    return X


def _sigmoid(z):
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


class LogisticModel:
    """L2-regularized logistic regression fit with mini-batch gradient
    descent under a 1/sqrt(step) learning-rate decay."""

    kind = "logistic"

    def __init__(self, epochs=50, batch_size=512, learning_rate=0.1, l2=1e-4, seed=0):
        self.epochs = int(epochs)
        self.batch_size = int(batch_size)
        self.learning_rate = float(learning_rate)
        self.l2 = float(l2)
        self.seed = int(seed)
        self.weights_ = None
        self.bias_ = 0.0
        self.n_features_ = None

    @staticmethod
    def loss_and_grad(wb: np.ndarray, X: np.ndarray, y: np.ndarray, l2: float):
        """Mean cross-entropy plus an L2 penalty on the weights (bias spared).

        wb packs [weights..., bias]. Exposed separately so the analytic
        gradient can be checked against finite differences.
        """
        w, b = wb[:-1], wb[-1]
        z = X @ w + b
        p = _sigmoid(z)
        eps = 1e-12
        ce = -np.mean(y * np.log(p + eps) + (1 - y) * np.log(1 - p + eps))
        loss = ce + 0.5 * l2 * float(w @ w)
        resid = (p - y) / len(y)
        grad_w = X.T @ resid + l2 * w
        grad_b = resid.sum()
        return loss, np.concatenate([grad_w, [grad_b]])

    def fit(self, X, y):
        X, y = _check_xy(X, y)
        n, f = X.shape
        self.n_features_ = f
        rng = np.random.default_rng(self.seed)
        w = np.zeros(f)
        b = 0.0
        step = 0
        for _ in range(self.epochs):
            order = rng.permutation(n)
            for start in range(0, n, self.batch_size):
                batch = order[start : start + self.batch_size]
                step += 1
                lr = self.learning_rate / np.sqrt(step)
                _, grad = self.loss_and_grad(
                    np.concatenate([w, [b]]), X[batch], y[batch], self.l2
                )
                w -= lr * grad[:-1]
                b -= lr * grad[-1]
        self.weights_ = w
        self.bias_ = float(b)
        return self

    def predict_scores(self, X):
        X = _check_width(self, X)
        return _sigmoid(X @ self.weights_ + self.bias_)

    def to_dict(self):
        return {
            "kind": self.kind,
            "params": {
                "epochs": self.epochs,
                "batch_size": self.batch_size,
                "learning_rate": self.learning_rate,
                "l2": self.l2,
                "seed": self.seed,
            },
            "state": {
                "weights": self.weights_.tolist(),
                "bias": self.bias_,
                "n_features": self.n_features_,
            },
        }

    @classmethod
    def from_dict(cls, d):
        m = cls(**d["params"])
        m.weights_ = np.asarray(d["state"]["weights"], dtype=float)
        m.bias_ = float(d["state"]["bias"])
        m.n_features_ = int(d["state"]["n_features"])
        return m


class NaiveBayesModel:
    """Gaussian naive Bayes on continuous columns, Bernoulli on 0/1 columns.

    binary_columns lists the matrix positions treated as Bernoulli; variance
    of the Gaussian columns is floored to keep degenerate features finite.
    Bernoulli rates use add-one smoothing for the same reason.
    """

    kind = "naive_bayes"

    VAR_FLOOR = 1e-9

    def __init__(self, binary_columns=None):
        self.binary_columns = sorted(binary_columns or [])
        self.n_features_ = None
        self.class_log_prior_ = None
        self.means_ = None
        self.vars_ = None
        self.bern_ = None

    def fit(self, X, y):
        X, y = _check_xy(X, y)
        self.n_features_ = X.shape[1]
        bin_cols = np.asarray(self.binary_columns, dtype=int)
        cont_cols = np.setdiff1d(np.arange(X.shape[1]), bin_cols)
        self._cont_cols = cont_cols
        self._bin_cols = bin_cols
        means, variances, bern, priors = [], [], [], []
        for cls in (0, 1):
            rows = X[y == cls]
            priors.append(len(rows) / len(X))
            means.append(rows[:, cont_cols].mean(axis=0))
            variances.append(
                np.maximum(rows[:, cont_cols].var(axis=0), self.VAR_FLOOR)
            )
            if len(bin_cols):
                ones = rows[:, bin_cols].sum(axis=0)
                bern.append((ones + 1.0) / (len(rows) + 2.0))
            else:
                bern.append(np.empty(0))
        self.class_log_prior_ = np.log(priors)
        self.means_ = np.vstack(means)
        self.vars_ = np.vstack(variances)
        self.bern_ = np.vstack(bern) if len(bin_cols) else np.zeros((2, 0))
        return self

    def class_log_likelihood(self, X):
        """Per-class unnormalized log posterior, one column per class."""
        X = _check_width(self, X)
        out = np.tile(self.class_log_prior_, (len(X), 1))
        xc = X[:, self._cont_cols]
        for cls in (0, 1):
            mu, var = self.means_[cls], self.vars_[cls]
            ll = -0.5 * (np.log(2 * np.pi * var) + (xc - mu) ** 2 / var)
            out[:, cls] += ll.sum(axis=1)
            if len(self._bin_cols):
                xb = X[:, self._bin_cols]
                p = self.bern_[cls]
                out[:, cls] += (
                    xb * np.log(p) + (1 - xb) * np.log(1 - p)
                ).sum(axis=1)
        return out

    def predict_scores(self, X):
        joint = self.class_log_likelihood(X)
        m = joint.max(axis=1, keepdims=True)
        norm = m[:, 0] + np.log(np.exp(joint - m).sum(axis=1))
        return np.exp(joint[:, 1] - norm)

    def to_dict(self):
        return {
            "kind": self.kind,
            "params": {"binary_columns": list(self.binary_columns)},
            "state": {
                "n_features": self.n_features_,
                "class_log_prior": self.class_log_prior_.tolist(),
                "means": self.means_.tolist(),
                "vars": self.vars_.tolist(),
                "bern": self.bern_.tolist(),
            },
        }

    @classmethod
    def from_dict(cls, d):
        m = cls(binary_columns=d["params"]["binary_columns"])
        st = d["state"]
        m.n_features_ = int(st["n_features"])
        m.class_log_prior_ = np.asarray(st["class_log_prior"])
        m.means_ = np.asarray(st["means"])
        m.vars_ = np.asarray(st["vars"])
        m.bern_ = np.asarray(st["bern"])
        bin_cols = np.asarray(m.binary_columns, dtype=int)
        m._bin_cols = bin_cols
        m._cont_cols = np.setdiff1d(np.arange(m.n_features_), bin_cols)
        return m


class DecisionTreeModel:
    """Single exact-greedy gini tree; the forest's building block."""

    kind = "decision_tree"

    def __init__(self, max_depth=12, min_samples_leaf=1):
        self.max_depth = int(max_depth)
        self.min_samples_leaf = int(min_samples_leaf)
        self.tree_ = None
        self.n_features_ = None

    def fit(self, X, y, context: TreeContext | None = None):
        X, y = _check_xy(X, y)
        self.n_features_ = X.shape[1]
        ctx = context or build_context(X)
        self.tree_ = grow_classification_tree(
            ctx,
            np.arange(len(X)),
            y,
            max_depth=self.max_depth,
            min_samples_leaf=self.min_samples_leaf,
            max_features=None,
            rng=None,
        )
        return self

    def predict_scores(self, X):
        X = _check_width(self, X)
        return self.tree_.predict(X)

    def to_dict(self):
        return {
            "kind": self.kind,
            "params": {
                "max_depth": self.max_depth,
                "min_samples_leaf": self.min_samples_leaf,
            },
            "state": {
                "n_features": self.n_features_,
                "tree": self.tree_.to_node_dict(),
            },
        }

    @classmethod
    def from_dict(cls, d):
        m = cls(**d["params"])
        m.n_features_ = int(d["state"]["n_features"])
        m.tree_ = Tree.from_node_dict(d["state"]["tree"])
        return m


class RandomForestModel:
    """Bagged gini trees with per-node feature subsampling, mean-vote scores.

    With one tree, no bootstrap and max_features None this is exactly the
    plain decision tree: same builder, same splits.
    """

    kind = "random_forest"

    def __init__(
        self,
        n_estimators=30,
        max_depth=14,
        min_samples_leaf=2,
        max_features="sqrt",
        bootstrap=True,
        seed=0,
    ):
        self.n_estimators = int(n_estimators)
        self.max_depth = int(max_depth)
        self.min_samples_leaf = int(min_samples_leaf)
        self.max_features = max_features
        self.bootstrap = bool(bootstrap)
        self.seed = int(seed)
        self.trees_ = []
        self.n_features_ = None

    def _resolve_max_features(self, n_features: int) -> int | None:
        if self.max_features is None:
            return None
        if self.max_features == "sqrt":
            return max(1, int(np.sqrt(n_features)))
        return min(int(self.max_features), n_features)

    def fit(self, X, y):
        X, y = _check_xy(X, y)
        n, f = X.shape
        self.n_features_ = f
        ctx = build_context(X)
        k = self._resolve_max_features(f)
        rng = np.random.default_rng(self.seed)
        self.trees_ = []
        for _ in range(self.n_estimators):
            tree_rng = np.random.default_rng(rng.integers(0, 2**63 - 1))
            rows = (
                tree_rng.integers(0, n, size=n) if self.bootstrap else np.arange(n)
            )
            self.trees_.append(
                grow_classification_tree(
                    ctx,
                    rows,
                    y,
                    max_depth=self.max_depth,
                    min_samples_leaf=self.min_samples_leaf,
                    max_features=k,
                    rng=tree_rng,
                )
            )
        return self

    def predict_scores(self, X):
        X = _check_width(self, X)
        acc = np.zeros(len(X))
        for t in self.trees_:
            acc += t.predict(X)
        return acc / len(self.trees_)

    def to_dict(self):
        return {
            "kind": self.kind,
            "params": {
                "n_estimators": self.n_estimators,
                "max_depth": self.max_depth,
                "min_samples_leaf": self.min_samples_leaf,
                "max_features": self.max_features,
                "bootstrap": self.bootstrap,
                "seed": self.seed,
            },
            "state": {
                "n_features": self.n_features_,
                "trees": [t.to_node_dict() for t in self.trees_],
            },
        }

    @classmethod
    def from_dict(cls, d):
        m = cls(**d["params"])
        m.n_features_ = int(d["state"]["n_features"])
        m.trees_ = [Tree.from_node_dict(t) for t in d["state"]["trees"]]
        return m


class BoostedTreesModel:
    """Additive trees on logistic loss with second-order leaf weights.

    Starts from the log-odds of the training base rate; each round fits a
    regression tree to the current gradients and hessians and steps by
    learning_rate. Zero rounds therefore score every row at the base rate.
    """

    kind = "boosted_trees"

    def __init__(
        self,
        n_estimators=60,
        max_depth=4,
        learning_rate=0.1,
        reg_lambda=1.0,
        min_samples_leaf=1,
    ):
        self.n_estimators = int(n_estimators)
        self.max_depth = int(max_depth)
        self.learning_rate = float(learning_rate)
        self.reg_lambda = float(reg_lambda)
        self.min_samples_leaf = int(min_samples_leaf)
        self.base_score_ = 0.0
        self.trees_ = []
        self.n_features_ = None
        self.train_losses_ = []

    def fit(self, X, y):
        X, y = _check_xy(X, y)
        n, f = X.shape
        self.n_features_ = f
        p0 = min(max(float(y.mean()), 1e-9), 1 - 1e-9)
        self.base_score_ = float(np.log(p0 / (1 - p0)))
        ctx = build_context(X)
        rows = np.arange(n)
        raw = np.full(n, self.base_score_)
        yf = y.astype(float)
        self.trees_ = []
        self.train_losses_ = [self._loss(raw, yf)]
        for _ in range(self.n_estimators):
            p = _sigmoid(raw)
            grad = p - yf
            hess = p * (1.0 - p)
            tree = grow_boosting_tree(
                ctx,
                rows,
                grad,
                hess,
                max_depth=self.max_depth,
                min_samples_leaf=self.min_samples_leaf,
                lam=self.reg_lambda,
            )
            self.trees_.append(tree)
            raw += self.learning_rate * tree.predict(X)
            self.train_losses_.append(self._loss(raw, yf))
        return self

    @staticmethod
    def _loss(raw, y):
        p = _sigmoid(raw)
        eps = 1e-12
        return float(-np.mean(y * np.log(p + eps) + (1 - y) * np.log(1 - p + eps)))

    def predict_raw(self, X):
        X = _check_width(self, X)
        raw = np.full(len(X), self.base_score_)
        for t in self.trees_:
            raw += self.learning_rate * t.predict(X)
        return raw

    def predict_scores(self, X):
        return _sigmoid(self.predict_raw(X))

    def to_dict(self):
        return {
            "kind": self.kind,
            "params": {
                "n_estimators": self.n_estimators,
                "max_depth": self.max_depth,
                "learning_rate": self.learning_rate,
                "reg_lambda": self.reg_lambda,
                "min_samples_leaf": self.min_samples_leaf,
            },
            "state": {
                "n_features": self.n_features_,
                "base_score": self.base_score_,
                "trees": [t.to_node_dict() for t in self.trees_],
            },
        }

    @classmethod
    def from_dict(cls, d):
        m = cls(**d["params"])
        m.n_features_ = int(d["state"]["n_features"])
        m.base_score_ = float(d["state"]["base_score"])
        m.trees_ = [Tree.from_node_dict(t) for t in d["state"]["trees"]]
        return m
