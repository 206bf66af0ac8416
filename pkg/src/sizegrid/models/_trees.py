"""Exact-greedy decision tree machinery shared by the forest and the booster.

Feature values are coded once per training matrix: each column maps to the
index of its sorted unique values, then all columns share one global bin
space (each feature owns a contiguous range). A node's split search fuses
every feature into a single histogram pass over that bin space, which keeps
the search exact (every distinct value is a candidate cut) while avoiding a
per-feature scan loop.

Nodes searching all features carry dense histograms down the tree: after a
split only the smaller child is binned directly, the larger child's
histograms come from subtracting the sibling's from the parent's. Counts
stay exact that way (integers in float64); weight sums pick up rounding
noise far below the tie tolerance used by the split search. Nodes with a
per-node feature draw (the forest) cannot reuse a parent histogram, so they
bin into a compact bin space covering just the drawn features.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# a node is worth dense histograms once its row block outweighs the bin
# space; below that a sort-and-compact pass is cheaper
_DENSE_FACTOR = 8


@dataclass
class TreeContext:
    """Coded view of a training matrix, built once and shared by all trees."""

    fused_t: np.ndarray  # (n_features, n_rows) int64, value code + bin offset
    uniques: list[np.ndarray]  # per feature, sorted unique values
    offsets: np.ndarray  # (n_features,) first bin of each feature
    sizes: np.ndarray  # (n_features,) bins per feature
    feat_of_bin: np.ndarray  # (total_bins,) owning feature of each bin
    n_rows: int
    n_features: int
    total_bins: int


def build_context(X: np.ndarray) -> TreeContext:
    X = np.asarray(X, dtype=float)
    n, f = X.shape
    fused_t = np.empty((f, n), dtype=np.int64)
    uniques = []
    sizes = np.empty(f, dtype=np.int64)
    for j in range(f):
        u, inv = np.unique(X[:, j], return_inverse=True)
        uniques.append(u)
        sizes[j] = len(u)
        fused_t[j] = inv
    offsets = np.concatenate([[0], np.cumsum(sizes)[:-1]])
    fused_t += offsets[:, None]
    feat_of_bin = np.repeat(np.arange(f), sizes)
    return TreeContext(
        fused_t, uniques, offsets, sizes, feat_of_bin, n, f, int(sizes.sum())
    )


class Tree:
    """Flat-array binary tree. feature == -1 marks a leaf."""

    __slots__ = ("feature", "threshold", "left", "right", "value")

    def __init__(self):
        self.feature: list[int] = []
        self.threshold: list[float] = []
        self.left: list[int] = []
        self.right: list[int] = []
        self.value: list[float] = []

    def add_leaf(self, value: float) -> int:
        return self._add(-1, 0.0, -1, -1, value)

    def add_split(self, feature: int, threshold: float) -> int:
        return self._add(feature, threshold, -1, -1, 0.0)

    def _add(self, feature, threshold, left, right, value) -> int:
        self.feature.append(feature)
        self.threshold.append(threshold)
        self.left.append(left)
        self.right.append(right)
        self.value.append(value)
        return len(self.feature) - 1

    def predict(self, X: np.ndarray) -> np.ndarray:
        feat = np.asarray(self.feature)
        thr = np.asarray(self.threshold)
        left = np.asarray(self.left)
        right = np.asarray(self.right)
        val = np.asarray(self.value)
        idx = np.zeros(len(X), dtype=np.int64)
        while True:
            at_leaf = feat[idx] == -1
            if at_leaf.all():
                break
            rows = np.nonzero(~at_leaf)[0]
            node = idx[rows]
            go_left = X[rows, feat[node]] <= thr[node]
            idx[rows] = np.where(go_left, left[node], right[node])
        return val[idx]

    def to_node_dict(self, i: int = 0) -> dict:
        """Nested split records for serialization."""
        if self.feature[i] == -1:
            return {"leaf": self.value[i]}
        return {
            "feature": self.feature[i],
            "threshold": self.threshold[i],
            "left": self.to_node_dict(self.left[i]),
            "right": self.to_node_dict(self.right[i]),
        }

    @classmethod
    def from_node_dict(cls, d: dict) -> "Tree":
        tree = cls()

        def build(node: dict) -> int:
            if "leaf" in node:
                return tree.add_leaf(float(node["leaf"]))
            i = tree.add_split(int(node["feature"]), float(node["threshold"]))
            li = build(node["left"])
            ri = build(node["right"])
            tree.left[i] = li
            tree.right[i] = ri
            return i

        build(d)
        return tree

    @property
    def n_leaves(self) -> int:
        return sum(1 for f in self.feature if f == -1)

    @property
    def depth(self) -> int:
        def walk(i, d):
            if self.feature[i] == -1:
                return d
            return max(walk(self.left[i], d + 1), walk(self.right[i], d + 1))

        return walk(0, 0)


class _NodeBins:
    """Per-node cumulative histograms over candidate cut bins.

    bins holds the present fused codes in ascending (feature-major) order,
    seg the owning feature of each, and cum_* left-inclusive running totals
    that reset at feature boundaries. Cutting at bins[i] sends codes <=
    bins[i] left; the last present bin of each feature has an empty right
    side and is masked by the min-leaf check.
    """

    __slots__ = ("bins", "seg", "cum_n", "cum_w")

    def __init__(self, bins, seg, cum_n, cum_w):
        self.bins = bins
        self.seg = seg
        self.cum_n = cum_n
        self.cum_w = cum_w


def _segment_reset(seg: np.ndarray, cum: np.ndarray) -> np.ndarray:
    """Turn a global running total into per-feature-segment running totals."""
    starts = np.flatnonzero(np.diff(seg, prepend=-1))
    base = np.where(starts > 0, cum[starts - 1], 0.0)
    lengths = np.diff(np.append(starts, len(seg)))
    return cum - np.repeat(base, lengths)


def _dense_hist(ctx: TreeContext, rows: np.ndarray,
                weights: list[np.ndarray]) -> list[np.ndarray]:
    """Count plus per-weight sums over the full fused bin space."""
    sub = ctx.fused_t[:, rows]
    flat = sub.ravel()
    hist = [np.bincount(flat, minlength=ctx.total_bins).astype(float)]
    for w in weights:
        hist.append(
            np.bincount(flat, weights=np.broadcast_to(w, sub.shape).ravel(),
                        minlength=ctx.total_bins)
        )
    return hist


def _bins_from_hist(ctx: TreeContext, hist: list[np.ndarray]) -> _NodeBins:
    present = np.flatnonzero(hist[0])
    seg = ctx.feat_of_bin[present]
    cum_n = _segment_reset(seg, hist[0][present].cumsum())
    cum_w = [_segment_reset(seg, h[present].cumsum()) for h in hist[1:]]
    return _NodeBins(present, seg, cum_n, cum_w)


def _compact_bins(ctx: TreeContext, rows: np.ndarray,
                  weights: list[np.ndarray]) -> _NodeBins:
    """Sort-based variant for nodes much smaller than the bin space."""
    sub = ctx.fused_t[:, rows]
    uq, inv = np.unique(sub.ravel(), return_inverse=True)
    cnt = np.bincount(inv).astype(float)
    sums = [
        np.bincount(inv, weights=np.broadcast_to(w, sub.shape).ravel())
        for w in weights
    ]
    seg = ctx.feat_of_bin[uq]
    cum_n = _segment_reset(seg, cnt.cumsum())
    cum_w = [_segment_reset(seg, s.cumsum()) for s in sums]
    return _NodeBins(uq, seg, cum_n, cum_w)


def _subset_bins(ctx: TreeContext, rows: np.ndarray, weights: list[np.ndarray],
                 feats: np.ndarray) -> _NodeBins:
    """Histograms over a per-node feature draw, in a bin space sized to it.

    feats must be sorted ascending so candidate order stays feature-major.
    """
    sub = ctx.fused_t[np.ix_(feats, rows)]
    local_sizes = ctx.sizes[feats]
    local_starts = np.concatenate([[0], np.cumsum(local_sizes)[:-1]])
    shift = ctx.offsets[feats] - local_starts
    flat = (sub - shift[:, None]).ravel()
    n_local = int(local_sizes.sum())
    cnt = np.bincount(flat, minlength=n_local)
    sums = [
        np.bincount(flat, weights=np.broadcast_to(w, sub.shape).ravel(),
                    minlength=n_local)
        for w in weights
    ]
    present = np.flatnonzero(cnt)
    fi = np.searchsorted(local_starts, present, side="right") - 1
    bins = present + shift[fi]
    seg = feats[fi]
    cum_n = _segment_reset(seg, cnt[present].cumsum().astype(float))
    cum_w = [_segment_reset(seg, s[present].cumsum()) for s in sums]
    return _NodeBins(bins, seg, cum_n, cum_w)


def _winner(ctx: TreeContext, nb: _NodeBins, i: int):
    """Split feature, threshold and fused cut code for candidate index i."""
    f = int(nb.seg[i])
    u = ctx.uniques[f]
    local = int(nb.bins[i] - ctx.offsets[f])
    nxt = int(nb.bins[i + 1] - ctx.offsets[f])  # same segment: right side non-empty
    return f, 0.5 * (u[local] + u[nxt]), int(nb.bins[i])


def _child_hists(ctx, hist, weights_of, rows_l, rows_r):
    """Bin the smaller child directly, derive the other from the parent."""
    if hist is None:
        return None, None
    small, small_is_left = (rows_l, True) if len(rows_l) <= len(rows_r) else (rows_r, False)
    big_n = len(rows_l) + len(rows_r) - len(small)
    if big_n * ctx.n_features * _DENSE_FACTOR < ctx.total_bins:
        return None, None
    sh = _dense_hist(ctx, small, weights_of(small))
    bh = [p - s for p, s in zip(hist, sh)]
    return (sh, bh) if small_is_left else (bh, sh)


def grow_classification_tree(
    ctx: TreeContext,
    rows: np.ndarray,
    y: np.ndarray,
    max_depth: int,
    min_samples_leaf: int,
    max_features: int | None,
    rng: np.random.Generator | None,
) -> Tree:
    """Gini-greedy classification tree; leaf value is the positive fraction.

    max_features draws a fresh feature subset at every node (classic forest
    behavior); None means all features and consumes no randomness.
    """
    tree = Tree()
    y_float = y.astype(float)
    all_feats = max_features is None or max_features >= ctx.n_features

    def weights_of(node_rows):
        return [y_float[node_rows]]

    def build(node_rows: np.ndarray, depth: int, hist) -> int:
        n = len(node_rows)
        pos = float(y_float[node_rows].sum())
        leaf_value = pos / n
        if depth >= max_depth or n < 2 * min_samples_leaf or pos in (0.0, n):
            return tree.add_leaf(leaf_value)
        if all_feats:
            if hist is None and n * ctx.n_features * _DENSE_FACTOR >= ctx.total_bins:
                hist = _dense_hist(ctx, node_rows, weights_of(node_rows))
            nb = (
                _bins_from_hist(ctx, hist)
                if hist is not None
                else _compact_bins(ctx, node_rows, weights_of(node_rows))
            )
        else:
            feats = np.sort(rng.choice(ctx.n_features, size=max_features, replace=False))
            nb = _subset_bins(ctx, node_rows, weights_of(node_rows), feats)
        ln, lp = nb.cum_n, nb.cum_w[0]
        rn, rp = n - ln, pos - lp
        valid = (ln >= min_samples_leaf) & (rn >= min_samples_leaf)
        if not valid.any():
            return tree.add_leaf(leaf_value)
        # weighted gini sum: n_l*g_l + n_r*g_r, smaller is purer; a binary
        # split never worsens it, so any valid candidate is taken and
        # zero-gain splits let structure like XOR resolve further down
        with np.errstate(divide="ignore", invalid="ignore"):
            gini_l = ln - (lp**2 + (ln - lp) ** 2) / ln
            gini_r = rn - (rp**2 + (rn - rp) ** 2) / rn
        score = np.where(valid, gini_l + gini_r, np.inf)
        # summation-order noise must not pick between near-equal candidates:
        # collapse ties within 1e-9 relative, first (feature-major) wins
        best = float(score.min())
        i = int(np.argmax(score <= best + 1e-9 * abs(best)))
        f, cut, cut_code = _winner(ctx, nb, i)
        node = tree.add_split(f, float(cut))
        go_left = ctx.fused_t[f][node_rows] <= cut_code
        rows_l, rows_r = node_rows[go_left], node_rows[~go_left]
        hist_l, hist_r = _child_hists(ctx, hist if all_feats else None,
                                      weights_of, rows_l, rows_r)
        li = build(rows_l, depth + 1, hist_l)
        ri = build(rows_r, depth + 1, hist_r)
        tree.left[node] = li
        tree.right[node] = ri
        return node

    build(np.asarray(rows, dtype=np.int64), 0, None)
    return tree


def grow_boosting_tree(
    ctx: TreeContext,
    rows: np.ndarray,
    grad: np.ndarray,
    hess: np.ndarray,
    max_depth: int,
    min_samples_leaf: int,
    lam: float,
) -> Tree:
    """Second-order regression tree on logistic-loss gradients.

    Leaf weight is -G/(H + lam); split gain is the standard
    G_l^2/(H_l+lam) + G_r^2/(H_r+lam) - G^2/(H+lam) improvement and must be
    strictly positive.
    """
    tree = Tree()

    def weights_of(node_rows):
        return [grad[node_rows], hess[node_rows]]

    def leaf_weight(g: float, h: float) -> float:
        return -g / (h + lam)

    def build(node_rows: np.ndarray, depth: int, hist) -> int:
        g_sum = float(grad[node_rows].sum())
        h_sum = float(hess[node_rows].sum())
        n = len(node_rows)
        if depth >= max_depth or n < 2 * min_samples_leaf:
            return tree.add_leaf(leaf_weight(g_sum, h_sum))
        parent_obj = g_sum * g_sum / (h_sum + lam)
        if hist is None and n * ctx.n_features * _DENSE_FACTOR >= ctx.total_bins:
            hist = _dense_hist(ctx, node_rows, weights_of(node_rows))
        nb = (
            _bins_from_hist(ctx, hist)
            if hist is not None
            else _compact_bins(ctx, node_rows, weights_of(node_rows))
        )
        ln, lg, lh = nb.cum_n, nb.cum_w[0], nb.cum_w[1]
        rn = n - ln
        valid = (ln >= min_samples_leaf) & (rn >= min_samples_leaf)
        if not valid.any():
            return tree.add_leaf(leaf_weight(g_sum, h_sum))
        rg = g_sum - lg
        # hessians are nonnegative per row; clamp away subtraction residue
        lh = np.maximum(lh, 0.0)
        rh = np.maximum(h_sum - lh, 0.0)
        gain = lg**2 / (lh + lam) + rg**2 / (rh + lam) - parent_obj
        gain = np.where(valid, gain, -np.inf)
        best = float(gain.max())
        if not best > 1e-12:
            return tree.add_leaf(leaf_weight(g_sum, h_sum))
        # same near-tie collapse as the gini path; gradient sums carry float
        # noise, and exact-math ties should resolve feature-major
        i = int(np.argmax(gain >= best - 1e-9 * abs(best)))
        f, cut, cut_code = _winner(ctx, nb, i)
        node = tree.add_split(f, float(cut))
        go_left = ctx.fused_t[f][node_rows] <= cut_code
        rows_l, rows_r = node_rows[go_left], node_rows[~go_left]
        hist_l, hist_r = _child_hists(ctx, hist, weights_of, rows_l, rows_r)
        li = build(rows_l, depth + 1, hist_l)
        ri = build(rows_r, depth + 1, hist_r)
        tree.left[node] = li
        tree.right[node] = ri
        return node

    build(np.asarray(rows, dtype=np.int64), 0, None)
    return tree
