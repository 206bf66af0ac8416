"""Chronological splits, scaling, categorical encoding and oversampling.

Everything here fits on the training partition only and is applied to the
other partitions afterwards; fitted parameters serialize to JSON and replay
bit-exactly.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from .errors import (
    DegenerateTarget,
    EmptyPartition,
    InvalidConfig,
    TooFewMinority,
    UnknownColumn,
)

DUMMY_ONLY = "dummy_only"
TARGET_PLUS_DUMMY = "target_plus_dummy"
ENCODING_MODES = (DUMMY_ONLY, TARGET_PLUS_DUMMY)

# a categorical needs at least this many observed levels before target
# encoding pays for itself; below that it stays one-hot
TARGET_ENCODE_MIN_LEVELS = 10
TARGET_SMOOTHING = 20.0


@dataclass(frozen=True)
class SplitSpec:
    """Chronological split: train up to and including train_max, then one
    season each for validation and test."""

    train_max: int
    validation: int
    test: int

    def __post_init__(self):
        if not self.train_max < self.validation < self.test:
            raise InvalidConfig(
                f"split seasons must increase: {self.train_max}, "
                f"{self.validation}, {self.test}"
            )


def season_split(frame: pd.DataFrame, spec: SplitSpec):
    """Partition rows by their season column. Raises EmptyPartition when a
    partition catches no rows."""
    season = frame["season"].astype(int)
    train = frame[season <= spec.train_max]
    validation = frame[season == spec.validation]
    test = frame[season == spec.test]
    for name, part in (("train", train), ("validation", validation), ("test", test)):
        if part.empty:
            raise EmptyPartition(f"{name} partition is empty for {spec}")
    return (
        train.reset_index(drop=True),
        validation.reset_index(drop=True),
        test.reset_index(drop=True),
    )


@dataclass
class ScalerParams:
    columns: list[str]
    means: list[float]
    stds: list[float]

    def to_dict(self) -> dict:
        return {"columns": self.columns, "means": self.means, "stds": self.stds}

    @classmethod
    def from_dict(cls, d: dict) -> "ScalerParams":
        return cls(list(d["columns"]), list(d["means"]), list(d["stds"]))


def fit_standard_scaler(frame: pd.DataFrame, columns: list[str]) -> ScalerParams:
    """Column means and population standard deviations from the given rows."""
    missing = [c for c in columns if c not in frame.columns]
    if missing:
        raise UnknownColumn(f"columns not in frame: {missing}")
    means, stds = [], []
    for c in columns:
        x = frame[c].to_numpy(dtype=float)
        means.append(float(x.mean()))
        stds.append(float(x.std()))  # ddof=0: population variance
    return ScalerParams(list(columns), means, stds)


def apply_scaler(frame: pd.DataFrame, params: ScalerParams) -> pd.DataFrame:
    """(x - mean) / std per fitted column; a zero-spread column maps to 0."""
    missing = [c for c in params.columns if c not in frame.columns]
    if missing:
        raise UnknownColumn(f"columns not in frame: {missing}")
    out = frame.copy()
    for c, mean, std in zip(params.columns, params.means, params.stds):
        x = out[c].to_numpy(dtype=float)
        out[c] = (x - mean) / std if std > 0.0 else np.zeros_like(x)
    return out


@dataclass
class DummyEncoder:
    """One indicator column per training-observed level; unseen levels map
    to all zeros."""

    levels: dict[str, list[str]]

    @property
    def feature_names(self) -> list[str]:
        return [f"{col}={lv}" for col, lvs in self.levels.items() for lv in lvs]

    def to_dict(self) -> dict:
        # the column list pins the indicator order; sorted-key JSON would
        # otherwise shuffle the levels dict and permute the matrix
        return {"columns": list(self.levels), "levels": self.levels}

    @classmethod
    def from_dict(cls, d: dict) -> "DummyEncoder":
        order = d.get("columns", list(d["levels"]))
        return cls({k: list(d["levels"][k]) for k in order})


def fit_dummy_encoder(frame: pd.DataFrame, columns: list[str]) -> DummyEncoder:
    missing = [c for c in columns if c not in frame.columns]
    if missing:
        raise UnknownColumn(f"columns not in frame: {missing}")
    levels = {c: sorted(frame[c].astype(str).unique().tolist()) for c in columns}
    return DummyEncoder(levels)


def apply_dummy_encoder(frame: pd.DataFrame, enc: DummyEncoder) -> pd.DataFrame:
    missing = [c for c in enc.levels if c not in frame.columns]
    if missing:
        raise UnknownColumn(f"columns not in frame: {missing}")
    out = {}
    for col, lvs in enc.levels.items():
        values = frame[col].astype(str).to_numpy()
        for lv in lvs:
            out[f"{col}={lv}"] = (values == lv).astype(float)
    return pd.DataFrame(out, index=frame.index)


@dataclass
class TargetEncoder:
    """Smoothed mean-target encoding:
    enc(level) = (n * level_mean + m * global_mean) / (n + m)."""

    m: float
    maps: dict[str, dict[str, float]]
    global_means: dict[str, float]

    def to_dict(self) -> dict:
        return {"m": self.m, "maps": self.maps, "global_means": self.global_means}

    @classmethod
    def from_dict(cls, d: dict) -> "TargetEncoder":
        return cls(
            float(d["m"]),
            {k: dict(v) for k, v in d["maps"].items()},
            dict(d["global_means"]),
        )


def fit_target_encoder(
    frame: pd.DataFrame,
    columns: list[str],
    target: str,
    m: float = TARGET_SMOOTHING,
) -> TargetEncoder:
    missing = [c for c in columns if c not in frame.columns]
    if missing:
        raise UnknownColumn(f"columns not in frame: {missing}")
    y = frame[target].to_numpy(dtype=float)
    global_means = {}
    maps = {}
    for c in columns:
        g = float(y.mean())
        global_means[c] = g
        enc = {}
        values = frame[c].astype(str)
        for level, grp in frame.groupby(values, sort=True):
            n = len(grp)
            level_mean = float(grp[target].mean())
            enc[str(level)] = (n * level_mean + m * g) / (n + m)
        maps[c] = enc
    return TargetEncoder(float(m), maps, global_means)


def apply_target_encoder(frame: pd.DataFrame, enc: TargetEncoder) -> pd.DataFrame:
    missing = [c for c in enc.maps if c not in frame.columns]
    if missing:
        raise UnknownColumn(f"columns not in frame: {missing}")
    out = {}
    for col, mapping in enc.maps.items():
        g = enc.global_means[col]
        values = frame[col].astype(str)
        out[col] = values.map(lambda v: mapping.get(v, g)).to_numpy(dtype=float)
    return pd.DataFrame(out, index=frame.index)


@dataclass
class FittedTransform:
    """Everything needed to turn a feature frame into a model matrix.

    Column layout of the produced matrix, in order: scaled continuous
    features, scaled target-encoded categoricals, dummy indicators, missing
    flags. The binary_columns list names the indicator plus flag columns so
    oversampling can treat them as 0/1 coordinates.
    """

    mode: str
    continuous: list[str]
    flags: list[str]
    target: str
    scaler: ScalerParams
    dummy: DummyEncoder
    target_enc: TargetEncoder | None

    @property
    def target_columns(self) -> list[str]:
        return sorted(self.target_enc.maps) if self.target_enc else []

    @property
    def feature_names(self) -> list[str]:
        return (
            list(self.continuous)
            + list(self.target_columns)
            + self.dummy.feature_names
            + list(self.flags)
        )

    @property
    def binary_columns(self) -> list[str]:
        return self.dummy.feature_names + list(self.flags)

    def to_json(self) -> str:
        doc = {
            "version": 1,
            "mode": self.mode,
            "continuous": self.continuous,
            "flags": self.flags,
            "target": self.target,
            "scaler": self.scaler.to_dict(),
            "dummy": self.dummy.to_dict(),
            "target_enc": self.target_enc.to_dict() if self.target_enc else None,
        }
        return json.dumps(doc, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "FittedTransform":
        d = json.loads(text)
        return cls(
            mode=d["mode"],
            continuous=list(d["continuous"]),
            flags=list(d["flags"]),
            target=d["target"],
            scaler=ScalerParams.from_dict(d["scaler"]),
            dummy=DummyEncoder.from_dict(d["dummy"]),
            target_enc=(
                TargetEncoder.from_dict(d["target_enc"]) if d["target_enc"] else None
            ),
        )


def fit_encoding(
    train: pd.DataFrame,
    mode: str,
    continuous: list[str],
    flags: list[str],
    categoricals: list[str],
    target: str,
    m: float = TARGET_SMOOTHING,
    min_target_levels: int = TARGET_ENCODE_MIN_LEVELS,
) -> FittedTransform:
    """Fit the full preprocessing stack on training rows only."""
    if mode not in ENCODING_MODES:
        raise InvalidConfig(f"unknown encoding mode {mode!r}")
    if mode == DUMMY_ONLY:
        target_cols: list[str] = []
    else:
        target_cols = [
            c for c in categoricals
            if train[c].astype(str).nunique() >= min_target_levels
        ]
    dummy_cols = [c for c in categoricals if c not in target_cols]
    dummy = fit_dummy_encoder(train, dummy_cols)
    target_enc = (
        fit_target_encoder(train, target_cols, target, m=m) if target_cols else None
    )
    # target-encoded columns are continuous once encoded, so they get scaled
    # alongside the KPI features
    scale_frame = train[continuous].copy()
    if target_enc:
        scale_frame = pd.concat(
            [scale_frame, apply_target_encoder(train, target_enc)], axis=1
        )
    scaler = fit_standard_scaler(
        scale_frame, list(continuous) + sorted(target_cols)
    )
    return FittedTransform(
        mode=mode,
        continuous=list(continuous),
        flags=list(flags),
        target=target,
        scaler=scaler,
        dummy=dummy,
        target_enc=target_enc,
    )


def apply_encoding(frame: pd.DataFrame, ft: FittedTransform) -> np.ndarray:
    """Materialize the model matrix for any partition, train or not."""
    parts = [frame[ft.continuous].astype(float)]
    if ft.target_enc:
        parts.append(apply_target_encoder(frame, ft.target_enc))
    scaled = apply_scaler(pd.concat(parts, axis=1), ft.scaler)
    blocks = [scaled[ft.scaler.columns].to_numpy(dtype=float)]
    dummies = apply_dummy_encoder(frame, ft.dummy)
    if not dummies.empty:
        blocks.append(dummies.to_numpy(dtype=float))
    elif len(frame):
        blocks.append(np.empty((len(frame), 0)))
    blocks.append(frame[ft.flags].to_numpy(dtype=float))
    return np.hstack(blocks)


def smote_oversample(
    X: np.ndarray,
    y: np.ndarray,
    k: int = 5,
    ratio: float = 0.5,
    seed: int = 0,
    binary_columns: list[int] | None = None,
    return_provenance: bool = False,
):
    """Append synthetic minority rows until the minority share reaches ratio.

    Each synthetic row is x + g * (x_nn - x) with g uniform on [0, 1] and
    x_nn one of the k nearest minority neighbors of x (Euclidean distance
    over the whole matrix, 0/1 coordinates included). Columns listed in
    binary_columns are copied from the parent row instead of interpolated.
    Deterministic for a given seed.

    With return_provenance, also returns a record array of
    (parent, neighbor, gap) per synthetic row, indices into X, for audits.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y).astype(int)
    if len(X) != len(y):
        raise TooFewMinority(f"X has {len(X)} rows but y has {len(y)}")
    if not 0 < ratio < 1:
        raise InvalidConfig(f"ratio must sit in (0, 1): {ratio}")
    classes, counts = np.unique(y, return_counts=True)
    if len(classes) < 2:
        raise DegenerateTarget(f"need two classes, got {classes.tolist()}")
    minority = classes[np.argmin(counts)]
    n_min = int(counts.min())
    n_total = int(len(y))
    no_op = n_min == counts.max()
    n_syn = 0
    if not no_op:
        if k > n_min - 1:
            raise TooFewMinority(
                f"k={k} neighbors need at least {k + 1} minority rows, have {n_min}"
            )
        n_syn = int(round((ratio * n_total - n_min) / (1.0 - ratio)))
    if n_syn <= 0:
        empty = np.empty((0, 3))
        return (X.copy(), y.copy(), empty) if return_provenance else (X.copy(), y.copy())

    minority_idx = np.nonzero(y == minority)[0]
    M = X[minority_idx]
    neighbors = _k_nearest(M, k)

    rng = np.random.default_rng(seed)
    parents = rng.integers(0, n_min, size=n_syn)
    picks = rng.integers(0, k, size=n_syn)
    gaps = rng.uniform(0.0, 1.0, size=n_syn)

    base = M[parents]
    partner_local = neighbors[parents, picks]
    partner = M[partner_local]
    synth = base + gaps[:, None] * (partner - base)
    if binary_columns:
        cols = np.asarray(binary_columns, dtype=int)
        synth[:, cols] = base[:, cols]
    X_out = np.vstack([X, synth])
    y_out = np.concatenate([y, np.full(n_syn, minority, dtype=y.dtype)])
    if return_provenance:
        prov = np.column_stack(
            [minority_idx[parents], minority_idx[partner_local], gaps]
        )
        return X_out, y_out, prov
    return X_out, y_out


def _k_nearest(M: np.ndarray, k: int, chunk: int = 512) -> np.ndarray:
    """Indices of the k nearest rows (self excluded) for every row of M.

    Brute force in chunks; ties resolve toward the lower row index so the
    result is stable across runs.
    """
    n = len(M)
    sq = (M * M).sum(axis=1)
    out = np.empty((n, k), dtype=np.int64)
    for start in range(0, n, chunk):
        stop = min(start + chunk, n)
        block = M[start:stop]
        d2 = sq[start:stop, None] + sq[None, :] - 2.0 * (block @ M.T)
        np.maximum(d2, 0.0, out=d2)
        rows = np.arange(start, stop)
        d2[np.arange(stop - start), rows] = np.inf
        part = np.argpartition(d2, k - 1, axis=1)[:, :k]
        for r in range(stop - start):
            drow = d2[r]
            cand = part[r]
            worst = drow[cand].max()
            # rows tied at the cut line resolve toward the lower index
            tied = np.nonzero(drow <= worst)[0]
            if len(tied) > k:
                cand = tied
            order = np.lexsort((cand, drow[cand]))
            out[start + r] = cand[order][:k]
    return out
