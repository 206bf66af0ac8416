import math

import numpy as np
import pandas as pd
import pytest

from sizegrid.errors import (
    DegenerateTarget,
    EmptyPartition,
    InvalidConfig,
    TooFewMinority,
    UnknownColumn,
)
from sizegrid.preprocess import (
    DUMMY_ONLY,
    TARGET_PLUS_DUMMY,
    FittedTransform,
    SplitSpec,
    apply_dummy_encoder,
    apply_encoding,
    apply_scaler,
    apply_target_encoder,
    fit_dummy_encoder,
    fit_encoding,
    fit_standard_scaler,
    fit_target_encoder,
    season_split,
    smote_oversample,
)


def _frame_with_seasons():
    rows = []
    for season, n in [(163, 5), (181, 7), (193, 4), (201, 6), (203, 3)]:
        for i in range(n):
            rows.append({"season": season, "x": i})
    return pd.DataFrame(rows)


def test_season_split_partitions_chronologically():
    frame = _frame_with_seasons()
    train, val, test = season_split(frame, SplitSpec(193, 201, 203))
    assert sorted(train["season"].unique()) == [163, 181, 193]
    assert val["season"].unique().tolist() == [201]
    assert test["season"].unique().tolist() == [203]
    assert len(train) + len(val) + len(test) == len(frame)


def test_season_split_empty_partition_raises():
    frame = _frame_with_seasons()
    with pytest.raises(EmptyPartition):
        season_split(frame[frame["season"] != 201], SplitSpec(193, 201, 203))


def test_split_spec_must_increase():
    with pytest.raises(InvalidConfig):
        SplitSpec(201, 193, 203)


def test_scaler_population_std():
    frame = pd.DataFrame({"a": [1.0, 2.0, 3.0]})
    params = fit_standard_scaler(frame, ["a"])
    assert params.means == [2.0]
    assert params.stds[0] == pytest.approx(math.sqrt(2.0 / 3.0))
    out = apply_scaler(frame, params)
    assert out["a"].tolist() == pytest.approx([-1.224744871, 0.0, 1.224744871])


def test_scaler_constant_column_maps_to_zero():
    frame = pd.DataFrame({"a": [5.0, 5.0, 5.0]})
    params = fit_standard_scaler(frame, ["a"])
    out = apply_scaler(frame, params)
    assert out["a"].tolist() == [0.0, 0.0, 0.0]


def test_scaler_train_becomes_standard():
    rng = np.random.default_rng(5)
    frame = pd.DataFrame({"a": rng.normal(3, 7, 500), "b": rng.uniform(0, 9, 500)})
    out = apply_scaler(frame, fit_standard_scaler(frame, ["a", "b"]))
    for c in ("a", "b"):
        assert out[c].mean() == pytest.approx(0.0, abs=1e-12)
        assert out[c].std(ddof=0) == pytest.approx(1.0, abs=1e-12)


def test_scaler_unknown_column():
    frame = pd.DataFrame({"a": [1.0]})
    with pytest.raises(UnknownColumn):
        fit_standard_scaler(frame, ["zz"])


def test_dummy_encoder_basic():
    train = pd.DataFrame({"ch": ["Retail", "Wholesale", "Retail"]})
    enc = fit_dummy_encoder(train, ["ch"])
    out = apply_dummy_encoder(pd.DataFrame({"ch": ["Wholesale", "Retail"]}), enc)
    assert out.columns.tolist() == ["ch=Retail", "ch=Wholesale"]
    assert out.to_numpy().tolist() == [[0.0, 1.0], [1.0, 0.0]]
    # exactly one indicator fires per row for a fully observed column
    assert out.sum(axis=1).tolist() == [1.0, 1.0]


def test_dummy_encoder_unseen_level_is_all_zeros():
    enc = fit_dummy_encoder(pd.DataFrame({"ch": ["A", "B"]}), ["ch"])
    out = apply_dummy_encoder(pd.DataFrame({"ch": ["C"]}), enc)
    assert out.to_numpy().tolist() == [[0.0, 0.0]]


def test_target_encoder_hand_value():
    # 20 rows of one level with mean target 1.0 against a global mean of 0.25
    level = ["A"] * 20 + ["B"] * 60
    target = [1] * 20 + [0] * 60
    frame = pd.DataFrame({"g": level, "y": target})
    enc = fit_target_encoder(frame, ["g"], "y", m=20)
    assert enc.global_means["g"] == pytest.approx(0.25)
    assert enc.maps["g"]["A"] == pytest.approx((20 * 1.0 + 20 * 0.25) / 40)
    assert enc.maps["g"]["A"] == pytest.approx(0.625)


def test_target_encoder_unseen_maps_to_global_mean():
    frame = pd.DataFrame({"g": ["A", "B"], "y": [1, 0]})
    enc = fit_target_encoder(frame, ["g"], "y", m=20)
    out = apply_target_encoder(pd.DataFrame({"g": ["ZZ"]}), enc)
    assert out["g"].tolist() == [0.5]


def test_target_encoder_smoothing_shrinks_small_levels():
    # a single-observation level should sit near the global mean
    frame = pd.DataFrame({"g": ["A"] + ["B"] * 99, "y": [1] + [0] * 99})
    enc = fit_target_encoder(frame, ["g"], "y", m=20)
    assert enc.maps["g"]["A"] < 0.1
    assert enc.maps["g"]["A"] > enc.maps["g"]["B"]


PAPER_CARDINALITIES = [464, 79, 26, 38, 10, 3, 2, 2, 2]


def _frame_with_cardinalities(n_rows=1200, seed=0):
    rng = np.random.default_rng(seed)
    data = {}
    for idx, card in enumerate(PAPER_CARDINALITIES):
        # cycle guarantees every level observed at least once
        data[f"c{idx}"] = [f"v{(i % card):03d}" for i in range(n_rows)]
    data["y"] = rng.integers(0, 2, n_rows)
    for idx in range(3):
        data[f"num{idx}"] = rng.normal(size=n_rows)
    data["flag0"] = rng.integers(0, 2, n_rows).astype(float)
    return pd.DataFrame(data)


def test_dummy_only_column_count_matches_reference_cardinalities():
    frame = _frame_with_cardinalities()
    cats = [f"c{i}" for i in range(9)]
    enc = fit_dummy_encoder(frame, cats)
    assert len(enc.feature_names) == 626


def test_target_plus_dummy_yields_14_categorical_columns():
    frame = _frame_with_cardinalities()
    cats = [f"c{i}" for i in range(9)]
    ft = fit_encoding(
        frame,
        TARGET_PLUS_DUMMY,
        continuous=[f"num{i}" for i in range(3)],
        flags=["flag0"],
        categoricals=cats,
        target="y",
    )
    n_target = len(ft.target_columns)
    n_dummy = len(ft.dummy.feature_names)
    assert n_target == 5
    assert n_dummy == 9
    assert n_target + n_dummy == 14


def test_encoding_matrix_layout_and_width():
    frame = _frame_with_cardinalities(n_rows=600)
    cats = [f"c{i}" for i in range(9)]
    ft = fit_encoding(
        frame,
        DUMMY_ONLY,
        continuous=["num0", "num1", "num2"],
        flags=["flag0"],
        categoricals=cats,
        target="y",
    )
    X = apply_encoding(frame, ft)
    assert X.shape == (600, 3 + 626 + 1)
    assert ft.feature_names[:3] == ["num0", "num1", "num2"]
    assert ft.feature_names[-1] == "flag0"


def test_fitted_transform_json_round_trip_is_bit_exact():
    frame = _frame_with_cardinalities(n_rows=400, seed=3)
    cats = [f"c{i}" for i in range(9)]
    ft = fit_encoding(
        frame,
        TARGET_PLUS_DUMMY,
        continuous=["num0", "num1", "num2"],
        flags=["flag0"],
        categoricals=cats,
        target="y",
    )
    clone = FittedTransform.from_json(ft.to_json())
    assert clone.to_json() == ft.to_json()
    a = apply_encoding(frame, ft)
    b = apply_encoding(frame, clone)
    assert np.array_equal(a, b)


def test_fit_never_reads_validation_rows():
    frame = _frame_with_cardinalities(n_rows=500, seed=9)
    train, val = frame.iloc[:400], frame.iloc[400:].copy()
    cats = [f"c{i}" for i in range(9)]
    kwargs = dict(
        continuous=["num0", "num1", "num2"],
        flags=["flag0"],
        categoricals=cats,
        target="y",
    )
    before = fit_encoding(train, TARGET_PLUS_DUMMY, **kwargs).to_json()
    val.loc[:, "num0"] = 1e9  # mutate the held-out rows
    val.loc[:, "c0"] = "poison"
    after = fit_encoding(train, TARGET_PLUS_DUMMY, **kwargs).to_json()
    assert before == after


def test_smote_two_points_stay_on_segment():
    X = np.array([[0.0, 0.0], [1.0, 1.0], [5.0, 5.0], [6.0, 5.0], [7.0, 5.0], [8.0, 5.0]])
    y = np.array([1, 1, 0, 0, 0, 0])
    X2, y2, prov = smote_oversample(X, y, k=1, ratio=0.5, seed=0, return_provenance=True)
    synth = X2[len(X):]
    assert len(synth) == 2  # 4 majority - 2 minority
    for row in synth:
        assert row[0] == pytest.approx(row[1])  # on the diagonal segment
        assert 0.0 <= row[0] <= 1.0
    assert set(y2[len(X):]) == {1}


def test_smote_ratio_one_to_one():
    rng = np.random.default_rng(1)
    X = rng.normal(size=(400, 5))
    y = np.array([1] * 100 + [0] * 300)
    X2, y2 = smote_oversample(X, y, k=5, ratio=0.5, seed=4)
    assert len(X2) == 600  # 200 synthetic rows appended
    assert int((y2 == 1).sum()) == int((y2 == 0).sum())


def test_smote_betweenness_with_provenance():
    rng = np.random.default_rng(2)
    X = rng.normal(size=(300, 8))
    y = np.array([1] * 80 + [0] * 220)
    X2, y2, prov = smote_oversample(X, y, k=5, ratio=0.5, seed=7, return_provenance=True)
    synth = X2[len(X):]
    for row, (parent, neighbor, g) in zip(synth, prov):
        lo = np.minimum(X[int(parent)], X[int(neighbor)])
        hi = np.maximum(X[int(parent)], X[int(neighbor)])
        assert (row >= lo - 1e-12).all() and (row <= hi + 1e-12).all()
        assert 0.0 <= g <= 1.0


def test_smote_binary_columns_copied_from_parent():
    rng = np.random.default_rng(3)
    cont = rng.normal(size=(60, 2))
    flags = rng.integers(0, 2, size=(60, 2)).astype(float)
    X = np.hstack([cont, flags])
    y = np.array([1] * 20 + [0] * 40)
    X2, y2, prov = smote_oversample(
        X, y, k=3, ratio=0.5, seed=11, binary_columns=[2, 3], return_provenance=True
    )
    synth = X2[len(X):]
    for row, (parent, _, _) in zip(synth, prov):
        assert row[2] == X[int(parent), 2]
        assert row[3] == X[int(parent), 3]
        assert row[2] in (0.0, 1.0) and row[3] in (0.0, 1.0)


def test_smote_too_few_minority():
    X = np.zeros((10, 2))
    y = np.array([1, 1, 1] + [0] * 7)
    with pytest.raises(TooFewMinority):
        smote_oversample(X, y, k=5, ratio=0.5, seed=0)


def test_smote_single_class_raises():
    with pytest.raises(DegenerateTarget):
        smote_oversample(np.zeros((4, 2)), np.ones(4), k=1, ratio=0.5, seed=0)


def test_smote_deterministic_in_seed():
    rng = np.random.default_rng(8)
    X = rng.normal(size=(200, 4))
    y = np.array([1] * 50 + [0] * 150)
    a1, b1 = smote_oversample(X, y, k=5, ratio=0.5, seed=42)
    a2, b2 = smote_oversample(X, y, k=5, ratio=0.5, seed=42)
    a3, _ = smote_oversample(X, y, k=5, ratio=0.5, seed=43)
    assert np.array_equal(a1, a2) and np.array_equal(b1, b2)
    assert not np.array_equal(a1, a3)


def test_smote_balanced_input_is_no_op():
    X = np.arange(20, dtype=float).reshape(10, 2)
    y = np.array([0, 1] * 5)
    X2, y2 = smote_oversample(X, y, k=2, ratio=0.5, seed=0)
    assert np.array_equal(X2, X)
    assert np.array_equal(y2, y)
