import numpy as np
import pandas as pd
import pytest

from sizegrid.domain import SizeGrid, parse_grid_name, parse_season, previous_seasons
from sizegrid.errors import SchemaMismatch, SelectionOutsideGrid
from sizegrid.features import (
    ALL_OFFSETS,
    CATEGORICAL_COLUMNS,
    CIRCLE1_OFFSETS,
    CIRCLE2_OFFSETS,
    CONTINUOUS_COLUMNS,
    FLAG_COLUMNS,
    KEY_COLUMNS,
    TARGET_COLUMN,
    assemble_feature_table,
    compute_sell_through,
    enumerate_candidates,
    label_targets,
    manhattan_weight,
    neighbor_cells,
    rolling_aggregate,
    weighted_circle_sum,
    weighted_neighbor_kpi,
)


def make_grid(dim1, dim2=(), name="MB-Straight-L"):
    return SizeGrid(
        name=parse_grid_name(name),
        dim1_values=tuple(str(v) for v in dim1),
        dim2_values=tuple(str(v) for v in dim2),
    )


WAISTS = [str(w) for w in range(26, 37)]
LENGTHS = ["30", "32", "34", "36", "38"]


def test_circle1_slots_for_interior_cell():
    grid = make_grid(WAISTS, LENGTHS)
    cell = grid.cells_by_token()["2934"]
    got = [(c.dim1, c.dim2) for c in neighbor_cells(grid, cell, circle=1)]
    assert got == [
        ("28", "32"), ("29", "32"), ("30", "32"),
        ("28", "34"), ("30", "34"),
        ("28", "36"), ("29", "36"), ("30", "36"),
    ]


def test_circle2_slots_for_interior_cell():
    grid = make_grid(WAISTS, LENGTHS)
    cell = grid.cells_by_token()["2934"]
    got = [(c.dim1, c.dim2) for c in neighbor_cells(grid, cell, circle=2)]
    assert got == [
        ("27", "30"), ("28", "30"), ("29", "30"), ("30", "30"), ("31", "30"),
        ("27", "32"), ("31", "32"),
        ("27", "34"), ("31", "34"),
        ("27", "36"), ("31", "36"),
        ("27", "38"), ("28", "38"), ("29", "38"), ("30", "38"), ("31", "38"),
    ]


def test_corner_cell_has_off_grid_slots():
    grid = make_grid(WAISTS, LENGTHS)
    corner = grid.cells_by_token()["2630"]
    got = neighbor_cells(grid, corner, circle=1)
    shapes = [(c.dim1, c.dim2) if c else None for c in got]
    assert shapes == [
        None, None, None,
        None, ("27", "30"),
        None, ("26", "32"), ("27", "32"),
    ]


def test_one_dimensional_grid_uses_row_slots_only():
    grid = make_grid(["XS", "S", "M", "L", "XL"], name="MT-Crew Tee-M")
    cell = grid.cells_by_token()["M"]
    got = neighbor_cells(grid, cell, circle=1)
    assert [c.dim1 if c else None for c in got] == [
        None, None, None, "S", "L", None, None, None,
    ]
    got2 = neighbor_cells(grid, cell, circle=2)
    present = [c.dim1 for c in got2 if c is not None]
    assert present == ["XS", "XL"]


def test_neighbor_slots_match_exhaustive_scan():
    rng = np.random.default_rng(11)
    for _ in range(1000):
        w = int(rng.integers(1, 9))
        h = int(rng.integers(1, 7))
        grid = make_grid(
            [str(25 + k) for k in range(w)],
            [str(28 + 2 * k) for k in range(h)] if h > 1 else (),
        )
        cells = grid.cells()
        cell = cells[int(rng.integers(0, len(cells)))]
        for circle, offsets in ((1, CIRCLE1_OFFSETS), (2, CIRCLE2_OFFSETS)):
            by_offset = {}
            for other in cells:
                di, dj = other.i - cell.i, other.j - cell.j
                if max(abs(di), abs(dj)) == circle:
                    by_offset[(di, dj)] = other
            expected = [
                by_offset.get(off)
                for off in sorted(offsets, key=lambda o: (o[1], o[0]))
            ]
            assert sorted(offsets, key=lambda o: (o[1], o[0])) == list(offsets)
            assert neighbor_cells(grid, cell, circle) == expected


def test_offset_tables_have_expected_ring_sizes():
    assert len(CIRCLE1_OFFSETS) == 8
    assert len(CIRCLE2_OFFSETS) == 16
    assert len(set(ALL_OFFSETS)) == 24
    assert all(max(abs(a), abs(b)) == 1 for a, b in CIRCLE1_OFFSETS)
    assert all(max(abs(a), abs(b)) == 2 for a, b in CIRCLE2_OFFSETS)


def test_manhattan_weighting():
    assert weighted_neighbor_kpi(100.0, 1, 0) == 50.0
    assert weighted_neighbor_kpi(90.0, 1, 1) == 30.0
    assert weighted_neighbor_kpi(90.0, 2, 0) == 30.0
    assert weighted_neighbor_kpi(100.0, 2, 1) == 25.0
    assert weighted_neighbor_kpi(100.0, 2, 2) == 20.0
    assert manhattan_weight(0, -2) == pytest.approx(1 / 3)


def test_weighted_circle_sum_matches_slot_expansion():
    rng = np.random.default_rng(3)
    plane = rng.uniform(0, 100, size=(5, 7))
    got = weighted_circle_sum(plane, circle=1)
    h, w = plane.shape
    for j in range(h):
        for i in range(w):
            expected = 0.0
            for di, dj in CIRCLE1_OFFSETS:
                ni, nj = i + di, j + dj
                if 0 <= ni < w and 0 <= nj < h:
                    expected += plane[nj, ni] / (abs(di) + abs(dj) + 1)
            assert got[j, i] == pytest.approx(expected)


def test_rolling_sums_spec_example():
    frame = pd.DataFrame(
        {
            "season": [173, 181, 183, 191, 193],
            "planning_group": ["pg"] * 5,
            "grid_name": ["g"] * 5,
            "size": ["3232"] * 5,
            "quantity": [10, 5, 0, 7, 999],
        }
    )
    rolled = rolling_aggregate(frame, window=4, target_seasons=[193])
    assert len(rolled) == 1
    # 193 itself must not leak into its own window
    assert rolled["quantity"].iloc[0] == 22


def test_rolling_missing_window_produces_no_row():
    frame = pd.DataFrame(
        {
            "season": [163],
            "planning_group": ["pg"],
            "grid_name": ["g"],
            "size": ["3232"],
            "quantity": [4],
        }
    )
    rolled = rolling_aggregate(frame, window=4, target_seasons=[163, 171, 201])
    # 163 has no earlier data, 201's window (193..183) is empty too
    assert rolled["season"].tolist() == [171]
    assert rolled["quantity"].tolist() == [4]


def test_rolling_matches_filter_and_sum_oracle():
    rng = np.random.default_rng(23)
    seasons = [163, 171, 173, 181, 183, 191, 193, 201, 203]
    keys = [(f"pg{p}", f"g{g}", f"s{s}") for p in range(3) for g in range(2) for s in range(4)]
    rows = []
    for _ in range(600):
        pg, g, size = keys[int(rng.integers(0, len(keys)))]
        rows.append(
            {
                "season": int(rng.choice(seasons)),
                "planning_group": pg,
                "grid_name": g,
                "size": size,
                "quantity": int(rng.integers(0, 50)),
            }
        )
    frame = pd.DataFrame(rows).groupby(
        ["season", "planning_group", "grid_name", "size"], as_index=False
    )["quantity"].sum()
    rolled = rolling_aggregate(frame, window=4)
    got = {
        (r.season, r.planning_group, r.grid_name, r.size): r.quantity
        for r in rolled.itertuples()
    }
    for target in seasons:
        window = {c.code for c in previous_seasons(parse_season(target), 4)}
        for pg, g, size in keys:
            sub = frame[
                (frame["planning_group"] == pg)
                & (frame["grid_name"] == g)
                & (frame["size"] == size)
                & frame["season"].isin(window)
            ]
            key = (target, pg, g, size)
            if len(sub) == 0:
                assert key not in got
            else:
                assert got[key] == sub["quantity"].sum()


def test_rolling_rejects_missing_columns():
    with pytest.raises(SchemaMismatch):
        rolling_aggregate(pd.DataFrame({"season": [171], "quantity": [1]}))


def test_sell_through_values():
    assert compute_sell_through(60, 40) == pytest.approx(0.6)
    assert compute_sell_through(0, 50) == 0.0
    assert np.isnan(compute_sell_through(0, 0))
    assert np.isnan(compute_sell_through(np.nan, 10))
    out = compute_sell_through([60, 0, 0], [40, 50, 0])
    assert out[0] == pytest.approx(0.6)
    assert out[1] == 0.0
    assert np.isnan(out[2])


def test_enumerate_candidates_covers_grid():
    grid = make_grid(["30", "31", "32"], ["30", "32"])
    cands = enumerate_candidates(grid)
    assert len(cands) == 6
    assert [c.token for c in cands[:3]] == ["3030", "3130", "3230"]


def test_label_targets_flags_and_strays():
    grid = make_grid(["30", "31", "32"], ["30", "32"])
    labels = label_targets(grid, {"3030", "3232"})
    assert labels["3030"] == 1 and labels["3232"] == 1
    assert sum(labels.values()) == 2
    with pytest.raises(SelectionOutsideGrid):
        label_targets(grid, {"3030", "9999"})


# --- feature table assembly on a small hand-built corpus ---

GRIDS = {
    "MB-Straight-L": make_grid(["30", "31", "32"], ["30", "32"], "MB-Straight-L"),
    "WT-Crew Tee-M": make_grid(["S", "M", "L", "XL"], (), "WT-Crew Tee-M"),
}

PGS = pd.DataFrame(
    {
        "planning_group": ["Retail DE 01", "Wholesale FR 01"],
        "channel": ["Retail", "Wholesale"],
        "affiliate": ["DE", "FR"],
    }
)


def tiny_tables():
    assortment = pd.DataFrame(
        [
            (s, pg, g)
            for s in (173, 181)
            for pg in PGS["planning_group"]
            for g in GRIDS
        ],
        columns=["season", "planning_group", "grid_name"],
    )
    demand = pd.DataFrame(
        [
            (171, "Retail DE 01", "MB-Straight-L", "3030", 40),
            (173, "Retail DE 01", "MB-Straight-L", "3030", 10),
            (173, "Retail DE 01", "MB-Straight-L", "3130", 20),
            (171, "Retail DE 01", "WT-Crew Tee-M", "M", 15),
            (211, "Retail DE 01", "MB-Straight-L", "3030", 999),
        ],
        columns=["season", "planning_group", "grid_name", "size", "quantity"],
    )
    sell_out = pd.DataFrame(
        [
            (171, "Retail DE 01", "MB-Straight-L", "3030", 30),
            (173, "Retail DE 01", "MB-Straight-L", "3030", 8),
        ],
        columns=["season", "planning_group", "grid_name", "size", "quantity"],
    )
    stock = pd.DataFrame(
        [
            (171, "Retail DE 01", "MB-Straight-L", "3030", 10),
            (173, "Retail DE 01", "MB-Straight-L", "3030", 12),
        ],
        columns=["season", "planning_group", "grid_name", "size", "quantity"],
    )
    history = pd.DataFrame(
        [
            (171, "Retail DE 01", "MB-Straight-L", "3030"),
            (171, "Retail DE 01", "MB-Straight-L", "3130"),
            (173, "Retail DE 01", "MB-Straight-L", "3030"),
            (181, "Retail DE 01", "MB-Straight-L", "3030"),
            (181, "Retail DE 01", "MB-Straight-L", "3130"),
            (173, "Wholesale FR 01", "WT-Crew Tee-M", "M"),
        ],
        columns=["season", "planning_group", "grid_name", "size"],
    )
    return assortment, demand, sell_out, stock, history


def assemble_tiny():
    assortment, demand, sell_out, stock, history = tiny_tables()
    return assemble_feature_table(
        assortment, GRIDS, PGS, demand, sell_out, stock, history
    )


def test_assembly_row_count_and_columns():
    table = assemble_tiny()
    # 2 seasons x 2 planning groups x (6 + 4) cells
    assert len(table) == 2 * 2 * 10
    assert len(CONTINUOUS_COLUMNS) == 75
    assert len(FLAG_COLUMNS) == 50
    assert len(CATEGORICAL_COLUMNS) == 9
    expected = (
        KEY_COLUMNS
        + [c for c in CATEGORICAL_COLUMNS if c not in KEY_COLUMNS]
        + CONTINUOUS_COLUMNS
        + FLAG_COLUMNS
        + [TARGET_COLUMN]
    )
    assert list(table.columns) == expected
    assert not table[CONTINUOUS_COLUMNS + FLAG_COLUMNS + [TARGET_COLUMN]].isna().any().any()
    assert 211 not in set(table["season"])


def row(table, season, pg, grid, size):
    mask = (
        (table["season"] == season)
        & (table["planning_group"] == pg)
        & (table["grid_name"] == grid)
        & (table["size"] == size)
    )
    assert mask.sum() == 1
    return table[mask].iloc[0]


def test_assembly_rolled_self_values():
    table = assemble_tiny()
    r = row(table, 181, "Retail DE 01", "MB-Straight-L", "3030")
    # window 173..163 picks up the 171 and 173 demand rows
    assert r["adjusted_demand_self"] == 50
    assert r["sell_out_self"] == 38
    assert r["sell_out_missing_self"] == 0
    assert r["sell_through_self"] == pytest.approx(38 / (38 + 22))
    assert r[TARGET_COLUMN] == 1


def test_assembly_neighbor_weighting():
    table = assemble_tiny()
    # 3130 sits directly right of 3030: slot n4 looks left (di=-1, dj=0)
    r = row(table, 181, "Retail DE 01", "MB-Straight-L", "3130")
    assert r["adjusted_demand_self"] == 20
    assert r["adjusted_demand_n4"] == pytest.approx(50 / 2)
    # diagonal neighbor of 3131? 3032 sits below-left of 3130
    r2 = row(table, 181, "Retail DE 01", "MB-Straight-L", "3132")
    assert r2["adjusted_demand_n1"] == pytest.approx(50 / 3)
    assert r2["adjusted_demand_n2"] == pytest.approx(20 / 2)


def test_assembly_missing_rules():
    table = assemble_tiny()
    # selected cell with no sell-out anywhere in the window: informative gap
    r = row(table, 173, "Retail DE 01", "MB-Straight-L", "3130")
    assert r["sell_out_self"] == 0
    assert r["sell_out_missing_self"] == 1
    assert r["stock_missing_self"] == 1
    # never-selected cell for that planning group: gap means zero
    r2 = row(table, 181, "Retail DE 01", "MB-Straight-L", "3232")
    assert r2["sell_out_self"] == 0
    assert r2["sell_out_missing_self"] == 0
    # wholesale planning group never selected the bottoms grid at all
    r3 = row(table, 181, "Wholesale FR 01", "MB-Straight-L", "3030")
    assert r3["sell_out_missing_self"] == 0
    assert r3[TARGET_COLUMN] == 0


def test_assembly_off_grid_slots():
    table = assemble_tiny()
    r = row(table, 181, "Retail DE 01", "MB-Straight-L", "3030")
    # corner cell: slots n1..n4 point off-grid
    for k in (1, 2, 3, 4):
        assert r[f"adjusted_demand_n{k}"] == 0
        assert r[f"sell_out_missing_n{k}"] == 1
        assert r[f"stock_missing_n{k}"] == 1


def test_assembly_one_dimensional_grid():
    table = assemble_tiny()
    r = row(table, 173, "Retail DE 01", "WT-Crew Tee-M", "L")
    # only n4 (left: the M cell) carries demand; vertical slots are off-grid
    assert r["adjusted_demand_n4"] == pytest.approx(15 / 2)
    assert r["adjusted_demand_n1"] == 0
    assert r["dim2"] == ""
    assert r["seasonality"] == "FallWinter"
    assert r["gender"] == "W" and r["category"] == "T"


def test_assembly_categoricals_and_channel():
    table = assemble_tiny()
    r = row(table, 181, "Wholesale FR 01", "WT-Crew Tee-M", "M")
    assert r["channel"] == "Wholesale"
    assert r["affiliate"] == "FR"
    assert r["seasonality"] == "SpringSummer"
    assert r[TARGET_COLUMN] == 0


def test_assembly_rejects_history_outside_grid():
    assortment, demand, sell_out, stock, history = tiny_tables()
    bad = pd.concat(
        [
            history,
            pd.DataFrame(
                [(173, "Retail DE 01", "MB-Straight-L", "9999")],
                columns=history.columns,
            ),
        ],
        ignore_index=True,
    )
    with pytest.raises(SelectionOutsideGrid):
        assemble_feature_table(assortment, GRIDS, PGS, demand, sell_out, stock, bad)
