"""Grid-neighbor feature engineering.

Turns cleaned KPI tables plus a selection history into one model row per
candidate cell: rolled KPIs for the cell itself and its two neighbor rings,
distance-weighted, with missingness flags where a gap is informative.

Neighbor slots sit in fixed row-major order around the cell. Circle 1 holds
the 8 cells at Chebyshev index distance 1 (slots n1..n8), circle 2 the 16
cells at distance 2 (n9..n24). A neighbor's KPI is divided by its Manhattan
index distance plus one, so an orthogonal circle-1 neighbor contributes half
its value and a diagonal one a third.
"""
from __future__ import annotations

import numpy as np
import pandas as pd

from .domain import SizeCell, SizeGrid, parse_season, previous_seasons
from .errors import SchemaMismatch, SelectionOutsideGrid

# (di, dj) offsets in row-major order; j grows down the dim2 list
CIRCLE1_OFFSETS = (
    (-1, -1), (0, -1), (1, -1),
    (-1, 0), (1, 0),
    (-1, 1), (0, 1), (1, 1),
)
CIRCLE2_OFFSETS = (
    (-2, -2), (-1, -2), (0, -2), (1, -2), (2, -2),
    (-2, -1), (2, -1),
    (-2, 0), (2, 0),
    (-2, 1), (2, 1),
    (-2, 2), (-1, 2), (0, 2), (1, 2), (2, 2),
)
ALL_OFFSETS = CIRCLE1_OFFSETS + CIRCLE2_OFFSETS

KPI_COLUMNS = ("adjusted_demand", "sell_out", "sell_through")
FLAGGED_KPIS = ("sell_out", "stock")

_SLOTS = ["self"] + [f"n{k}" for k in range(1, 25)]

CONTINUOUS_COLUMNS = [f"{kpi}_{slot}" for kpi in KPI_COLUMNS for slot in _SLOTS]
FLAG_COLUMNS = [f"{kpi}_missing_{slot}" for kpi in FLAGGED_KPIS for slot in _SLOTS]
CATEGORICAL_COLUMNS = [
    "grid_name",
    "dim1",
    "dim2",
    "planning_group",
    "seasonality",
    "channel",
    "affiliate",
    "gender",
    "category",
]
TARGET_COLUMN = "selected"
KEY_COLUMNS = ["season", "planning_group", "grid_name", "size", "dim1", "dim2", "i", "j"]

# seasons at or past this code carry pandemic-distorted demand and stay out
EXCLUDE_FROM_SEASON = 211


def manhattan_weight(di: int, dj: int) -> float:
    """1 / (Manhattan index distance + 1)."""
    return 1.0 / (abs(di) + abs(dj) + 1.0)


def weighted_neighbor_kpi(value: float, di: int, dj: int) -> float:
    return value * manhattan_weight(di, dj)


def neighbor_cells(grid: SizeGrid, cell: SizeCell, circle: int) -> list[SizeCell | None]:
    """Cells of a neighbor ring in slot order; None marks off-grid slots."""
    if circle == 1:
        offsets = CIRCLE1_OFFSETS
    elif circle == 2:
        offsets = CIRCLE2_OFFSETS
    else:
        raise SchemaMismatch(f"circle must be 1 or 2, got {circle}")
    return [grid.cell_at(cell.i + di, cell.j + dj) for di, dj in offsets]


def compute_sell_through(sell_out, stock):
    """Sell-out / (sell-out + leftover stock); NaN when that ratio has no
    information (both zero) or either input is missing."""
    so = np.asarray(sell_out, dtype=float)
    st = np.asarray(stock, dtype=float)
    total = so + st
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(total > 0, so / total, np.nan)
    out = np.where(np.isnan(so) | np.isnan(st), np.nan, out)
    if out.ndim == 0:
        return float(out) if not np.isnan(out) else float("nan")
    return out


def rolling_aggregate(
    frame: pd.DataFrame,
    window: int = 4,
    value_columns: tuple[str, ...] | None = None,
    target_seasons: list[int] | None = None,
) -> pd.DataFrame:
    """Sum each key's values over the `window` seasons before each target.

    Keys are (planning_group, grid_name, size). A key/season pair appears in
    the output only if at least one window season has a row for it, so a
    fully missing window stays missing. The target season itself never
    contributes to its own window.
    """
    keys = ["planning_group", "grid_name", "size"]
    missing = [c for c in keys + ["season"] if c not in frame.columns]
    if missing:
        raise SchemaMismatch(f"rolling input lacks columns: {missing}")
    if value_columns is None:
        value_columns = tuple(
            c for c in frame.columns if c not in keys and c != "season"
        )
    sources = sorted(frame["season"].astype(int).unique().tolist())
    if target_seasons is None:
        target_seasons = sources
    pairs = []
    for t in sorted(set(int(s) for s in target_seasons)):
        for src in previous_seasons(parse_season(t), window):
            if src.code in sources:
                pairs.append((t, src.code))
    if not pairs:
        return pd.DataFrame(columns=["season"] + keys + list(value_columns))
    mapping = pd.DataFrame(pairs, columns=["target_season", "season"])
    joined = frame.merge(mapping, on="season", how="inner")
    rolled = (
        joined.groupby(["target_season"] + keys, sort=True)[list(value_columns)]
        .sum(min_count=1)
        .reset_index()
        .rename(columns={"target_season": "season"})
    )
    return rolled


def enumerate_candidates(grid: SizeGrid) -> list[SizeCell]:
    """Every cell of the grid is a candidate, selected or not."""
    return grid.cells()


def label_targets(
    grid: SizeGrid, history_tokens: set[str], context: str = ""
) -> dict[str, int]:
    """Map each candidate token to 1 if the history selected it.

    History tokens outside the grid mean the catalog and the history
    disagree; that is a data defect worth stopping for.
    """
    tokens = grid.cells_by_token()
    stray = sorted(history_tokens - set(tokens))
    if stray:
        raise SelectionOutsideGrid(
            f"history cells {stray} absent from grid {grid.name.raw!r} {context}"
        )
    return {tok: (1 if tok in history_tokens else 0) for tok in tokens}


def _shift(plane: np.ndarray, di: int, dj: int, fill) -> np.ndarray:
    """Value of the cell at (i+di, j+dj) for every (i, j), padded with fill."""
    out = np.full_like(plane, fill)
    h, w = plane.shape[-2:]
    src_i = slice(max(di, 0), w + min(di, 0))
    dst_i = slice(max(-di, 0), w + min(-di, 0))
    src_j = slice(max(dj, 0), h + min(dj, 0))
    dst_j = slice(max(-dj, 0), h + min(-dj, 0))
    if src_i.start >= w + min(di, 0) or src_j.start >= h + min(dj, 0):
        return out
    out[..., dst_j, dst_i] = plane[..., src_j, src_i]
    return out


def weighted_circle_sum(plane: np.ndarray, circle: int = 1) -> np.ndarray:
    """Distance-weighted sum of a ring's values for every cell of a plane.

    Off-grid slots contribute nothing. Shared by the corpus generator's
    planted rule and by diagnostics; per-slot features go through
    assemble_feature_table instead.
    """
    offsets = CIRCLE1_OFFSETS if circle == 1 else CIRCLE2_OFFSETS
    acc = np.zeros_like(plane, dtype=float)
    for di, dj in offsets:
        acc += manhattan_weight(di, dj) * _shift(plane, di, dj, 0.0)
    return acc


def assemble_feature_table(
    assortment: pd.DataFrame,
    grids: dict[str, SizeGrid],
    planning_groups: pd.DataFrame,
    demand: pd.DataFrame,
    sell_out: pd.DataFrame,
    stock: pd.DataFrame,
    history: pd.DataFrame,
    window: int = 4,
    exclude_from_season: int = EXCLUDE_FROM_SEASON,
) -> pd.DataFrame:
    """One row per (season, planning group, grid, candidate cell).

    Filling policy for gaps:
      * adjusted demand: absent means nothing was sold or asked for -> 0
      * sell-out / stock on cells never selected for that planning group:
        the value can only be 0 -> 0 with flag 0
      * other sell-out / stock gaps: unknown -> 0 with flag 1
      * off-grid neighbor slots: value 0, flag 1 for the flagged KPIs
    Seasons at or past exclude_from_season are dropped everywhere.
    """
    for name, tbl, cols in (
        ("assortment", assortment, ["season", "planning_group", "grid_name"]),
        ("demand", demand, ["season", "planning_group", "grid_name", "size", "quantity"]),
        ("sell_out", sell_out, ["season", "planning_group", "grid_name", "size", "quantity"]),
        ("stock", stock, ["season", "planning_group", "grid_name", "size", "quantity"]),
        ("history", history, ["season", "planning_group", "grid_name", "size"]),
    ):
        missing = [c for c in cols if c not in tbl.columns]
        if missing:
            raise SchemaMismatch(f"{name} table lacks columns: {missing}")

    pg_info = {
        str(r["planning_group"]): (str(r["channel"]), str(r["affiliate"]))
        for _, r in planning_groups.iterrows()
    }

    def in_scope(tbl):
        return tbl[tbl["season"].astype(int) < exclude_from_season]

    assortment = in_scope(assortment)
    demand, sell_out, stock = in_scope(demand), in_scope(sell_out), in_scope(stock)
    history = in_scope(history)

    all_seasons = sorted(
        set(assortment["season"].astype(int))
        | set(demand["season"].astype(int))
        | set(sell_out["season"].astype(int))
        | set(stock["season"].astype(int))
    )
    season_pos = {s: idx for idx, s in enumerate(all_seasons)}
    n_seasons = len(all_seasons)
    # window source indices per target season, precomputed once
    window_sources = {
        s: [
            season_pos[c.code]
            for c in previous_seasons(parse_season(s), window)
            if c.code in season_pos
        ]
        for s in all_seasons
    }

    chunks = []
    for grid_name in sorted(grids):
        grid = grids[grid_name]
        combos = assortment[assortment["grid_name"] == grid_name]
        if combos.empty:
            continue
        chunks.append(
            _assemble_grid(
                grid,
                combos,
                pg_info,
                demand[demand["grid_name"] == grid_name],
                sell_out[sell_out["grid_name"] == grid_name],
                stock[stock["grid_name"] == grid_name],
                history[history["grid_name"] == grid_name],
                all_seasons,
                season_pos,
                window_sources,
            )
        )
    if not chunks:
        raise SchemaMismatch("assortment yields no candidate rows")
    out = pd.concat(chunks, ignore_index=True)
    return out


def load_feature_table(path) -> pd.DataFrame:
    """Read an assembled feature CSV back with text columns kept as text.

    Plain read_csv turns numeric-looking size tokens into numbers, which no
    longer match the levels a fitted encoder learned; its default float
    parser is also off by an ulp here and there, enough to flip a tree
    split. Text dtypes plus round-trip parsing reproduce the assembled
    table exactly.
    """
    text = sorted(set(CATEGORICAL_COLUMNS) | {"size"})
    frame = pd.read_csv(
        path, dtype={c: str for c in text}, float_precision="round_trip"
    )
    for c in text:
        frame[c] = frame[c].fillna("")
    return frame


def _dense_cubes(grid, table, season_pos, pg_pos, tokens):
    """(values, presence) cubes of shape (seasons, pgs, H, W) for one KPI."""
    h, w = grid.height, grid.width
    values = np.zeros((len(season_pos), len(pg_pos), h, w))
    present = np.zeros_like(values, dtype=bool)
    if table.empty:
        return values, present
    tok_pos = {t: (c.j, c.i) for t, c in tokens.items()}
    seasons = table["season"].astype(int).to_numpy()
    pgs = table["planning_group"].astype(str).to_numpy()
    toks = table["size"].astype(str).to_numpy()
    qty = table["quantity"].to_numpy(dtype=float)
    idx = [
        (season_pos[s], pg_pos[pg]) + tok_pos[tok]
        for s, pg, tok in zip(seasons, pgs, toks)
        if pg in pg_pos and tok in tok_pos and s in season_pos
    ]
    keep = np.array(
        [pg in pg_pos and tok in tok_pos and s in season_pos
         for s, pg, tok in zip(seasons, pgs, toks)],
        dtype=bool,
    )
    if idx:
        arr = np.array(idx)
        coords = (arr[:, 0], arr[:, 1], arr[:, 2], arr[:, 3])
        np.add.at(values, coords, qty[keep])
        present[coords] = True
    return values, present


def _assemble_grid(
    grid,
    combos,
    pg_info,
    demand,
    sell_out,
    stock,
    history,
    all_seasons,
    season_pos,
    window_sources,
):
    tokens = grid.cells_by_token()
    pgs = sorted(combos["planning_group"].astype(str).unique())
    pg_pos = {p: idx for idx, p in enumerate(pgs)}
    h, w = grid.height, grid.width

    d_val, _ = _dense_cubes(grid, demand, season_pos, pg_pos, tokens)
    so_val, so_pres = _dense_cubes(grid, sell_out, season_pos, pg_pos, tokens)
    st_val, st_pres = _dense_cubes(grid, stock, season_pos, pg_pos, tokens)

    # selection history as a (season, pg, j, i) mask; also drives labels and
    # the never-selected shortcut
    sel = np.zeros((len(season_pos), len(pg_pos), h, w), dtype=bool)
    h_seasons = history["season"].astype(int).to_numpy()
    h_pgs = history["planning_group"].astype(str).to_numpy()
    h_toks = history["size"].astype(str).to_numpy()
    for s, pg, tok in zip(h_seasons, h_pgs, h_toks):
        if pg not in pg_pos:
            continue
        if tok not in tokens:
            raise SelectionOutsideGrid(
                f"history cell {tok!r} absent from grid {grid.name.raw!r} "
                f"(season {s}, planning group {pg})"
            )
        if s in season_pos:
            cell = tokens[tok]
            sel[season_pos[s], pg_pos[pg], cell.j, cell.i] = True
    ever_selected = sel.any(axis=0)  # (pg, j, i)

    # rolled values per target season; missing only when the whole window is
    n = len(all_seasons)
    r_d = np.zeros_like(d_val)
    r_so = np.zeros_like(so_val)
    r_so_pres = np.zeros((n,) + so_pres.shape[1:], dtype=bool)
    r_st = np.zeros_like(st_val)
    r_st_pres = np.zeros_like(r_so_pres)
    for s in all_seasons:
        t = season_pos[s]
        src = window_sources[s]
        if not src:
            continue
        r_d[t] = d_val[src].sum(axis=0)
        r_so[t] = np.where(so_pres[src], so_val[src], 0.0).sum(axis=0)
        r_so_pres[t] = so_pres[src].any(axis=0)
        r_st[t] = np.where(st_pres[src], st_val[src], 0.0).sum(axis=0)
        r_st_pres[t] = st_pres[src].any(axis=0)

    never = ~ever_selected[None, :, :, :]  # broadcast over seasons
    so_missing = ~r_so_pres & ~never  # informative gap -> flag 1
    st_missing = ~r_st_pres & ~never
    with np.errstate(invalid="ignore", divide="ignore"):
        total = r_so + r_st
        sell_through = np.where(
            r_so_pres & r_st_pres & (total > 0), r_so / np.where(total > 0, total, 1.0), 0.0
        )

    planes = {
        "adjusted_demand": (r_d, None),
        "sell_out": (r_so, so_missing),
        "sell_through": (sell_through, None),
        "stock": (None, st_missing),
    }

    columns: dict[str, np.ndarray] = {}
    for kpi in KPI_COLUMNS:
        value_plane = planes[kpi][0]
        columns[f"{kpi}_self"] = value_plane
    for kpi in FLAGGED_KPIS:
        columns[f"{kpi}_missing_self"] = planes[kpi][1].astype(float)
    for idx, (di, dj) in enumerate(ALL_OFFSETS, start=1):
        weight = manhattan_weight(di, dj)
        for kpi in KPI_COLUMNS:
            value_plane = planes[kpi][0]
            columns[f"{kpi}_n{idx}"] = weight * _shift(value_plane, di, dj, 0.0)
        for kpi in FLAGGED_KPIS:
            miss = planes[kpi][1]
            # padding with True: an off-grid slot reports a gap
            columns[f"{kpi}_missing_n{idx}"] = _shift(
                miss, di, dj, True
            ).astype(float)

    cells = grid.cells()
    cell_j = np.array([c.j for c in cells])
    cell_i = np.array([c.i for c in cells])
    rows = []
    combo_keys = sorted(
        (int(r["season"]), str(r["planning_group"]))
        for _, r in combos.iterrows()
    )
    gender, category = grid.name.gender, grid.name.category
    for season, pg in combo_keys:
        if season not in season_pos or pg not in pg_pos:
            continue
        t, p = season_pos[season], pg_pos[pg]
        channel, affiliate = pg_info.get(pg, ("Retail", "NA"))
        half = parse_season(season).half
        base = {
            "season": season,
            "planning_group": pg,
            "grid_name": grid.name.raw,
            "seasonality": "SpringSummer" if half == 1 else "FallWinter",
            "channel": channel,
            "affiliate": affiliate,
            "gender": gender,
            "category": category,
        }
        data: dict = {
            "size": [c.token for c in cells],
            "dim1": [c.dim1 for c in cells],
            "dim2": [c.dim2 or "" for c in cells],
            "i": cell_i,
            "j": cell_j,
        }
        data.update(base)
        for name, plane in columns.items():
            data[name] = plane[t, p, cell_j, cell_i]
        data[TARGET_COLUMN] = sel[t, p, cell_j, cell_i].astype(int)
        rows.append(pd.DataFrame(data))
    ordered = KEY_COLUMNS + [
        c for c in CATEGORICAL_COLUMNS if c not in KEY_COLUMNS
    ] + CONTINUOUS_COLUMNS + FLAG_COLUMNS + [TARGET_COLUMN]
    out = pd.concat(rows, ignore_index=True)
    return out[ordered]
