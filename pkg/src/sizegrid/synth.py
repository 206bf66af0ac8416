"""Synthetic corpus generator.

Builds a seasons-long history of demand, sell-out, stock and size selections
for a catalog of size grids and planning groups. Labels follow a planted
rule: a cell is selected when the distance-weighted sum of its circle-1
neighbors' rolled four-season demand clears its grid's cutoff, the pooled
quantile at 1 - positive_share over all of the grid's planes, with a retail
cap on how many cells one planning group may keep. Demand plateaus are steep
and amplitudes stay in a narrow band, so the pooled scores split into a
plateau mass and a floor mass with a wide gap between them; the cutoff lands
in that gap, which keeps every combination's selection non-empty and makes
the rule a stable per-grid threshold rather than a moving target. Four
warm-up seasons of KPI history precede the first planned season so every
labeled row sees a full rolling window. Label noise sits at the cutoff: the
last kept and first dropped cell of each plane flip with a plane-size-scaled
probability, so the expected share of flipped labels equals noise_rate while
cells far from the boundary stay clean.

Demand itself is a smooth per-(planning group, grid) bump over the grid with
permanently dead cells, extra per-season zeros and a heavy multiplicative
tail, so most entries are zero and the mean sits far below the maximum.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd

from .domain import SizeGrid, parse_grid_name, parse_season, previous_seasons
from .errors import InvalidConfig
from .features import weighted_circle_sum

BOTTOM_STYLES = (
    "501", "502", "505", "511", "512", "514", "527", "541", "551", "569",
    "Youth Super Skinny", "Loose Taper", "Straight", "Bootcut", "Slim Taper",
    "High Rise Flare", "Ribcage Wide", "Baggy Crop",
)
TOP_STYLES = (
    "Crew Tee", "Vee Tee", "Pocket Tee", "Ringer Tee", "Hoodie", "Zip Hoodie",
    "Trucker", "Sherpa Trucker", "Western Shirt", "Oxford Shirt", "Polo", "Tank",
)
ALPHA_SIZES = ("XXS", "XS", "S", "M", "L", "XL", "XXL", "3XL")
AFFILIATES = ("DE", "FR", "UK", "IT", "ES", "NL", "PL", "SE")

# per-planning-group ceiling on kept cells, by grid extension; tops and
# youth grids are small enough to go uncapped
RETAIL_CAPS = {"H": 24, "M": 18, "L": 10}

NOISE_KINDS = ("negative_values", "missing_season", "duplicate_pg", "dropped_status")
_KIND_OFFSET = {kind: idx + 1 for idx, kind in enumerate(NOISE_KINDS)}

# observed share of blank key fields in the source extracts, per table
_BLANK_RATES = {
    "stock": {"season": 0.98, "size": 0.05, "planning_group": 0.038},
    "sell_out": {"season": 0.51, "size": 0.06, "planning_group": 0.027},
}


@dataclass(frozen=True)
class CorpusConfig:
    seed: int = 7
    n_grids: int = 12
    n_planning_groups: int = 16
    first_season: int = 163
    n_seasons: int = 9
    positive_share: float = 0.22
    zero_inflation: float = 0.55
    demand_tail_shape: float = 1.1
    wholesale_share: float = 0.3
    wholesale_missing_rate: float = 0.8
    noise_rate: float = 0.02
    unit_price_min: float = 19.9
    unit_price_max: float = 89.9

    def __post_init__(self):
        if self.n_grids < 2 or self.n_planning_groups < 1 or self.n_seasons < 2:
            raise InvalidConfig("corpus needs at least 2 grids, 1 group, 2 seasons")
        for name in ("positive_share", "zero_inflation", "wholesale_share",
                     "wholesale_missing_rate", "noise_rate"):
            v = getattr(self, name)
            if not 0.0 <= v < 1.0:
                raise InvalidConfig(f"{name} must lie in [0, 1), got {v}")
        if self.positive_share <= 0:
            raise InvalidConfig("positive_share must be positive")
        if not 0 < self.unit_price_min <= self.unit_price_max:
            raise InvalidConfig("unit price range is empty or non-positive")
        parse_season(self.first_season)

    @property
    def seasons(self) -> list[int]:
        out = [parse_season(self.first_season)]
        while len(out) < self.n_seasons:
            out.append(out[-1].next())
        return [s.code for s in out]


@dataclass
class SyntheticCorpus:
    config: CorpusConfig
    adjusted_demand: pd.DataFrame
    sell_out: pd.DataFrame
    stock: pd.DataFrame
    selected_sizes: pd.DataFrame
    planning_groups: pd.DataFrame
    product_master: pd.DataFrame
    fact_sizes: pd.DataFrame
    assortment: pd.DataFrame
    grid_catalog: pd.DataFrame
    truth: pd.DataFrame
    grids: dict[str, SizeGrid] = field(default_factory=dict)

    TABLE_NAMES = (
        "adjusted_demand", "sell_out", "stock", "selected_sizes",
        "planning_groups", "product_master", "fact_sizes", "assortment",
        "grid_catalog", "truth",
    )


def _build_grids(cfg: CorpusConfig, rng) -> dict[str, SizeGrid]:
    n_bottoms = round(cfg.n_grids * 0.6)
    specs = []
    ext_cycle = ("H", "M", "L")
    b, t = 0, 0
    for k in range(cfg.n_grids):
        is_bottom = b < n_bottoms and (t >= cfg.n_grids - n_bottoms or k % 5 != 4)
        ext = "Y" if k % 7 == 6 and is_bottom else ext_cycle[k % 3]
        gender = "MW"[k % 2]
        if is_bottom:
            style = BOTTOM_STYLES[b % len(BOTTOM_STYLES)]
            if b >= len(BOTTOM_STYLES):
                style = f"{style} {b // len(BOTTOM_STYLES) + 2:02d}"
            specs.append((gender, "B", style, ext))
            b += 1
        else:
            style = TOP_STYLES[t % len(TOP_STYLES)]
            if t >= len(TOP_STYLES):
                style = f"{style} {t // len(TOP_STYLES) + 2:02d}"
            specs.append((gender, "T", style, ext))
            t += 1
    grids: dict[str, SizeGrid] = {}
    for gender, cat, style, ext in specs:
        name = parse_grid_name(f"{gender}{cat}-{style}-{ext}")
        if cat == "B":
            n_w = {"H": int(rng.integers(8, 11)), "M": int(rng.integers(6, 8)),
                   "L": int(rng.integers(4, 6)), "Y": int(rng.integers(6, 8))}[ext]
            n_l = {"H": int(rng.integers(4, 6)), "M": int(rng.integers(3, 5)),
                   "L": int(rng.integers(2, 4)), "Y": int(rng.integers(3, 5))}[ext]
            w_start = int(rng.integers(24, 29))
            w_step = int(rng.integers(1, 3))
            l_start = int(rng.choice([28, 30]))
            dim1 = tuple(str(w_start + w_step * i) for i in range(n_w))
            dim2 = tuple(str(l_start + 2 * j) for j in range(n_l))
        else:
            count = {"H": 6, "M": 5, "L": 4, "Y": 5}[ext]
            start = int(rng.integers(0, len(ALPHA_SIZES) - count + 1))
            dim1 = ALPHA_SIZES[start:start + count]
            dim2 = ()
        grids[name.raw] = SizeGrid(name=name, dim1_values=dim1, dim2_values=dim2)
    return grids


def _build_planning_groups(cfg: CorpusConfig) -> pd.DataFrame:
    n_wholesale = round(cfg.n_planning_groups * cfg.wholesale_share)
    rows = []
    for k in range(cfg.n_planning_groups):
        channel = "Wholesale" if k >= cfg.n_planning_groups - n_wholesale else "Retail"
        affiliate = AFFILIATES[k % len(AFFILIATES)]
        rows.append(
            {
                "name": f"{channel} {affiliate} {k + 1:02d}",
                "channel": channel,
                "affiliate": affiliate,
                "brand": "LSE",
                "director": f"Dir {affiliate}",
            }
        )
    return pd.DataFrame(rows)


def _build_products(cfg: CorpusConfig, grids, seasons, rng):
    """Three style-colors per grid plus a few rows the map must filter out.

    A small share of products migrates to a sibling grid partway through the
    history, so grid lookups must prefer the latest season.
    """
    names = sorted(grids)
    rows = []
    grid_by_season: dict[str, dict[int, str]] = {}
    code_n = 1
    for gname in names:
        grid = grids[gname]
        for _ in range(3):
            code = f"P{code_n:05d}"
            code_n += 1
            rows.append(
                {
                    "product_code": code,
                    "category": "Bottoms" if grid.name.category == "B" else "Tops",
                    "gender": grid.name.gender,
                    "outlet_flag": "N",
                    "dummy_flag": "N",
                    "unit_price": round(
                        float(rng.uniform(cfg.unit_price_min, cfg.unit_price_max)), 2
                    ),
                }
            )
            grid_by_season[code] = {s: gname for s in seasons}
    regular = [r["product_code"] for r in rows]
    n_migrate = max(1, len(regular) // 12) if len(seasons) >= 4 else 0
    movers = rng.choice(len(regular), size=n_migrate, replace=False)
    moved_homes = set()
    for m in sorted(movers):
        code = regular[m]
        home = grid_by_season[code][seasons[0]]
        if home in moved_homes:  # keep at least two products on every grid
            continue
        moved_homes.add(home)
        same_cat = [g for g in names if g != home
                    and grids[g].name.category == grids[home].name.category]
        if not same_cat:
            continue
        target = same_cat[int(rng.integers(0, len(same_cat)))]
        switch = seasons[int(rng.integers(2, len(seasons) - 1))]
        for s in seasons:
            if s >= switch:
                grid_by_season[code][s] = target
    # rows the grid map must ignore: wrong category or flagged products
    for code, cat, outlet, dummy in (
        (f"P{code_n:05d}", "Footwear", "N", "N"),
        (f"P{code_n + 1:05d}", "Footwear", "N", "N"),
        (f"P{code_n + 2:05d}", "Bottoms", "Y", "N"),
        (f"P{code_n + 3:05d}", "Tops", "N", "Y"),
    ):
        rows.append(
            {
                "product_code": code,
                "category": cat,
                "gender": "M",
                "outlet_flag": outlet,
                "dummy_flag": dummy,
                "unit_price": round(float(rng.uniform(cfg.unit_price_min, cfg.unit_price_max)), 2),
            }
        )
        grid_by_season[code] = {s: names[0] for s in seasons}
    return pd.DataFrame(rows), grid_by_season


def _display_size(cell) -> str:
    return f"{cell.dim1} {cell.dim2}" if cell.dim2 is not None else cell.dim1


def generate_corpus(cfg: CorpusConfig | None = None) -> SyntheticCorpus:
    cfg = cfg or CorpusConfig()
    streams = np.random.SeedSequence(cfg.seed).spawn(5)
    rng_catalog = np.random.default_rng(streams[0])
    rng_demand = np.random.default_rng(streams[1])
    rng_labels = np.random.default_rng(streams[2])
    rng_kpi = np.random.default_rng(streams[3])
    rng_products = np.random.default_rng(streams[4])

    seasons = cfg.seasons
    grids = _build_grids(cfg, rng_catalog)
    pg_frame = _build_planning_groups(cfg)
    product_master, grid_by_season = _build_products(cfg, grids, seasons, rng_products)

    pgs = pg_frame["name"].tolist()
    pg_channel = dict(zip(pg_frame["name"], pg_frame["channel"]))
    n_s, n_p = len(seasons), len(pgs)
    # KPI-only warm-up seasons so the first planned season already has a
    # full rolling window behind it
    warmup = [s.code for s in reversed(previous_seasons(parse_season(seasons[0]), 4))]
    all_codes = warmup + list(seasons)
    n_warm = len(warmup)
    n_tot = len(all_codes)
    half = np.array([parse_season(s).half for s in all_codes])
    # fall/winter sells more; no year-over-year growth, so the planted
    # cutoff means the same thing in every season
    trend = np.where(half == 3, 1.1, 1.0).astype(float)

    dead_share = max(cfg.zero_inflation - 0.10, 0.0)
    extra_zero = 0.12
    sigma = cfg.demand_tail_shape

    demand_rows = []
    sell_rows = []
    stock_rows = []
    selection_rows = []
    truth_rows = []
    fact_region: dict[tuple[int, str], set] = {}

    # wholesale blocks that never report sell-out or stock
    withheld = {
        (pg, g)
        for pg in pgs
        if pg_channel[pg] == "Wholesale"
        for g in sorted(grids)
        if rng_kpi.random() < cfg.wholesale_missing_rate
    }

    for gname in sorted(grids):
        grid = grids[gname]
        h, w = grid.height, grid.width
        cells = grid.cells()
        cell_j = np.array([c.j for c in cells])
        cell_i = np.array([c.i for c in cells])

        # latent demand: per-group bump, dead cells, heavy tail. The bump
        # core saturates steeply into a flat plateau and amplitudes stay in a
        # narrow band, so neighbor-sum scores split into a plateau mass and a
        # floor mass separated by a wide gap. The bump footprint scales with
        # the configured positive share, which is what ultimately sets the
        # class balance.
        demand = np.zeros((n_tot, n_p, h, w))
        jj, ii = np.mgrid[0:h, 0:w]
        reach = np.sqrt(cfg.positive_share / 0.22)
        for p in range(n_p):
            amp = 900.0 * float(rng_demand.lognormal(-0.1**2 / 2.0, 0.1))
            ci = rng_demand.uniform(0.15, 0.85) * max(w - 1, 1)
            cj = rng_demand.uniform(0.15, 0.85) * max(h - 1, 1)
            si = rng_demand.uniform(0.105, 0.24) * reach * max(w - 1, 1) + 0.35
            sj = rng_demand.uniform(0.105, 0.24) * reach * max(h - 1, 1) + 0.35
            bump = np.exp(-(((ii - ci) ** 2) / (2 * si**2) + ((jj - cj) ** 2) / (2 * sj**2)))
            bump = bump**12 / (bump**12 + 0.35**12)
            dead = rng_demand.random((h, w)) < dead_share
            noise = rng_demand.lognormal(-sigma**2 / 2.0, sigma, size=(n_tot, h, w))
            zeros = rng_demand.random((n_tot, h, w)) < extra_zero
            vals = amp * bump[None] * trend[:, None, None] * noise
            vals[:, dead] = 0.0
            vals[zeros] = 0.0
            demand[:, p] = np.round(vals)

        # planted rule: a cell is kept when its weighted circle-1 sum of the
        # previous four seasons' demand clears the grid's cutoff, the pooled
        # quantile at 1 - positive_share over every plane of the grid. The
        # cutoff lands in the plateau/floor gap, so every plane keeps its
        # plateau and none degenerates to an empty selection; with stationary
        # demand and full windows the same cutoff holds in every season.
        score = np.zeros((n_s, n_p, h, w))
        for s in range(n_s):
            rolled = demand[s + n_warm - 4:s + n_warm].sum(axis=0)
            for p in range(n_p):
                score[s, p] = weighted_circle_sum(rolled[p], circle=1)
        n_cells = h * w
        thr = float(np.quantile(score, 1.0 - cfg.positive_share))
        rule = score > thr
        flat_sc = score.reshape(n_s, n_p, n_cells)
        ranks = (
            flat_sc.argsort(axis=2, kind="stable").argsort(axis=2) + 1
        ).reshape(score.shape)
        kept = rule.reshape(n_s, n_p, n_cells).sum(axis=2)
        # a plane whose plateau fell entirely on dead cells keeps its top
        # scorer anyway; planners never leave a combination empty
        empty = kept == 0
        if empty.any():
            rule |= (ranks == n_cells) & empty[..., None, None]
            kept = np.maximum(kept, 1)
        low = (n_cells - kept)[..., None, None]
        # signed rank margin above the cutoff, recorded for the truth table
        margin = (ranks - low) / n_cells
        # label noise lives at the cutoff: the last kept and first dropped
        # cell of each plane flip with a plane-size-scaled probability, so
        # the expected flipped share equals noise_rate. Planes keeping a
        # single cell never flip it away; their dropped-side cell carries
        # the whole noise budget instead.
        single = (kept == 1)[..., None, None]
        window = (ranks == low) | ((ranks == low + 1) & ~single)
        p_flip = np.where(
            single,
            min(0.5, cfg.noise_rate * n_cells),
            min(0.5, cfg.noise_rate * n_cells / 2.0),
        )
        flips = window & (rng_labels.random(score.shape) < p_flip)
        label = rule ^ flips

        cap = RETAIL_CAPS.get(grid.name.extension) if grid.name.category == "B" else None
        capped = np.zeros_like(label)
        if cap is not None:
            for s in range(n_s):
                for p in range(n_p):
                    if pg_channel[pgs[p]] != "Retail":
                        continue
                    flat_lab = label[s, p].ravel()
                    n_kept = int(flat_lab.sum())
                    if n_kept <= cap:
                        continue
                    idx = np.flatnonzero(flat_lab)
                    order = np.lexsort(
                        (idx % w, idx // w, -score[s, p].ravel()[idx])
                    )
                    drop = idx[order[cap:]]
                    flat_lab[drop] = False
                    capped[s, p].ravel()[drop] = True

        # warm-up seasons carry sell-out/stock for the same kind of cells the
        # planned seasons do; their windows ramp up from nothing, so the
        # cutoff is scaled by window length
        warm_keep = np.zeros((n_warm, n_p, h, w), dtype=bool)
        for g_idx in range(n_warm):
            rolled = demand[max(0, g_idx - 4):g_idx].sum(axis=0) if g_idx else demand[0]
            frac = max(g_idx, 1) / 4.0
            for p in range(n_p):
                warm_keep[g_idx, p] = (
                    weighted_circle_sum(rolled[p], circle=1) > thr * frac
                )

        # emit rows; KPI extracts cover warm-up and planned seasons alike,
        # candidates and truth exist for the planned seasons only
        for g_idx, season in enumerate(all_codes):
            s_idx = g_idx - n_warm
            for p_idx, pg in enumerate(pgs):
                d = demand[g_idx, p_idx, cell_j, cell_i]
                nz = d > 0
                for c_idx in np.flatnonzero(nz):
                    demand_rows.append(
                        (season, pg, gname, _display_size(cells[c_idx]), int(d[c_idx]))
                    )
                if s_idx >= 0:
                    lab = label[s_idx, p_idx, cell_j, cell_i]
                    sel_idx = np.flatnonzero(lab)
                    if len(sel_idx):
                        active = sorted(
                            p for p, by_s in grid_by_season.items()
                            if by_s.get(season) == gname
                        )
                        rep = active[0] if active else ""
                        region = fact_region.setdefault((season, gname), set())
                        for c_idx in sel_idx:
                            disp = _display_size(cells[c_idx])
                            selection_rows.append((season, pg, rep, gname, disp, "A"))
                            region.add(disp)
                else:
                    sel_idx = np.flatnonzero(warm_keep[g_idx, p_idx, cell_j, cell_i])
                if (pg, gname) not in withheld:
                    for c_idx in sel_idx:
                        dem = float(d[c_idx])
                        buy = int(round(dem * rng_kpi.uniform(0.9, 1.6))) + int(
                            rng_kpi.poisson(1.5)
                        )
                        sold = int(round(min(dem, buy) * rng_kpi.uniform(0.8, 1.0)))
                        disp = _display_size(cells[c_idx])
                        sell_rows.append((season, pg, gname, disp, sold))
                        stock_rows.append((season, pg, gname, disp, buy - sold))
                if s_idx >= 0:
                    for c_idx in range(len(cells)):
                        truth_rows.append(
                            (
                                season, pg, gname, cells[c_idx].token,
                                int(cell_i[c_idx]), int(cell_j[c_idx]),
                                float(margin[s_idx, p_idx, cell_j[c_idx], cell_i[c_idx]]),
                                bool(rule[s_idx, p_idx, cell_j[c_idx], cell_i[c_idx]]),
                                bool(flips[s_idx, p_idx, cell_j[c_idx], cell_i[c_idx]]),
                                bool(capped[s_idx, p_idx, cell_j[c_idx], cell_i[c_idx]]),
                                int(lab[c_idx]),
                                int(d[c_idx]),
                            )
                        )

    fact_rows = []
    for (season, gname), region in sorted(fact_region.items()):
        active = sorted(
            p for p, by_s in grid_by_season.items() if by_s.get(season) == gname
        )
        for code in active:
            for disp in sorted(region):
                fact_rows.append((season, code, gname, disp))

    assortment_rows = [
        (season, pg, gname)
        for gname in sorted(grids)
        for season in seasons
        for pg in pgs
    ]

    def frame(rows, columns):
        return pd.DataFrame(rows, columns=columns).sort_values(columns[:4]).reset_index(drop=True)

    catalog = pd.DataFrame(
        {
            "grid_name": sorted(grids),
            "dim1_values": ["|".join(grids[g].dim1_values) for g in sorted(grids)],
            "dim2_values": ["|".join(grids[g].dim2_values) for g in sorted(grids)],
        }
    )

    kpi_cols = ["season", "planning_group", "grid_name", "size", "quantity"]
    corpus = SyntheticCorpus(
        config=cfg,
        adjusted_demand=frame(demand_rows, kpi_cols),
        sell_out=frame(sell_rows, kpi_cols),
        stock=frame(stock_rows, kpi_cols),
        selected_sizes=frame(
            selection_rows,
            ["season", "planning_group", "product_code", "grid_name", "size", "status"],
        ),
        planning_groups=pg_frame,
        product_master=product_master,
        fact_sizes=frame(fact_rows, ["season", "product_code", "grid_name", "size"]),
        assortment=frame(assortment_rows, ["season", "planning_group", "grid_name"]),
        grid_catalog=catalog,
        truth=frame(
            truth_rows,
            [
                "season", "planning_group", "grid_name", "size", "i", "j",
                "rule_score", "rule_label", "flipped", "capped", "selected", "demand",
            ],
        ),
        grids=grids,
    )
    return corpus


def inject_noise(corpus: SyntheticCorpus, kind: str) -> SyntheticCorpus:
    """Return a copy of the corpus with one class of data defect added."""
    if kind not in NOISE_KINDS:
        raise InvalidConfig(f"unknown noise kind {kind!r}; choose from {NOISE_KINDS}")
    rng = np.random.default_rng(
        np.random.SeedSequence((corpus.config.seed, _KIND_OFFSET[kind]))
    )
    if kind == "negative_values":
        def negate(tbl):
            tbl = tbl.copy()
            positive = np.flatnonzero(tbl["quantity"].to_numpy() > 0)
            n = max(1, int(0.01 * len(positive)))
            hit = rng.choice(positive, size=min(n, len(positive)), replace=False)
            col = tbl.columns.get_loc("quantity")
            tbl.iloc[hit, col] = -tbl.iloc[hit, col]
            return tbl
        return dataclasses.replace(
            corpus, sell_out=negate(corpus.sell_out), stock=negate(corpus.stock)
        )
    if kind == "missing_season":
        def blank(tbl, rates):
            tbl = tbl.copy()
            for column, rate in rates.items():
                mask = rng.random(len(tbl)) < rate
                tbl[column] = tbl[column].astype(object)
                tbl.loc[mask, column] = ""
            return tbl
        return dataclasses.replace(
            corpus,
            sell_out=blank(corpus.sell_out, _BLANK_RATES["sell_out"]),
            stock=blank(corpus.stock, _BLANK_RATES["stock"]),
        )
    if kind == "duplicate_pg":
        rows = []
        for _, r in corpus.planning_groups.iterrows():
            for brand in (r["brand"], "LS&CO"):
                for director in (r["director"], f"{r['director']} (interim)"):
                    row = dict(r)
                    row["brand"], row["director"] = brand, director
                    rows.append(row)
        rows.append({c: "" for c in corpus.planning_groups.columns})
        return dataclasses.replace(
            corpus, planning_groups=pd.DataFrame(rows, columns=corpus.planning_groups.columns)
        )
    # dropped_status: stale rows planners abandoned; they reference real cells
    # that the final selection does not include
    sel = corpus.selected_sizes
    selected_keys = set(
        zip(sel["season"], sel["planning_group"], sel["grid_name"], sel["size"])
    )
    extra = []
    combos = sel[["season", "planning_group", "grid_name"]].drop_duplicates()
    take = combos.sample(
        n=max(1, len(combos) // 30), random_state=int(rng.integers(0, 2**31))
    )
    for _, combo in take.iterrows():
        grid = corpus.grids[combo["grid_name"]]
        for cell in grid.cells():
            disp = _display_size(cell)
            key = (combo["season"], combo["planning_group"], combo["grid_name"], disp)
            if key not in selected_keys:
                extra.append(
                    (combo["season"], combo["planning_group"], "", combo["grid_name"], disp, "D")
                )
                break
    noisy = pd.concat(
        [sel, pd.DataFrame(extra, columns=sel.columns)], ignore_index=True
    )
    return dataclasses.replace(corpus, selected_sizes=noisy)


def write_corpus(corpus: SyntheticCorpus, out_dir: str | Path) -> list[Path]:
    """Write every table as CSV; file names match table names."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for name in SyntheticCorpus.TABLE_NAMES:
        path = out / f"{name}.csv"
        getattr(corpus, name).to_csv(path, index=False)
        written.append(path)
    return written
