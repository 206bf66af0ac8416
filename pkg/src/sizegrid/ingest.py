"""Raw-table loading and the cleaning that makes the extracts usable.

The source extracts arrive from different systems and carry different kinds
of rot: blank key fields (the stock extract loses almost every season
field), negative sold quantities, size tokens written with assorted
separators, duplicated planning-group rows that differ only in brand or
director, and selection rows that were placed and later withdrawn. Missing
keys cannot be imputed, so cleaning is strictly subtractive: a row either
survives every filter or is dropped and counted. Each cleaning operation
reports what it removed and why.

Selection history is assembled last: the planner tool's rows win wherever
they exist, and combinations the tool never touched fall back to the fact
sizes of their grid and season, which is the region planners get by default
when nobody edits a selection.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

import pandas as pd

from .domain import (
    CHANNELS,
    PlanningGroup,
    SizeGrid,
    normalize_size_token,
    parse_grid_name,
)
from .errors import EmptyAfterNormalize, InvalidConfig, IoFailure, SchemaMismatch

log = logging.getLogger(__name__)

# a key field counts as missing when, after stripping, it is one of these
MISSING_TOKENS = ("", "NULL")

KPI_KINDS = ("stock", "sell_out", "adjusted_demand")

_KPI_SCHEMA = ["season", "planning_group", "grid_name", "size", "quantity"]

TABLE_SCHEMAS = {
    "adjusted_demand": _KPI_SCHEMA,
    "sell_out": _KPI_SCHEMA,
    "stock": _KPI_SCHEMA,
    "selected_sizes": [
        "season", "planning_group", "product_code", "grid_name", "size", "status",
    ],
    "planning_groups": ["name", "channel", "affiliate", "brand", "director"],
    "product_master": [
        "product_code", "category", "gender", "outlet_flag", "dummy_flag", "unit_price",
    ],
    "fact_sizes": ["season", "product_code", "grid_name", "size"],
    "assortment": ["season", "planning_group", "grid_name"],
    "grid_catalog": ["grid_name", "dim1_values", "dim2_values"],
}


@dataclass
class RawTable:
    """A named, text-valued table. Typing happens after cleaning."""

    name: str
    frame: pd.DataFrame

    def __len__(self):
        return len(self.frame)


@dataclass
class CleaningReport:
    table: str
    input_rows: int = 0
    output_rows: int = 0
    dropped: dict = field(default_factory=dict)
    counters: dict = field(default_factory=dict)

    @property
    def rows_dropped(self) -> int:
        return sum(self.dropped.values())

    def to_dict(self) -> dict:
        return {
            "table": self.table,
            "input_rows": self.input_rows,
            "output_rows": self.output_rows,
            "dropped": dict(self.dropped),
            "counters": dict(self.counters),
        }

    def summary(self) -> str:
        lines = [
            f"{self.table}: {self.input_rows} rows in, "
            f"{self.output_rows} out ({self.rows_dropped} dropped)"
        ]
        for rule, n in self.dropped.items():
            lines.append(f"  - {rule}: {n}")
        for key, n in self.counters.items():
            lines.append(f"  . {key}: {n}")
        return "\n".join(lines)


def load_table(path, schema, name: str | None = None) -> RawTable:
    """Read a CSV with every field as text and check the schema by name.

    Extra columns are dropped; missing ones raise SchemaMismatch. Unreadable
    or unparseable files raise IoFailure.
    """
    path = Path(path)
    name = name or path.stem
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False)
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    except pd.errors.EmptyDataError as exc:
        raise SchemaMismatch(f"{name}: file has no header row") from exc
    except pd.errors.ParserError as exc:
        raise IoFailure(f"cannot parse {path}: {exc}") from exc
    missing = [c for c in schema if c not in frame.columns]
    if missing:
        raise SchemaMismatch(f"{name}: missing columns {missing}")
    return RawTable(name, frame[list(schema)].copy())


def _blank(series: pd.Series, missing_tokens) -> pd.Series:
    return series.str.strip().isin(missing_tokens)


def _normalize_size_column(frame, report=None, missing_tokens=MISSING_TOKENS):
    """Map every size token through the canonical form; uniques only, the
    same few hundred tokens repeat across millions of rows."""
    if not len(frame):
        return frame
    mapping = {}
    for tok in frame["size"].unique():
        try:
            mapping[tok] = normalize_size_token(tok)
        except EmptyAfterNormalize:
            mapping[tok] = ""
    sizes = frame["size"].map(mapping)
    changed = int((sizes != frame["size"]).sum())
    frame = frame.assign(size=sizes)
    bad = _blank(frame["size"], missing_tokens)
    if report is not None:
        if changed:
            report.counters["sizes_normalized"] = changed
        if bad.any():
            report.dropped["unnormalizable_size"] = int(bad.sum())
    return frame[~bad]


def clean_kpi_table(t: RawTable, kind: str, missing_tokens=MISSING_TOKENS):
    """Apply the subtractive cleaning rules for one KPI extract.

    Rows with blank season/size/planning-group go first, then rows whose
    season or quantity fails to parse, then negative quantities for stock
    and sell-out. Adjusted demand gets the missing-check only: its negatives
    are meaningful adjustments, not noise. Returns the cleaned table and a
    report of what was dropped per rule.
    """
    if kind not in KPI_KINDS:
        raise InvalidConfig(f"unknown KPI kind {kind!r}; choose from {KPI_KINDS}")
    rep = CleaningReport(table=t.name, input_rows=len(t.frame))
    f = t.frame
    for col, rule in (
        ("season", "blank_season"),
        ("size", "blank_size"),
        ("planning_group", "blank_planning_group"),
    ):
        bad = _blank(f[col], missing_tokens)
        if bad.any():
            rep.dropped[rule] = int(bad.sum())
            f = f[~bad]

    season_num = pd.to_numeric(f["season"].str.strip(), errors="coerce")
    bad = season_num.isna()
    if bad.any():
        rep.dropped["malformed_season"] = int(bad.sum())
        f = f[~bad]

    qty = pd.to_numeric(f["quantity"].str.strip(), errors="coerce")
    bad = qty.isna()
    if bad.any():
        rep.dropped["malformed_quantity"] = int(bad.sum())
        f = f[~bad]
        qty = qty[~bad]
    if kind != "adjusted_demand":
        neg = qty < 0
        if neg.any():
            rep.dropped["negative_quantity"] = int(neg.sum())
            f = f[~neg]

    f = _normalize_size_column(f, rep, missing_tokens)
    f = f.assign(
        season=f["season"].str.strip(),
        planning_group=f["planning_group"].str.strip(),
        quantity=f["quantity"].str.strip(),
    )
    rep.output_rows = len(f)
    return RawTable(t.name, f.reset_index(drop=True)), rep


def dedup_planning_groups(t: RawTable, missing_tokens=MISSING_TOKENS):
    """Collapse the planning-group extract to unique (name, channel,
    affiliate) triples, dropping rows with any blank key field."""
    out: list[PlanningGroup] = []
    seen = set()
    for row in t.frame.itertuples(index=False):
        name = row.name.strip()
        channel = row.channel.strip()
        affiliate = row.affiliate.strip()
        if any(v in missing_tokens for v in (name, channel, affiliate)):
            continue
        triple = (name, channel, affiliate)
        if triple in seen:
            continue
        seen.add(triple)
        if channel not in CHANNELS:
            log.warning("planning group %r has unknown channel %r; skipped", name, channel)
            continue
        out.append(PlanningGroup(name=name, channel=channel, affiliate=affiliate))
    return out


def planning_groups_frame(groups) -> pd.DataFrame:
    """The cleaned groups as a frame keyed the way the feature table wants."""
    return pd.DataFrame(
        {
            "planning_group": [g.name for g in groups],
            "channel": [g.channel for g in groups],
            "affiliate": [g.affiliate for g in groups],
        }
    )


def build_product_grid_map(selections, fact_sizes, product_master,
                           missing_tokens=MISSING_TOKENS) -> dict:
    """Map each product to the grid name of its latest season.

    Pairs come from the union of tool selections and fact sizes. Products
    outside tops/bottoms and anything flagged outlet or dummy are removed
    via the master. A tie at the maximal season breaks lexicographically on
    grid name and is logged; it should not happen in practice.
    """
    cols = ["season", "product_code", "grid_name"]
    both = pd.concat(
        [selections.frame[cols], fact_sizes.frame[cols]], ignore_index=True
    )
    both = both.assign(
        product_code=both["product_code"].str.strip(),
        grid_name=both["grid_name"].str.strip(),
        season=pd.to_numeric(both["season"].astype(str).str.strip(), errors="coerce"),
    )
    both = both[~both["product_code"].isin(missing_tokens) & both["season"].notna()]

    master = product_master.frame
    ok = master["category"].str.strip().str.lower().isin(("tops", "bottoms"))
    ok &= master["outlet_flag"].str.strip() != "Y"
    ok &= master["dummy_flag"].str.strip() != "Y"
    in_scope = set(master.loc[ok, "product_code"].str.strip())
    both = both[both["product_code"].isin(in_scope)]

    out: dict[str, str] = {}
    for code, sub in both.groupby("product_code"):
        latest = sub[sub["season"] == sub["season"].max()]
        names = sorted(set(latest["grid_name"]))
        if len(names) > 1:
            log.warning(
                "product %s has %d grids at its last season; keeping %s",
                code, len(names), names[0],
            )
        out[code] = names[0]
    return out


def assemble_selection_history(tool_selections, fact_sizes, assortment) -> RawTable:
    """One row per (season, planning group, grid, size) that counts as
    previously selected.

    Withdrawn rows (status 'D') are dropped first. Combinations the tool has
    rows for keep exactly those sizes; combinations without any fall back to
    the fact sizes of their (season, grid), the region selected by default.
    """
    sel = tool_selections.frame
    sel = sel[sel["status"].str.strip() != "D"]
    sel = _normalize_size_column(sel)
    fact = _normalize_size_column(fact_sizes.frame)

    def skey(v):
        return str(v).strip()

    tool_map: dict[tuple, set] = {}
    for row in sel.itertuples(index=False):
        key = (skey(row.season), row.planning_group.strip(), row.grid_name.strip())
        tool_map.setdefault(key, set()).add(row.size)
    fact_map: dict[tuple, set] = {}
    for row in fact.itertuples(index=False):
        fact_map.setdefault(
            (skey(row.season), row.grid_name.strip()), set()
        ).add(row.size)

    rows = []
    fallback = no_history = 0
    for combo in assortment.frame.itertuples(index=False):
        season = skey(combo.season)
        pg = str(combo.planning_group).strip()
        gname = str(combo.grid_name).strip()
        sizes = tool_map.get((season, pg, gname))
        if sizes is None:
            sizes = fact_map.get((season, gname))
            fallback += 1
            if sizes is None:
                # nothing was ever selected or stocked here; features treat
                # the combination as having no selection history
                no_history += 1
                continue
        for size in sorted(sizes):
            rows.append((season, pg, gname, size))
    if fallback:
        log.info("selection history: %d combinations filled from fact sizes "
                 "(%d had no history at all)", fallback, no_history)
    return RawTable(
        "selection_history",
        pd.DataFrame(rows, columns=["season", "planning_group", "grid_name", "size"]),
    )


def grids_from_catalog(catalog: RawTable) -> dict[str, SizeGrid]:
    """Rebuild SizeGrid objects from the catalog's pipe-joined value lists."""
    out = {}
    for row in catalog.frame.itertuples(index=False):
        gname = row.grid_name.strip()
        d1 = tuple(v for v in row.dim1_values.split("|") if v)
        d2 = tuple(v for v in row.dim2_values.split("|") if v)
        out[gname] = SizeGrid(name=parse_grid_name(gname), dim1_values=d1, dim2_values=d2)
    return out


@dataclass
class IngestResult:
    adjusted_demand: pd.DataFrame
    sell_out: pd.DataFrame
    stock: pd.DataFrame
    planning_groups: pd.DataFrame
    groups: list
    product_master: pd.DataFrame
    grid_map: dict
    history: pd.DataFrame
    grids: dict
    assortment: pd.DataFrame
    reports: dict


def ingest_corpus(in_dir) -> IngestResult:
    """Load, clean and type every source table under one directory.

    The output frames carry integer seasons and numeric quantities, ready
    for the feature assembly step; `reports` holds one CleaningReport per
    KPI table.
    """
    in_dir = Path(in_dir)
    raw = {
        tname: load_table(in_dir / f"{tname}.csv", schema, name=tname)
        for tname, schema in TABLE_SCHEMAS.items()
    }

    reports = {}
    cleaned = {}
    for kind in KPI_KINDS:
        cleaned[kind], reports[kind] = clean_kpi_table(raw[kind], kind)

    groups = dedup_planning_groups(raw["planning_groups"])
    history = assemble_selection_history(
        raw["selected_sizes"], raw["fact_sizes"], raw["assortment"]
    )
    grids = grids_from_catalog(raw["grid_catalog"])
    grid_map = build_product_grid_map(
        raw["selected_sizes"], raw["fact_sizes"], raw["product_master"]
    )

    def typed_kpi(t):
        f = t.frame.copy()
        f["season"] = f["season"].astype(int)
        f["quantity"] = pd.to_numeric(f["quantity"]).astype(int)
        return f

    hist = history.frame.copy()
    hist["season"] = hist["season"].astype(int)
    assort = raw["assortment"].frame.copy()
    assort["season"] = assort["season"].astype(str).str.strip().astype(int)
    master = raw["product_master"].frame.copy()
    master["unit_price"] = master["unit_price"].astype(float)

    return IngestResult(
        adjusted_demand=typed_kpi(cleaned["adjusted_demand"]),
        sell_out=typed_kpi(cleaned["sell_out"]),
        stock=typed_kpi(cleaned["stock"]),
        planning_groups=planning_groups_frame(groups),
        groups=groups,
        product_master=master,
        grid_map=grid_map,
        history=hist,
        grids=grids,
        assortment=assort,
        reports=reports,
    )
