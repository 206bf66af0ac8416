"""HTTP face of a completed run: scored grids, overrides, what-if.

The service holds one run in memory. Planner overrides and cap changes
append to a JSON-lines journal next to the run artifacts and are replayed
on startup, so a restart lands exactly where the planners left off. Reads
are lock-free; writes serialize through one lock.
"""

import json
import threading
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd

from .errors import (
    CapBelowOverrides,
    CapViolation,
    NotFound,
    ServiceValidationError,
)
from .features import weighted_circle_sum

JOURNAL_NAME = "overrides.jsonl"

EXPORT_COLUMNS = ["season", "planning_group", "grid_name", "size", "i", "j", "final"]


@dataclass
class Cell:
    i: int
    j: int
    size: str
    dim1: str
    dim2: str
    score: float
    model_selected: bool
    kpi: dict
    tie_demand: float = 0.0
    planner_override: bool | None = None

    @property
    def final(self) -> bool:
        if self.planner_override is not None:
            return self.planner_override
        return self.model_selected

    def to_doc(self, final=None) -> dict:
        return {
            "i": self.i,
            "j": self.j,
            "size": self.size,
            "dim1": self.dim1,
            "dim2": self.dim2,
            "score": self.score,
            "model_selected": self.model_selected,
            "planner_override": self.planner_override,
            "final": self.final if final is None else bool(final),
            "kpi": self.kpi,
        }


@dataclass
class GridDecision:
    season: int
    planning_group: str
    grid: str
    partition: str
    cells: list = field(default_factory=list)
    cap: int | None = None

    def cell_at(self, i: int, j: int) -> Cell:
        for cell in self.cells:
            if cell.i == i and cell.j == j:
                return cell
        raise NotFound(f"no cell ({i}, {j}) in grid {self.grid}")

    @property
    def selected_count(self) -> int:
        return sum(1 for c in self.cells if c.final)

    def to_doc(self, finals=None) -> dict:
        ordered = sorted(self.cells, key=lambda c: (c.j, c.i))
        return {
            "season": self.season,
            "planning_group": self.planning_group,
            "grid": self.grid,
            "partition": self.partition,
            "cap": self.cap,
            "selected_count": (
                self.selected_count
                if finals is None
                else sum(1 for c in ordered if finals[(c.i, c.j)])
            ),
            "cells": [
                c.to_doc(None if finals is None else finals[(c.i, c.j)])
                for c in ordered
            ],
        }


def _rank_key(cell: Cell):
    # ties at the cap break toward the cell with the busier neighborhood,
    # then toward the lower grid index
    return (-cell.score, -cell.tie_demand, cell.j, cell.i)


def what_if(decision: GridDecision, cap=None, threshold=None) -> dict:
    """Hypothetical selection for one grid; the stored decision is untouched.

    Exactly one of cap/threshold applies. Overrides stay pinned: forced-on
    cells consume cap budget, forced-off cells never come back.
    """
    if (cap is None) == (threshold is None):
        raise ServiceValidationError("give exactly one of cap or threshold")
    pinned_on = [c for c in decision.cells if c.planner_override is True]
    free = [c for c in decision.cells if c.planner_override is None]
    finals = {(c.i, c.j): c.planner_override is True for c in decision.cells
              if c.planner_override is not None}
    if cap is not None:
        cap = int(cap)
        if cap < 0:
            raise ServiceValidationError(f"cap must be nonnegative, got {cap}")
        if len(pinned_on) > cap:
            raise CapBelowOverrides(
                f"{len(pinned_on)} pinned selections exceed cap {cap}"
            )
        budget = cap - len(pinned_on)
        ranked = sorted(free, key=_rank_key)
        chosen = {(c.i, c.j) for c in ranked[:budget]}
        for c in free:
            finals[(c.i, c.j)] = (c.i, c.j) in chosen
    else:
        threshold = float(threshold)
        for c in free:
            finals[(c.i, c.j)] = c.score >= threshold
    return decision.to_doc(finals=finals)


def _tie_demand_plane(cells: list) -> None:
    h = max(c.j for c in cells) + 1
    w = max(c.i for c in cells) + 1
    plane = np.zeros((h, w))
    for c in cells:
        plane[c.j, c.i] = c.kpi["adjusted_demand"]
    weighted = weighted_circle_sum(plane, circle=1)
    for c in cells:
        c.tie_demand = float(weighted[c.j, c.i])


class ServiceState:
    """Every grid decision of one run plus the override journal."""

    def __init__(self, run_dir):
        self.run_dir = Path(run_dir)
        self.decisions: dict = {}
        self.lock = threading.Lock()
        self._load_decisions()
        self._replay_journal()

    # -- loading ---------------------------------------------------------

    def _load_decisions(self):
        path = self.run_dir / "scored_grids.csv"
        if not path.exists():
            raise NotFound(f"no scored grids at {path}; finish a run first")
        text_cols = ["planning_group", "grid_name", "size", "dim1", "dim2"]
        scored = pd.read_csv(
            path, dtype={c: str for c in text_cols}, float_precision="round_trip"
        )
        for c in text_cols:
            scored[c] = scored[c].fillna("")
        for (partition, season, pg, grid), part in scored.groupby(
            ["partition", "season", "planning_group", "grid_name"], sort=False
        ):
            cells = [
                Cell(
                    i=int(r.i),
                    j=int(r.j),
                    size=r.size,
                    dim1=r.dim1,
                    dim2=r.dim2,
                    score=float(r.score),
                    model_selected=bool(r.model_selected),
                    kpi={
                        "adjusted_demand": float(r.adjusted_demand_self),
                        "sell_out": float(r.sell_out_self),
                        "sell_through": float(r.sell_through_self),
                    },
                )
                for r in part.itertuples(index=False)
            ]
            _tie_demand_plane(cells)
            self.decisions[(int(season), pg, grid)] = GridDecision(
                season=int(season),
                planning_group=pg,
                grid=grid,
                partition=partition,
                cells=cells,
            )

    def _replay_journal(self):
        path = self.run_dir / JOURNAL_NAME
        if not path.exists():
            return
        for line in path.read_text(encoding="utf-8").splitlines():
            if not line.strip():
                continue
            entry = json.loads(line)
            decision = self.decision(
                entry["season"], entry["planning_group"], entry["grid"]
            )
            if entry["type"] == "override":
                self._apply_override(decision, entry["i"], entry["j"], entry["value"])
            elif entry["type"] == "cap":
                self._apply_cap(decision, entry["cap"])
            else:
                raise ServiceValidationError(f"unknown journal entry {entry['type']!r}")

    def _journal(self, doc: dict):
        with open(self.run_dir / JOURNAL_NAME, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(doc, sort_keys=True) + "\n")

    # -- reads -----------------------------------------------------------

    def decision(self, season, planning_group, grid) -> GridDecision:
        try:
            key = (int(season), planning_group, grid)
        except (TypeError, ValueError):
            raise ServiceValidationError(f"season must be an integer, got {season!r}")
        if key not in self.decisions:
            raise NotFound(f"no decision for season {season}, {planning_group}, {grid}")
        return self.decisions[key]

    def listing(self) -> list:
        return [
            {
                "season": d.season,
                "planning_group": d.planning_group,
                "grid": d.grid,
                "partition": d.partition,
                "cap": d.cap,
                "n_cells": len(d.cells),
                "selected_count": d.selected_count,
            }
            for d in self.decisions.values()
        ]

    def export_csv(self) -> str:
        rows = []
        for d in self.decisions.values():
            for c in sorted(d.cells, key=lambda c: (c.j, c.i)):
                rows.append(
                    {
                        "season": d.season,
                        "planning_group": d.planning_group,
                        "grid_name": d.grid,
                        "size": c.size,
                        "i": c.i,
                        "j": c.j,
                        "final": int(c.final),
                    }
                )
        frame = pd.DataFrame(rows, columns=EXPORT_COLUMNS)
        return frame.to_csv(index=False)

    # -- writes ----------------------------------------------------------

    def _apply_override(self, decision, i, j, value):
        if value is not None and not isinstance(value, bool):
            raise ServiceValidationError(f"override value must be true/false/null, got {value!r}")
        cell = decision.cell_at(int(i), int(j))
        before = cell.planner_override
        cell.planner_override = value
        count = decision.selected_count
        if decision.cap is not None and count > decision.cap:
            cell.planner_override = before
            raise CapViolation(
                f"override would select {count} cells, cap is {decision.cap}"
            )

    def _apply_cap(self, decision, cap):
        if cap is not None:
            cap = int(cap)
            if cap < 0:
                raise ServiceValidationError(f"cap must be nonnegative, got {cap}")
            if decision.selected_count > cap:
                raise CapViolation(
                    f"{decision.selected_count} cells already selected, cap {cap} is below that"
                )
        decision.cap = cap

    def set_override(self, season, planning_group, grid, i, j, value) -> GridDecision:
        with self.lock:
            decision = self.decision(season, planning_group, grid)
            self._apply_override(decision, i, j, value)
            self._journal(
                {
                    "type": "override",
                    "season": decision.season,
                    "planning_group": decision.planning_group,
                    "grid": decision.grid,
                    "i": int(i),
                    "j": int(j),
                    "value": value,
                }
            )
            return decision

    def set_cap(self, season, planning_group, grid, cap) -> GridDecision:
        with self.lock:
            decision = self.decision(season, planning_group, grid)
            self._apply_cap(decision, cap)
            self._journal(
                {
                    "type": "cap",
                    "season": decision.season,
                    "planning_group": decision.planning_group,
                    "grid": decision.grid,
                    "cap": decision.cap,
                }
            )
            return decision


def build_app(run_dir):
    """FastAPI application over one run directory."""
    from fastapi import FastAPI
    from fastapi.responses import JSONResponse, PlainTextResponse
    from pydantic import BaseModel

    state = ServiceState(run_dir)
    app = FastAPI(title="size selection service")

    class OverrideBody(BaseModel):
        i: int
        j: int
        value: bool | None

    class CapBody(BaseModel):
        cap: int | None

    class WhatIfBody(BaseModel):
        cap: int | None = None
        threshold: float | None = None

    def _handler(code):
        async def handle(request, exc):
            return JSONResponse(status_code=code, content={"detail": str(exc)})

        return handle

    app.add_exception_handler(NotFound, _handler(404))
    app.add_exception_handler(CapViolation, _handler(409))
    app.add_exception_handler(CapBelowOverrides, _handler(409))
    app.add_exception_handler(ServiceValidationError, _handler(422))

    @app.get("/grids")
    def list_grids():
        return state.listing()

    @app.get("/grids/{season}/{planning_group}/{grid}")
    def get_grid(season: int, planning_group: str, grid: str):
        return state.decision(season, planning_group, grid).to_doc()

    @app.post("/grids/{season}/{planning_group}/{grid}/overrides")
    def post_override(season: int, planning_group: str, grid: str, body: OverrideBody):
        return state.set_override(
            season, planning_group, grid, body.i, body.j, body.value
        ).to_doc()

    @app.put("/grids/{season}/{planning_group}/{grid}/cap")
    def put_cap(season: int, planning_group: str, grid: str, body: CapBody):
        return state.set_cap(season, planning_group, grid, body.cap).to_doc()

    @app.post("/grids/{season}/{planning_group}/{grid}/what-if")
    def post_what_if(season: int, planning_group: str, grid: str, body: WhatIfBody):
        decision = state.decision(season, planning_group, grid)
        return what_if(decision, cap=body.cap, threshold=body.threshold)

    @app.get("/export.csv")
    def export():
        return PlainTextResponse(state.export_csv(), media_type="text/csv")

    return app
