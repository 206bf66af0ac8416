/**
 * GridView: what the screen shows, computed fresh on every read.
 *
 * The view is a pure function of the last server document plus the pending
 * optimistic overrides, in order. Nothing here mutates the inputs, so
 * replaying the same op log over the same document always reproduces the
 * same view.
 */

import type { CellDoc, GridDecisionDoc } from "./api.js";

export interface PendingOverride {
  i: number;
  j: number;
  value: boolean | null;
}

export interface CellView extends CellDoc {
  pending: boolean;
}

export interface GridView {
  season: number;
  planning_group: string;
  grid: string;
  partition: string;
  cap: number | null;
  dim1Values: string[];
  dim2Values: string[];
  /** dim2-major: rows[j][i], null where the served grid has no such cell */
  rows: (CellView | null)[][];
  selectedCount: number;
}

function dimensionLists(cells: CellDoc[]): { dim1: string[]; dim2: string[] } {
  const dim1 = new Map<number, string>();
  const dim2 = new Map<number, string>();
  for (const c of cells) {
    dim1.set(c.i, c.dim1);
    dim2.set(c.j, c.dim2);
  }
  const order = (m: Map<number, string>) =>
    [...m.entries()].sort((a, b) => a[0] - b[0]).map(([, v]) => v);
  return { dim1: order(dim1), dim2: order(dim2) };
}

export function composeView(doc: GridDecisionDoc, ops: PendingOverride[]): GridView {
  const byCell = new Map<string, PendingOverride>();
  for (const op of ops) byCell.set(`${op.i},${op.j}`, op); // last op per cell wins

  const { dim1, dim2 } = dimensionLists(doc.cells);
  const width = Math.max(...doc.cells.map((c) => c.i)) + 1;
  const height = Math.max(...doc.cells.map((c) => c.j)) + 1;
  const rows: (CellView | null)[][] = Array.from({ length: height }, () =>
    Array.from({ length: width }, () => null),
  );

  let selected = 0;
  for (const cell of doc.cells) {
    const op = byCell.get(`${cell.i},${cell.j}`);
    const override = op ? op.value : cell.planner_override;
    const final = override === null ? cell.model_selected : override;
    const view: CellView = { ...cell, planner_override: override, final, pending: op !== undefined };
    rows[cell.j]![cell.i] = view;
    if (final) selected += 1;
  }

  return {
    season: doc.season,
    planning_group: doc.planning_group,
    grid: doc.grid,
    partition: doc.partition,
    cap: doc.cap,
    dim1Values: dim1,
    dim2Values: dim2,
    rows,
    selectedCount: selected,
  };
}

export function cellAt(view: GridView, i: number, j: number): CellView | null {
  return view.rows[j]?.[i] ?? null;
}
