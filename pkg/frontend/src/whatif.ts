import type { GridDecisionDoc } from "./api.js";
import type { GridView } from "./view.js";

export interface CellRef {
  i: number;
  j: number;
  size: string;
}

export interface WhatIfDiff {
  added: CellRef[];
  removed: CellRef[];
}

/** Cells the preview would turn on or off relative to what the screen shows. */
export function diffSelections(current: GridView, preview: GridDecisionDoc): WhatIfDiff {
  const currentFinal = new Map<string, boolean>();
  for (const row of current.rows) {
    for (const cell of row) {
      if (cell) currentFinal.set(`${cell.i},${cell.j}`, cell.final);
    }
  }
  const added: CellRef[] = [];
  const removed: CellRef[] = [];
  for (const cell of preview.cells) {
    const now = currentFinal.get(`${cell.i},${cell.j}`) ?? false;
    if (cell.final && !now) added.push({ i: cell.i, j: cell.j, size: cell.size });
    if (!cell.final && now) removed.push({ i: cell.i, j: cell.j, size: cell.size });
  }
  return { added, removed };
}
