/**
 * Grid heatmap rendering. Pure: view in, HTML string out, so the whole
 * thing is testable without a browser. main.ts owns the DOM.
 */

import type { GridView, CellView } from "./view.js";

export type KpiLayer = "adjusted_demand" | "sell_out" | "sell_through" | "score";

export const KPI_LAYERS: KpiLayer[] = ["adjusted_demand", "sell_out", "sell_through", "score"];
export const DEFAULT_LAYER: KpiLayer = "adjusted_demand"; // the planners' main KPI

export interface HoverTarget {
  i: number;
  j: number;
}

export function layerValue(cell: CellView, layer: KpiLayer): number {
  return layer === "score" ? cell.score : cell.kpi[layer];
}

/** Chebyshev ring index around the hovered cell: 1, 2, or 0 for neither. */
export function ringOf(hover: HoverTarget, i: number, j: number): 0 | 1 | 2 {
  const d = Math.max(Math.abs(i - hover.i), Math.abs(j - hover.j));
  return d === 1 || d === 2 ? (d as 1 | 2) : 0;
}

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function renderEmptyState(message: string): string {
  return `<div class="empty-state"><p>${escapeHtml(message)}</p></div>`;
}

export function renderGrid(
  view: GridView | null,
  layer: KpiLayer = DEFAULT_LAYER,
  hover: HoverTarget | null = null,
): string {
  if (view === null) return renderEmptyState("No grid loaded.");
  if (view.rows.length === 0) return renderEmptyState("This grid has no cells.");

  let max = 0;
  for (const row of view.rows) {
    for (const cell of row) {
      if (cell) max = Math.max(max, layerValue(cell, layer));
    }
  }

  const oneDimensional = view.dim2Values.length <= 1;
  const parts: string[] = [`<table class="grid" data-layer="${layer}">`];
  parts.push("<thead><tr><th></th>");
  for (const d1 of view.dim1Values) parts.push(`<th>${escapeHtml(d1)}</th>`);
  parts.push("</tr></thead><tbody>");

  view.rows.forEach((row, j) => {
    const label = oneDimensional ? "" : escapeHtml(view.dim2Values[j] ?? "");
    parts.push(`<tr><th>${label}</th>`);
    row.forEach((cell, i) => {
      if (!cell) {
        parts.push('<td class="void"></td>');
        return;
      }
      const classes = ["cell"];
      if (cell.final) classes.push("selected");
      if (cell.planner_override !== null) classes.push("override");
      if (cell.pending) classes.push("pending");
      if (hover) {
        const ring = ringOf(hover, i, j);
        if (ring) classes.push(`ring${ring}`);
        if (hover.i === i && hover.j === j) classes.push("hovered");
      }
      const value = layerValue(cell, layer);
      const heat = max > 0 ? value / max : 0;
      const tip = `${cell.size}: ${layer} ${value.toFixed(2)}, score ${cell.score.toFixed(3)}`;
      parts.push(
        `<td class="${classes.join(" ")}" data-i="${i}" data-j="${j}"` +
          ` style="--heat:${heat.toFixed(4)}" title="${escapeHtml(tip)}">` +
          `${escapeHtml(cell.size)}</td>`,
      );
    });
    parts.push("</tr>");
  });

  parts.push("</tbody></table>");
  const capText = view.cap === null ? "no cap" : `cap ${view.cap}`;
  parts.push(
    `<div class="grid-footer">${view.selectedCount} selected (${capText})</div>`,
  );
  return parts.join("");
}
