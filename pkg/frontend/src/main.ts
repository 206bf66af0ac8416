/**
 * Browser entry point. Everything that touches the DOM lives here; the
 * modules it calls are pure and covered by the test suite. Wiring only:
 * pick a grid, render it, forward clicks and form submits to the store,
 * re-render from store state after every await.
 */

import { ApiClient, type GridSummary, type GridKey } from "./api.js";
import { ConsoleStore } from "./store.js";
import { renderGrid, renderEmptyState, KPI_LAYERS, DEFAULT_LAYER, type KpiLayer } from "./heatmap.js";
import type { CellRef } from "./whatif.js";

const api = new ApiClient(""); // same origin as the service
let store: ConsoleStore | null = null;
let layer: KpiLayer = DEFAULT_LAYER;
let hover: { i: number; j: number } | null = null;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id} in index.html`);
  return node as T;
}

const gridHost = el<HTMLDivElement>("grid");
const picker = el<HTMLSelectElement>("grid-picker");
const layerPicker = el<HTMLSelectElement>("layer-picker");
const noticeHost = el<HTMLDivElement>("notice");
const capForm = el<HTMLFormElement>("cap-form");
const capInput = el<HTMLInputElement>("cap-input");
const whatIfForm = el<HTMLFormElement>("whatif-form");
const whatIfValue = el<HTMLInputElement>("whatif-value");
const whatIfHost = el<HTMLDivElement>("whatif-result");
const exportButton = el<HTMLButtonElement>("export-btn");

function keyOf(summary: GridSummary): GridKey {
  return { season: summary.season, planning_group: summary.planning_group, grid: summary.grid };
}

function render(): void {
  if (!store) return;
  if (store.loadFailed) {
    gridHost.innerHTML = renderEmptyState("Could not load the grid from the service.");
  } else {
    gridHost.innerHTML = renderGrid(store.view(), layer, hover);
  }
  renderNotice();
  renderWhatIf();
  const view = store.view();
  capInput.value = view && view.cap !== null ? String(view.cap) : "";
}

function renderNotice(): void {
  if (!store || !store.notice) {
    noticeHost.innerHTML = "";
    return;
  }
  const retry = store.notice.canRetry ? ` <button type="button" id="retry-btn">Retry</button>` : "";
  noticeHost.innerHTML = `<div class="notice ${store.notice.kind}">${escape(store.notice.text)}${retry}</div>`;
  const btn = document.getElementById("retry-btn");
  if (btn) {
    btn.addEventListener("click", async () => {
      if (!store) return;
      if (store.loadFailed) await store.load();
      else await store.retryFailed();
      render();
    });
  }
}

function renderWhatIf(): void {
  if (!store || !store.preview) {
    whatIfHost.innerHTML = "";
    return;
  }
  const { diff } = store.preview;
  const list = (refs: CellRef[]) =>
    refs.length ? refs.map((r) => escape(r.size)).join(", ") : "none";
  whatIfHost.innerHTML =
    `<div class="whatif-diff">` +
    `<p>Would add (${diff.added.length}): ${list(diff.added)}</p>` +
    `<p>Would remove (${diff.removed.length}): ${list(diff.removed)}</p>` +
    `<button type="button" id="whatif-clear">Clear</button></div>`;
  const btn = document.getElementById("whatif-clear");
  if (btn) {
    btn.addEventListener("click", () => {
      store?.clearPreview();
      render();
    });
  }
}

function escape(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

async function selectGrid(summary: GridSummary): Promise<void> {
  store = new ConsoleStore(api, keyOf(summary));
  hover = null;
  await store.load();
  render();
}

async function boot(): Promise<void> {
  for (const name of KPI_LAYERS) {
    const opt = document.createElement("option");
    opt.value = name;
    opt.textContent = name.replace(/_/g, " ");
    if (name === DEFAULT_LAYER) opt.selected = true;
    layerPicker.appendChild(opt);
  }

  let grids: GridSummary[];
  try {
    grids = await api.listGrids();
  } catch (err) {
    gridHost.innerHTML = renderEmptyState("Could not reach the planning service.");
    return;
  }
  for (const g of grids) {
    const opt = document.createElement("option");
    opt.value = JSON.stringify(keyOf(g));
    opt.textContent = `${g.season} / ${g.planning_group} / ${g.grid} (${g.partition})`;
    picker.appendChild(opt);
  }
  if (grids.length) await selectGrid(grids[0]!);
}

picker.addEventListener("change", async () => {
  const key = JSON.parse(picker.value) as GridKey;
  await selectGrid({ ...key, partition: "", cap: null, n_cells: 0, selected_count: 0 });
});

layerPicker.addEventListener("change", () => {
  layer = layerPicker.value as KpiLayer;
  render();
});

gridHost.addEventListener("click", async (event) => {
  const td = (event.target as HTMLElement).closest("td.cell") as HTMLElement | null;
  if (!td || !store) return;
  const i = Number(td.dataset.i);
  const j = Number(td.dataset.j);
  await store.toggle(i, j);
  render();
});

gridHost.addEventListener("mouseover", (event) => {
  const td = (event.target as HTMLElement).closest("td.cell") as HTMLElement | null;
  if (!td) return;
  const next = { i: Number(td.dataset.i), j: Number(td.dataset.j) };
  if (hover && hover.i === next.i && hover.j === next.j) return;
  hover = next;
  render();
});

gridHost.addEventListener("mouseleave", () => {
  hover = null;
  render();
});

capForm.addEventListener("submit", async (event) => {
  event.preventDefault();
  if (!store) return;
  const raw = capInput.value.trim();
  await store.setCap(raw === "" ? null : Number(raw));
  render();
});

whatIfForm.addEventListener("submit", async (event) => {
  event.preventDefault();
  if (!store) return;
  const mode = (whatIfForm.elements.namedItem("mode") as RadioNodeList).value;
  const raw = Number(whatIfValue.value);
  if (Number.isNaN(raw)) return;
  await store.previewWhatIf(mode === "cap" ? { cap: raw } : { threshold: raw });
  render();
});

exportButton.addEventListener("click", async () => {
  // hand the service CSV through untouched so the file matches the API byte for byte
  const text = await api.exportCsv();
  const blob = new Blob([text], { type: "text/csv" });
  const url = URL.createObjectURL(blob);
  const a = document.createElement("a");
  a.href = url;
  a.download = "selections.csv";
  a.click();
  URL.revokeObjectURL(url);
});

void boot();
