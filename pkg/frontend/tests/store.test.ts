import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { ConsoleStore } from "../src/store.js";
import { composeView, cellAt } from "../src/view.js";
import { makeFakeService, rectangularGrid, type FakeService } from "./fakeService.js";

const KEY = { season: 231, planning_group: "pg-main", grid: "G-RECT" };

async function loadedStore(opts: {
  width: number;
  height: number;
  selected: number;
  cap?: number | null;
}): Promise<{ svc: FakeService; store: ConsoleStore }> {
  const svc = makeFakeService();
  svc.addGrid({ ...rectangularGrid(opts), cap: opts.cap ?? null });
  const store = new ConsoleStore(new ApiClient("", svc.fetch), KEY);
  await store.load();
  return { svc, store };
}

describe("loading", () => {
  it("holds the served document after a successful load", async () => {
    const { store } = await loadedStore({ width: 3, height: 2, selected: 2 });
    const view = store.view()!;
    expect(view.selectedCount).toBe(2);
    expect(store.loadFailed).toBe(false);
    expect(store.notice).toBeNull();
  });

  it("flags a failed load and offers a retry", async () => {
    const svc = makeFakeService();
    svc.addGrid(rectangularGrid({ width: 2, height: 2, selected: 1 }));
    svc.offline = true;
    const store = new ConsoleStore(new ApiClient("", svc.fetch), KEY);
    await store.load();
    expect(store.view()).toBeNull();
    expect(store.loadFailed).toBe(true);
    expect(store.notice?.canRetry).toBe(true);

    svc.offline = false;
    await store.load();
    expect(store.loadFailed).toBe(false);
    expect(store.view()!.selectedCount).toBe(1);
  });
});

describe("toggling", () => {
  it("commits a toggle and reconciles with the server's document", async () => {
    const { svc, store } = await loadedStore({ width: 3, height: 2, selected: 2 });
    await store.toggle(2, 1);
    expect(store.ops).toHaveLength(0);
    expect(store.view()!.selectedCount).toBe(3);
    expect(cellAt(store.view()!, 2, 1)!.final).toBe(true);
    // the fake's state moved too, so a fresh read agrees
    expect(svc.doc(231, "pg-main", "G-RECT").selected_count).toBe(3);
  });

  it("toggling a selected cell turns it off", async () => {
    const { store } = await loadedStore({ width: 3, height: 2, selected: 2 });
    await store.toggle(0, 0);
    expect(cellAt(store.view()!, 0, 0)!.final).toBe(false);
    expect(store.view()!.selectedCount).toBe(1);
  });

  it("a null toggle clears the override back to the model decision", async () => {
    const { store } = await loadedStore({ width: 3, height: 2, selected: 2 });
    await store.toggle(0, 0); // off, against the model
    await store.toggle(0, 0, null);
    const cell = cellAt(store.view()!, 0, 0)!;
    expect(cell.planner_override).toBeNull();
    expect(cell.final).toBe(true);
  });

  it("reverts the toggle and shows the cap message when the server refuses", async () => {
    // 40 cells, 24 already selected, cap 24: the next cell must bounce
    const { store } = await loadedStore({ width: 8, height: 5, selected: 24, cap: 24 });
    expect(store.view()!.selectedCount).toBe(24);

    await store.toggle(0, 3); // rank 24, first unselected cell
    const view = store.view()!;
    expect(view.selectedCount).toBe(24);
    expect(cellAt(view, 0, 3)!.final).toBe(false);
    expect(cellAt(view, 0, 3)!.pending).toBe(false);
    expect(store.ops).toHaveLength(0);
    expect(store.failed).toHaveLength(0); // a refusal is final, not retryable
    expect(store.notice?.kind).toBe("error");
    expect(store.notice?.text).toContain("cap 24");
    expect(store.notice?.canRetry).toBe(false);
  });

  it("reverts on a transport failure but keeps the op for retry", async () => {
    const { svc, store } = await loadedStore({ width: 3, height: 2, selected: 2 });
    svc.offline = true;
    await store.toggle(2, 1);

    expect(cellAt(store.view()!, 2, 1)!.final).toBe(false); // reverted
    expect(store.failed).toHaveLength(1);
    expect(store.notice?.canRetry).toBe(true);
    expect(store.notice?.text).toContain("not saved");

    svc.offline = false;
    await store.retryFailed();
    expect(store.failed).toHaveLength(0);
    expect(store.notice).toBeNull();
    expect(cellAt(store.view()!, 2, 1)!.final).toBe(true);
    expect(svc.doc(231, "pg-main", "G-RECT").selected_count).toBe(3);
  });

  it("the rendered view is reproducible from the server document and op log", async () => {
    const { store } = await loadedStore({ width: 4, height: 3, selected: 5 });
    await store.toggle(3, 2);
    await store.toggle(0, 0);
    const fromParts = composeView(store.server!, store.ops);
    expect(store.view()).toEqual(fromParts);
  });
});

describe("cap edits", () => {
  it("stores a new cap through the service", async () => {
    const { store } = await loadedStore({ width: 3, height: 2, selected: 2 });
    await store.setCap(4);
    expect(store.view()!.cap).toBe(4);
    expect(store.notice).toBeNull();
  });

  it("keeps the old cap and explains when the service refuses", async () => {
    const { store } = await loadedStore({ width: 3, height: 2, selected: 4 });
    await store.setCap(3);
    expect(store.view()!.cap).toBeNull();
    expect(store.notice?.kind).toBe("error");
    expect(store.notice?.text).toContain("below the current selection");
  });

  it("clears the cap with null", async () => {
    const { store } = await loadedStore({ width: 3, height: 2, selected: 2, cap: 5 });
    await store.setCap(null);
    expect(store.view()!.cap).toBeNull();
  });
});

describe("what-if previews", () => {
  it("holds the preview diff without touching the live document", async () => {
    const { svc, store } = await loadedStore({ width: 8, height: 5, selected: 40 });
    await store.previewWhatIf({ cap: 24 });
    expect(store.preview).not.toBeNull();
    expect(store.preview!.diff.removed).toHaveLength(16);
    expect(store.preview!.diff.added).toHaveLength(0);
    // nothing moved on either side
    expect(store.view()!.selectedCount).toBe(40);
    expect(svc.doc(231, "pg-main", "G-RECT").selected_count).toBe(40);
  });

  it("surfaces a cap below the pinned overrides as a banner", async () => {
    const { store } = await loadedStore({ width: 3, height: 2, selected: 2 });
    await store.toggle(0, 1, true);
    await store.toggle(1, 1, true);
    await store.previewWhatIf({ cap: 1 });
    expect(store.preview).toBeNull();
    expect(store.notice?.kind).toBe("error");
    expect(store.notice?.text).toContain("pinned");
  });

  it("a successful mutation drops a stale preview", async () => {
    const { store } = await loadedStore({ width: 3, height: 2, selected: 2 });
    await store.previewWhatIf({ cap: 3 });
    expect(store.preview).not.toBeNull();
    await store.toggle(2, 1);
    expect(store.preview).toBeNull();
  });
});
