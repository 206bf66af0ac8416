import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { composeView } from "../src/view.js";
import { diffSelections } from "../src/whatif.js";
import { makeFakeService, rectangularGrid } from "./fakeService.js";

const KEY = { season: 231, planning_group: "pg-main", grid: "G-RECT" };

function setup(opts: { width: number; height: number; selected: number }) {
  const svc = makeFakeService();
  svc.addGrid(rectangularGrid(opts));
  return { svc, api: new ApiClient("", svc.fetch) };
}

describe("diffSelections", () => {
  it("threshold 0.5 matches the model's own flags, so the diff is empty", async () => {
    // scores 0.99, 0.84, 0.69, 0.54, 0.39, 0.24: four cells sit at or above 0.5,
    // and the model selected exactly those four
    const { api } = setup({ width: 3, height: 2, selected: 4 });
    const current = composeView(await api.getGrid(KEY), []);
    const preview = await api.whatIf(KEY, { threshold: 0.5 });
    const diff = diffSelections(current, preview);
    expect(diff.added).toEqual([]);
    expect(diff.removed).toEqual([]);
  });

  it("capping an everything-selected grid at 24 removes the 16 weakest cells", async () => {
    const { api } = setup({ width: 8, height: 5, selected: 40 });
    const current = composeView(await api.getGrid(KEY), []);
    const preview = await api.whatIf(KEY, { cap: 24 });
    const diff = diffSelections(current, preview);
    expect(diff.added).toEqual([]);
    expect(diff.removed).toHaveLength(16);
    // the 16 removed are the lowest-scoring: reading-order ranks 24..39
    const removedKeys = new Set(diff.removed.map((r) => `${r.i},${r.j}`));
    current.rows.flat().forEach((cell) => {
      if (!cell) return;
      const rank = cell.j * 8 + cell.i;
      expect(removedKeys.has(`${cell.i},${cell.j}`)).toBe(rank >= 24);
    });
  });

  it("raising the cap past the selection adds the next cells by score", async () => {
    const { api } = setup({ width: 3, height: 2, selected: 2 });
    const current = composeView(await api.getGrid(KEY), []);
    const preview = await api.whatIf(KEY, { cap: 3 });
    const diff = diffSelections(current, preview);
    expect(diff.removed).toEqual([]);
    expect(diff.added).toEqual([{ i: 2, j: 0, size: "2830" }]);
  });

  it("diffs against what the screen shows, pending ops included", async () => {
    const { api } = setup({ width: 3, height: 2, selected: 4 });
    const doc = await api.getGrid(KEY);
    // planner just clicked rank 5 on; the preview at threshold 0.5 drops it again
    const current = composeView(doc, [{ i: 2, j: 1, value: true }]);
    const preview = await api.whatIf(KEY, { threshold: 0.5 });
    const diff = diffSelections(current, preview);
    expect(diff.added).toEqual([]);
    expect(diff.removed).toEqual([{ i: 2, j: 1, size: "2832" }]);
  });

  it("pinned-off cells stay out even under a generous cap", async () => {
    const { svc, api } = setup({ width: 3, height: 2, selected: 2 });
    await api.postOverride(KEY, 0, 0, false); // pin off the top scorer
    const current = composeView(await api.getGrid(KEY), []);
    const preview = await api.whatIf(KEY, { cap: 6 });
    const diff = diffSelections(current, preview);
    expect(diff.added.map((r) => `${r.i},${r.j}`).sort()).toEqual(["0,1", "1,1", "2,0", "2,1"]);
    expect(diff.removed).toEqual([]);
    expect(svc.doc(231, "pg-main", "G-RECT").cells.find((c) => c.i === 0 && c.j === 0)!.final).toBe(false);
  });
});
