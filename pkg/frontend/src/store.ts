/**
 * Console state and the optimistic write path.
 *
 * One grid on screen at a time. Writes go: apply locally as a pending op,
 * POST, then reconcile with the server document (success) or drop the op
 * (rejection). A cap rejection surfaces the server's message inline; a
 * transport failure keeps the op aside with a retry affordance instead of
 * silently losing the click. The server stays the source of truth.
 */

import {
  ApiClient,
  CapBelowOverridesError,
  CapViolationError,
  ServiceError,
  type GridDecisionDoc,
  type GridKey,
  type WhatIfQuery,
} from "./api.js";
import { composeView, cellAt, type GridView, type PendingOverride } from "./view.js";
import { diffSelections, type WhatIfDiff } from "./whatif.js";

export interface Notice {
  kind: "error" | "info";
  text: string;
  canRetry: boolean;
}

export interface WhatIfPreview {
  query: WhatIfQuery;
  doc: GridDecisionDoc;
  diff: WhatIfDiff;
}

export class ConsoleStore {
  server: GridDecisionDoc | null = null;
  ops: PendingOverride[] = [];
  failed: PendingOverride[] = [];
  notice: Notice | null = null;
  loadFailed = false;
  preview: WhatIfPreview | null = null;

  constructor(private api: ApiClient, private key: GridKey) {}

  view(): GridView | null {
    if (this.server === null) return null;
    return composeView(this.server, this.ops);
  }

  async load(): Promise<void> {
    try {
      this.server = await this.api.getGrid(this.key);
      this.ops = [];
      this.failed = [];
      this.preview = null;
      this.notice = null;
      this.loadFailed = false;
    } catch (err) {
      this.server = null;
      this.loadFailed = true;
      this.notice = { kind: "error", text: messageOf(err), canRetry: true };
    }
  }

  /** Flip a cell's final flag; null clears the planner override instead. */
  async toggle(i: number, j: number, value?: boolean | null): Promise<void> {
    const current = this.view();
    if (!current) return;
    const cell = cellAt(current, i, j);
    if (!cell) return;
    const desired = value === undefined ? !cell.final : value;
    const op: PendingOverride = { i, j, value: desired };
    this.ops = [...this.ops, op];
    this.preview = null;
    await this.commit(op);
  }

  private async commit(op: PendingOverride): Promise<void> {
    try {
      const doc = await this.api.postOverride(this.key, op.i, op.j, op.value);
      this.server = doc;
      this.ops = this.ops.filter((o) => o !== op);
      this.notice = null;
    } catch (err) {
      this.ops = this.ops.filter((o) => o !== op); // revert the optimistic flip
      if (err instanceof CapViolationError) {
        this.notice = { kind: "error", text: err.message, canRetry: false };
      } else if (err instanceof ServiceError) {
        this.notice = { kind: "error", text: messageOf(err), canRetry: false };
      } else {
        // transport trouble: the change may still be wanted, offer a retry
        this.failed = [...this.failed, op];
        this.notice = {
          kind: "error",
          text: `Could not reach the service: ${messageOf(err)}. The change was not saved.`,
          canRetry: true,
        };
      }
    }
  }

  async retryFailed(): Promise<void> {
    const queue = this.failed;
    this.failed = [];
    for (const op of queue) {
      this.ops = [...this.ops, op];
      await this.commit(op);
    }
  }

  async setCap(cap: number | null): Promise<void> {
    try {
      this.server = await this.api.putCap(this.key, cap);
      this.preview = null;
      this.notice = null;
    } catch (err) {
      this.notice = { kind: "error", text: messageOf(err), canRetry: false };
    }
  }

  async previewWhatIf(query: WhatIfQuery): Promise<void> {
    const current = this.view();
    if (!current) return;
    try {
      const doc = await this.api.whatIf(this.key, query);
      this.preview = { query, doc, diff: diffSelections(current, doc) };
      this.notice = null;
    } catch (err) {
      this.preview = null;
      const banner =
        err instanceof CapBelowOverridesError
          ? `Cap too low for the pinned overrides: ${err.message}`
          : messageOf(err);
      this.notice = { kind: "error", text: banner, canRetry: false };
    }
  }

  clearPreview(): void {
    this.preview = null;
  }
}

function messageOf(err: unknown): string {
  if (err instanceof Error) return err.message;
  return String(err);
}
