/**
 * Typed client for the size-selection service.
 *
 * The wire format is the service's JSON documents verbatim; nothing is
 * renamed or reshaped on the way in, so a server response can be fed back
 * into the view layer as-is. Errors map by status code, with 409
 * distinguished by which endpoint raised it.
 */

export interface KpiValues {
  adjusted_demand: number;
  sell_out: number;
  sell_through: number;
}

export interface CellDoc {
  i: number;
  j: number;
  size: string;
  dim1: string;
  dim2: string;
  score: number;
  model_selected: boolean;
  planner_override: boolean | null;
  final: boolean;
  kpi: KpiValues;
}

export interface GridDecisionDoc {
  season: number;
  planning_group: string;
  grid: string;
  partition: string;
  cap: number | null;
  selected_count: number;
  cells: CellDoc[];
}

export interface GridSummary {
  season: number;
  planning_group: string;
  grid: string;
  partition: string;
  cap: number | null;
  n_cells: number;
  selected_count: number;
}

export interface GridKey {
  season: number;
  planning_group: string;
  grid: string;
}

export type WhatIfQuery = { cap: number } | { threshold: number };

export class ServiceError extends Error {
  constructor(message: string, readonly status: number) {
    super(message);
    this.name = new.target.name;
  }
}
export class NotFoundError extends ServiceError {}
export class CapViolationError extends ServiceError {}
export class CapBelowOverridesError extends ServiceError {}
export class ValidationError extends ServiceError {}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

async function detailOf(res: Response): Promise<string> {
  try {
    const body = (await res.json()) as { detail?: unknown };
    if (typeof body.detail === "string") return body.detail;
    return JSON.stringify(body.detail ?? body);
  } catch {
    return res.statusText || `status ${res.status}`;
  }
}

export class ApiClient {
  private fetchImpl: FetchLike;

  constructor(private base: string, fetchImpl?: FetchLike) {
    // bind so a bare global fetch keeps its expected receiver
    this.fetchImpl = fetchImpl ?? ((input, init) => fetch(input, init));
  }

  private gridPath(key: GridKey): string {
    const pg = encodeURIComponent(key.planning_group);
    const grid = encodeURIComponent(key.grid);
    return `${this.base}/grids/${key.season}/${pg}/${grid}`;
  }

  private async request<T>(
    method: string,
    url: string,
    body: unknown,
    conflict: typeof CapViolationError | typeof CapBelowOverridesError,
  ): Promise<T> {
    const init: RequestInit = { method };
    if (body !== undefined) {
      init.body = JSON.stringify(body);
      init.headers = { "content-type": "application/json" };
    }
    const res = await this.fetchImpl(url, init);
    if (res.ok) return (await res.json()) as T;
    const detail = await detailOf(res);
    if (res.status === 404) throw new NotFoundError(detail, 404);
    if (res.status === 409) throw new conflict(detail, 409);
    if (res.status === 422) throw new ValidationError(detail, 422);
    throw new ServiceError(detail, res.status);
  }

  listGrids(): Promise<GridSummary[]> {
    return this.request("GET", `${this.base}/grids`, undefined, CapViolationError);
  }

  getGrid(key: GridKey): Promise<GridDecisionDoc> {
    return this.request("GET", this.gridPath(key), undefined, CapViolationError);
  }

  postOverride(key: GridKey, i: number, j: number, value: boolean | null): Promise<GridDecisionDoc> {
    return this.request("POST", `${this.gridPath(key)}/overrides`, { i, j, value }, CapViolationError);
  }

  putCap(key: GridKey, cap: number | null): Promise<GridDecisionDoc> {
    return this.request("PUT", `${this.gridPath(key)}/cap`, { cap }, CapViolationError);
  }

  whatIf(key: GridKey, query: WhatIfQuery): Promise<GridDecisionDoc> {
    return this.request("POST", `${this.gridPath(key)}/what-if`, query, CapBelowOverridesError);
  }

  /** Raw export text, untouched: the download must match the service byte for byte. */
  async exportCsv(): Promise<string> {
    const res = await this.fetchImpl(`${this.base}/export.csv`, { method: "GET" });
    if (!res.ok) throw new ServiceError(await detailOf(res), res.status);
    return res.text();
  }
}
