// Typed client for the calibration service. All model math happens
// server-side; this module only moves JSON.

import type {
  CellsPayload,
  ParamsPayload,
  SessionParams,
  TessellationPayload,
  TilesPayload,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ServiceError extends Error {
  constructor(
    public readonly status: number,
    public readonly endpoint: string,
    public readonly payload: unknown,
  ) {
    super(`${endpoint} failed with ${status}: ${JSON.stringify(payload)}`);
    this.name = "ServiceError";
  }

  /** Field-level message of a 400, when the service supplied one. */
  get field(): string | null {
    const p = this.payload as { field?: unknown } | null;
    return p && typeof p.field === "string" ? p.field : null;
  }
}

export function formatPi(pi: readonly [number, number, number]): string {
  return pi.join(",");
}

type Query = Record<string, string | number | undefined>;

export class ApiClient {
  private readonly fetchImpl: FetchLike;

  constructor(
    public readonly baseUrl: string,
    fetchImpl?: FetchLike,
  ) {
    this.fetchImpl = fetchImpl ?? ((url, init) => fetch(url, init));
  }

  private url(path: string, query: Query = {}): string {
    const params = new URLSearchParams();
    for (const [key, value] of Object.entries(query)) {
      if (value !== undefined) params.set(key, String(value));
    }
    const qs = params.toString();
    return `${this.baseUrl}${path}${qs ? `?${qs}` : ""}`;
  }

  private async request<T>(path: string, query: Query = {}, init?: RequestInit): Promise<T> {
    const url = this.url(path, query);
    const response = await this.fetchImpl(url, init);
    let body: unknown = null;
    try {
      body = await response.json();
    } catch {
      body = null;
    }
    if (!response.ok) {
      throw new ServiceError(response.status, path, body);
    }
    return body as T;
  }

  cells(): Promise<CellsPayload> {
    return this.request("/cells");
  }

  params(): Promise<ParamsPayload> {
    return this.request("/params");
  }

  postParams(update: Partial<SessionParams>): Promise<ParamsPayload> {
    return this.request("/params", {}, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(update),
    });
  }

  tessellation(kind: "voronoi" | "bestserver"): Promise<TessellationPayload> {
    return this.request("/tessellation", { kind });
  }

  field(kind: "strength" | "dominance", cell: string): Promise<TilesPayload> {
    return this.request("/field", { kind, cell });
  }

  prior(kind: string, pi?: readonly [number, number, number]): Promise<TilesPayload> {
    return this.request("/prior", { kind, pi: pi ? formatPi(pi) : undefined });
  }

  likelihood(kind: string, cell: string): Promise<TilesPayload> {
    return this.request("/likelihood", { kind, cell });
  }

  posterior(
    prior: string,
    likelihood: string,
    cell: string,
    pi?: readonly [number, number, number],
  ): Promise<TilesPayload> {
    return this.request("/posterior", {
      prior, likelihood, cell, pi: pi ? formatPi(pi) : undefined,
    });
  }

  posteriorTa(
    prior: string,
    likelihood: string,
    cell: string,
    tau: number,
    b: number,
    pi?: readonly [number, number, number],
  ): Promise<TilesPayload> {
    return this.request("/posterior_ta", {
      prior, likelihood, cell, tau, b, pi: pi ? formatPi(pi) : undefined,
    });
  }
}
