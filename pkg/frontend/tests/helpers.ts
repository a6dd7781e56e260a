// Test doubles: a fetch stub that records every request and serves
// canned service payloads keyed by path.

import type { FetchLike } from "../src/api.js";

export interface RecordedRequest {
  url: string;
  path: string;
  query: URLSearchParams;
  init?: RequestInit;
}

export interface FakeService {
  fetch: FetchLike;
  requests: RecordedRequest[];
  /** path -> payload or responder; a number status wraps in an error body */
  routes: Map<string, unknown | ((req: RecordedRequest) => unknown)>;
  failWith(path: string, status: number, body: unknown): void;
}

class FakeResponse {
  constructor(private readonly body: unknown, public readonly status = 200) {}

  get ok(): boolean {
    return this.status >= 200 && this.status < 300;
  }

  async json(): Promise<unknown> {
    return this.body;
  }
}

export function fakeService(
  routes: Record<string, unknown> = {},
): FakeService {
  const service: FakeService = {
    requests: [],
    routes: new Map(Object.entries(routes)),
    failWith(path, status, body) {
      this.routes.set(path, () => new FakeResponse(body, status));
    },
    fetch: async (url: string, init?: RequestInit) => {
      const parsed = new URL(url, "http://service.test");
      const req: RecordedRequest = {
        url, path: parsed.pathname, query: parsed.searchParams, init,
      };
      service.requests.push(req);
      const route = service.routes.get(parsed.pathname);
      if (route === undefined) {
        return new FakeResponse({ error: `no route ${parsed.pathname}` },
                                404) as unknown as Response;
      }
      const result = typeof route === "function"
        ? (route as (r: RecordedRequest) => unknown)(req)
        : route;
      if (result instanceof FakeResponse) {
        return result as unknown as Response;
      }
      return new FakeResponse(result) as unknown as Response;
    },
  };
  return service;
}

export function requestsTo(service: FakeService, path: string): RecordedRequest[] {
  return service.requests.filter((r) => r.path === path);
}
