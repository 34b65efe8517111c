import type { FetchLike, JsonResponse } from "../src/api.js";
import type { AskResponse, HistoryResponse, TellResponse } from "../src/types.js";

export interface RecordedCall {
  url: string;
  method: string;
  body: unknown;
}

/** Scripted fetch double: answers by (method, path) and records every call. */
export function mockFetch(
  routes: Record<string, (call: RecordedCall) => { status?: number; body: unknown }>
): { fetch: FetchLike; calls: RecordedCall[] } {
  const calls: RecordedCall[] = [];
  const fetch: FetchLike = async (url, init) => {
    const method = init?.method ?? "GET";
    const call: RecordedCall = {
      url,
      method,
      body: init?.body ? JSON.parse(init.body) : undefined,
    };
    calls.push(call);
    const key = `${method} ${url}`;
    const handler = routes[key];
    if (!handler) {
      return response(404, { detail: `no route for ${key}` });
    }
    const result = handler(call);
    return response(result.status ?? 200, result.body);
  };
  return { fetch, calls };
}

function response(status: number, body: unknown): JsonResponse {
  return {
    ok: status >= 200 && status < 300,
    status,
    json: async () => body,
  };
}

export function askResponse(overrides: Partial<AskResponse> = {}): AskResponse {
  return {
    x_next: [21.0, 11.5, -2.25],
    params: { feedrate: 21.0, gas_pressure: 11.5, focal_position: -2.25 },
    weights: [0.25, 0.15, 0.6],
    losses: [2, 6, 4],
    iteration: 3,
    suggested_start: false,
    surrogate_value: -0.731,
    phase: "running",
    ...overrides,
  };
}

export function tellResponse(overrides: Partial<TellResponse> = {}): TellResponse {
  return {
    phase: "running",
    n_observations: 4,
    best_so_far: { x: [21.0, 11.5, -2.25], y: 190.0 },
    ...overrides,
  };
}

export function historyResponse(overrides: Partial<HistoryResponse> = {}): HistoryResponse {
  return {
    records: [
      { x: [20.0, 11.0, -2.0], y: 410.0, failure: false, weights: null, losses: null, surrogate_value: null },
      { x: [22.0, 12.0, -2.5], y: 350.0, failure: false, weights: null, losses: null, surrogate_value: null },
      { x: [21.0, 11.5, -2.25], y: 190.0, failure: false, weights: [0.25, 0.15, 0.6], losses: [2, 6, 4], surrogate_value: -0.7 },
    ],
    weights_trace: [[0.25, 0.15, 0.6]],
    best_so_far: { x: [21.0, 11.5, -2.25], y: 190.0 },
    phase: "running",
    iteration: 1,
    n_observations: 3,
    param_names: ["feedrate", "gas_pressure", "focal_position"],
    box: { x_min: [0.0, 0.5, -8.0], x_max: [40.0, 20.0, 2.0] },
    ...overrides,
  };
}
