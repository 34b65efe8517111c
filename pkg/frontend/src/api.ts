/** Thin typed client for the session service; fetch is injected so tests
 * can mock the transport. The console itself never computes optimization
 * results, it only relays what this client returns. */

import type {
  AskResponse,
  CreateSessionRequest,
  CreateSessionResponse,
  HistoryResponse,
  SessionSummary,
  TellResponse,
} from "./types.js";

export interface JsonResponse {
  ok: boolean;
  status: number;
  json(): Promise<unknown>;
}

export type FetchLike = (
  url: string,
  init?: { method?: string; headers?: Record<string, string>; body?: string }
) => Promise<JsonResponse>;

export class ApiError extends Error {
  constructor(public status: number, detail: string) {
    super(detail);
  }
}

async function fail(resp: JsonResponse): Promise<never> {
  let detail = `request failed with status ${resp.status}`;
  try {
    const doc = (await resp.json()) as { detail?: unknown };
    if (doc && doc.detail !== undefined) {
      detail = typeof doc.detail === "string" ? doc.detail : JSON.stringify(doc.detail);
    }
  } catch {
    /* keep the generic message */
  }
  throw new ApiError(resp.status, detail);
}

export class ApiClient {
  constructor(
    private readonly fetchImpl: FetchLike,
    private readonly baseUrl: string = ""
  ) {}

  private async post<T>(path: string, body?: unknown): Promise<T> {
    const resp = await this.fetchImpl(this.baseUrl + path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!resp.ok) await fail(resp);
    return (await resp.json()) as T;
  }

  private async get<T>(path: string): Promise<T> {
    const resp = await this.fetchImpl(this.baseUrl + path);
    if (!resp.ok) await fail(resp);
    return (await resp.json()) as T;
  }

  createSession(request: CreateSessionRequest): Promise<CreateSessionResponse> {
    return this.post("/sessions", request);
  }

  listSessions(): Promise<{ sessions: SessionSummary[] }> {
    return this.get("/sessions");
  }

  ask(sessionId: string): Promise<AskResponse> {
    return this.post(`/sessions/${sessionId}/ask`);
  }

  tell(
    sessionId: string,
    x: number[],
    y: number | null,
    failure: boolean
  ): Promise<TellResponse> {
    return this.post(`/sessions/${sessionId}/tell`, { x, y, failure });
  }

  history(sessionId: string): Promise<HistoryResponse> {
    return this.get(`/sessions/${sessionId}/history`);
  }
}
