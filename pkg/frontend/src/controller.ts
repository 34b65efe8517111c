/** Session view controller: holds the latest server responses and enforces
 * the interaction contract (a measurement submission performs exactly one
 * tell followed by one ask; every displayed number originates from the
 * server). No optimistic state: the view always reflects responses. */

import { ApiClient, ApiError } from "./api.js";
import { parseMeasurement } from "./panels.js";
import type { AskResponse, HistoryResponse } from "./types.js";

export interface ViewState {
  sessionId: string;
  ask: AskResponse | null;
  history: HistoryResponse | null;
  error: string | null;
}

export class SessionController {
  state: ViewState;

  constructor(private readonly api: ApiClient, sessionId: string) {
    this.state = { sessionId, ask: null, history: null, error: null };
  }

  /** Initial load and manual refresh: history first, then the suggestion
   * (idempotent on the server between tells). */
  async refresh(): Promise<ViewState> {
    this.state.history = await this.api.history(this.state.sessionId);
    if (this.state.history.phase === "stopped") {
      this.state.ask = null;
    } else {
      this.state.ask = await this.api.ask(this.state.sessionId);
    }
    this.state.error = null;
    return this.state;
  }

  /** Record one measurement for the currently suggested point: exactly one
   * tell, then exactly one ask, then a history reload for the charts. */
  async submitMeasurement(yText: string, failure: boolean): Promise<ViewState> {
    if (this.state.ask === null) {
      this.state.error = "no active suggestion to measure";
      return this.state;
    }
    const parsed = parseMeasurement({ yText, failure });
    if (!parsed.ok) {
      this.state.error = parsed.error ?? "invalid measurement";
      return this.state;
    }
    const x = this.state.ask.x_next;
    await this.api.tell(this.state.sessionId, x, parsed.y, failure);
    try {
      this.state.ask = await this.api.ask(this.state.sessionId);
    } catch (exc) {
      if (exc instanceof ApiError && exc.status === 409) {
        this.state.ask = null; // stop rule satisfied; no further suggestions
      } else {
        throw exc;
      }
    }
    this.state.history = await this.api.history(this.state.sessionId);
    this.state.error = null;
    return this.state;
  }

  modelLabels(): string[] {
    const trace = this.state.history?.weights_trace ?? [];
    if (trace.length === 0) return [];
    const count = trace[0].length;
    const labels: string[] = [];
    for (let m = 0; m < count - 1; m += 1) labels.push(`source ${m + 1}`);
    labels.push("target");
    return labels;
  }
}
