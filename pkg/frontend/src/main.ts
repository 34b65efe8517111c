/** Browser wiring: binds the pure render functions and the controller to
 * the DOM. All state comes from server responses. */

import { ApiClient, ApiError, FetchLike } from "./api.js";
import { renderQualityChart, renderWeightChart } from "./charts.js";
import { SessionController } from "./controller.js";
import {
  renderCreateForm,
  renderHistoryTable,
  renderMeasurementForm,
  renderSuggestionPanel,
} from "./panels.js";
import type { CreateSessionRequest, SourceTask } from "./types.js";

const api = new ApiClient(fetch.bind(window) as unknown as FetchLike, "");

function el(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node;
}

function renderSessionView(controller: SessionController): void {
  const { ask, history, error } = controller.state;
  if (history) {
    el("history-panel").innerHTML = renderHistoryTable(history.records, history.param_names);
    el("quality-chart").innerHTML = renderQualityChart(history.records);
    el("weight-chart").innerHTML = renderWeightChart(
      history.weights_trace,
      controller.modelLabels()
    );
    const best = history.best_so_far;
    el("best-line").textContent = best
      ? `best so far: ${String(best.y)} at [${best.x.map(String).join(", ")}]`
      : "no measurements yet";
  }
  if (ask && history) {
    el("suggestion-panel").innerHTML = renderSuggestionPanel(
      ask,
      history.param_names,
      history.box
    );
    el("measure-panel").innerHTML = renderMeasurementForm(false);
    bindMeasurementForm(controller);
  } else {
    el("suggestion-panel").innerHTML =
      '<p class="done">Session stopped; no further suggestions.</p>';
    el("measure-panel").innerHTML = "";
  }
  el("session-error").textContent = error ?? "";
}

function bindMeasurementForm(controller: SessionController): void {
  const form = el("measure-form") as HTMLFormElement;
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const yText = (el("measure-y") as HTMLInputElement).value;
    const failure = (el("measure-failure") as HTMLInputElement).checked;
    controller
      .submitMeasurement(yText, failure)
      .then(() => renderSessionView(controller))
      .catch((exc) => {
        el("measure-error").textContent =
          exc instanceof ApiError ? exc.message : String(exc);
      });
  });
}

async function openSession(sessionId: string): Promise<void> {
  const controller = new SessionController(api, sessionId);
  el("create-panel").innerHTML = "";
  el("session-title").textContent = `session ${sessionId}`;
  await controller.refresh();
  renderSessionView(controller);
}

function parseSources(text: string): (SourceTask | { path: string })[] {
  return text
    .split("\n")
    .map((line) => line.trim())
    .filter((line) => line.length > 0)
    .map((line) => JSON.parse(line));
}

function bindCreateForm(): void {
  el("create-panel").innerHTML = renderCreateForm();
  const form = el("create-form") as HTMLFormElement;
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const errorOut = el("create-error");
    errorOut.textContent = "";
    let request: CreateSessionRequest;
    try {
      const sources = parseSources((el("create-sources") as HTMLTextAreaElement).value);
      if (sources.length === 0) {
        errorOut.textContent = "at least one source task is required";
        return;
      }
      const names = (el("create-names") as HTMLInputElement).value
        .split(",")
        .map((s) => s.trim())
        .filter((s) => s.length > 0);
      request = {
        sources,
        config: {
          box: JSON.parse((el("create-box") as HTMLInputElement).value),
          schedule: JSON.parse((el("create-schedule") as HTMLInputElement).value),
          seed: Number((el("create-seed") as HTMLInputElement).value) || 0,
          ...(names.length > 0 ? { param_names: names } : {}),
        },
      };
    } catch (exc) {
      errorOut.textContent = `invalid form input: ${String(exc)}`;
      return;
    }
    api
      .createSession(request)
      .then((created) => openSession(created.session_id))
      .catch((exc) => {
        errorOut.textContent = exc instanceof ApiError ? exc.message : String(exc);
      });
  });
}

async function listExisting(): Promise<void> {
  const listing = await api.listSessions();
  const container = el("session-list");
  if (listing.sessions.length === 0) {
    container.innerHTML = "<p class='empty'>no stored sessions</p>";
    return;
  }
  container.innerHTML = listing.sessions
    .map(
      (s) =>
        `<button class="session-link" data-session="${s.session_id}">` +
        `${s.session_id.slice(0, 8)} — ${s.phase}, ${s.n_observations} obs</button>`
    )
    .join("");
  container.querySelectorAll(".session-link").forEach((button) => {
    button.addEventListener("click", () => {
      const id = (button as HTMLElement).dataset.session;
      if (id) void openSession(id);
    });
  });
}

window.addEventListener("DOMContentLoaded", () => {
  bindCreateForm();
  void listExisting();
});
