/** Pure HTML builders for the console panels.
 *
 * Every number shown comes verbatim from an API response: values are
 * stringified with String(), never rounded or recomputed client-side.
 */

import type { AskResponse, BoxBounds, HistoryRecord } from "./types.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

/** Position of a value inside its box dimension, clamped to [0, 1]. */
export function boxFraction(value: number, lo: number, hi: number): number {
  if (!(hi > lo)) return 0;
  return Math.min(1, Math.max(0, (value - lo) / (hi - lo)));
}

export function renderSuggestionPanel(
  ask: AskResponse,
  paramNames: string[],
  box: BoxBounds
): string {
  const badge = ask.suggested_start
    ? '<span class="badge badge-start">start point</span>'
    : `<span class="badge">iteration ${ask.iteration}</span>`;
  const rows = ask.x_next
    .map((value, i) => {
      const name = paramNames[i] ?? `x${i + 1}`;
      const lo = box.x_min[i];
      const hi = box.x_max[i];
      const pct = (100 * boxFraction(value, lo, hi)).toFixed(1);
      return (
        `<tr><td>${escapeHtml(name)}</td>` +
        `<td class="value" data-value="${String(value)}">${String(value)}</td>` +
        `<td class="range">` +
        `<div class="bar"><div class="bar-fill" style="left:${pct}%"></div></div>` +
        `<span class="bounds">[${String(lo)}, ${String(hi)}]</span></td></tr>`
      );
    })
    .join("");
  return (
    `<div class="suggestion">` +
    `<h2>Next parameters ${badge}</h2>` +
    `<table class="params"><thead><tr><th>parameter</th><th>value</th><th>box position</th></tr></thead>` +
    `<tbody>${rows}</tbody></table></div>`
  );
}

export function renderHistoryTable(
  records: HistoryRecord[],
  paramNames: string[]
): string {
  if (records.length === 0) {
    return '<p class="empty">No measurements yet.</p>';
  }
  let best = Infinity;
  const rows = records
    .map((record, i) => {
      best = Math.min(best, record.y);
      const xCells = record.x
        .map((v) => `<td class="value">${String(v)}</td>`)
        .join("");
      const yCell = record.failure
        ? `<td class="value failure" data-value="${String(record.y)}">interrupted (${String(record.y)})</td>`
        : `<td class="value" data-value="${String(record.y)}">${String(record.y)}</td>`;
      return `<tr><td>${i + 1}</td>${xCells}${yCell}<td class="value">${String(best)}</td></tr>`;
    })
    .join("");
  const headers = paramNames.map((n) => `<th>${escapeHtml(n)}</th>`).join("");
  return (
    `<table class="history"><thead><tr><th>#</th>${headers}<th>measured</th><th>best so far</th></tr></thead>` +
    `<tbody>${rows}</tbody></table>`
  );
}

export interface MeasurementInput {
  yText: string;
  failure: boolean;
}

export interface MeasurementParse {
  ok: boolean;
  y: number | null;
  error?: string;
}

/** Client-side validation: a non-negative finite number, or the failure
 * toggle with the field left empty. */
export function parseMeasurement(input: MeasurementInput): MeasurementParse {
  const text = input.yText.trim();
  if (input.failure) {
    if (text !== "") {
      return { ok: false, y: null, error: "leave the value empty when marking a cut interruption" };
    }
    return { ok: true, y: null };
  }
  if (text === "") {
    return { ok: false, y: null, error: "enter the measured value or mark a cut interruption" };
  }
  const y = Number(text);
  if (!Number.isFinite(y)) {
    return { ok: false, y: null, error: "the measured value must be a finite number" };
  }
  if (y < 0) {
    return { ok: false, y: null, error: "the measured value must be non-negative" };
  }
  return { ok: true, y };
}

export function renderMeasurementForm(disabled: boolean): string {
  const attr = disabled ? " disabled" : "";
  return (
    `<form id="measure-form" class="measure">` +
    `<label>measured quality <input id="measure-y" type="text" inputmode="decimal"${attr}></label>` +
    `<label class="toggle"><input id="measure-failure" type="checkbox"${attr}> cut interruption</label>` +
    `<button id="measure-submit" type="submit"${attr}>record</button>` +
    `<span id="measure-error" class="error" role="alert"></span>` +
    `</form>`
  );
}

export function renderCreateForm(): string {
  return (
    `<form id="create-form" class="create">` +
    `<h2>New session</h2>` +
    `<label>source task files (JSON, one per line)` +
    `<textarea id="create-sources" rows="4" placeholder='{"task_id": "run1", "inputs": [[...]], "outputs": [...]}'></textarea></label>` +
    `<label>box <input id="create-box" type="text" placeholder='{"x_min": [0], "x_max": [10]}'></label>` +
    `<label>parameter names <input id="create-names" type="text" placeholder="feedrate, gas_pressure, focal_position"></label>` +
    `<label>schedule <input id="create-schedule" type="text" value='{"alpha0": 0.1, "alpha1": 0.1, "beta": 0.95}'></label>` +
    `<label>seed <input id="create-seed" type="number" value="0"></label>` +
    `<button type="submit">create session</button>` +
    `<span id="create-error" class="error" role="alert"></span>` +
    `</form>`
  );
}
