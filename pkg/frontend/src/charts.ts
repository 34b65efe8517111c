/** SVG chart builders: measured quality per iteration with a dashed line at
 * the minimum (interruptions appear as gaps), and the stacked evolution of
 * the ensemble weights. Pure functions over API data. */

import type { HistoryRecord } from "./types.js";

export const CHART_WIDTH = 560;
export const CHART_HEIGHT = 220;
const PAD = { left: 46, right: 12, top: 12, bottom: 26 };

function xScale(i: number, count: number): number {
  const span = CHART_WIDTH - PAD.left - PAD.right;
  return PAD.left + (count <= 1 ? span / 2 : (i / (count - 1)) * span);
}

function yScale(v: number, lo: number, hi: number): number {
  const span = CHART_HEIGHT - PAD.top - PAD.bottom;
  if (!(hi > lo)) return PAD.top + span / 2;
  return PAD.top + ((hi - v) / (hi - lo)) * span;
}

/** Quality per iteration; failed cuts leave a gap marker instead of a point. */
export function renderQualityChart(records: HistoryRecord[]): string {
  if (records.length === 0) {
    return `<svg class="chart quality" viewBox="0 0 ${CHART_WIDTH} ${CHART_HEIGHT}"><text x="20" y="30">no data yet</text></svg>`;
  }
  const measured = records.filter((r) => !r.failure).map((r) => r.y);
  const lo = measured.length ? Math.min(...measured) : 0;
  const hi = measured.length ? Math.max(...measured) : 1;
  const pad = 0.08 * (hi - lo || 1);
  const yLo = lo - pad;
  const yHi = hi + pad;
  const parts: string[] = [];

  // polyline segments break at interruptions, leaving visible gaps
  let segment: string[] = [];
  const flush = () => {
    if (segment.length > 1) {
      parts.push(`<polyline class="series" fill="none" points="${segment.join(" ")}"/>`);
    }
    segment = [];
  };
  records.forEach((record, i) => {
    const cx = xScale(i, records.length);
    if (record.failure) {
      flush();
      parts.push(
        `<text class="gap-marker" x="${cx.toFixed(1)}" y="${(PAD.top + 10).toFixed(1)}" text-anchor="middle">&#10007;</text>`
      );
      return;
    }
    const cy = yScale(record.y, yLo, yHi);
    segment.push(`${cx.toFixed(1)},${cy.toFixed(1)}`);
    parts.push(
      `<circle class="point" cx="${cx.toFixed(1)}" cy="${cy.toFixed(1)}" r="4" data-iteration="${i + 1}" data-value="${String(record.y)}"/>`
    );
  });
  flush();

  if (measured.length > 0) {
    const minY = yScale(Math.min(...measured), yLo, yHi).toFixed(1);
    parts.push(
      `<line class="min-line" stroke-dasharray="6 4" x1="${PAD.left}" y1="${minY}" x2="${CHART_WIDTH - PAD.right}" y2="${minY}"/>`
    );
    parts.push(
      `<text class="min-label" x="${CHART_WIDTH - PAD.right}" y="${(Number(minY) - 5).toFixed(1)}" text-anchor="end">min ${String(Math.min(...measured))}</text>`
    );
  }
  const axis =
    `<line class="axis" x1="${PAD.left}" y1="${CHART_HEIGHT - PAD.bottom}" x2="${CHART_WIDTH - PAD.right}" y2="${CHART_HEIGHT - PAD.bottom}"/>` +
    `<line class="axis" x1="${PAD.left}" y1="${PAD.top}" x2="${PAD.left}" y2="${CHART_HEIGHT - PAD.bottom}"/>`;
  return `<svg class="chart quality" viewBox="0 0 ${CHART_WIDTH} ${CHART_HEIGHT}">${axis}${parts.join("")}</svg>`;
}

/** Stacked per-iteration weight bands; each column's bands sum to the full
 * plot height because the weights sum to one. */
export function renderWeightChart(
  weightsTrace: number[][],
  labels: string[]
): string {
  if (weightsTrace.length === 0) {
    return `<svg class="chart weights" viewBox="0 0 ${CHART_WIDTH} ${CHART_HEIGHT}"><text x="20" y="30">no weights yet</text></svg>`;
  }
  const span = CHART_HEIGHT - PAD.top - PAD.bottom;
  const innerWidth = CHART_WIDTH - PAD.left - PAD.right;
  const colWidth = innerWidth / weightsTrace.length;
  const parts: string[] = [];
  weightsTrace.forEach((weights, col) => {
    let offset = 0;
    const x = PAD.left + col * colWidth;
    weights.forEach((w, m) => {
      const h = w * span;
      const y = PAD.top + span - offset - h;
      parts.push(
        `<rect class="band band-${m}" x="${x.toFixed(1)}" y="${y.toFixed(1)}" ` +
          `width="${Math.max(colWidth - 2, 1).toFixed(1)}" height="${h.toFixed(2)}" ` +
          `data-model="${m}" data-weight="${String(w)}"/>`
      );
      offset += h;
    });
  });
  const legend = labels
    .map(
      (label, m) =>
        `<g class="legend-item"><rect class="band band-${m}" x="${PAD.left + m * 120}" y="${CHART_HEIGHT - 14}" width="10" height="10"/>` +
        `<text x="${PAD.left + m * 120 + 14}" y="${CHART_HEIGHT - 5}">${label}</text></g>`
    )
    .join("");
  return `<svg class="chart weights" viewBox="0 0 ${CHART_WIDTH} ${CHART_HEIGHT}">${parts.join("")}${legend}</svg>`;
}
