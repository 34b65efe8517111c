import { describe, expect, it } from "vitest";

import {
  boxFraction,
  parseMeasurement,
  renderHistoryTable,
  renderSuggestionPanel,
} from "../src/panels.js";
import { askResponse, historyResponse } from "./helpers.js";

const NAMES = ["feedrate", "gas_pressure", "focal_position"];
const BOX = { x_min: [0.0, 0.5, -8.0], x_max: [40.0, 20.0, 2.0] };

describe("suggestion panel", () => {
  it("renders every API value verbatim, including awkward floats", () => {
    const ask = askResponse({
      x_next: [21.000000000000004, 0.30000000000000004, -2.25],
    });
    const html = renderSuggestionPanel(ask, NAMES, BOX);
    for (const value of ask.x_next) {
      expect(html).toContain(`data-value="${String(value)}"`);
      expect(html).toContain(`>${String(value)}</td>`);
    }
  });

  it("is a pure function: identical responses render identical markup", () => {
    const a = renderSuggestionPanel(askResponse(), NAMES, BOX);
    const b = renderSuggestionPanel(askResponse(), NAMES, BOX);
    expect(a).toBe(b);
  });

  it("shows the start-point badge during initialization", () => {
    const html = renderSuggestionPanel(
      askResponse({ suggested_start: true, weights: null, losses: null }),
      NAMES,
      BOX
    );
    expect(html).toContain("start point");
  });

  it("shows the iteration badge while running", () => {
    const html = renderSuggestionPanel(askResponse({ iteration: 7 }), NAMES, BOX);
    expect(html).toContain("iteration 7");
  });

  it("positions values inside the box bar", () => {
    expect(boxFraction(20.0, 0.0, 40.0)).toBeCloseTo(0.5, 12);
    expect(boxFraction(-5.0, 0.0, 40.0)).toBe(0);
    expect(boxFraction(99.0, 0.0, 40.0)).toBe(1);
  });
});

describe("measurement validation", () => {
  it("accepts a non-negative finite number", () => {
    expect(parseMeasurement({ yText: "190.5", failure: false })).toEqual({
      ok: true,
      y: 190.5,
    });
  });

  it("blocks negative values client-side", () => {
    const parsed = parseMeasurement({ yText: "-1", failure: false });
    expect(parsed.ok).toBe(false);
    expect(parsed.error).toMatch(/non-negative/);
  });

  it("blocks non-numeric and empty values", () => {
    expect(parseMeasurement({ yText: "abc", failure: false }).ok).toBe(false);
    expect(parseMeasurement({ yText: "", failure: false }).ok).toBe(false);
    expect(parseMeasurement({ yText: "Infinity", failure: false }).ok).toBe(false);
  });

  it("accepts an interruption with the value left empty", () => {
    expect(parseMeasurement({ yText: "", failure: true })).toEqual({ ok: true, y: null });
  });

  it("rejects an interruption combined with a value", () => {
    expect(parseMeasurement({ yText: "5", failure: true }).ok).toBe(false);
  });
});

describe("history table", () => {
  it("renders one row per record with verbatim measured values", () => {
    const history = historyResponse();
    const html = renderHistoryTable(history.records, history.param_names);
    expect(html.match(/<tr>/g)?.length).toBe(1 + history.records.length); // header + rows
    for (const record of history.records) {
      expect(html).toContain(`data-value="${String(record.y)}"`);
    }
  });

  it("marks interrupted iterations", () => {
    const records = historyResponse().records.map((r, i) =>
      i === 1 ? { ...r, failure: true } : r
    );
    const html = renderHistoryTable(records, NAMES);
    expect(html).toContain("interrupted");
  });
});
