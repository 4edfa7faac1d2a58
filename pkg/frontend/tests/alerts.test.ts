import { describe, expect, it } from "vitest";

import { alertBoardModel, drillDownExpr, renderAlertBoard, seriesSpan } from "../src/views/alerts.js";
import type { AlertsPayload } from "../src/types.js";
import { fixture } from "./helpers.js";

const payload = fixture<AlertsPayload>("alerts");

describe("alert board", () => {
  it("renders one observed/expected bar pair per cell", () => {
    const model = alertBoardModel(payload);
    const html = renderAlertBoard(model);
    const cells = (html.match(/class="alert-cell/g) ?? []).length;
    expect(cells).toBe(payload.cells.length);
    const observed = (html.match(/class="bar observed"/g) ?? []).length;
    const expected = (html.match(/class="bar expected"/g) ?? []).length;
    expect(observed).toBe(payload.cells.length);
    expect(expected).toBe(payload.cells.length);
  });

  it("colors cells by level", () => {
    const html = renderAlertBoard(alertBoardModel(payload));
    for (const cell of payload.cells) {
      expect(html).toContain(`level-${cell.level}`);
    }
  });

  it("keeps the board order of the API (ranked by score)", () => {
    const scores = payload.cells.map((c) => c.score);
    const sorted = [...scores].sort((a, b) => b - a);
    expect(scores).toEqual(sorted);
    const html = renderAlertBoard(alertBoardModel(payload));
    const indexes = (html.match(/data-index="(\d+)"/g) ?? []).map((m) => Number(m.slice(12, -1)));
    expect(indexes).toEqual(payload.cells.map((_, i) => i));
  });

  it("exposes the API-provided drill-down expression unchanged", () => {
    const model = alertBoardModel(payload);
    expect(drillDownExpr(model, 0)).toEqual(payload.cells[0].drill_down);
  });

  it("derives a 14-day series span ending at the board clock", () => {
    const model = alertBoardModel(payload);
    const span = seriesSpan(model);
    const days = (Date.parse(span.end) - Date.parse(span.start)) / 86_400_000;
    expect(days).toBe(13);
    expect(span.end < model.clock).toBe(true);
  });

  it("shows an explicit no-alerts state", () => {
    const html = renderAlertBoard(alertBoardModel({ clock: payload.clock, cells: [] }));
    expect(html).toContain("No alerts");
  });
});
