// Alert board: one observed/expected bar pair per country x category cell,
// colored by level. Clicking a cell drills down to its article list plus
// the 14-day series, using the channel expression embedded by the API.

import { attr, esc } from "../render.js";
import type { AlertCell, AlertsPayload, ChannelExpr } from "../types.js";

export interface AlertBoardModel {
  clock: string;
  cells: AlertCell[];
  maxValue: number;
}

export function alertBoardModel(payload: AlertsPayload): AlertBoardModel {
  const maxValue = Math.max(1, ...payload.cells.flatMap((c) => [c.observed, c.expected]));
  return { clock: payload.clock, cells: payload.cells, maxValue };
}

export function drillDownExpr(model: AlertBoardModel, index: number): ChannelExpr {
  return model.cells[index].drill_down;
}

// 14-day window ending at the cell's board clock, for the drill-down series.
export function seriesSpan(model: AlertBoardModel): { start: string; end: string } {
  const end = new Date(model.clock);
  end.setUTCDate(end.getUTCDate() - 1);
  const start = new Date(end);
  start.setUTCDate(start.getUTCDate() - 13);
  const iso = (d: Date) => d.toISOString().slice(0, 10);
  return { start: iso(start), end: iso(end) };
}

export function renderAlertBoard(model: AlertBoardModel): string {
  if (model.cells.length === 0) {
    return `<p class="empty no-alerts">No alerts: no cell is above its expected volume.</p>`;
  }
  const bars = model.cells
    .map((cell, index) => {
      const observedPct = ((cell.observed / model.maxValue) * 100).toFixed(1);
      const expectedPct = ((cell.expected / model.maxValue) * 100).toFixed(1);
      return `<div class="alert-cell level-${esc(cell.level)}" data-action="open-alert" data-index="${index}">
  <span class="label">${esc(cell.country)} · ${esc(cell.category)}</span>
  <span class="bar observed" style="height:${observedPct}%" title="observed ${cell.observed}"></span>
  <span class="bar expected" style="height:${expectedPct}%" title="expected ${cell.expected.toFixed(2)}"></span>
  <span class="score">${cell.score.toFixed(2)}</span>
</div>`;
    })
    .join("\n");
  return `<section class="alert-board" data-clock=${attr(model.clock)}>${bars}</section>`;
}
