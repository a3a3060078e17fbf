/** Pure view models for the SVG charts. Values are taken from service payloads
 * verbatim; the only arithmetic here is pixel geometry. */

import type { ForecastResponse, HistoryPayload } from "./api.js";
import type { SavedScenario } from "./scenario.js";

export const CLASS_COLORS: Record<string, string> = {
  "0": "#2a9d8f",
  "0.5": "#e9a23b",
  "1": "#d64545",
};

export function classColor(value: number): string {
  return CLASS_COLORS[String(value)] ?? "#888888";
}

export interface HistoryPoint {
  index: number;
  value: number;
  classValue: number;
  color: string;
}

export interface GuideBand {
  calendarMonth: number; // 1..12
  s: number;
  twoS: number;
}

export interface HistoryChartModel {
  route: string;
  start: string;
  points: HistoryPoint[];
  bands: GuideBand[];
  maxValue: number;
}

/** Chart model straight from the /history payload (no recomputation). */
export function historyChartModel(payload: HistoryPayload): HistoryChartModel {
  const points = payload.values.map((value, index) => ({
    index,
    value,
    classValue: payload.classes[index],
    color: classColor(payload.classes[index]),
  }));
  const bands = payload.monthly_s.map((s, i) => ({
    calendarMonth: i + 1,
    s,
    twoS: 2 * s,
  }));
  return {
    route: payload.route,
    start: payload.start,
    points,
    bands,
    maxValue: Math.max(...payload.values, ...bands.map((b) => b.twoS)),
  };
}

export interface RangeBar {
  name: string;
  low: number;
  high: number;
  perMonth: ForecastResponse["per_month"];
}

/** Side-by-side bars rendered from stored responses, never re-queried. */
export function compareBars(scenarios: readonly SavedScenario[]): RangeBar[] {
  return scenarios
    .filter((s) => s.state.lastResponse !== null)
    .map((s) => {
      const r = s.state.lastResponse!;
      return { name: s.name, low: r.low, high: r.high, perMonth: r.per_month };
    });
}

// --- SVG rendering -------------------------------------------------------

const W = 860;
const H = 300;
const PAD = 36;

function svgEl(tag: string, attrs: Record<string, string | number>): SVGElement {
  const el = document.createElementNS("http://www.w3.org/2000/svg", tag);
  for (const [k, v] of Object.entries(attrs)) el.setAttribute(k, String(v));
  return el;
}

export function renderHistoryChart(container: HTMLElement, model: HistoryChartModel): void {
  container.textContent = "";
  const svg = svgEl("svg", { viewBox: `0 0 ${W} ${H}`, width: "100%" });
  const n = model.points.length;
  const x = (i: number) => PAD + (i / Math.max(n - 1, 1)) * (W - 2 * PAD);
  const y = (v: number) => H - PAD - (v / model.maxValue) * (H - 2 * PAD);

  // per-calendar-month s and 2s guide bands, drawn under the series
  const startMonth = Number(model.start.split("-")[1]);
  for (let i = 0; i < n; i++) {
    const band = model.bands[(startMonth - 1 + i) % 12];
    const w = (W - 2 * PAD) / Math.max(n - 1, 1);
    svg.appendChild(
      svgEl("rect", {
        x: x(i) - w / 2, y: y(band.twoS), width: w,
        height: Math.max(y(band.s) - y(band.twoS), 0),
        fill: "#d64545", opacity: 0.08,
      }),
    );
    svg.appendChild(
      svgEl("rect", {
        x: x(i) - w / 2, y: y(band.s), width: w,
        height: Math.max(H - PAD - y(band.s), 0),
        fill: "#2a9d8f", opacity: 0.08,
      }),
    );
  }
  for (let i = 1; i < n; i++) {
    svg.appendChild(
      svgEl("line", {
        x1: x(i - 1), y1: y(model.points[i - 1].value),
        x2: x(i), y2: y(model.points[i].value),
        stroke: "#99a", "stroke-width": 1,
      }),
    );
  }
  for (const p of model.points) {
    svg.appendChild(
      svgEl("circle", { cx: x(p.index), cy: y(p.value), r: 2.6, fill: p.color }),
    );
  }
  container.appendChild(svg);
}

export function renderCompareBars(container: HTMLElement, bars: RangeBar[]): void {
  container.textContent = "";
  if (bars.length === 0) return;
  const height = 34 * bars.length + 20;
  const maxHigh = Math.max(...bars.map((b) => b.high));
  const svg = svgEl("svg", { viewBox: `0 0 ${W} ${height}`, width: "100%" });
  const x = (v: number) => PAD + (v / maxHigh) * (W - 2 * PAD);
  bars.forEach((bar, i) => {
    const yMid = 24 + 34 * i;
    svg.appendChild(
      svgEl("rect", {
        x: x(bar.low), y: yMid - 8, width: Math.max(x(bar.high) - x(bar.low), 1),
        height: 16, fill: "#4062bb", opacity: 0.75, "data-bar": bar.name,
      }),
    );
    // per-month fan summary: q10..q90 whisker per horizon month
    bar.perMonth.forEach((m, j) => {
      const xm = x(bar.low) + ((j + 0.5) / bar.perMonth.length) * (x(bar.high) - x(bar.low));
      svg.appendChild(
        svgEl("line", {
          x1: xm, y1: yMid - 14, x2: xm, y2: yMid - 10,
          stroke: "#223", opacity: 0.4 + 0.5 * (m.q90 - m.q10) / Math.max(m.max, 1e-9),
        }),
      );
    });
    const label = svgEl("text", { x: 4, y: yMid + 4, "font-size": 12 });
    label.textContent = bar.name;
    svg.appendChild(label);
  });
  container.appendChild(svg);
}
