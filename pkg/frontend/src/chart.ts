/** Score-vs-evaluation chart as plain SVG path data.
 *
 * Pure geometry: callers hand in the job history and get back point
 * coordinates plus a polyline, one point per history entry.
 */

import type { HistoryEntry } from "./types.js";

export interface ChartGeometry {
  points: Array<{ x: number; y: number; score: number }>;
  path: string;
  bestIndex: number | null;
  yMin: number;
  yMax: number;
}

export function chartGeometry(
  history: HistoryEntry[],
  width: number,
  height: number,
  pad = 8,
): ChartGeometry {
  if (history.length === 0) {
    return { points: [], path: "", bestIndex: null, yMin: 0, yMax: 1 };
  }
  const scores = history.map((h) => h.score);
  let yMin = Math.min(...scores);
  let yMax = Math.max(...scores);
  if (yMax - yMin < 1e-12) {
    // flat line: open a symmetric band so the polyline sits mid-chart
    yMin -= 0.5;
    yMax += 0.5;
  }
  const innerW = width - 2 * pad;
  const innerH = height - 2 * pad;
  const n = history.length;
  const points = history.map((entry, i) => ({
    x: pad + (n === 1 ? innerW / 2 : (i / (n - 1)) * innerW),
    y: pad + (1 - (entry.score - yMin) / (yMax - yMin)) * innerH,
    score: entry.score,
  }));
  const path = points
    .map((p, i) => `${i === 0 ? "M" : "L"}${p.x.toFixed(2)},${p.y.toFixed(2)}`)
    .join(" ");
  let bestIndex = 0;
  scores.forEach((s, i) => {
    if (s > scores[bestIndex]) bestIndex = i;
  });
  return { points, path, bestIndex, yMin, yMax };
}

export function renderChartSvg(
  history: HistoryEntry[],
  width = 360,
  height = 160,
): string {
  const geo = chartGeometry(history, width, height);
  const dots = geo.points
    .map(
      (p, i) =>
        `<circle cx="${p.x.toFixed(2)}" cy="${p.y.toFixed(2)}" ` +
        `r="${i === geo.bestIndex ? 5 : 3}" ` +
        `class="${i === geo.bestIndex ? "dot best" : "dot"}">` +
        `<title>eval ${i + 1}: ${p.score.toFixed(5)}</title></circle>`,
    )
    .join("");
  return (
    `<svg viewBox="0 0 ${width} ${height}" role="img" ` +
    `aria-label="score per evaluation">` +
    `<path d="${geo.path}" class="curve" fill="none"/>${dots}</svg>`
  );
}
