// SVG line charts with confidence-interval error bars: one line per series
// value, x from a swept numeric variable, optional log axes.

import { SummaryRow, availableKeys, availableMetrics, parseGridPoint } from "./csv.js";

export interface SeriesPoint {
  x: number;
  y: number;
  halfwidth: number | null;
}

export interface Series {
  label: string;
  points: SeriesPoint[];
}

export interface ChartOptions {
  xLabel: string;
  yLabel: string;
  logX?: boolean;
  logY?: boolean;
  width?: number;
  height?: number;
}

const PALETTE = ["#1f6fb2", "#d1495b", "#3a9d5d", "#8a5fbf", "#c98a1c", "#4a4a4a"];

export function extractSeries(
  rows: SummaryRow[],
  metric: string,
  xKey: string,
  seriesKey: string,
): Series[] {
  const metricRows = rows.filter((row) => row.metric === metric);
  if (metricRows.length === 0) {
    throw new Error(
      `unknown metric "${metric}"; available: ${availableMetrics(rows).join(", ")}`);
  }
  const bySeries = new Map<string, SeriesPoint[]>();
  for (const row of metricRows) {
    const point = parseGridPoint(row.gridPoint);
    if (!(xKey in point)) {
      throw new Error(
        `grid point "${row.gridPoint}" has no variable "${xKey}"; ` +
        `available: ${availableKeys(rows).join(", ")}`);
    }
    if (!(seriesKey in point)) {
      throw new Error(
        `grid point "${row.gridPoint}" has no variable "${seriesKey}"; ` +
        `available: ${availableKeys(rows).join(", ")}`);
    }
    const x = Number(point[xKey]);
    if (!Number.isFinite(x)) {
      throw new Error(`x variable "${xKey}" has non-numeric value "${point[xKey]}"`);
    }
    const label = point[seriesKey];
    if (!bySeries.has(label)) bySeries.set(label, []);
    bySeries.get(label)!.push({ x, y: row.mean, halfwidth: row.ciHalfwidth });
  }
  return [...bySeries.entries()]
    .sort(([a], [b]) => a.localeCompare(b))
    .map(([label, points]) => ({
      label,
      points: points.sort((a, b) => a.x - b.x),
    }));
}

interface Scale {
  (value: number): number;
  ticks: number[];
}

function niceStep(roughStep: number): number {
  const power = Math.pow(10, Math.floor(Math.log10(roughStep)));
  const base = roughStep / power;
  const factor = base <= 1 ? 1 : base <= 2 ? 2 : base <= 5 ? 5 : 10;
  return factor * power;
}

function linearScale(min: number, max: number, rangeLo: number, rangeHi: number): Scale {
  if (min === max) {
    min -= Math.abs(min) * 0.5 || 1;
    max += Math.abs(max) * 0.5 || 1;
  }
  const step = niceStep((max - min) / 5);
  const lo = Math.floor(min / step) * step;
  const hi = Math.ceil(max / step) * step;
  const scale = ((value: number) =>
    rangeLo + ((value - lo) / (hi - lo)) * (rangeHi - rangeLo)) as Scale;
  scale.ticks = [];
  for (let tick = lo; tick <= hi + step * 1e-9; tick += step) {
    scale.ticks.push(Number(tick.toPrecision(12)));
  }
  return scale;
}

function logScale(min: number, max: number, rangeLo: number, rangeHi: number,
                  axis: string): Scale {
  if (min <= 0) {
    throw new Error(`log scale on ${axis} axis needs positive values, got ${min}`);
  }
  const loExp = Math.floor(Math.log10(min));
  let hiExp = Math.ceil(Math.log10(max));
  if (loExp === hiExp) hiExp += 1;
  const scale = ((value: number) =>
    rangeLo + ((Math.log10(value) - loExp) / (hiExp - loExp)) * (rangeHi - rangeLo)) as Scale;
  scale.ticks = [];
  for (let exp = loExp; exp <= hiExp; exp += 1) scale.ticks.push(Math.pow(10, exp));
  return scale;
}

function formatTick(value: number): string {
  if (value !== 0 && (Math.abs(value) >= 1e6 || Math.abs(value) < 1e-3)) {
    return value.toExponential(0).replace("+", "");
  }
  return String(Number(value.toPrecision(6)));
}

const esc = (text: string) =>
  text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");

export function renderChart(series: Series[], options: ChartOptions): string {
  if (series.length === 0) throw new Error("nothing to plot");
  const width = options.width ?? 760;
  const height = options.height ?? 480;
  const margin = { top: 24, right: 170, bottom: 56, left: 78 };

  const points = series.flatMap((s) => s.points);
  const xs = points.map((p) => p.x);
  const yLos = points.map((p) => p.y - (options.logY ? 0 : p.halfwidth ?? 0));
  const yHis = points.map((p) => p.y + (p.halfwidth ?? 0));
  const xScale = options.logX
    ? logScale(Math.min(...xs), Math.max(...xs), margin.left, width - margin.right, "x")
    : linearScale(Math.min(...xs), Math.max(...xs), margin.left, width - margin.right);
  const yScale = options.logY
    ? logScale(Math.min(...points.map((p) => p.y)), Math.max(...yHis),
               height - margin.bottom, margin.top, "y")
    : linearScale(Math.min(0, ...yLos), Math.max(...yHis),
                  height - margin.bottom, margin.top);

  const parts: string[] = [];
  parts.push(`<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" viewBox="0 0 ${width} ${height}" font-family="sans-serif" font-size="12">`);
  parts.push(`<rect width="${width}" height="${height}" fill="white"/>`);

  // axes and grid
  const axisY = height - margin.bottom;
  for (const tick of xScale.ticks) {
    const x = xScale(tick);
    parts.push(`<line x1="${x.toFixed(1)}" y1="${axisY}" x2="${x.toFixed(1)}" y2="${axisY + 5}" stroke="black"/>`);
    parts.push(`<text x="${x.toFixed(1)}" y="${axisY + 20}" text-anchor="middle">${formatTick(tick)}</text>`);
  }
  for (const tick of yScale.ticks) {
    const y = yScale(tick);
    parts.push(`<line x1="${margin.left}" y1="${y.toFixed(1)}" x2="${width - margin.right}" y2="${y.toFixed(1)}" stroke="#dddddd"/>`);
    parts.push(`<text x="${margin.left - 8}" y="${(y + 4).toFixed(1)}" text-anchor="end">${formatTick(tick)}</text>`);
  }
  parts.push(`<line x1="${margin.left}" y1="${axisY}" x2="${width - margin.right}" y2="${axisY}" stroke="black"/>`);
  parts.push(`<line x1="${margin.left}" y1="${margin.top}" x2="${margin.left}" y2="${axisY}" stroke="black"/>`);
  parts.push(`<text x="${(margin.left + width - margin.right) / 2}" y="${height - 12}" text-anchor="middle">${esc(options.xLabel)}</text>`);
  parts.push(`<text x="18" y="${(margin.top + axisY) / 2}" text-anchor="middle" transform="rotate(-90 18 ${(margin.top + axisY) / 2})">${esc(options.yLabel)}</text>`);

  series.forEach((entry, index) => {
    const color = PALETTE[index % PALETTE.length];
    const coords = entry.points.map((p) => ({ p, x: xScale(p.x), y: yScale(p.y) }));
    for (const { p, x } of coords) {
      if (p.halfwidth === null || p.halfwidth === 0) continue;
      const yTop = yScale(p.y + p.halfwidth);
      // on a log axis an interval reaching zero is clamped three decades down
      const yBottomValue = options.logY
        ? Math.max(p.y - p.halfwidth, p.y * 1e-3)
        : p.y - p.halfwidth;
      const yBottom = yScale(yBottomValue);
      parts.push(`<g class="errorbar" stroke="${color}">` +
        `<line x1="${x.toFixed(1)}" y1="${yTop.toFixed(1)}" x2="${x.toFixed(1)}" y2="${yBottom.toFixed(1)}"/>` +
        `<line x1="${(x - 4).toFixed(1)}" y1="${yTop.toFixed(1)}" x2="${(x + 4).toFixed(1)}" y2="${yTop.toFixed(1)}"/>` +
        `<line x1="${(x - 4).toFixed(1)}" y1="${yBottom.toFixed(1)}" x2="${(x + 4).toFixed(1)}" y2="${yBottom.toFixed(1)}"/>` +
        `</g>`);
    }
    if (coords.length > 1) {
      const path = coords.map(({ x, y }) => `${x.toFixed(1)},${y.toFixed(1)}`).join(" ");
      parts.push(`<polyline class="series" points="${path}" fill="none" stroke="${color}" stroke-width="1.8"/>`);
    }
    for (const { x, y } of coords) {
      parts.push(`<circle class="marker" cx="${x.toFixed(1)}" cy="${y.toFixed(1)}" r="3.2" fill="${color}"/>`);
    }
    const legendY = margin.top + 8 + index * 18;
    parts.push(`<line x1="${width - margin.right + 12}" y1="${legendY}" x2="${width - margin.right + 34}" y2="${legendY}" stroke="${color}" stroke-width="2"/>`);
    parts.push(`<text x="${width - margin.right + 40}" y="${legendY + 4}">${esc(entry.label)}</text>`);
  });

  parts.push("</svg>");
  return parts.join("\n") + "\n";
}
