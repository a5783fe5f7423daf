/**
 * Deterministic SVG line chart: one mean curve per series with a +/- one
 * standard-deviation band, x = cumulative per-worker bits, y = suboptimality
 * (log scale by default).  Rendering is a pure function of its inputs, so
 * equal data yields byte-identical SVG.
 */

import { SummarySeries } from "./csv.js";
import { fmtTick, linearScale, logScale, Scale } from "./scale.js";

export interface ChartSeries {
  label: string;
  data: SummarySeries;
  color: string;
}

export interface ChartOptions {
  title: string;
  logY: boolean;
  width: number;
  height: number;
}

export const PALETTE = [
  "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
  "#9467bd", "#8c564b", "#17becf", "#7f7f7f",
];

const MARGIN = { top: 42, right: 20, bottom: 46, left: 64 };

function esc(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

function fmt(v: number): string {
  return v.toFixed(2);
}

function pathFrom(xs: number[], ys: number[]): string {
  return xs.map((x, i) => `${i ? "L" : "M"}${fmt(x)},${fmt(ys[i])}`).join("");
}

export function renderChart(series: ChartSeries[], opts: ChartOptions): string {
  if (series.length === 0) throw new Error("nothing to plot");
  const { width, height } = opts;
  const x0 = MARGIN.left;
  const x1 = width - MARGIN.right;
  const y0 = height - MARGIN.bottom;
  const y1 = MARGIN.top;

  let xMax = 0;
  let yMin = Infinity;
  let yMax = -Infinity;
  for (const s of series) {
    xMax = Math.max(xMax, ...s.data.bitsCum);
    for (let i = 0; i < s.data.suboptMean.length; i++) {
      const m = s.data.suboptMean[i];
      const sd = s.data.suboptStd[i];
      yMin = Math.min(yMin, Math.max(m - sd, 1e-15), m);
      yMax = Math.max(yMax, m + sd, m);
    }
  }
  const sx = linearScale(0, xMax || 1, x0, x1);
  const sy: Scale = opts.logY
    ? logScale(Math.max(yMin, 1e-15), yMax * 1.05, y0, y1)
    : linearScale(Math.min(yMin, 0), yMax * 1.05, y0, y1);

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
    `viewBox="0 0 ${width} ${height}" font-family="Helvetica,Arial,sans-serif">`,
    `<rect width="${width}" height="${height}" fill="#ffffff"/>`,
    `<text x="${(x0 + x1) / 2}" y="22" text-anchor="middle" font-size="15">` +
    `${esc(opts.title)}</text>`,
  );

  // axes and grid
  for (const t of sy.ticks) {
    const y = fmt(sy(t));
    parts.push(
      `<line x1="${x0}" y1="${y}" x2="${x1}" y2="${y}" stroke="#dddddd" stroke-width="0.6"/>`,
      `<text x="${x0 - 6}" y="${y}" text-anchor="end" dominant-baseline="middle" ` +
      `font-size="11" class="ytick">${fmtTick(t, opts.logY)}</text>`,
    );
  }
  for (const t of sx.ticks) {
    const x = fmt(sx(t));
    parts.push(
      `<line x1="${x}" y1="${y0}" x2="${x}" y2="${y0 + 4}" stroke="#444444"/>`,
      `<text x="${x}" y="${y0 + 16}" text-anchor="middle" font-size="11">` +
      `${fmtTick(t, false)}</text>`,
    );
  }
  parts.push(
    `<line x1="${x0}" y1="${y0}" x2="${x1}" y2="${y0}" stroke="#444444"/>`,
    `<line x1="${x0}" y1="${y0}" x2="${x0}" y2="${y1}" stroke="#444444"/>`,
    `<text x="${(x0 + x1) / 2}" y="${height - 10}" text-anchor="middle" ` +
    `font-size="12">cumulative per-worker bits</text>`,
    `<text x="16" y="${(y0 + y1) / 2}" text-anchor="middle" font-size="12" ` +
    `transform="rotate(-90 16 ${(y0 + y1) / 2})">suboptimality</text>`,
  );

  // deviation bands first so every mean curve stays visible
  for (const s of series) {
    const { bitsCum, suboptMean, suboptStd } = s.data;
    const upper = suboptMean.map((m, i) => sy(m + suboptStd[i]));
    const lower = suboptMean.map((m, i) => sy(Math.max(m - suboptStd[i], 1e-15)));
    const xs = bitsCum.map((b) => sx(b));
    const ring = xs.map((x, i) => `${fmt(x)},${fmt(upper[i])}`)
      .concat(xs.slice().reverse().map((x, i) =>
        `${fmt(x)},${fmt(lower[lower.length - 1 - i])}`));
    parts.push(
      `<polygon class="band" points="${ring.join(" ")}" fill="${s.color}" ` +
      `fill-opacity="0.15" stroke="none"/>`,
    );
  }
  for (const s of series) {
    const xs = s.data.bitsCum.map((b) => sx(b));
    const ys = s.data.suboptMean.map((m) => sy(m));
    parts.push(
      `<path class="series" d="${pathFrom(xs, ys)}" fill="none" ` +
      `stroke="${s.color}" stroke-width="1.6"/>`,
    );
  }

  // legend
  series.forEach((s, i) => {
    const ly = y1 + 8 + 16 * i;
    parts.push(
      `<line x1="${x1 - 150}" y1="${ly}" x2="${x1 - 126}" y2="${ly}" ` +
      `stroke="${s.color}" stroke-width="2"/>`,
      `<text x="${x1 - 120}" y="${ly + 4}" font-size="11">${esc(s.label)}</text>`,
    );
  });

  parts.push("</svg>");
  return parts.join("\n") + "\n";
}
