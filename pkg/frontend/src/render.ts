/** Wire a figure spec to its CSV series and emit the SVG. */

import { readFileSync } from "node:fs";
import path from "node:path";

import { ChartSeries, PALETTE, renderChart } from "./chart.js";
import { parseSummaryCsv } from "./csv.js";
import { FigureSpec } from "./figspec.js";

export function renderFigure(spec: FigureSpec, baseDir: string): string {
  const series: ChartSeries[] = spec.series.map((s, i) => {
    const file = path.isAbsolute(s.path) ? s.path : path.join(baseDir, s.path);
    const data = parseSummaryCsv(readFileSync(file, "utf-8"), s.path);
    return { label: s.label, data, color: s.color ?? PALETTE[i % PALETTE.length] };
  });
  return renderChart(series, {
    title: spec.title || "suboptimality vs communication",
    logY: spec.logY,
    width: spec.width,
    height: spec.height,
  });
}
