#!/usr/bin/env node
/**
 * commsim-plot: render convergence figures from harness summary CSVs.
 *
 * Usage: commsim-plot plot <figure-spec.ini>
 *
 * Writes <out>.svg and a rasterized <out>.png next to the spec file (or at
 * the spec's absolute `out`).  Both outputs are deterministic functions of
 * the spec and CSV bytes.
 */

import { readFileSync, writeFileSync } from "node:fs";
import path from "node:path";

import { Resvg } from "@resvg/resvg-js";

import { parseFigureSpec } from "./figspec.js";
import { renderFigure } from "./render.js";

export function rasterize(svg: string): Buffer {
  return new Resvg(svg, { fitTo: { mode: "zoom", value: 2 } }).render().asPng();
}

export function main(argv: string[]): number {
  const [command, specPath] = argv;
  if (command !== "plot" || !specPath) {
    console.error("usage: commsim-plot plot <figure-spec.ini>");
    return 2;
  }
  let svg: string;
  let outBase: string;
  try {
    const text = readFileSync(specPath, "utf-8");
    const spec = parseFigureSpec(text, specPath);
    const baseDir = path.dirname(path.resolve(specPath));
    svg = renderFigure(spec, baseDir);
    outBase = path.isAbsolute(spec.out) ? spec.out : path.join(baseDir, spec.out);
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    return 1;
  }
  writeFileSync(`${outBase}.svg`, svg);
  writeFileSync(`${outBase}.png`, rasterize(svg));
  console.log(`wrote ${outBase}.svg and ${outBase}.png`);
  return 0;
}

const invokedDirectly =
  process.argv[1] !== undefined &&
  import.meta.url === new URL(`file://${path.resolve(process.argv[1])}`).href;
if (invokedDirectly) {
  process.exit(main(process.argv.slice(2)));
}
