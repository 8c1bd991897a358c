import { readFileSync, writeFileSync } from "node:fs";

import { buildChart, PlotSpec } from "./chart.js";
import { parseSummaryCsv } from "./csv.js";

/** Read the summary CSV named by the spec and write the chart as an SVG file. */
export function render(spec: PlotSpec): string {
  const text = readFileSync(spec.inputCsv, "utf8");
  const rows = parseSummaryCsv(text);
  const svg = buildChart(rows, spec.kind, spec.labels ?? {});
  writeFileSync(spec.outputImage, svg, "utf8");
  return spec.outputImage;
}
