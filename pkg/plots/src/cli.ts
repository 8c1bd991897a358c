#!/usr/bin/env node
/**
 * plot_results <summary.csv> <out-image> --kind fig3|fig4 [--label policy=Text]...
 *
 * fig3: V2I sum capacity vs payload.  fig4: delivery success probability vs
 * payload (y axis clamped to [0, 1]).  Output is an SVG file.
 */

import { realpathSync } from "node:fs";

import { FigureKind, PlotSpec } from "./chart.js";
import { render } from "./render.js";

const USAGE = "usage: plot_results <summary.csv> <out-image> --kind fig3|fig4 [--label policy=Text]...";

export function parseArgs(argv: string[]): PlotSpec {
  const positional: string[] = [];
  let kind: FigureKind | undefined;
  const labels: Record<string, string> = {};
  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i];
    if (arg === "--kind") {
      const value = argv[++i];
      if (value !== "fig3" && value !== "fig4") {
        throw new Error(`--kind must be fig3 or fig4, got ${value ?? "(nothing)"}`);
      }
      kind = value;
    } else if (arg === "--label") {
      const value = argv[++i];
      const eq = value?.indexOf("=") ?? -1;
      if (eq <= 0) {
        throw new Error(`--label expects policy=Text, got ${value ?? "(nothing)"}`);
      }
      labels[value.slice(0, eq)] = value.slice(eq + 1);
    } else if (arg.startsWith("--")) {
      throw new Error(`unknown flag: ${arg}`);
    } else {
      positional.push(arg);
    }
  }
  if (positional.length !== 2 || kind === undefined) {
    throw new Error(USAGE);
  }
  return { inputCsv: positional[0], outputImage: positional[1], kind, labels };
}

export function main(argv: string[]): number {
  let spec: PlotSpec;
  try {
    spec = parseArgs(argv);
  } catch (err) {
    console.error(String(err instanceof Error ? err.message : err));
    return 1;
  }
  try {
    const out = render(spec);
    console.log(`wrote ${out}`);
    return 0;
  } catch (err) {
    console.error(String(err instanceof Error ? err.message : err));
    return 2;
  }
}

const invokedDirectly = (() => {
  if (process.argv[1] === undefined) return false;
  try {
    // bin stubs are symlinks; compare resolved paths
    return import.meta.url === new URL(`file://${realpathSync(process.argv[1])}`).href;
  } catch {
    return false;
  }
})();
if (invokedDirectly) {
  process.exit(main(process.argv.slice(2)));
}
