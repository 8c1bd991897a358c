/**
 * Deterministic SVG line chart for payload-sweep summaries.
 *
 * One line per policy, x = payload bytes, y = V2I sum capacity (fig3) or
 * delivery success probability (fig4, axis clamped to [0, 1]), with a
 * translucent +-1 std band per line.  Every data marker carries
 * data-policy / data-x / data-y attributes so tests (and tooling) can read
 * the plotted coordinates back without rasterizing.
 */

import { SummaryRow } from "./csv.js";

export type FigureKind = "fig3" | "fig4";

export interface PlotSpec {
  inputCsv: string;
  outputImage: string;
  kind: FigureKind;
  labels?: Record<string, string>;
}

export const WIDTH = 840;
export const HEIGHT = 520;
export const MARGIN = { top: 48, right: 32, bottom: 64, left: 84 } as const;

const PALETTE = [
  "#1f77b4",
  "#ff7f0e",
  "#2ca02c",
  "#d62728",
  "#9467bd",
  "#8c564b",
];

export interface Scales {
  x: (value: number) => number;
  y: (value: number) => number;
  xDomain: [number, number];
  yDomain: [number, number];
}

function niceCeil(value: number): number {
  if (value <= 0) return 1;
  const magnitude = 10 ** Math.floor(Math.log10(value));
  for (const m of [1, 2, 5, 10]) {
    if (value <= m * magnitude) return m * magnitude;
  }
  return 10 * magnitude;
}

export function yColumn(kind: FigureKind): { mean: keyof SummaryRow; std: keyof SummaryRow } {
  return kind === "fig3"
    ? { mean: "v2i_sum_mbps_mean", std: "v2i_sum_mbps_std" }
    : { mean: "success_mean", std: "success_std" };
}

export function makeScales(rows: SummaryRow[], kind: FigureKind): Scales {
  const xs = rows.map((r) => r.payload_bytes);
  const xMin = Math.min(...xs);
  const xMax = Math.max(...xs);
  const xSpan = xMax > xMin ? xMax - xMin : 1;
  let yDomain: [number, number];
  if (kind === "fig4") {
    yDomain = [0, 1];
  } else {
    const { mean, std } = yColumn(kind);
    const tops = rows.map((r) => (r[mean] as number) + (r[std] as number));
    yDomain = [0, niceCeil(Math.max(...tops))];
  }
  const innerW = WIDTH - MARGIN.left - MARGIN.right;
  const innerH = HEIGHT - MARGIN.top - MARGIN.bottom;
  return {
    x: (v) => MARGIN.left + ((v - xMin) / xSpan) * innerW,
    y: (v) => MARGIN.top + innerH - ((v - yDomain[0]) / (yDomain[1] - yDomain[0])) * innerH,
    xDomain: [xMin, xMax],
    yDomain,
  };
}

const fmt = (v: number): string => {
  const s = v.toFixed(2);
  return s.replace(/\.?0+$/, "") || "0";
};

function clamp(v: number, lo: number, hi: number): number {
  return Math.min(hi, Math.max(lo, v));
}

function escapeXml(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;").replace(/"/g, "&quot;");
}

export function buildChart(
  rows: SummaryRow[],
  kind: FigureKind,
  labels: Record<string, string> = {},
): string {
  const { mean, std } = yColumn(kind);
  const scales = makeScales(rows, kind);
  const policies: string[] = [];
  for (const r of rows) {
    if (!policies.includes(r.policy)) policies.push(r.policy);
  }

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" ` +
      `viewBox="0 0 ${WIDTH} ${HEIGHT}" font-family="sans-serif">`,
  );
  parts.push(`<rect width="${WIDTH}" height="${HEIGHT}" fill="white"/>`);

  const title =
    kind === "fig3"
      ? "V2I sum capacity vs V2V payload size"
      : "V2V delivery success probability vs payload size";
  const yLabel = kind === "fig3" ? "V2I sum capacity (Mbit/s)" : "success probability";
  parts.push(
    `<text x="${WIDTH / 2}" y="28" text-anchor="middle" font-size="18">${escapeXml(title)}</text>`,
  );

  // axes
  const x0 = MARGIN.left;
  const x1 = WIDTH - MARGIN.right;
  const y0 = HEIGHT - MARGIN.bottom;
  const y1 = MARGIN.top;
  parts.push(`<g class="axes" stroke="#333" stroke-width="1">`);
  parts.push(`<line x1="${x0}" y1="${y0}" x2="${x1}" y2="${y0}"/>`);
  parts.push(`<line x1="${x0}" y1="${y0}" x2="${x0}" y2="${y1}"/>`);
  parts.push(`</g>`);

  // ticks: x at each distinct payload, y at 6 even divisions
  const xsUnique = [...new Set(rows.map((r) => r.payload_bytes))].sort((a, b) => a - b);
  parts.push(`<g class="ticks" font-size="12" fill="#333">`);
  for (const xv of xsUnique) {
    const px = scales.x(xv);
    parts.push(`<line x1="${px}" y1="${y0}" x2="${px}" y2="${y0 + 5}" stroke="#333"/>`);
    parts.push(`<text x="${px}" y="${y0 + 20}" text-anchor="middle">${xv}</text>`);
  }
  const [yLo, yHi] = scales.yDomain;
  for (let i = 0; i <= 5; i++) {
    const yv = yLo + ((yHi - yLo) * i) / 5;
    const py = scales.y(yv);
    parts.push(`<line x1="${x0 - 5}" y1="${py}" x2="${x0}" y2="${py}" stroke="#333"/>`);
    parts.push(`<text x="${x0 - 9}" y="${py + 4}" text-anchor="end">${fmt(yv)}</text>`);
    parts.push(`<line x1="${x0}" y1="${py}" x2="${x1}" y2="${py}" stroke="#ddd" stroke-width="0.5"/>`);
  }
  parts.push(`</g>`);
  parts.push(
    `<text x="${(x0 + x1) / 2}" y="${HEIGHT - 18}" text-anchor="middle" font-size="14">payload (bytes)</text>`,
  );
  parts.push(
    `<text x="22" y="${(y0 + y1) / 2}" text-anchor="middle" font-size="14" ` +
      `transform="rotate(-90 22 ${(y0 + y1) / 2})">${escapeXml(yLabel)}</text>`,
  );

  policies.forEach((policy, pi) => {
    const color = PALETTE[pi % PALETTE.length];
    const series = rows
      .filter((r) => r.policy === policy)
      .sort((a, b) => a.payload_bytes - b.payload_bytes);

    // +-1 std band, clamped to the axis domain
    const upper = series.map(
      (r) => `${scales.x(r.payload_bytes)},${scales.y(clamp((r[mean] as number) + (r[std] as number), yLo, yHi))}`,
    );
    const lower = series
      .slice()
      .reverse()
      .map(
        (r) => `${scales.x(r.payload_bytes)},${scales.y(clamp((r[mean] as number) - (r[std] as number), yLo, yHi))}`,
      );
    parts.push(
      `<polygon class="band" data-policy="${escapeXml(policy)}" points="${upper.join(" ")} ${lower.join(" ")}" ` +
        `fill="${color}" opacity="0.15" stroke="none"/>`,
    );

    const pts = series.map(
      (r) => `${scales.x(r.payload_bytes)},${scales.y(clamp(r[mean] as number, yLo, yHi))}`,
    );
    parts.push(
      `<polyline class="line" data-policy="${escapeXml(policy)}" points="${pts.join(" ")}" ` +
        `fill="none" stroke="${color}" stroke-width="2"/>`,
    );
    for (const r of series) {
      const yv = clamp(r[mean] as number, yLo, yHi);
      parts.push(
        `<circle class="pt" data-policy="${escapeXml(policy)}" data-x="${r.payload_bytes}" ` +
          `data-y="${r[mean]}" cx="${scales.x(r.payload_bytes)}" cy="${scales.y(yv)}" ` +
          `r="4" fill="${color}"/>`,
      );
    }

    // legend entry
    const lx = x1 - 170;
    const ly = y1 + 8 + pi * 20;
    const label = labels[policy] ?? policy;
    parts.push(`<line x1="${lx}" y1="${ly}" x2="${lx + 24}" y2="${ly}" stroke="${color}" stroke-width="2"/>`);
    parts.push(`<text x="${lx + 30}" y="${ly + 4}" font-size="13">${escapeXml(label)}</text>`);
  });

  parts.push(`</svg>`);
  return parts.join("\n") + "\n";
}
