/**
 * Reader for the experiment harness's summary.csv.
 *
 * Expected header:
 *   policy,payload_bytes,v2i_sum_mbps_mean,v2i_sum_mbps_std,success_mean,success_std,n
 */

export interface SummaryRow {
  policy: string;
  payload_bytes: number;
  v2i_sum_mbps_mean: number;
  v2i_sum_mbps_std: number;
  success_mean: number;
  success_std: number;
  n: number;
}

export const SUMMARY_COLUMNS = [
  "policy",
  "payload_bytes",
  "v2i_sum_mbps_mean",
  "v2i_sum_mbps_std",
  "success_mean",
  "success_std",
  "n",
] as const;

export function parseSummaryCsv(text: string): SummaryRow[] {
  const lines = text
    .split(/\r?\n/)
    .map((l) => l.trim())
    .filter((l) => l.length > 0);
  if (lines.length === 0) {
    throw new Error("empty CSV: no header line");
  }
  const header = lines[0].split(",").map((h) => h.trim());
  for (const column of SUMMARY_COLUMNS) {
    if (!header.includes(column)) {
      throw new Error(`missing column: ${column}`);
    }
  }
  const index = new Map(header.map((h, i) => [h, i]));
  const rows: SummaryRow[] = [];
  for (let lineNo = 1; lineNo < lines.length; lineNo++) {
    const parts = lines[lineNo].split(",");
    if (parts.length < header.length) {
      throw new Error(`line ${lineNo + 1}: expected ${header.length} fields, got ${parts.length}`);
    }
    const num = (column: string): number => {
      const raw = parts[index.get(column)!];
      const value = Number(raw);
      if (!Number.isFinite(value)) {
        throw new Error(`line ${lineNo + 1}: ${column} is not a number: ${raw}`);
      }
      return value;
    };
    rows.push({
      policy: parts[index.get("policy")!],
      payload_bytes: num("payload_bytes"),
      v2i_sum_mbps_mean: num("v2i_sum_mbps_mean"),
      v2i_sum_mbps_std: num("v2i_sum_mbps_std"),
      success_mean: num("success_mean"),
      success_std: num("success_std"),
      n: num("n"),
    });
  }
  if (rows.length === 0) {
    throw new Error("empty CSV: header but no data rows");
  }
  return rows;
}
