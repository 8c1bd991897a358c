import { describe, expect, it } from "vitest";

import { parseSummaryCsv } from "../src/csv.js";

const GOOD = `policy,payload_bytes,v2i_sum_mbps_mean,v2i_sum_mbps_std,success_mean,success_std,n
marl,1060,55.1,1.2,0.9,0.05,150
marl,2120,54.0,1.1,0.85,0.06,150
`;

describe("parseSummaryCsv", () => {
  it("parses well-formed summaries", () => {
    const rows = parseSummaryCsv(GOOD);
    expect(rows).toHaveLength(2);
    expect(rows[0]).toEqual({
      policy: "marl",
      payload_bytes: 1060,
      v2i_sum_mbps_mean: 55.1,
      v2i_sum_mbps_std: 1.2,
      success_mean: 0.9,
      success_std: 0.05,
      n: 150,
    });
  });

  it("names the missing column", () => {
    const text = GOOD.replace("success_mean", "success_avg");
    expect(() => parseSummaryCsv(text)).toThrow(/missing column: success_mean/);
  });

  it("rejects empty input and header-only input", () => {
    expect(() => parseSummaryCsv("")).toThrow(/empty CSV/);
    expect(() => parseSummaryCsv(GOOD.split("\n")[0] + "\n")).toThrow(/no data rows/);
  });

  it("rejects non-numeric fields with a line number", () => {
    const text = GOOD.replace("55.1", "fast");
    expect(() => parseSummaryCsv(text)).toThrow(/line 2: v2i_sum_mbps_mean/);
  });

  it("rejects short rows", () => {
    expect(() => parseSummaryCsv(GOOD + "marl,3180\n")).toThrow(/expected 7 fields/);
  });
});
