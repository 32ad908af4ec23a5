import { readFileSync } from "node:fs";
import { describe, expect, it } from "vitest";
import { parseCsv, SchemaError } from "../src/schema.js";

const fixture = (name: string) =>
  readFileSync(new URL(`../fixtures/${name}`, import.meta.url), "utf-8");

describe("parseCsv", () => {
  it("reads rows and the config comment", () => {
    const table = parseCsv(fixture("ratio_lines.csv"));
    expect(table.rows).toHaveLength(15);
    expect(table.configComment).toContain('"seed": 7');
    expect(table.rows[0].scheme).toBe("hybrid");
    expect(table.rows[0].gamma_loss).toBeCloseTo(2e-4, 12);
  });

  it("rejects a CSV missing the R column, naming it", () => {
    expect(() => parseCsv(fixture("missing_R.csv"))).toThrowError(SchemaError);
    try {
      parseCsv(fixture("missing_R.csv"));
    } catch (err) {
      expect((err as SchemaError).column).toBe("R");
      expect((err as SchemaError).message).toContain("R");
    }
  });

  it("accepts a header-only file as zero rows", () => {
    const table = parseCsv(fixture("empty.csv"));
    expect(table.rows).toHaveLength(0);
  });

  it("tolerates blank R cells (out-of-range markers)", () => {
    const table = parseCsv(fixture("breakeven_regular.csv"));
    expect(table.rows.every((r) => Number.isFinite(r.gamma_ph))).toBe(true);
  });
});
