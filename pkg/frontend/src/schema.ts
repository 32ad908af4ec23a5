/**
 * CSV loading for the simulator's sweep/breakeven output.
 *
 * Files start with `# config {...}` provenance comments, then a header row
 * with a fixed column set.  Any missing required column is a named schema
 * error, so downstream figure code can assume the columns exist.
 */

export const REQUIRED_COLUMNS = [
  "scheme", "N", "M", "gamma_loss", "gamma_ph", "wait_mult", "alpha_in",
  "alpha_anc", "phi0_in", "phi0_anc", "squeeze_r", "R", "R_stderr", "inF",
  "inF_bm", "shots", "seed",
] as const;

export type ColumnName = (typeof REQUIRED_COLUMNS)[number];

export interface SweepRow {
  scheme: string;
  N: number;
  M: number;
  gamma_loss: number;
  gamma_ph: number;
  wait_mult: number;
  alpha_in: number;
  alpha_anc: number;
  phi0_in: number;
  phi0_anc: number;
  squeeze_r: number;
  R: number;
  R_stderr: number;
  inF: number;
  inF_bm: number;
  shots: number;
  seed: number;
}

export interface SweepTable {
  rows: SweepRow[];
  configComment: string | null;
}

export class SchemaError extends Error {
  readonly column: string;

  constructor(column: string, detail: string) {
    super(`column '${column}': ${detail}`);
    this.column = column;
  }
}

const NUMERIC_COLUMNS: ColumnName[] = REQUIRED_COLUMNS.filter(
  (c) => c !== "scheme",
) as ColumnName[];

export function parseCsv(text: string): SweepTable {
  const lines = text.split(/\r?\n/).filter((line) => line.trim().length > 0);
  let configComment: string | null = null;
  let i = 0;
  while (i < lines.length && lines[i].startsWith("#")) {
    if (lines[i].startsWith("# config")) {
      configComment = lines[i].slice("# config".length).trim();
    }
    i += 1;
  }
  if (i >= lines.length) {
    throw new SchemaError("scheme", "empty file: no header row");
  }
  const header = lines[i].split(",").map((h) => h.trim());
  i += 1;
  for (const col of REQUIRED_COLUMNS) {
    if (!header.includes(col)) {
      throw new SchemaError(col, "missing from header");
    }
  }
  const index = new Map(header.map((h, j) => [h, j]));
  const rows: SweepRow[] = [];
  for (; i < lines.length; i += 1) {
    const parts = lines[i].split(",");
    const row: Record<string, unknown> = {};
    for (const col of REQUIRED_COLUMNS) {
      const raw = parts[index.get(col)!]?.trim() ?? "";
      if (col === "scheme") {
        row[col] = raw;
      } else {
        row[col] = raw === "" ? Number.NaN : Number(raw);
      }
    }
    rows.push(row as unknown as SweepRow);
  }
  for (const col of NUMERIC_COLUMNS) {
    for (const row of rows) {
      const v = row[col as keyof SweepRow];
      if (typeof v === "number" && Number.isNaN(v) && col !== "R" && col !== "inF" && col !== "inF_bm") {
        throw new SchemaError(col, "non-numeric value");
      }
    }
  }
  return { rows, configComment };
}
