/**
 * Figure generator: --csv <path> [--csv <path> ...] --kind <kind> --out <svg>
 *
 * Optional --label <name> per CSV (legend entries) and --title <text>.
 */

import { readFileSync, writeFileSync } from "node:fs";
import { parseCsv, SchemaError } from "./schema.js";
import { FigureKind, renderFigure } from "./figures.js";

interface Args {
  csv: string[];
  label: string[];
  kind: FigureKind;
  out: string;
  title?: string;
}

function parseArgs(argv: string[]): Args {
  const args: Args = { csv: [], label: [], kind: "ratio-lines", out: "figure.svg" };
  for (let i = 0; i < argv.length; i += 1) {
    const flag = argv[i];
    const value = argv[i + 1];
    switch (flag) {
      case "--csv":
        args.csv.push(value);
        i += 1;
        break;
      case "--label":
        args.label.push(value);
        i += 1;
        break;
      case "--kind":
        args.kind = value as FigureKind;
        i += 1;
        break;
      case "--out":
        args.out = value;
        i += 1;
        break;
      case "--title":
        args.title = value;
        i += 1;
        break;
      default:
        throw new Error(`unknown flag ${flag}`);
    }
  }
  if (args.csv.length === 0) throw new Error("at least one --csv is required");
  return args;
}

export function main(argv: string[]): number {
  let args: Args;
  try {
    args = parseArgs(argv);
  } catch (err) {
    console.error(String(err));
    return 2;
  }
  try {
    const tables = args.csv.map((path) => parseCsv(readFileSync(path, "utf-8")));
    const labels = args.csv.map((path, i) => args.label[i] ?? path);
    const svg = renderFigure(tables, {
      kind: args.kind,
      labels,
      title: args.title,
    });
    writeFileSync(args.out, svg);
    console.error(`wrote ${args.out}`);
    return 0;
  } catch (err) {
    if (err instanceof SchemaError) {
      console.error(`schema error: ${err.message}`);
      return 2;
    }
    console.error(String(err));
    return 1;
  }
}

if (process.argv[1] && process.argv[1].endsWith("cli.js")) {
  process.exit(main(process.argv.slice(2)));
}
