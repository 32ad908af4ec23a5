/**
 * Deterministic SVG figure builders for sweep/breakeven tables.
 *
 * Every number plotted comes verbatim from the CSV; rendering is a pure
 * function of (rows, spec), with fixed formatting, so output files are
 * byte-stable and suitable for golden-file comparison.  Axes are log-log by
 * default and interpolation between boundary points is linear in log space.
 */

import { SweepRow, SweepTable } from "./schema.js";

export type FigureKind = "ratio-lines" | "breakeven-regions" | "comparison-overlay";

export interface FigureSpec {
  kind: FigureKind;
  labels?: string[];
  width?: number;
  height?: number;
  title?: string;
}

const MARGIN = { left: 64, right: 20, top: 28, bottom: 46 };
const PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

function fmt(x: number): string {
  return Number(x.toPrecision(6)).toString();
}

class LogScale {
  constructor(
    readonly lo: number,
    readonly hi: number,
    readonly rangeLo: number,
    readonly rangeHi: number,
  ) {}

  map(v: number): number {
    const t = (Math.log10(v) - Math.log10(this.lo)) / (Math.log10(this.hi) - Math.log10(this.lo));
    return this.rangeLo + t * (this.rangeHi - this.rangeLo);
  }

  ticks(): number[] {
    const out: number[] = [];
    const first = Math.ceil(Math.log10(this.lo) - 1e-9);
    const last = Math.floor(Math.log10(this.hi) + 1e-9);
    for (let e = first; e <= last; e += 1) out.push(10 ** e);
    return out;
  }
}

function extent(values: number[], fallback: [number, number]): [number, number] {
  const finite = values.filter((v) => Number.isFinite(v) && v > 0);
  if (finite.length === 0) return fallback;
  let lo = Math.min(...finite);
  let hi = Math.max(...finite);
  if (lo === hi) {
    lo /= 2;
    hi *= 2;
  }
  return [lo / 1.2, hi * 1.2];
}

function svgOpen(width: number, height: number, title: string): string[] {
  return [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" viewBox="0 0 ${width} ${height}">`,
    `<rect width="${width}" height="${height}" fill="white"/>`,
    `<text x="${width / 2}" y="18" text-anchor="middle" font-family="sans-serif" font-size="13">${title}</text>`,
  ];
}

function axes(
  parts: string[],
  xs: LogScale,
  ys: LogScale,
  width: number,
  height: number,
  xlabel: string,
  ylabel: string,
): void {
  const x0 = MARGIN.left;
  const x1 = width - MARGIN.right;
  const y0 = height - MARGIN.bottom;
  const y1 = MARGIN.top;
  parts.push(`<g font-family="sans-serif" font-size="10" stroke="none" fill="black">`);
  parts.push(
    `<line x1="${x0}" y1="${y0}" x2="${x1}" y2="${y0}" stroke="black"/>`,
    `<line x1="${x0}" y1="${y0}" x2="${x0}" y2="${y1}" stroke="black"/>`,
  );
  for (const t of xs.ticks()) {
    const px = fmt(xs.map(t));
    parts.push(
      `<line x1="${px}" y1="${y0}" x2="${px}" y2="${y0 + 4}" stroke="black"/>`,
      `<text x="${px}" y="${y0 + 16}" text-anchor="middle">1e${Math.round(Math.log10(t))}</text>`,
    );
  }
  for (const t of ys.ticks()) {
    const py = fmt(ys.map(t));
    parts.push(
      `<line x1="${x0 - 4}" y1="${py}" x2="${x0}" y2="${py}" stroke="black"/>`,
      `<text x="${x0 - 8}" y="${py}" text-anchor="end" dominant-baseline="middle">1e${Math.round(Math.log10(t))}</text>`,
    );
  }
  parts.push(
    `<text x="${(x0 + x1) / 2}" y="${height - 10}" text-anchor="middle" font-size="11">${xlabel}</text>`,
    `<text x="16" y="${(y0 + y1) / 2}" text-anchor="middle" font-size="11" transform="rotate(-90 16 ${(y0 + y1) / 2})">${ylabel}</text>`,
  );
  parts.push(`</g>`);
}

function legend(parts: string[], labels: string[], width: number): void {
  parts.push(`<g font-family="sans-serif" font-size="10">`);
  labels.forEach((label, i) => {
    const y = MARGIN.top + 14 * i;
    const x = width - MARGIN.right - 130;
    parts.push(
      `<line x1="${x}" y1="${y}" x2="${x + 18}" y2="${y}" stroke="${PALETTE[i % PALETTE.length]}" stroke-width="1.5"/>`,
      `<text x="${x + 24}" y="${y + 3}">${label}</text>`,
    );
  });
  parts.push(`</g>`);
}

function polyline(points: Array<[number, number]>, color: string, dash = ""): string {
  const attr = dash ? ` stroke-dasharray="${dash}"` : "";
  const pts = points.map(([x, y]) => `${fmt(x)},${fmt(y)}`).join(" ");
  return `<polyline fill="none" stroke="${color}" stroke-width="1.5"${attr} points="${pts}"/>`;
}

/** R vs loss strength, one line per dephasing strength. */
export function ratioLines(table: SweepTable, spec: FigureSpec): string {
  const width = spec.width ?? 560;
  const height = spec.height ?? 400;
  const rows = table.rows.filter((r) => Number.isFinite(r.R) && r.R > 0);
  const xs = new LogScale(
    ...extent(rows.map((r) => r.gamma_loss), [1e-4, 1e-2]),
    MARGIN.left,
    width - MARGIN.right,
  );
  const ys = new LogScale(
    ...extent(rows.map((r) => r.R), [1e-1, 1e1]),
    height - MARGIN.bottom,
    MARGIN.top,
  );
  const parts = svgOpen(width, height, spec.title ?? "infidelity ratio vs loss strength");
  // break-even guide at R = 1
  if (ys.lo < 1 && ys.hi > 1) {
    const py = fmt(ys.map(1));
    parts.push(
      `<line x1="${MARGIN.left}" y1="${py}" x2="${width - MARGIN.right}" y2="${py}" stroke="black" stroke-dasharray="4 3"/>`,
    );
  }
  const groups = new Map<number, SweepRow[]>();
  for (const row of rows) {
    const key = row.gamma_ph;
    if (!groups.has(key)) groups.set(key, []);
    groups.get(key)!.push(row);
  }
  const keys = [...groups.keys()].sort((a, b) => a - b);
  keys.forEach((key, i) => {
    const series = groups.get(key)!.slice().sort((a, b) => a.gamma_loss - b.gamma_loss);
    const pts = series.map(
      (r) => [xs.map(r.gamma_loss), ys.map(r.R)] as [number, number],
    );
    if (pts.length) parts.push(polyline(pts, PALETTE[i % PALETTE.length]));
  });
  axes(parts, xs, ys, width, height, "loss strength per location", "infidelity ratio R");
  legend(parts, keys.map((k) => `dephasing ${k.toExponential(2)}`), width);
  parts.push(`</svg>`);
  return parts.join("\n") + "\n";
}

/** Break-even boundary in the (loss, dephasing) plane with the R<1 side shaded. */
export function breakevenRegions(tables: SweepTable[], spec: FigureSpec): string {
  const width = spec.width ?? 560;
  const height = spec.height ?? 400;
  const labels = spec.labels ?? tables.map((_, i) => `series ${i + 1}`);
  const all = tables.flatMap((t) => t.rows).filter((r) => Number.isFinite(r.gamma_loss) && r.gamma_loss > 0);
  const xs = new LogScale(
    ...extent(all.map((r) => r.gamma_loss), [1e-4, 1e-2]),
    MARGIN.left,
    width - MARGIN.right,
  );
  const ys = new LogScale(
    ...extent(all.map((r) => r.gamma_ph), [1e-4, 1e-2]),
    height - MARGIN.bottom,
    MARGIN.top,
  );
  const title = spec.kind === "comparison-overlay" ? "break-even boundary comparison" : "break-even regions";
  const parts = svgOpen(width, height, spec.title ?? title);
  tables.forEach((table, i) => {
    const series = table.rows
      .filter((r) => Number.isFinite(r.gamma_loss) && r.gamma_loss > 0)
      .slice()
      .sort((a, b) => a.gamma_ph - b.gamma_ph);
    if (!series.length) return;
    const pts = series.map(
      (r) => [xs.map(r.gamma_loss), ys.map(r.gamma_ph)] as [number, number],
    );
    if (spec.kind === "breakeven-regions") {
      // everything to the left of the boundary corrects better than bare storage
      const shade = [
        `${fmt(MARGIN.left)},${fmt(pts[0][1])}`,
        ...pts.map(([x, y]) => `${fmt(x)},${fmt(y)}`),
        `${fmt(MARGIN.left)},${fmt(pts[pts.length - 1][1])}`,
      ].join(" ");
      parts.push(
        `<polygon fill="${PALETTE[i % PALETTE.length]}" fill-opacity="0.15" stroke="none" points="${shade}"/>`,
      );
    }
    parts.push(polyline(pts, PALETTE[i % PALETTE.length]));
  });
  axes(parts, xs, ys, width, height, "break-even loss strength", "dephasing strength per location");
  legend(parts, labels, width);
  parts.push(`</svg>`);
  return parts.join("\n") + "\n";
}

export function renderFigure(tables: SweepTable[], spec: FigureSpec): string {
  switch (spec.kind) {
    case "ratio-lines":
      if (tables.length !== 1) {
        throw new Error("ratio-lines takes exactly one CSV");
      }
      return ratioLines(tables[0], spec);
    case "breakeven-regions":
    case "comparison-overlay":
      return breakevenRegions(tables, spec);
    default:
      throw new Error(`unknown figure kind ${(spec as FigureSpec).kind}`);
  }
}
