/**
 * Readers for the run artifacts consumed by the plots.
 *
 * All files are UTF-8, comma-separated, decimal point. Leading "#" lines
 * are comments (they carry the config hashes). Parse errors name the file
 * and 1-based line number.
 */

import { readFileSync } from "node:fs";

interface RawLine {
  lineNo: number;
  fields: string[];
}

function rawLines(path: string): { comments: string[]; lines: RawLine[] } {
  let text: string;
  try {
    text = readFileSync(path, "utf-8");
  } catch (err) {
    throw new Error(`cannot read ${path}: ${(err as Error).message}`);
  }
  const comments: string[] = [];
  const lines: RawLine[] = [];
  const split = text.split("\n");
  for (let i = 0; i < split.length; i++) {
    const line = split[i]!.trim();
    if (line === "") continue;
    if (line.startsWith("#")) {
      comments.push(line);
      continue;
    }
    lines.push({ lineNo: i + 1, fields: line.split(",") });
  }
  return { comments, lines };
}

function num(path: string, row: RawLine, col: number): number {
  const field = row.fields[col];
  const v = Number(field);
  if (field === undefined || field.trim() === "" || Number.isNaN(v)) {
    throw new Error(`${path}:${row.lineNo}: not a number: "${field ?? ""}"`);
  }
  return v;
}

function expectWidth(path: string, row: RawLine, width: number): void {
  if (row.fields.length !== width) {
    throw new Error(
      `${path}:${row.lineNo}: expected ${width} fields, got ${row.fields.length}`
    );
  }
}

function expectHeader(path: string, lines: RawLine[], first: string): RawLine[] {
  const head = lines[0];
  if (head === undefined || head.fields[0] !== first) {
    throw new Error(`${path}:1: missing header row starting with "${first}"`);
  }
  return lines.slice(1);
}

export interface Metrics {
  iters: number[];
  ts: number[];
  taus: number[];
  tvs: number[];
}

export function readMetrics(path: string): Metrics {
  const { lines } = rawLines(path);
  const rows = expectHeader(path, lines, "iter");
  if (rows.length === 0) {
    throw new Error(`${path}: no data rows after header`);
  }
  const out: Metrics = { iters: [], ts: [], taus: [], tvs: [] };
  for (const row of rows) {
    expectWidth(path, row, 4);
    out.iters.push(num(path, row, 0));
    out.ts.push(num(path, row, 1));
    out.taus.push(num(path, row, 2));
    out.tvs.push(num(path, row, 3));
  }
  return out;
}

export interface EnvelopeSweep {
  ts: number[];
  curves: Map<number, { xs: number[]; values: number[] }>;
}

export function readEnvelope(path: string): EnvelopeSweep {
  const { lines } = rawLines(path);
  const rows = expectHeader(path, lines, "x");
  if (rows.length === 0) {
    throw new Error(`${path}: no data rows after header`);
  }
  const curves = new Map<number, { xs: number[]; values: number[] }>();
  for (const row of rows) {
    expectWidth(path, row, 3);
    const x = num(path, row, 0);
    const t = num(path, row, 1);
    const v = num(path, row, 2);
    let curve = curves.get(t);
    if (curve === undefined) {
      curve = { xs: [], values: [] };
      curves.set(t, curve);
    }
    curve.xs.push(x);
    curve.values.push(v);
  }
  return { ts: [...curves.keys()].sort((a, b) => a - b), curves };
}

export interface Histogram {
  lefts: number[];
  rights: number[];
  counts: number[];
  refMasses: number[];
}

export function readHistogram(path: string): Histogram {
  const { lines } = rawLines(path);
  const rows = expectHeader(path, lines, "bin_left");
  if (rows.length === 0) {
    throw new Error(`${path}: no data rows after header`);
  }
  const out: Histogram = { lefts: [], rights: [], counts: [], refMasses: [] };
  for (const row of rows) {
    expectWidth(path, row, 4);
    out.lefts.push(num(path, row, 0));
    out.rights.push(num(path, row, 1));
    out.counts.push(num(path, row, 2));
    out.refMasses.push(num(path, row, 3));
  }
  return out;
}

export interface Marginals {
  midpoints: number[];
  probs: number[][];
}

// headerless: first row holds the bin midpoints, then one row per site
export function readMarginals(path: string): Marginals {
  const { lines } = rawLines(path);
  const head = lines[0];
  if (head === undefined) {
    throw new Error(`${path}: no marginal rows`);
  }
  const width = head.fields.length;
  const midpoints = head.fields.map((_, c) => num(path, head, c));
  const probs: number[][] = [];
  for (const row of lines.slice(1)) {
    expectWidth(path, row, width);
    probs.push(row.fields.map((_, c) => num(path, row, c)));
  }
  if (probs.length === 0) {
    throw new Error(`${path}: no site rows after the midpoint row`);
  }
  return { midpoints, probs };
}

export function runLabel(metricsPath: string): string {
  // label a metrics file by the sampler recorded next to it
  const dir = metricsPath.replace(/[/\\][^/\\]*$/, "");
  try {
    const meta = JSON.parse(readFileSync(`${dir}/run.json`, "utf-8"));
    if (typeof meta.sampler === "string") return meta.sampler;
  } catch {
    // fall through to the directory name
  }
  const parts = dir.split(/[/\\]/);
  return parts[parts.length - 1] || metricsPath;
}
