/**
 * Figure builders over the run artifacts. Every kind renders to SVG with
 * the shared frame, fixed color cycle, and no run-dependent styling, so
 * output bytes depend only on input bytes.
 */

import { writeFileSync } from "node:fs";

import {
  readEnvelope,
  readHistogram,
  readMarginals,
  readMetrics,
  runLabel,
} from "./csv.js";
import { COLORS, FRAME, Svg, drawAxes, drawLegend, fmt } from "./svg.js";

export const KINDS = [
  "envelope-sweep",
  "tv-curves",
  "histogram",
  "marginal-grid",
] as const;

export type PlotKind = (typeof KINDS)[number];

export interface PlotJob {
  kind: PlotKind;
  inputs: string[];
  output: string;
}

function expectInputs(job: PlotJob, lo: number, hi: number): void {
  const n = job.inputs.length;
  if (n < lo || n > hi) {
    const want = lo === hi ? `${lo}` : `${lo}..${hi}`;
    throw new Error(`${job.kind} takes ${want} input file(s), got ${n}`);
  }
}

function pad(lo: number, hi: number): [number, number] {
  const span = hi - lo || Math.abs(hi) || 1;
  return [lo - 0.04 * span, hi + 0.04 * span];
}

function envelopeSweep(job: PlotJob): string {
  expectInputs(job, 1, 1);
  const sweep = readEnvelope(job.inputs[0]!);
  let xLo = Infinity, xHi = -Infinity, vLo = Infinity, vHi = -Infinity;
  for (const t of sweep.ts) {
    const c = sweep.curves.get(t)!;
    for (const x of c.xs) {
      xLo = Math.min(xLo, x);
      xHi = Math.max(xHi, x);
    }
    for (const v of c.values) {
      vLo = Math.min(vLo, v);
      vHi = Math.max(vHi, v);
    }
  }
  const svg = new Svg(FRAME.width, FRAME.height);
  const { sx, sy } = drawAxes(svg, FRAME, pad(xLo, xHi), pad(vLo, vHi), {
    title: "Envelope sweep",
    x: "x",
    y: "envelope value",
  });
  const entries: Array<{ label: string; color: string }> = [];
  sweep.ts.forEach((t, i) => {
    const c = sweep.curves.get(t)!;
    const color = COLORS[i % COLORS.length]!;
    svg.polyline(c.xs.map((x, k) => [sx(x), sy(c.values[k]!)]), color);
    entries.push({ label: `t = ${fmt(t)}`, color });
  });
  drawLegend(svg, FRAME, entries);
  return svg.render();
}

function tvCurves(job: PlotJob): string {
  expectInputs(job, 1, COLORS.length);
  const runs = job.inputs.map((p) => ({
    label: runLabel(p),
    metrics: readMetrics(p),
  }));
  let iHi = -Infinity, tvHi = -Infinity;
  for (const { metrics } of runs) {
    iHi = Math.max(iHi, ...metrics.iters);
    tvHi = Math.max(tvHi, ...metrics.tvs);
  }
  const svg = new Svg(FRAME.width, FRAME.height);
  const { sx, sy } = drawAxes(svg, FRAME, [0, iHi], [0, pad(0, tvHi)[1]], {
    title: "TV error by iteration",
    x: "iteration",
    y: "tv_error",
  });
  const entries: Array<{ label: string; color: string }> = [];
  runs.forEach(({ label, metrics }, i) => {
    const color = COLORS[i % COLORS.length]!;
    svg.polyline(
      metrics.iters.map((it, k) => [sx(it), sy(metrics.tvs[k]!)]),
      color
    );
    entries.push({ label, color });
  });
  drawLegend(svg, FRAME, entries);
  return svg.render();
}

function histogram(job: PlotJob): string {
  expectInputs(job, 1, 1);
  const h = readHistogram(job.inputs[0]!);
  const total = h.counts.reduce((a, b) => a + b, 0);
  const masses = h.counts.map((c) => (total > 0 ? c / total : 0));
  const yHi = Math.max(...masses, ...h.refMasses);
  const svg = new Svg(FRAME.width, FRAME.height);
  const { sx, sy } = drawAxes(
    svg,
    FRAME,
    [h.lefts[0]!, h.rights[h.rights.length - 1]!],
    [0, pad(0, yHi)[1]],
    { title: "Sample histogram", x: "x", y: "bin mass" }
  );
  const y0 = sy(0);
  masses.forEach((m, i) => {
    const x = sx(h.lefts[i]!);
    const w = sx(h.rights[i]!) - x;
    svg.rect(x, sy(m), Math.max(w - 0.5, 0.5), y0 - sy(m), COLORS[0]!);
  });
  // reference mass as a step line over the same bins
  const step: Array<[number, number]> = [];
  h.refMasses.forEach((q, i) => {
    step.push([sx(h.lefts[i]!), sy(q)], [sx(h.rights[i]!), sy(q)]);
  });
  svg.polyline(step, COLORS[1]!);
  drawLegend(svg, FRAME, [
    { label: "samples", color: COLORS[0]! },
    { label: "reference", color: COLORS[1]! },
  ]);
  return svg.render();
}

function marginalGrid(job: PlotJob): string {
  expectInputs(job, 1, 2);
  const tables = job.inputs.map(readMarginals);
  const first = tables[0]!;
  for (const t of tables.slice(1)) {
    if (t.probs.length !== first.probs.length ||
        t.midpoints.length !== first.midpoints.length) {
      throw new Error("marginal files disagree on sites or label count");
    }
  }
  const d = first.probs.length;
  const nPanels = Math.min(d, 16);
  // spread the shown sites across the coordinate range
  const sites = [...new Set(
    Array.from({ length: nPanels }, (_, k) =>
      Math.round((k * (d - 1)) / Math.max(nPanels - 1, 1))
    )
  )];
  const cols = Math.min(4, sites.length);
  const rows = Math.ceil(sites.length / cols);
  const cellW = 150;
  const cellH = 96;
  const margin = 10;
  const width = cols * cellW + 2 * margin;
  const height = rows * cellH + 2 * margin + 20;
  const svg = new Svg(width, height);
  svg.text("Per-site marginals", width / 2, 16, { size: 13, anchor: "middle" });
  const xLo = first.midpoints[0]!;
  const xHi = first.midpoints[first.midpoints.length - 1]!;
  sites.forEach((site, k) => {
    const cx = margin + (k % cols) * cellW;
    const cy = margin + 20 + Math.floor(k / cols) * cellH;
    const innerW = cellW - 18;
    const innerH = cellH - 26;
    let pHi = 0;
    for (const t of tables) {
      pHi = Math.max(pHi, ...t.probs[site]!);
    }
    if (pHi === 0) pHi = 1;
    svg.rect(cx, cy, cellW - 8, cellH - 10, "#f7f7f7");
    tables.forEach((t, ti) => {
      const probs = t.probs[site]!;
      const pts: Array<[number, number]> = probs.map((p, i) => [
        cx + 6 + ((first.midpoints[i]! - xLo) / (xHi - xLo || 1)) * innerW,
        cy + cellH - 18 - (p / pHi) * innerH,
      ]);
      svg.polyline(pts, COLORS[ti % COLORS.length]!, 1.2);
    });
    svg.text(`site ${site}`, cx + 6, cy + 12, { size: 9, fill: "#555555" });
  });
  return svg.render();
}

export function renderToString(job: PlotJob): string {
  switch (job.kind) {
    case "envelope-sweep":
      return envelopeSweep(job);
    case "tv-curves":
      return tvCurves(job);
    case "histogram":
      return histogram(job);
    case "marginal-grid":
      return marginalGrid(job);
    default:
      throw new Error(`unknown plot kind: ${String(job.kind)}`);
  }
}

export function render(job: PlotJob): void {
  writeFileSync(job.output, renderToString(job), "utf-8");
}
