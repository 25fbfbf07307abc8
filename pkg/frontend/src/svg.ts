/**
 * Minimal deterministic SVG output: fixed color cycle, fixed fonts, no
 * timestamps or generated ids, so re-rendering the same inputs is
 * byte-identical.
 */

export const COLORS = [
  "#1f77b4",
  "#d62728",
  "#2ca02c",
  "#9467bd",
  "#ff7f0e",
  "#8c564b",
];

export const FONT = "font-family=\"Helvetica, Arial, sans-serif\"";

export function fmt(v: number): string {
  if (!Number.isFinite(v)) return "0";
  if (v === 0) return "0";
  const s = v.toPrecision(6);
  return s.includes(".") || s.includes("e")
    ? s.replace(/\.?0+($|e)/, "$1")
    : s;
}

export function escapeXml(s: string): string {
  return s
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export type Scale = (v: number) => number;

export function linScale(d0: number, d1: number, r0: number, r1: number): Scale {
  const span = d1 - d0;
  if (span === 0) return () => (r0 + r1) / 2;
  return (v) => r0 + ((v - d0) / span) * (r1 - r0);
}

export function niceTicks(lo: number, hi: number, want = 6): number[] {
  if (!(hi > lo)) return [lo];
  const raw = (hi - lo) / want;
  const mag = Math.pow(10, Math.floor(Math.log10(raw)));
  let step = mag;
  for (const m of [1, 2, 5, 10]) {
    if (m * mag >= raw) {
      step = m * mag;
      break;
    }
  }
  const ticks: number[] = [];
  for (let v = Math.ceil(lo / step) * step; v <= hi + step * 1e-9; v += step) {
    ticks.push(Math.abs(v) < step * 1e-9 ? 0 : v);
  }
  return ticks;
}

export interface Frame {
  width: number;
  height: number;
  left: number;
  right: number;
  top: number;
  bottom: number;
}

export const FRAME: Frame = {
  width: 640,
  height: 420,
  left: 58,
  right: 14,
  top: 30,
  bottom: 42,
};

export class Svg {
  private parts: string[] = [];

  constructor(readonly width: number, readonly height: number) {
    this.parts.push(
      `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" ` +
        `height="${height}" viewBox="0 0 ${width} ${height}">`
    );
    this.parts.push(
      `<rect x="0" y="0" width="${width}" height="${height}" fill="#ffffff"/>`
    );
  }

  line(x1: number, y1: number, x2: number, y2: number, stroke: string, width = 1): void {
    this.parts.push(
      `<line x1="${fmt(x1)}" y1="${fmt(y1)}" x2="${fmt(x2)}" y2="${fmt(y2)}" ` +
        `stroke="${stroke}" stroke-width="${width}"/>`
    );
  }

  polyline(points: Array<[number, number]>, stroke: string, width = 1.5): void {
    const pts = points.map(([x, y]) => `${fmt(x)},${fmt(y)}`).join(" ");
    this.parts.push(
      `<polyline points="${pts}" fill="none" stroke="${stroke}" ` +
        `stroke-width="${width}" stroke-linejoin="round"/>`
    );
  }

  rect(x: number, y: number, w: number, h: number, fill: string): void {
    this.parts.push(
      `<rect x="${fmt(x)}" y="${fmt(y)}" width="${fmt(w)}" height="${fmt(h)}" ` +
        `fill="${fill}"/>`
    );
  }

  text(
    s: string,
    x: number,
    y: number,
    opts: { size?: number; anchor?: string; fill?: string } = {}
  ): void {
    const size = opts.size ?? 12;
    const anchor = opts.anchor ?? "start";
    const fill = opts.fill ?? "#222222";
    this.parts.push(
      `<text x="${fmt(x)}" y="${fmt(y)}" font-size="${size}" ${FONT} ` +
        `text-anchor="${anchor}" fill="${fill}">${escapeXml(s)}</text>`
    );
  }

  render(): string {
    return this.parts.join("\n") + "\n</svg>\n";
  }
}

export function drawAxes(
  svg: Svg,
  frame: Frame,
  xDomain: [number, number],
  yDomain: [number, number],
  labels: { title: string; x: string; y: string }
): { sx: Scale; sy: Scale } {
  const sx = linScale(xDomain[0], xDomain[1], frame.left, frame.width - frame.right);
  const sy = linScale(yDomain[0], yDomain[1], frame.height - frame.bottom, frame.top);
  const x0 = frame.left;
  const x1 = frame.width - frame.right;
  const y0 = frame.height - frame.bottom;
  const y1 = frame.top;
  svg.line(x0, y0, x1, y0, "#222222");
  svg.line(x0, y0, x0, y1, "#222222");
  for (const tx of niceTicks(xDomain[0], xDomain[1])) {
    const px = sx(tx);
    svg.line(px, y0, px, y0 + 4, "#222222");
    svg.text(fmt(tx), px, y0 + 17, { size: 10, anchor: "middle" });
  }
  for (const ty of niceTicks(yDomain[0], yDomain[1])) {
    const py = sy(ty);
    svg.line(x0 - 4, py, x0, py, "#222222");
    svg.text(fmt(ty), x0 - 7, py + 3.5, { size: 10, anchor: "end" });
  }
  svg.text(labels.title, frame.width / 2, 18, { size: 13, anchor: "middle" });
  svg.text(labels.x, (x0 + x1) / 2, frame.height - 8, { size: 11, anchor: "middle" });
  svg.text(labels.y, 14, (y0 + y1) / 2, { size: 11, anchor: "middle" });
  return { sx, sy };
}

export function drawLegend(
  svg: Svg,
  frame: Frame,
  entries: Array<{ label: string; color: string }>
): void {
  const x = frame.width - frame.right - 150;
  let y = frame.top + 14;
  for (const { label, color } of entries) {
    svg.line(x, y - 4, x + 22, y - 4, color, 2);
    svg.text(label, x + 28, y, { size: 11 });
    y += 16;
  }
}
