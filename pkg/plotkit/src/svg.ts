/**
 * Minimal deterministic SVG builder: linear/log scales, axes with ticks,
 * polylines, scatter circles, labels.  Pure string assembly: rendering the
 * same data twice yields byte-identical output.
 */

export interface Scale {
  (x: number): number;
  domain: [number, number];
  range: [number, number];
}

const fmt = (x: number): string => {
  if (!isFinite(x)) return "0";
  const s = x.toPrecision(6);
  return s.includes(".") ? s.replace(/\.?0+$/, "").replace(/\.?0+e/, "e") : s;
};

export function linScale(domain: [number, number], range: [number, number]): Scale {
  const [d0, d1] = domain;
  const [r0, r1] = range;
  const span = d1 - d0 || 1;
  const scale = ((x: number) => r0 + ((x - d0) / span) * (r1 - r0)) as Scale;
  scale.domain = domain;
  scale.range = range;
  return scale;
}

export function logScale(domain: [number, number], range: [number, number]): Scale {
  const inner = linScale([Math.log10(domain[0]), Math.log10(domain[1])], range);
  const scale = ((x: number) => inner(Math.log10(x))) as Scale;
  scale.domain = domain;
  scale.range = range;
  return scale;
}

export function extent(values: number[], pad = 0.05): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of values) {
    if (isFinite(v)) {
      lo = Math.min(lo, v);
      hi = Math.max(hi, v);
    }
  }
  if (!isFinite(lo)) return [0, 1];
  if (lo === hi) return [lo - 0.5, hi + 0.5];
  const span = hi - lo;
  return [lo - pad * span, hi + pad * span];
}

export function ticks(domain: [number, number], count = 5): number[] {
  const [lo, hi] = domain;
  const rawStep = (hi - lo) / Math.max(count, 1);
  const mag = Math.pow(10, Math.floor(Math.log10(Math.abs(rawStep) || 1)));
  const step = [1, 2, 5, 10].map((m) => m * mag).find((s) => (hi - lo) / s <= count) ?? mag * 10;
  const start = Math.ceil(lo / step) * step;
  const out: number[] = [];
  for (let t = start; t <= hi + 1e-12 * Math.abs(step); t += step) {
    out.push(Math.abs(t) < 1e-12 ? 0 : t);
  }
  return out;
}

export function logTicks(domain: [number, number]): number[] {
  const out: number[] = [];
  for (let e = Math.floor(Math.log10(domain[0])); e <= Math.ceil(Math.log10(domain[1])); e++) {
    const t = Math.pow(10, e);
    if (t >= domain[0] * 0.999 && t <= domain[1] * 1.001) out.push(t);
  }
  return out.length >= 2 ? out : [domain[0], domain[1]];
}

export function polyline(points: Array<[number, number]>, attrs: string): string {
  const pts = points.map(([x, y]) => `${fmt(x)},${fmt(y)}`).join(" ");
  return `<polyline points="${pts}" fill="none" ${attrs}/>`;
}

export function circles(points: Array<[number, number]>, r: number, attrs: string): string {
  return points
    .map(([x, y]) => `<circle cx="${fmt(x)}" cy="${fmt(y)}" r="${r}" ${attrs}/>`)
    .join("\n");
}

export function text(x: number, y: number, label: string, attrs = ""): string {
  return `<text x="${fmt(x)}" y="${fmt(y)}" font-family="monospace" font-size="11" ${attrs}>${escapeXml(label)}</text>`;
}

export function line(x1: number, y1: number, x2: number, y2: number, attrs: string): string {
  return `<line x1="${fmt(x1)}" y1="${fmt(y1)}" x2="${fmt(x2)}" y2="${fmt(y2)}" ${attrs}/>`;
}

function escapeXml(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

export interface Frame {
  width: number;
  height: number;
  margin: { top: number; right: number; bottom: number; left: number };
}

export const DEFAULT_FRAME: Frame = {
  width: 640,
  height: 420,
  margin: { top: 40, right: 20, bottom: 46, left: 64 },
};

export function plotArea(frame: Frame): { x: [number, number]; y: [number, number] } {
  return {
    x: [frame.margin.left, frame.width - frame.margin.right],
    y: [frame.height - frame.margin.bottom, frame.margin.top],
  };
}

export function axes(frame: Frame, xs: Scale, ys: Scale, xTicks: number[],
                     yTicks: number[], xLabel: string, yLabel: string,
                     tickFmt: (t: number) => string = fmt): string {
  const { margin, width, height } = frame;
  const parts: string[] = [];
  const x0 = margin.left;
  const x1 = width - margin.right;
  const y0 = height - margin.bottom;
  const y1 = margin.top;
  parts.push(line(x0, y0, x1, y0, 'stroke="#333" stroke-width="1"'));
  parts.push(line(x0, y0, x0, y1, 'stroke="#333" stroke-width="1"'));
  for (const t of xTicks) {
    const x = xs(t);
    parts.push(line(x, y0, x, y0 + 4, 'stroke="#333" stroke-width="1"'));
    parts.push(text(x - 8, y0 + 17, tickFmt(t)));
    parts.push(line(x, y0, x, y1, 'stroke="#eee" stroke-width="0.5"'));
  }
  for (const t of yTicks) {
    const y = ys(t);
    parts.push(line(x0 - 4, y, x0, y, 'stroke="#333" stroke-width="1"'));
    parts.push(text(6, y + 4, tickFmt(t)));
    parts.push(line(x0, y, x1, y, 'stroke="#eee" stroke-width="0.5"'));
  }
  parts.push(text((x0 + x1) / 2 - 20, height - 8, xLabel));
  parts.push(`<g transform="rotate(-90 14 ${(y0 + y1) / 2})">` +
    text(14, (y0 + y1) / 2, yLabel) + "</g>");
  return parts.join("\n");
}

export function svgDocument(frame: Frame, title: string, body: string): string {
  return [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${frame.width}" height="${frame.height}" viewBox="0 0 ${frame.width} ${frame.height}">`,
    `<rect width="${frame.width}" height="${frame.height}" fill="white"/>`,
    text(frame.margin.left, 22, title, 'font-size="13" font-weight="bold"'),
    body,
    "</svg>",
    "",
  ].join("\n");
}

export const SERIES_COLORS = [
  "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];
