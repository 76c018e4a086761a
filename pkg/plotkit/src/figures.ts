/**
 * The four figure builders.  Each consumes already-filtered metrics rows and
 * returns a complete SVG document string.  Nothing is recomputed beyond
 * display-level grouping: replicate rows become scatter points, aggregate
 * rows become lines, and the only synthesized series are reference guides
 * (the -1/2 slope) and the per-group mean line the default display calls
 * for.
 */
import { MetricsRow, isAggregate, isReplicate } from "./csv.js";
import { FigureSpec } from "./figspec.js";
import {
  DEFAULT_FRAME, SERIES_COLORS, axes, circles, extent, line, linScale,
  logScale, logTicks, plotArea, polyline, svgDocument, text, ticks,
} from "./svg.js";

type Column = "bias" | "variance" | "total";

function columnOf(spec: FigureSpec, fallback: Column): Column {
  return spec.column ?? fallback;
}

function variants(rows: MetricsRow[]): string[] {
  return [...new Set(rows.map((r) => r.variant))].sort();
}

function groupBy<T>(items: T[], key: (t: T) => string): Map<string, T[]> {
  const out = new Map<string, T[]>();
  for (const it of items) {
    const k = key(it);
    const bucket = out.get(k);
    if (bucket) bucket.push(it);
    else out.set(k, [it]);
  }
  return out;
}

function mean(xs: number[]): number {
  return xs.reduce((a, b) => a + b, 0) / xs.length;
}

function numericSites(rows: MetricsRow[]): number[] {
  return [...new Set(rows.map((r) => Number(r.site_set)))]
    .filter((v) => Number.isFinite(v))
    .sort((a, b) => a - b);
}

/** Per-site error curve: replicate scatter plus the aggregate line, at the
 * last selected step (pass spec.steps to pick another window). */
export function spatialProfile(rows: MetricsRow[], spec: FigureSpec): string {
  const col = columnOf(spec, "total");
  const usable = rows.filter((r) => r[col] !== null && r.step !== null);
  if (usable.length === 0) throw new Error(`no rows carry a ${col} value`);
  const lastStep = Math.max(...usable.map((r) => r.step as number));
  const windowed = spec.steps ? usable : usable.filter((r) => r.step === lastStep);
  const sites = numericSites(windowed);
  if (sites.length === 0) throw new Error("site_set labels are not single numeric sites");

  const frame = DEFAULT_FRAME;
  const area = plotArea(frame);
  const xs = linScale([sites[0], sites[sites.length - 1]], area.x);
  const values = windowed.map((r) => r[col] as number);
  const ys = linScale(extent([0, ...values]), area.y);
  const parts: string[] = [];
  parts.push(axes(frame, xs, ys, sites, ticks(ys.domain), "site", col));

  variants(windowed).forEach((variant, vi) => {
    const color = SERIES_COLORS[vi % SERIES_COLORS.length];
    const sub = windowed.filter((r) => r.variant === variant);
    const reps = sub.filter(isReplicate).map(
      (r) => [xs(Number(r.site_set)), ys(r[col] as number)] as [number, number]);
    parts.push(circles(reps, 1.5, `fill="${color}" fill-opacity="0.18"`));
    for (const [stepLabel, stepRows] of groupBy(sub.filter(isAggregate),
                                                (r) => String(r.step))) {
      const pts = stepRows
        .map((r) => [Number(r.site_set), r[col] as number] as [number, number])
        .sort((a, b) => a[0] - b[0])
        .map(([s, v]) => [xs(s), ys(v)] as [number, number]);
      if (pts.length > 1) {
        parts.push(polyline(pts, `stroke="${color}" stroke-width="1.6"`));
      }
      void stepLabel;
    }
    parts.push(text(area.x[1] - 110, frame.margin.top + 14 * (vi + 1),
                    variant, `fill="${color}"`));
  });
  return svgDocument(frame, `spatial error profile (${col})`, parts.join("\n"));
}

/** Error against particle count on log-log axes with a -1/2 reference slope. */
export function ratePlot(rows: MetricsRow[], spec: FigureSpec): string {
  const col = columnOf(spec, "total");
  const usable = rows.filter((r) => r[col] !== null && r.N !== null && (r[col] as number) > 0);
  if (usable.length === 0) throw new Error(`no rows carry ${col} and N values`);

  const frame = DEFAULT_FRAME;
  const area = plotArea(frame);
  const nValues = usable.map((r) => r.N as number);
  const errValues = usable.map((r) => r[col] as number);
  const xs = logScale([Math.min(...nValues) / 1.3, Math.max(...nValues) * 1.3], area.x);
  const ys = logScale([Math.min(...errValues) / 1.5, Math.max(...errValues) * 1.5], area.y);
  const parts: string[] = [];
  parts.push(axes(frame, xs, ys, logTicks(xs.domain), logTicks(ys.domain),
                  "particles N", col, (t) => t.toExponential(0)));

  variants(usable).forEach((variant, vi) => {
    const color = SERIES_COLORS[vi % SERIES_COLORS.length];
    const sub = usable.filter((r) => r.variant === variant);
    const reps = sub.filter(isReplicate).map(
      (r) => [xs(r.N as number), ys(r[col] as number)] as [number, number]);
    parts.push(circles(reps, 1.5, `fill="${color}" fill-opacity="0.15"`));
    const agg = sub.filter(isAggregate)
      .map((r) => [r.N as number, r[col] as number] as [number, number])
      .sort((a, b) => a[0] - b[0]);
    if (agg.length > 0) {
      parts.push(polyline(agg.map(([n, e]) => [xs(n), ys(e)]),
                          `stroke="${color}" stroke-width="1.8"`));
      parts.push(circles(agg.map(([n, e]) => [xs(n), ys(e)]), 3, `fill="${color}"`));
      // reference guide anchored at the first aggregate point
      const [n0, e0] = agg[0];
      const guide = agg.map(([n]) => [xs(n), ys(e0 * Math.sqrt(n0 / n))] as [number, number]);
      parts.push(polyline(guide, 'stroke="#777" stroke-width="1" stroke-dasharray="5,4"'));
      parts.push(text(guide[guide.length - 1][0] - 64, guide[guide.length - 1][1] - 6,
                      "slope -1/2", 'fill="#777"'));
    }
    parts.push(text(area.x[1] - 110, frame.margin.top + 14 * (vi + 1),
                    variant, `fill="${color}"`));
  });
  return svgDocument(frame, `error vs particle count (${col})`, parts.join("\n"));
}

/** Deterministic bias against the enlargement radius b. */
export function biasVsB(rows: MetricsRow[], spec: FigureSpec): string {
  const col = columnOf(spec, "bias");
  const usable = rows.filter((r) => r[col] !== null && r.b !== null && isAggregate(r));
  if (usable.length === 0) throw new Error(`no aggregate rows carry ${col} and b values`);

  const bs = [...new Set(usable.map((r) => r.b as number))].sort((a, b) => a - b);
  const frame = DEFAULT_FRAME;
  const area = plotArea(frame);
  const xs = linScale([bs[0] - 0.2, bs[bs.length - 1] + 0.2], area.x);
  const ys = linScale(extent([0, ...usable.map((r) => r[col] as number)]), area.y);
  const parts: string[] = [];
  parts.push(axes(frame, xs, ys, bs, ticks(ys.domain), "enlargement b", col));

  // per-(site, b) values as scatter, mean over the selection as the line
  const sitesSeen = groupBy(usable, (r) => r.site_set);
  let si = 0;
  for (const [site, siteRows] of [...sitesSeen.entries()].sort()) {
    const color = SERIES_COLORS[si++ % SERIES_COLORS.length];
    const pts = siteRows.map(
      (r) => [xs(r.b as number), ys(r[col] as number)] as [number, number]);
    parts.push(circles(pts, 1.8, `fill="${color}" fill-opacity="0.25"`));
    void site;
  }
  const meanPts = bs.map((b) => {
    const vals = usable.filter((r) => r.b === b).map((r) => r[col] as number);
    return [xs(b), ys(mean(vals))] as [number, number];
  });
  parts.push(polyline(meanPts, 'stroke="#111" stroke-width="2"'));
  parts.push(circles(meanPts, 3.2, 'fill="#111"'));
  parts.push(text(area.x[1] - 110, frame.margin.top + 14, "mean", 'fill="#111"'));
  return svgDocument(frame, `${col} vs enlargement radius`, parts.join("\n"));
}

/** Measured error over time with bound columns superimposed where present. */
export function boundOverlay(rows: MetricsRow[], spec: FigureSpec): string {
  const col = columnOf(spec, "bias");
  const usable = rows.filter((r) => r[col] !== null && r.step !== null && isAggregate(r));
  if (usable.length === 0) throw new Error(`no aggregate rows carry ${col} and step values`);

  const frame = DEFAULT_FRAME;
  const area = plotArea(frame);
  const steps = [...new Set(usable.map((r) => r.step as number))].sort((a, b) => a - b);
  const boundCol = col === "variance" ? "variance_bound" : "bias_bound";
  const boundVals = usable.map((r) => r[boundCol]).filter((v): v is number => v !== null);
  const allVals = [0, ...usable.map((r) => r[col] as number), ...boundVals];
  const xs = linScale([steps[0], steps[steps.length - 1]], area.x);
  const ys = linScale(extent(allVals), area.y);
  const parts: string[] = [];
  parts.push(axes(frame, xs, ys, ticks(xs.domain), ticks(ys.domain), "step", col));

  variants(usable).forEach((variant, vi) => {
    const color = SERIES_COLORS[vi % SERIES_COLORS.length];
    const sub = usable.filter((r) => r.variant === variant);
    const meanPts = steps
      .map((s) => {
        const vals = sub.filter((r) => r.step === s).map((r) => r[col] as number);
        return vals.length ? ([xs(s), ys(mean(vals))] as [number, number]) : null;
      })
      .filter((p): p is [number, number] => p !== null);
    parts.push(polyline(meanPts, `stroke="${color}" stroke-width="1.8"`));
    const boundPts = steps
      .map((s) => {
        const vals = sub.filter((r) => r.step === s)
          .map((r) => r[boundCol]).filter((v): v is number => v !== null);
        return vals.length ? ([xs(s), ys(mean(vals))] as [number, number]) : null;
      })
      .filter((p): p is [number, number] => p !== null);
    if (boundPts.length > 0) {
      parts.push(polyline(boundPts,
        `stroke="${color}" stroke-width="1.4" stroke-dasharray="6,4"`));
    }
    parts.push(text(area.x[1] - 110, frame.margin.top + 14 * (vi + 1),
                    variant, `fill="${color}"`));
  });
  if (boundVals.length === 0) {
    parts.push(text(frame.margin.left + 8, frame.margin.top + 14,
      `no ${boundCol} values in selection (mixing hypothesis not satisfied)`,
      'fill="#999"'));
  }
  return svgDocument(frame, `${col} with ${boundCol} overlay`, parts.join("\n"));
}

export function renderFigure(rows: MetricsRow[], spec: FigureSpec): string {
  switch (spec.kind) {
    case "spatial_profile":
      return spatialProfile(rows, spec);
    case "rate_plot":
      return ratePlot(rows, spec);
    case "bias_vs_b":
      return biasVsB(rows, spec);
    case "bound_overlay":
      return boundOverlay(rows, spec);
  }
}
