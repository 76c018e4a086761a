/**
 * Figure specifications: which CSVs, which figure kind, which slice of rows.
 */
import { readFileSync } from "fs";
import { MetricsRow, loadMetricsCsv } from "./csv.js";

export const FIGURE_KINDS = [
  "spatial_profile", "rate_plot", "bias_vs_b", "bound_overlay",
] as const;
export type FigureKind = (typeof FIGURE_KINDS)[number];

export interface FigureSpec {
  csv: string[];
  kind: FigureKind;
  out: string;
  /** filter predicates; omitted means no restriction */
  variant?: string;
  steps?: [number, number];    // inclusive time window
  sites?: string[];            // site_set labels
  /** measured column; defaults per figure kind */
  column?: "bias" | "variance" | "total";
}

export function loadSpec(path: string): FigureSpec {
  let raw: unknown;
  try {
    raw = JSON.parse(readFileSync(path, "utf-8"));
  } catch (err) {
    throw new Error(`cannot read figure spec ${path}: ${String(err)}`);
  }
  return validateSpec(raw as Partial<FigureSpec>, path);
}

export function validateSpec(spec: Partial<FigureSpec>, source = "spec"): FigureSpec {
  if (!spec.csv || spec.csv.length === 0) {
    throw new Error(`${source}: needs at least one input CSV path`);
  }
  if (!spec.kind || !FIGURE_KINDS.includes(spec.kind)) {
    throw new Error(`${source}: kind must be one of ${FIGURE_KINDS.join(", ")}`);
  }
  if (!spec.out) {
    throw new Error(`${source}: needs an output image path`);
  }
  return spec as FigureSpec;
}

export function loadRows(spec: FigureSpec): MetricsRow[] {
  return spec.csv.flatMap((p) => loadMetricsCsv(p));
}

export function filterRows(rows: MetricsRow[], spec: FigureSpec): MetricsRow[] {
  const out = rows.filter((r) => {
    if (spec.variant && r.variant !== spec.variant) return false;
    if (spec.steps && (r.step === null || r.step < spec.steps[0] || r.step > spec.steps[1])) {
      return false;
    }
    if (spec.sites && !spec.sites.includes(r.site_set)) return false;
    return true;
  });
  if (out.length === 0) {
    throw new Error("figure selection matched no rows (check variant/steps/sites filters)");
  }
  return out;
}
