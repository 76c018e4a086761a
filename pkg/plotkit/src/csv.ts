/**
 * Parser for the fieldpf metrics CSV (schema "fieldpf-metrics v1").
 *
 * Layout: an optional leading "# ..." comment line carrying the schema
 * version, a header row, then one record per line.  Empty cells are nulls.
 * Replicate rows carry status "rep:<i>"; aggregate rows carry "ok" or
 * "ok-no-bounds"; infeasible points carry "skipped:<reason>".
 */
import { readFileSync } from "fs";

export interface MetricsRow {
  step: number | null;
  site_set: string;
  variant: string;
  b: number | null;
  N: number | null;
  c: number | null;
  bias: number | null;
  variance: number | null;
  total: number | null;
  bias_bound: number | null;
  variance_bound: number | null;
  status: string;
  seed: string;
  wall_ms: number | null;
}

export const REQUIRED_COLUMNS = [
  "step", "site_set", "variant", "b", "N", "c", "bias", "variance", "total",
  "bias_bound", "variance_bound", "status", "seed", "wall_ms",
] as const;

const NUMERIC = new Set([
  "step", "b", "N", "c", "bias", "variance", "total",
  "bias_bound", "variance_bound", "wall_ms",
]);

export function parseMetricsCsv(text: string, source: string): MetricsRow[] {
  const lines = text.split(/\r?\n/).filter((l) => l.length > 0);
  let headerIdx = 0;
  while (headerIdx < lines.length && lines[headerIdx].startsWith("#")) headerIdx++;
  if (headerIdx >= lines.length) {
    throw new Error(`${source}: no header row found`);
  }
  const header = lines[headerIdx].split(",");
  for (const col of REQUIRED_COLUMNS) {
    if (!header.includes(col)) {
      throw new Error(
        `${source}: column "${col}" not found in header; available: ${header.join(", ")}`,
      );
    }
  }
  const index = new Map(header.map((h, i) => [h, i] as const));
  const rows: MetricsRow[] = [];
  for (const line of lines.slice(headerIdx + 1)) {
    const cells = line.split(",");
    const row: Record<string, unknown> = {};
    for (const col of REQUIRED_COLUMNS) {
      const raw = cells[index.get(col)!] ?? "";
      if (NUMERIC.has(col)) {
        row[col] = raw === "" ? null : Number(raw);
      } else {
        row[col] = raw;
      }
    }
    rows.push(row as unknown as MetricsRow);
  }
  return rows;
}

export function loadMetricsCsv(path: string): MetricsRow[] {
  return parseMetricsCsv(readFileSync(path, "utf-8"), path);
}

export const isReplicate = (r: MetricsRow) => r.status.startsWith("rep:");
export const isAggregate = (r: MetricsRow) => r.status.startsWith("ok");
