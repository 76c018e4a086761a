#!/usr/bin/env node
/**
 * plotkit: fieldpf metrics CSV to SVG figures.
 *
 * Usage:
 *   plotkit --spec figure.json
 *   plotkit --csv metrics.csv[,more.csv] --kind spatial_profile --out fig.svg
 *           [--variant blocked] [--steps 1:8] [--sites 0,1,2] [--column total]
 *
 * The figure-spec JSON mirrors the flags:
 *   {"csv": ["metrics.csv"], "kind": "rate_plot", "out": "rate.svg",
 *    "variant": "bootstrap", "steps": [10, 10], "column": "total"}
 *
 * Nothing is written when the selection is empty or a column is missing; the
 * process exits 1 with a message naming the problem.
 */
import { writeFileSync } from "fs";
import { renderFigure } from "./figures.js";
import { FigureSpec, filterRows, loadRows, loadSpec, validateSpec } from "./figspec.js";

function parseArgs(argv: string[]): FigureSpec {
  const flags = new Map<string, string>();
  for (let i = 0; i < argv.length; i += 2) {
    if (!argv[i].startsWith("--") || i + 1 >= argv.length) {
      throw new Error(`malformed arguments near "${argv[i]}"`);
    }
    flags.set(argv[i].slice(2), argv[i + 1]);
  }
  if (flags.has("spec")) {
    return loadSpec(flags.get("spec")!);
  }
  const spec: Partial<FigureSpec> = {
    csv: flags.get("csv")?.split(","),
    kind: flags.get("kind") as FigureSpec["kind"],
    out: flags.get("out"),
  };
  if (flags.has("variant")) spec.variant = flags.get("variant");
  if (flags.has("column")) spec.column = flags.get("column") as FigureSpec["column"];
  if (flags.has("sites")) spec.sites = flags.get("sites")!.split(",");
  if (flags.has("steps")) {
    const [a, b] = flags.get("steps")!.split(":").map(Number);
    spec.steps = [a, b ?? a];
  }
  return validateSpec(spec, "arguments");
}

export function run(argv: string[]): number {
  let spec: FigureSpec;
  try {
    spec = parseArgs(argv);
    const rows = filterRows(loadRows(spec), spec);
    const svg = renderFigure(rows, spec);
    writeFileSync(spec.out, svg);
    console.log(`wrote ${spec.out}`);
    return 0;
  } catch (err) {
    console.error(`plotkit: ${err instanceof Error ? err.message : String(err)}`);
    return 1;
  }
}

const invokedDirectly = process.argv[1] && import.meta.url.endsWith(
  process.argv[1].split("/").pop() ?? "");
if (invokedDirectly) {
  process.exit(run(process.argv.slice(2)));
}
