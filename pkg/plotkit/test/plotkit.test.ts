import { existsSync, mkdtempSync, readFileSync, writeFileSync } from "fs";
import { tmpdir } from "os";
import { join } from "path";
import { describe, expect, it } from "vitest";

import { parseMetricsCsv, loadMetricsCsv, isAggregate, isReplicate } from "../src/csv.js";
import { filterRows, loadRows, validateSpec, FigureSpec } from "../src/figspec.js";
import { renderFigure } from "../src/figures.js";
import { run } from "../src/cli.js";

const FIXTURES = join(__dirname, "..", "fixtures");
const RUN2 = join(FIXTURES, "run2.csv");
const RUN4 = join(FIXTURES, "run4.csv");
const RUN5 = join(FIXTURES, "run5.csv");

const tmp = () => mkdtempSync(join(tmpdir(), "plotkit-"));

describe("csv parsing", () => {
  it("skips the schema comment and types numeric cells", () => {
    const rows = loadMetricsCsv(RUN2);
    expect(rows.length).toBeGreaterThan(100);
    expect(rows[0].N).toBeTypeOf("number");
    expect(rows[0].bias_bound).toBeNull();
  });

  it("names the missing column and lists what is available", () => {
    expect(() => parseMetricsCsv("step,variant\n1,x\n", "x.csv"))
      .toThrowError(/column "site_set" not found.*available: step, variant/);
  });

  it("classifies replicate and aggregate rows", () => {
    const rows = loadMetricsCsv(RUN2);
    expect(rows.some(isReplicate)).toBe(true);
    expect(rows.some(isAggregate)).toBe(true);
  });
});

describe("figure spec", () => {
  it("rejects unknown kinds and missing fields", () => {
    expect(() => validateSpec({ csv: ["a.csv"], kind: "pie" as never, out: "x.svg" }))
      .toThrowError(/kind must be one of/);
    expect(() => validateSpec({ kind: "rate_plot", out: "x.svg" }))
      .toThrowError(/input CSV/);
  });

  it("empty selections are an error, not an empty figure", () => {
    const spec: FigureSpec = { csv: [RUN2], kind: "rate_plot", out: "x.svg",
                               variant: "no-such-variant" };
    expect(() => filterRows(loadRows(spec), spec)).toThrowError(/matched no rows/);
  });
});

describe("figures from the acceptance-run CSVs", () => {
  const cases: Array<[string, FigureSpec]> = [
    ["spatial_profile from run 5",
     { csv: [RUN5], kind: "spatial_profile", out: "", variant: "blocked" }],
    ["rate_plot from run 2",
     { csv: [RUN2], kind: "rate_plot", out: "", variant: "bootstrap" }],
    ["bias_vs_b from run 4",
     { csv: [RUN4], kind: "bias_vs_b", out: "" }],
    ["bound_overlay from run 4",
     { csv: [RUN4], kind: "bound_overlay", out: "", variant: "enlarged" }],
    ["bound_overlay from run 5 (total)",
     { csv: [RUN5], kind: "bound_overlay", out: "", column: "total" }],
  ];

  for (const [name, spec] of cases) {
    it(`renders ${name}`, () => {
      const rows = filterRows(loadRows(spec), spec);
      const svg = renderFigure(rows, spec);
      expect(svg).toContain("<svg");
      expect(svg).toContain("</svg>");
      expect(svg).toContain("<polyline");
    });
  }

  it("re-rendering identical inputs is byte-identical", () => {
    for (const [, spec] of cases) {
      const rows = filterRows(loadRows(spec), spec);
      expect(renderFigure(rows, spec)).toEqual(renderFigure(rows, spec));
    }
  });

  it("notes absent bound columns instead of failing", () => {
    const spec: FigureSpec = { csv: [RUN4], kind: "bound_overlay", out: "" };
    const svg = renderFigure(filterRows(loadRows(spec), spec), spec);
    expect(svg).toContain("no bias_bound values");
  });

  it("spatial profile carries replicate scatter and a mean line", () => {
    const spec: FigureSpec = { csv: [RUN5], kind: "spatial_profile", out: "" };
    const svg = renderFigure(filterRows(loadRows(spec), spec), spec);
    expect((svg.match(/<circle/g) ?? []).length).toBeGreaterThan(100);
  });

  it("rate plot draws the -1/2 reference guide", () => {
    const spec: FigureSpec = { csv: [RUN2], kind: "rate_plot", out: "" };
    const svg = renderFigure(filterRows(loadRows(spec), spec), spec);
    expect(svg).toContain("slope -1/2");
  });
});

describe("cli", () => {
  it("renders all four figure kinds end to end (acceptance)", () => {
    const dir = tmp();
    const jobs: Array<[string, string[]]> = [
      ["spatial.svg", ["--csv", RUN5, "--kind", "spatial_profile", "--variant", "blocked"]],
      ["rate.svg", ["--csv", RUN2, "--kind", "rate_plot"]],
      ["bias_b.svg", ["--csv", RUN4, "--kind", "bias_vs_b"]],
      ["overlay.svg", ["--csv", RUN4, "--kind", "bound_overlay"]],
    ];
    for (const [name, args] of jobs) {
      const out = join(dir, name);
      expect(run([...args, "--out", out])).toBe(0);
      expect(existsSync(out)).toBe(true);
    }
    // determinism: a second render into a fresh file is byte-identical
    for (const [name, args] of jobs) {
      const again = join(dir, "again-" + name);
      expect(run([...args, "--out", again])).toBe(0);
      expect(readFileSync(again, "utf-8"))
        .toEqual(readFileSync(join(dir, name), "utf-8"));
    }
  });

  it("accepts a figure-spec file", () => {
    const dir = tmp();
    const specPath = join(dir, "fig.json");
    const out = join(dir, "fig.svg");
    writeFileSync(specPath, JSON.stringify(
      { csv: [RUN2], kind: "rate_plot", out, variant: "bootstrap" }));
    expect(run(["--spec", specPath])).toBe(0);
    expect(existsSync(out)).toBe(true);
  });

  it("fails without writing on empty selection", () => {
    const dir = tmp();
    const out = join(dir, "nothing.svg");
    expect(run(["--csv", RUN2, "--kind", "rate_plot", "--out", out,
                "--variant", "bogus"])).toBe(1);
    expect(existsSync(out)).toBe(false);
  });

  it("fails on schema mismatch with an actionable message", () => {
    const dir = tmp();
    const bad = join(dir, "bad.csv");
    writeFileSync(bad, "foo,bar\n1,2\n");
    expect(run(["--csv", bad, "--kind", "rate_plot", "--out", join(dir, "x.svg")])).toBe(1);
  });
});
