#!/usr/bin/env node
// plot --summary FILE --metric M --x VAR --series VAR [--logx] [--logy] --out IMG
//
// Reads a dcsim summary CSV and writes one SVG chart: the metric against a
// swept variable, one line per series value, error bars where the summary
// carries confidence intervals (two or more replicates).

import { readFileSync, writeFileSync } from "node:fs";
import { resolve } from "node:path";
import { fileURLToPath } from "node:url";
import { extractSeries, renderChart } from "./chart.js";
import { parseSummaryCsv } from "./csv.js";

const USAGE =
  "usage: plot --summary FILE --metric M --x VAR --series VAR [--logx] [--logy] --out IMG";

interface Args {
  summary: string;
  metric: string;
  x: string;
  series: string;
  out: string;
  logx: boolean;
  logy: boolean;
}

export function parseArgs(argv: string[]): Args {
  const values: Record<string, string> = {};
  const flags = { logx: false, logy: false };
  for (let i = 0; i < argv.length; i += 1) {
    const arg = argv[i];
    if (arg === "--logx") flags.logx = true;
    else if (arg === "--logy") flags.logy = true;
    else if (["--summary", "--metric", "--x", "--series", "--out"].includes(arg)) {
      const value = argv[i + 1];
      if (value === undefined) throw new Error(`${arg} needs a value\n${USAGE}`);
      values[arg.slice(2)] = value;
      i += 1;
    } else {
      throw new Error(`unknown argument "${arg}"\n${USAGE}`);
    }
  }
  for (const required of ["summary", "metric", "x", "series", "out"]) {
    if (!(required in values)) throw new Error(`missing --${required}\n${USAGE}`);
  }
  return { ...values, ...flags } as unknown as Args;
}

export function main(argv: string[]): number {
  let args: Args;
  try {
    args = parseArgs(argv);
  } catch (error) {
    console.error(String(error instanceof Error ? error.message : error));
    return 2;
  }
  try {
    const rows = parseSummaryCsv(readFileSync(args.summary, "utf8"));
    const series = extractSeries(rows, args.metric, args.x, args.series);
    const barless = series.flatMap((s) => s.points).filter((p) => p.halfwidth === null);
    if (barless.length > 0) {
      console.warn(
        `warning: ${barless.length} point(s) come from single replicates; ` +
        "no error bars for them");
    }
    const svg = renderChart(series, {
      xLabel: args.x,
      yLabel: args.metric,
      logX: args.logx,
      logY: args.logy,
    });
    writeFileSync(args.out, svg);
    const pointCount = series.reduce((total, s) => total + s.points.length, 0);
    console.log(`wrote ${args.out}: ${series.length} series, ${pointCount} points`);
    return 0;
  } catch (error) {
    console.error(String(error instanceof Error ? error.message : error));
    return 1;
  }
}

if (process.argv[1] && fileURLToPath(import.meta.url) === resolve(process.argv[1])) {
  process.exit(main(process.argv.slice(2)));
}
