// Reader for the simulator's summary CSV contract:
//   grid_point,metric,replicates,mean,ci_halfwidth
// Grid points are "__"-joined key=value pairs from the sweep file names.

export const SUMMARY_HEADER = "grid_point,metric,replicates,mean,ci_halfwidth";

export interface SummaryRow {
  gridPoint: string;
  metric: string;
  replicates: number;
  mean: number;
  ciHalfwidth: number | null;
}

export function parseSummaryCsv(text: string): SummaryRow[] {
  const lines = text.split("\n").filter((line) => line.length > 0);
  if (lines[0] !== SUMMARY_HEADER) {
    throw new Error(`not a summary CSV: expected header "${SUMMARY_HEADER}"`);
  }
  return lines.slice(1).map((line, index) => {
    const cells = line.split(",");
    if (cells.length !== 5) {
      throw new Error(`summary row ${index + 2}: expected 5 fields, got ${cells.length}`);
    }
    const [gridPoint, metric, replicates, mean, half] = cells;
    return {
      gridPoint,
      metric,
      replicates: Number(replicates),
      mean: Number(mean),
      ciHalfwidth: half === "" ? null : Number(half),
    };
  });
}

export function parseGridPoint(gridPoint: string): Record<string, string> {
  const entries: Record<string, string> = {};
  if (gridPoint === "base") return entries;
  for (const part of gridPoint.split("__")) {
    const eq = part.indexOf("=");
    if (eq < 0) {
      throw new Error(`malformed grid point segment "${part}" in "${gridPoint}"`);
    }
    entries[part.slice(0, eq)] = part.slice(eq + 1);
  }
  return entries;
}

export function availableMetrics(rows: SummaryRow[]): string[] {
  return [...new Set(rows.map((row) => row.metric))];
}

export function availableKeys(rows: SummaryRow[]): string[] {
  const keys = new Set<string>();
  for (const row of rows) {
    for (const key of Object.keys(parseGridPoint(row.gridPoint))) keys.add(key);
  }
  return [...keys];
}
