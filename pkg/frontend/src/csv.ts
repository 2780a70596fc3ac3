import { readFileSync } from "fs";
import Papa from "papaparse";

export interface SweepRow {
  [key: string]: string;
}

/** Parse one summary CSV, enforcing the presence of required columns. */
export function readCsv(path: string, required: string[]): SweepRow[] {
  const text = readFileSync(path, "utf8");
  const parsed = Papa.parse<SweepRow>(text.trim(), {
    header: true,
    skipEmptyLines: true,
  });
  if (parsed.errors.length > 0) {
    const e = parsed.errors[0];
    throw new Error(`cannot parse ${path}: ${e.message} (row ${e.row})`);
  }
  const rows = parsed.data;
  if (rows.length === 0) {
    throw new Error(`empty CSV: ${path}`);
  }
  const header = parsed.meta.fields ?? [];
  for (const col of required) {
    if (!header.includes(col)) {
      throw new Error(`column "${col}" missing in ${path}`);
    }
  }
  return rows;
}

export interface SeriesPoint {
  x: number;
  y: number;
}

export interface Series {
  key: string;
  points: SeriesPoint[];
}

/** Split rows into per-series curves sorted by the x column. */
export function toSeries(
  rows: SweepRow[],
  seriesCol: string,
  xCol: string,
  yCol: string,
): Series[] {
  const groups = new Map<string, SeriesPoint[]>();
  for (const row of rows) {
    const key = row[seriesCol];
    const x = Number(row[xCol]);
    const y = Number(row[yCol]);
    if (!Number.isFinite(x) || !Number.isFinite(y)) {
      throw new Error(
        `non-numeric value in columns ${xCol}/${yCol}: "${row[xCol]}", "${row[yCol]}"`,
      );
    }
    if (!groups.has(key)) {
      groups.set(key, []);
    }
    groups.get(key)!.push({ x, y });
  }
  const keys = [...groups.keys()].sort();
  return keys.map((key) => ({
    key,
    points: groups.get(key)!.slice().sort((a, b) => a.x - b.x),
  }));
}
