/**
 * Per-population-size aggregation of sweep results.
 *
 * Bands are mean +/- one sample standard deviation across seeds (ddof = 1,
 * zero for a single seed), matching the reference figures.
 */
import type { ResultRow } from "./schema";

export interface BandPoint {
  n: number;
  mean: number;
  std: number;
}

export function mean(values: number[]): number {
  return values.reduce((acc, v) => acc + v, 0) / values.length;
}

export function sampleStd(values: number[]): number {
  if (values.length < 2) return 0;
  const m = mean(values);
  const ss = values.reduce((acc, v) => acc + (v - m) * (v - m), 0);
  return Math.sqrt(ss / (values.length - 1));
}

export function bandByN(rows: ResultRow[], field: keyof ResultRow): BandPoint[] {
  const groups = new Map<number, number[]>();
  for (const row of rows) {
    const bucket = groups.get(row.n);
    if (bucket) {
      bucket.push(row[field]);
    } else {
      groups.set(row.n, [row[field]]);
    }
  }
  return [...groups.entries()]
    .sort(([a], [b]) => a - b)
    .map(([n, values]) => ({ n, mean: mean(values), std: sampleStd(values) }));
}

/** Single value that must be constant over the whole sweep (v_inf_*, zeta). */
export function constantColumn(rows: ResultRow[], field: keyof ResultRow): number {
  const distinct = new Set(rows.map((r) => r[field]));
  if (distinct.size !== 1) {
    throw new Error(`column "${field}" is not constant across rows`);
  }
  return rows[0][field];
}
