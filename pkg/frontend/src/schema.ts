/**
 * CSV schemas emitted by the cmfc harness.
 *
 * This package consumes only these documented column sets; it never
 * imports solver internals.  Parsing fails with an error naming the first
 * missing column.
 */
import { readFileSync } from "node:fs";
import Papa from "papaparse";
import { z } from "zod";

export const RESULT_COLUMNS = [
  "seed", "n", "v_n_r", "v_n_c", "v_inf_r", "v_inf_c",
  "error_pct", "zeta", "runtime_s", "abs_error_flag",
] as const;

export const TRACE_COLUMNS = [
  "iter", "lambda", "w_l1", "v_c_hat", "wall_clock_s",
] as const;

const resultRowSchema = z.object({
  seed: z.number().int(),
  n: z.number().int().positive(),
  v_n_r: z.number(),
  v_n_c: z.number(),
  v_inf_r: z.number(),
  v_inf_c: z.number(),
  error_pct: z.number(),
  zeta: z.number(),
  runtime_s: z.number(),
  abs_error_flag: z.number(),
});

const traceRowSchema = z.object({
  iter: z.number().int().nonnegative(),
  lambda: z.number(),
  w_l1: z.number(),
  v_c_hat: z.number(),
  wall_clock_s: z.number(),
});

export type ResultRow = z.infer<typeof resultRowSchema>;
export type TraceRow = z.infer<typeof traceRowSchema>;

function parseCsv(
  path: string,
  required: readonly string[],
): Record<string, number>[] {
  const text = readFileSync(path, "utf-8");
  const parsed = Papa.parse<Record<string, number>>(text.trim(), {
    header: true,
    dynamicTyping: true,
    skipEmptyLines: true,
  });
  if (parsed.errors.length > 0) {
    const e = parsed.errors[0];
    throw new Error(`failed to parse ${path}: ${e.message} (row ${e.row})`);
  }
  const fields = parsed.meta.fields ?? [];
  for (const column of required) {
    if (!fields.includes(column)) {
      throw new Error(`${path} is missing required column "${column}"`);
    }
  }
  return parsed.data;
}

export function readResults(path: string): ResultRow[] {
  return parseCsv(path, RESULT_COLUMNS).map((row) => resultRowSchema.parse(row));
}

export function readTrace(path: string): TraceRow[] {
  return parseCsv(path, TRACE_COLUMNS).map((row) => traceRowSchema.parse(row));
}
