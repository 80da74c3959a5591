/**
 * Result-CSV schema shared with the simulation harness.
 *
 * Every results file is a flat CSV with a fixed ten-column header plus a JSON
 * sidecar at `<path>.json` echoing the effective experiment spec. This module
 * is the only place that knows the column layout.
 */

import { readFileSync, existsSync } from "node:fs";
import Papa from "papaparse";

export const CSV_COLUMNS = [
  "family",
  "dist",
  "lambda",
  "alpha",
  "sweep_name",
  "sweep_value",
  "trials",
  "mean",
  "stderr",
  "extra_json",
] as const;

export const FAMILIES = [
  "lattice-mean-reward",
  "lattice-sensing",
  "continuous-mean-reward",
  "continuous-sensing",
  "agility",
  "workload",
  "ugs",
] as const;

export type Family = (typeof FAMILIES)[number];

export interface ExperimentRecord {
  family: Family;
  dist: string;
  lambda: number | null;
  alpha: number | null;
  sweepName: string;
  sweepValue: number;
  trials: number;
  mean: number;
  stderr: number;
  extra: Record<string, unknown>;
}

export interface Sidecar {
  spec: {
    family: string;
    dist: string;
    sweep_name: string;
    sweep_values: number[];
    trials: number;
    lam: number | null;
    alpha: number | null;
    delta: number;
    seed: number;
    extra: [string, unknown][];
  } | null;
  config_hash: string;
  version: string;
  timestamp: string;
}

export interface Dataset {
  records: ExperimentRecord[];
  sidecar: Sidecar | null;
  source: string;
}

function asNumber(raw: string, column: string): number {
  const v = Number(raw);
  if (raw === "" || Number.isNaN(v)) {
    throw new Error(`non-numeric ${column} value ${JSON.stringify(raw)}`);
  }
  return v;
}

export function parseRecordsCsv(text: string, source = "<string>"): ExperimentRecord[] {
  const parsed = Papa.parse<Record<string, string>>(text.trim(), {
    header: true,
    skipEmptyLines: true,
  });
  if (parsed.errors.length > 0) {
    const e = parsed.errors[0]!;
    throw new Error(`${source}: CSV parse error at row ${e.row}: ${e.message}`);
  }
  const header = parsed.meta.fields ?? [];
  if (header.join(",") !== CSV_COLUMNS.join(",")) {
    throw new Error(
      `${source}: unexpected CSV schema [${header.join(",")}], ` +
        `expected [${CSV_COLUMNS.join(",")}]`,
    );
  }
  return parsed.data.map((row, i) => {
    const family = row.family as Family;
    if (!FAMILIES.includes(family)) {
      throw new Error(`${source}: row ${i + 1}: unknown family ${JSON.stringify(row.family)}`);
    }
    return {
      family,
      dist: row.dist ?? "",
      lambda: row.lambda ? asNumber(row.lambda, "lambda") : null,
      alpha: row.alpha ? asNumber(row.alpha, "alpha") : null,
      sweepName: row.sweep_name ?? "",
      sweepValue: asNumber(row.sweep_value ?? "", "sweep_value"),
      trials: asNumber(row.trials ?? "", "trials"),
      mean: asNumber(row.mean ?? "", "mean"),
      stderr: asNumber(row.stderr ?? "", "stderr"),
      extra: JSON.parse(row.extra_json || "{}") as Record<string, unknown>,
    };
  });
}

/** Load a results CSV and, when present, its `<path>.json` sidecar. */
export function loadDataset(csvPath: string): Dataset {
  const records = parseRecordsCsv(readFileSync(csvPath, "utf8"), csvPath);
  if (records.length === 0) {
    throw new Error(`${csvPath}: no records`);
  }
  const families = new Set(records.map((r) => r.family));
  if (families.size > 1) {
    throw new Error(`${csvPath}: mixed families [${[...families].join(", ")}]`);
  }
  const sidecarPath = `${csvPath}.json`;
  const sidecar = existsSync(sidecarPath)
    ? (JSON.parse(readFileSync(sidecarPath, "utf8")) as Sidecar)
    : null;
  return { records, sidecar, source: csvPath };
}

/**
 * The distribution spec governing a dataset. The sidecar is authoritative
 * (it echoes the exact experiment configuration); the per-record dist column
 * is the fallback for bare CSVs.
 */
export function datasetDist(ds: Dataset): string {
  return ds.sidecar?.spec?.dist ?? ds.records[0]!.dist;
}

export function datasetLambda(ds: Dataset): number | null {
  return ds.sidecar?.spec?.lam ?? ds.records[0]!.lambda;
}
