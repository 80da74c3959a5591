/**
 * Per-family figure construction: axis scales, series extraction, and
 * reference overlays. All reference constants (limit lines, slope guides)
 * are recomputed from the dataset's distribution spec and parameters; none
 * are baked into the figure code.
 */

import {
  heavyTailSlope,
  isHeavyTailed,
  parseDist,
  rStarClosedForm,
} from "./dist.js";
import {
  datasetDist,
  datasetLambda,
  type Dataset,
  type ExperimentRecord,
  type Family,
} from "./schema.js";
import type { FigureModel, Overlay, Point, Series } from "./svg.js";

function sweepSeries(records: ExperimentRecord[], name: string): Series {
  const points: Point[] = records
    .map((r) => ({ x: r.sweepValue, y: r.mean, err: r.stderr }))
    .sort((a, b) => a.x - b.x);
  return { name, points };
}

function lastPoint(s: Series): Point {
  const p = s.points[s.points.length - 1];
  if (!p) throw new Error("empty series");
  return p;
}

function buildLatticeMean(ds: Dataset): FigureModel {
  const d = parseDist(datasetDist(ds));
  const series = sweepSeries(ds.records, datasetDist(ds));
  const overlays: Overlay[] = [];
  let xScale: "linear" | "log" = "linear";
  let yScale: "linear" | "log" = "linear";
  if (isHeavyTailed(d)) {
    xScale = yScale = "log";
    const slope = heavyTailSlope(d)!;
    overlays.push({
      kind: "guide",
      slope,
      anchor: lastPoint(series),
      label: `slope ${slope.toFixed(3)}`,
    });
  } else {
    const limit = rStarClosedForm(d);
    if (limit !== null) {
      overlays.push({
        kind: "hline",
        y: limit,
        label: `μ + σ = ${limit}`,
      });
    }
  }
  return {
    family: "lattice-mean-reward",
    title: "Optimal per-step reward vs path length",
    xLabel: "path length n",
    yLabel: "mean reward per step",
    xScale,
    yScale,
    series: [series],
    overlays,
  };
}

function buildLatticeSensing(ds: Dataset): FigureModel {
  const d = parseDist(datasetDist(ds));
  const heavy = isHeavyTailed(d);
  return {
    family: "lattice-sensing",
    title: "Distance before falling below baseline vs sensing range",
    xLabel: heavy ? "sensing range m (log)" : "sensing range m",
    yLabel: "mean distance traveled",
    // light tails grow exponentially in m (semi-log straightens them);
    // heavy tails grow polynomially (log-log straightens them)
    xScale: heavy ? "log" : "linear",
    yScale: "log",
    series: [sweepSeries(ds.records, datasetDist(ds))],
    overlays: [],
  };
}

function buildContinuousMean(ds: Dataset): FigureModel {
  const lam = datasetLambda(ds);
  const overlays: Overlay[] = [];
  if (lam !== null) {
    const limit = Math.sqrt(2 * lam);
    overlays.push({
      kind: "hline",
      y: limit,
      label: `√(2λ) = ${limit.toFixed(4)}`,
    });
  }
  return {
    family: "continuous-mean-reward",
    title: "Targets visited per unit distance vs mission length",
    xLabel: "mission length L",
    yLabel: "reward per unit distance",
    xScale: "linear",
    yScale: "linear",
    series: [sweepSeries(ds.records, datasetDist(ds))],
    overlays,
  };
}

function buildContinuousSensing(ds: Dataset): FigureModel {
  return {
    family: "continuous-sensing",
    title: "Distance before falling below baseline vs sensing range",
    xLabel: "sensing range S",
    yLabel: "mean distance traveled",
    xScale: "linear",
    yScale: "log",
    series: [sweepSeries(ds.records, datasetDist(ds))],
    overlays: [],
  };
}

function buildAgility(ds: Dataset): FigureModel {
  const series = sweepSeries(ds.records, datasetDist(ds));
  const mid = series.points[Math.floor(series.points.length / 2)] ?? lastPoint(series);
  return {
    family: "agility",
    title: "Reward rate vs agility",
    xLabel: "agility α",
    yLabel: "reward per unit distance",
    xScale: "log",
    yScale: "log",
    series: [series],
    overlays: [{ kind: "guide", slope: 0.5, anchor: mid, label: "slope 1/2" }],
  };
}

function buildWorkload(ds: Dataset): FigureModel {
  const sweepName = ds.records[0]!.sweepName;
  const series = sweepSeries(ds.records, "relaxations per planner call");
  // per-call relaxations scale as (lambda alpha S^2)^2: S-exponent 4,
  // alpha-exponent 2
  const slope = sweepName === "S" ? 4 : 2;
  return {
    family: "workload",
    title: `Planner workload vs ${sweepName}`,
    xLabel: sweepName === "S" ? "sensing range S" : "agility α",
    yLabel: "mean relaxations per call",
    xScale: "log",
    yScale: "log",
    series: [series],
    overlays: [
      { kind: "guide", slope, anchor: lastPoint(series), label: `slope ${slope}` },
    ],
  };
}

function buildUgs(ds: Dataset): FigureModel {
  const series: Series[] = [];
  const annotations: string[] = [];
  for (const r of ds.records) {
    const strategy = String(r.extra.strategy ?? "unknown");
    const checkpoints = (r.extra.checkpoints ?? []) as number[];
    const variance = (r.extra.posterior_variance ?? []) as number[];
    if (checkpoints.length !== variance.length || checkpoints.length === 0) {
      throw new Error(`ugs record for ${strategy} lacks checkpoint/variance arrays`);
    }
    series.push({
      name: strategy,
      points: checkpoints.map((c, i) => ({ x: c, y: variance[i]! })),
    });
    annotations.push(`${strategy} gain ${r.mean.toFixed(3)} ± ${r.stderr.toFixed(3)}`);
  }
  series.sort((a, b) => a.name.localeCompare(b.name));
  return {
    family: "ugs",
    title: "Posterior variance along the mission",
    xLabel: "distance traveled",
    yLabel: "mean posterior variance",
    xScale: "linear",
    yScale: "log",
    series,
    overlays: [],
    annotations,
  };
}

const BUILDERS: Record<Family, (ds: Dataset) => FigureModel> = {
  "lattice-mean-reward": buildLatticeMean,
  "lattice-sensing": buildLatticeSensing,
  "continuous-mean-reward": buildContinuousMean,
  "continuous-sensing": buildContinuousSensing,
  agility: buildAgility,
  workload: buildWorkload,
  ugs: buildUgs,
};

/** Build the figure for a dataset, inferring the family unless forced. */
export function buildFigure(ds: Dataset, family: Family | "auto" = "auto"): FigureModel {
  const detected = ds.records[0]!.family;
  const chosen = family === "auto" ? detected : family;
  if (chosen !== detected) {
    throw new Error(
      `requested family ${chosen} but the CSV contains ${detected} records`,
    );
  }
  return BUILDERS[chosen](ds);
}
