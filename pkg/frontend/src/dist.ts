/**
 * Reward-distribution spec strings (`name:key=value,...`) and the closed-form
 * constants derived from them. Reference overlays are always recomputed here
 * from the spec string carried by the data file — never hard-coded into a
 * figure.
 */

export interface DistSpec {
  name: "constant" | "bernoulli" | "geometric" | "exponential" | "pareto";
  params: Record<string, number>;
}

const REQUIRED: Record<DistSpec["name"], string[]> = {
  constant: ["c"],
  bernoulli: ["p"],
  geometric: ["p"],
  exponential: ["rate"],
  pareto: ["xm", "alpha"],
};

export function parseDist(spec: string): DistSpec {
  const [name, rest] = spec.split(":", 2) as [string, string | undefined];
  if (!(name in REQUIRED)) {
    throw new Error(`unknown distribution ${JSON.stringify(name)}`);
  }
  const params: Record<string, number> = {};
  for (const pair of (rest ?? "").split(",").filter((s) => s.length > 0)) {
    const [key, value] = pair.split("=", 2);
    const v = Number(value);
    if (!key || value === undefined || Number.isNaN(v)) {
      throw new Error(`bad parameter ${JSON.stringify(pair)} in ${JSON.stringify(spec)}`);
    }
    params[key] = v;
  }
  const want = REQUIRED[name as DistSpec["name"]];
  const got = Object.keys(params).sort();
  if (got.join(",") !== [...want].sort().join(",")) {
    throw new Error(
      `${name} needs parameters {${want.join(",")}}, got {${got.join(",")}}`,
    );
  }
  return { name: name as DistSpec["name"], params };
}

export interface Moments {
  mean: number;
  std: number;
}

/** Mean and standard deviation; null when the second moment diverges. */
export function moments(d: DistSpec): Moments | null {
  switch (d.name) {
    case "constant":
      return { mean: d.params.c!, std: 0 };
    case "bernoulli": {
      const p = d.params.p!;
      return { mean: p, std: Math.sqrt(p * (1 - p)) };
    }
    case "geometric": {
      const p = d.params.p!;
      return { mean: 1 / p, std: Math.sqrt(1 - p) / p };
    }
    case "exponential": {
      const rate = d.params.rate!;
      return { mean: 1 / rate, std: 1 / rate };
    }
    case "pareto": {
      const a = d.params.alpha!;
      const xm = d.params.xm!;
      if (a <= 2) return null;
      const mean = (a * xm) / (a - 1);
      const variance = (xm * xm * a) / ((a - 1) ** 2 * (a - 2));
      return { mean, std: Math.sqrt(variance) };
    }
  }
}

/** True when the tail is too heavy for a finite-variance limit constant. */
export function isHeavyTailed(d: DistSpec): boolean {
  return d.name === "pareto" && d.params.alpha! < 2;
}

/**
 * Limit of the per-step optimal reward on the lattice: mu + sigma for the
 * memoryless families where the closed form is exact, null otherwise.
 */
export function rStarClosedForm(d: DistSpec): number | null {
  if (d.name !== "exponential" && d.name !== "geometric") return null;
  const m = moments(d)!;
  return m.mean + m.std;
}

/**
 * Log-log growth exponent of the per-step reward for heavy tails:
 * 2/alpha - 1 (equals 1/3 at alpha = 1.5).
 */
export function heavyTailSlope(d: DistSpec): number | null {
  if (!isHeavyTailed(d)) return null;
  return 2 / d.params.alpha! - 1;
}
