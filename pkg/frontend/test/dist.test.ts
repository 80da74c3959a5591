import { describe, expect, it } from "vitest";
import {
  heavyTailSlope,
  isHeavyTailed,
  moments,
  parseDist,
  rStarClosedForm,
} from "../src/dist.js";

describe("parseDist", () => {
  it("round-trips names and parameters", () => {
    expect(parseDist("exponential:rate=2")).toEqual({
      name: "exponential",
      params: { rate: 2 },
    });
    expect(parseDist("pareto:xm=1,alpha=1.5")).toEqual({
      name: "pareto",
      params: { xm: 1, alpha: 1.5 },
    });
  });

  it("rejects unknown names, missing and extra parameters", () => {
    expect(() => parseDist("weird:x=1")).toThrow(/unknown distribution/);
    expect(() => parseDist("exponential")).toThrow(/needs parameters/);
    expect(() => parseDist("constant:c=1,d=2")).toThrow(/needs parameters/);
    expect(() => parseDist("constant:c=abc")).toThrow(/bad parameter/);
  });
});

describe("moments", () => {
  it("matches closed forms", () => {
    expect(moments(parseDist("constant:c=3"))).toEqual({ mean: 3, std: 0 });
    expect(moments(parseDist("exponential:rate=1"))).toEqual({ mean: 1, std: 1 });
    const g = moments(parseDist("geometric:p=0.5"))!;
    expect(g.mean).toBe(2);
    expect(g.std).toBeCloseTo(Math.sqrt(2), 12);
    const b = moments(parseDist("bernoulli:p=0.5"))!;
    expect(b.mean).toBe(0.5);
    expect(b.std).toBe(0.5);
  });

  it("is null when the variance diverges", () => {
    expect(moments(parseDist("pareto:xm=1,alpha=1.5"))).toBeNull();
    expect(moments(parseDist("pareto:xm=1,alpha=3"))).not.toBeNull();
  });
});

describe("reference constants", () => {
  it("per-step limit is mu + sigma for the memoryless families", () => {
    expect(rStarClosedForm(parseDist("exponential:rate=1"))).toBe(2);
    expect(rStarClosedForm(parseDist("exponential:rate=2"))).toBe(1);
    expect(rStarClosedForm(parseDist("geometric:p=0.5"))).toBeCloseTo(2 + Math.sqrt(2), 12);
    expect(rStarClosedForm(parseDist("constant:c=1"))).toBeNull();
    expect(rStarClosedForm(parseDist("pareto:xm=1,alpha=1.5"))).toBeNull();
  });

  it("heavy-tail slope is 2/alpha - 1", () => {
    expect(isHeavyTailed(parseDist("pareto:xm=1,alpha=1.5"))).toBe(true);
    expect(isHeavyTailed(parseDist("exponential:rate=1"))).toBe(false);
    expect(heavyTailSlope(parseDist("pareto:xm=1,alpha=1.5"))).toBeCloseTo(1 / 3, 12);
    expect(heavyTailSlope(parseDist("pareto:xm=1,alpha=1.25"))).toBeCloseTo(0.6, 12);
    expect(heavyTailSlope(parseDist("exponential:rate=1"))).toBeNull();
  });
});
