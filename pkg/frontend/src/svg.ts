/**
 * Minimal standalone SVG chart renderer: linear/log axes, line series with
 * error bars, and reference overlays (horizontal lines and log-log slope
 * guides). Emits plain SVG strings, no DOM required; every semantically
 * meaningful element carries data-* attributes so figures are testable.
 */

import { scaleLinear, scaleLog, type ScaleContinuousNumeric } from "d3-scale";

export type ScaleKind = "linear" | "log";

export interface Point {
  x: number;
  y: number;
  err?: number;
}

export interface Series {
  name: string;
  points: Point[];
}

export type Overlay =
  | { kind: "hline"; y: number; label: string }
  | { kind: "guide"; slope: number; anchor: Point; label: string };

export interface FigureModel {
  family: string;
  title: string;
  xLabel: string;
  yLabel: string;
  xScale: ScaleKind;
  yScale: ScaleKind;
  series: Series[];
  overlays: Overlay[];
  annotations?: string[];
}

const WIDTH = 640;
const HEIGHT = 420;
const MARGIN = { top: 44, right: 24, bottom: 52, left: 64 };
const COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"];

function esc(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function fmt(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 1e5 || a < 1e-3) return v.toExponential(1).replace("e+", "e");
  return String(Number(v.toPrecision(6)));
}

function makeScale(
  kind: ScaleKind,
  domain: [number, number],
  range: [number, number],
): ScaleContinuousNumeric<number, number> {
  if (kind === "log") {
    if (domain[0] <= 0) {
      throw new Error(`log scale needs a positive domain, got [${domain.join(", ")}]`);
    }
    return scaleLog().domain(domain).range(range).nice();
  }
  return scaleLinear().domain(domain).range(range).nice();
}

function extent(values: number[]): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of values) {
    if (!Number.isFinite(v)) continue;
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  if (lo > hi) throw new Error("empty extent");
  if (lo === hi) {
    lo = lo === 0 ? -1 : lo * 0.9;
    hi = hi === 0 ? 1 : hi * 1.1;
  }
  return [lo, hi];
}

function tickValues(scale: ScaleContinuousNumeric<number, number>, kind: ScaleKind): number[] {
  const ticks = scale.ticks(kind === "log" ? 6 : 7);
  if (kind === "log" && ticks.length > 8) {
    // Keep decade ticks only when d3 falls back to dense minor ticks.
    const decades = ticks.filter((t) => {
      const l = Math.log10(t);
      return Math.abs(l - Math.round(l)) < 1e-9;
    });
    if (decades.length >= 2) return decades;
  }
  return ticks;
}

/** Render a figure model to a complete standalone SVG document string. */
export function renderSvg(fig: FigureModel): string {
  const plotW = WIDTH - MARGIN.left - MARGIN.right;
  const plotH = HEIGHT - MARGIN.top - MARGIN.bottom;

  const xs = fig.series.flatMap((s) => s.points.map((p) => p.x));
  const ys = fig.series.flatMap((s) =>
    s.points.flatMap((p) => (p.err ? [p.y - p.err, p.y, p.y + p.err] : [p.y])),
  );
  for (const o of fig.overlays) {
    if (o.kind === "hline") ys.push(o.y);
  }
  const yLo = fig.yScale === "log" ? ys.filter((v) => v > 0) : ys;
  const x = makeScale(fig.xScale, extent(xs), [MARGIN.left, MARGIN.left + plotW]);
  const y = makeScale(fig.yScale, extent(yLo), [MARGIN.top + plotH, MARGIN.top]);

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" ` +
      `viewBox="0 0 ${WIDTH} ${HEIGHT}" font-family="sans-serif" font-size="12" ` +
      `data-family="${esc(fig.family)}" data-xscale="${fig.xScale}" data-yscale="${fig.yScale}">`,
  );
  parts.push(`<rect width="${WIDTH}" height="${HEIGHT}" fill="white"/>`);
  parts.push(
    `<text x="${WIDTH / 2}" y="22" text-anchor="middle" font-size="15" font-weight="bold">` +
      `${esc(fig.title)}</text>`,
  );

  // grid + axes
  for (const t of tickValues(x, fig.xScale)) {
    const px = x(t);
    parts.push(
      `<line x1="${px}" y1="${MARGIN.top}" x2="${px}" y2="${MARGIN.top + plotH}" ` +
        `stroke="#e0e0e0"/>`,
      `<text x="${px}" y="${MARGIN.top + plotH + 18}" text-anchor="middle" ` +
        `class="x-tick" data-value="${t}">${esc(fmt(t))}</text>`,
    );
  }
  for (const t of tickValues(y, fig.yScale)) {
    const py = y(t);
    parts.push(
      `<line x1="${MARGIN.left}" y1="${py}" x2="${MARGIN.left + plotW}" y2="${py}" ` +
        `stroke="#e0e0e0"/>`,
      `<text x="${MARGIN.left - 8}" y="${py + 4}" text-anchor="end" ` +
        `class="y-tick" data-value="${t}">${esc(fmt(t))}</text>`,
    );
  }
  parts.push(
    `<rect x="${MARGIN.left}" y="${MARGIN.top}" width="${plotW}" height="${plotH}" ` +
      `fill="none" stroke="#333"/>`,
    `<text x="${MARGIN.left + plotW / 2}" y="${HEIGHT - 12}" text-anchor="middle">` +
      `${esc(fig.xLabel)}</text>`,
    `<text x="16" y="${MARGIN.top + plotH / 2}" text-anchor="middle" ` +
      `transform="rotate(-90 16 ${MARGIN.top + plotH / 2})">${esc(fig.yLabel)}</text>`,
  );

  // overlays behind the data
  const [xd0, xd1] = x.domain() as [number, number];
  for (const o of fig.overlays) {
    if (o.kind === "hline") {
      const py = y(o.y);
      parts.push(
        `<line x1="${MARGIN.left}" y1="${py}" x2="${MARGIN.left + plotW}" y2="${py}" ` +
          `stroke="#555" stroke-dasharray="6 4" class="overlay" data-kind="hline" ` +
          `data-y="${o.y}"/>`,
        `<text x="${MARGIN.left + plotW - 4}" y="${py - 6}" text-anchor="end" ` +
          `fill="#555" class="overlay-label">${esc(o.label)}</text>`,
      );
    } else {
      // straight line of the given slope in log-log space through the anchor
      const gx0 = Math.max(xd0, xs.length ? Math.min(...xs) : xd0);
      const gx1 = Math.min(xd1, xs.length ? Math.max(...xs) : xd1);
      const gy = (gx: number) => o.anchor.y * Math.pow(gx / o.anchor.x, o.slope);
      parts.push(
        `<line x1="${x(gx0)}" y1="${y(gy(gx0))}" x2="${x(gx1)}" y2="${y(gy(gx1))}" ` +
          `stroke="#555" stroke-dasharray="6 4" class="overlay" data-kind="guide" ` +
          `data-slope="${o.slope}"/>`,
        `<text x="${x(gx1) - 4}" y="${y(gy(gx1)) - 8}" text-anchor="end" fill="#555" ` +
          `class="overlay-label">${esc(o.label)}</text>`,
      );
    }
  }

  // series
  fig.series.forEach((s, si) => {
    const color = COLORS[si % COLORS.length]!;
    const pts = s.points
      .filter((p) => fig.yScale !== "log" || p.y > 0)
      .map((p) => ({ px: x(p.x), py: y(p.y), p }));
    const path = pts.map(({ px, py }) => `${px},${py}`).join(" ");
    parts.push(
      `<polyline points="${path}" fill="none" stroke="${color}" stroke-width="1.8" ` +
        `class="series" data-name="${esc(s.name)}" data-n="${pts.length}"/>`,
    );
    for (const { px, py, p } of pts) {
      if (p.err && p.err > 0 && (fig.yScale !== "log" || p.y - p.err > 0)) {
        parts.push(
          `<line x1="${px}" y1="${y(p.y - p.err)}" x2="${px}" y2="${y(p.y + p.err)}" ` +
            `stroke="${color}" class="errbar"/>`,
        );
      }
      parts.push(`<circle cx="${px}" cy="${py}" r="3" fill="${color}" class="pt"/>`);
    }
    if (fig.series.length > 1) {
      const ly = MARGIN.top + 14 + 16 * si;
      parts.push(
        `<rect x="${MARGIN.left + 10}" y="${ly - 9}" width="12" height="3" fill="${color}"/>`,
        `<text x="${MARGIN.left + 28}" y="${ly}" class="legend">${esc(s.name)}</text>`,
      );
    }
  });

  (fig.annotations ?? []).forEach((a, i) => {
    parts.push(
      `<text x="${MARGIN.left + plotW - 6}" y="${MARGIN.top + plotH - 10 - 16 * i}" ` +
        `text-anchor="end" fill="#333" class="annotation">${esc(a)}</text>`,
    );
  });

  parts.push("</svg>");
  return parts.join("\n");
}
