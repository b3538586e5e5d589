/**
 * Figure builders: parsed report -> Scene.
 *
 * Figures visualize report numbers verbatim.  In particular the slope
 * annotation on the log-log fit is read from the report JSON, never
 * refitted, so the figure cannot disagree with the report.
 */

import {
  EmptyReportError,
  Report,
  Row,
  SchemaError,
  levelCounts,
  statValues,
} from "./schema";
import { ACCENT, BAR, BLACK, GRID, Op, Scene, SERIES, WHITE } from "./scene";

export const FIGURE_KINDS = [
  "loglog_fit",
  "threshold_profile",
  "perkins_convergence",
  "doubling_hist",
  "levy_qq",
] as const;

export type FigureKind = (typeof FIGURE_KINDS)[number];

const WIDTH = 720;
const HEIGHT = 480;
const MARGIN = { left: 84, right: 28, top: 52, bottom: 60 };

interface Domain {
  xMin: number;
  xMax: number;
  yMin: number;
  yMax: number;
}

function niceStep(span: number, target: number): number {
  const raw = span / target;
  const mag = Math.pow(10, Math.floor(Math.log10(raw)));
  for (const m of [1, 2, 5, 10]) {
    if (m * mag >= raw) return m * mag;
  }
  return 10 * mag;
}

function ticks(min: number, max: number): number[] {
  if (!(max > min)) {
    max = min + 1;
  }
  const step = niceStep(max - min, 5);
  const out: number[] = [];
  for (let v = Math.ceil(min / step) * step; v <= max + step * 1e-9; v += step) {
    out.push(Math.abs(v) < step * 1e-9 ? 0 : v);
  }
  return out;
}

function fmt(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 1000 || a < 0.001) return v.toExponential(1).toUpperCase();
  const decimals = a >= 100 ? 0 : a >= 1 ? 1 : 3;
  return v.toFixed(decimals);
}

class Chart {
  readonly scene: Scene;
  private domain: Domain = { xMin: 0, xMax: 1, yMin: 0, yMax: 1 };

  constructor(title: string, xLabel: string, yLabel: string) {
    this.scene = { width: WIDTH, height: HEIGHT, background: WHITE, ops: [] };
    this.scene.ops.push({
      kind: "text",
      x: WIDTH / 2,
      y: 14,
      text: title.toUpperCase(),
      scale: 2,
      color: BLACK,
      anchor: "middle",
    });
    this.scene.ops.push({
      kind: "text",
      x: MARGIN.left + this.plotW() / 2,
      y: HEIGHT - 22,
      text: xLabel.toUpperCase(),
      scale: 1,
      color: BLACK,
      anchor: "middle",
    });
    this.scene.ops.push({
      kind: "text",
      x: 10,
      y: MARGIN.top - 22,
      text: yLabel.toUpperCase(),
      scale: 1,
      color: BLACK,
      anchor: "start",
    });
  }

  plotW(): number {
    return WIDTH - MARGIN.left - MARGIN.right;
  }

  plotH(): number {
    return HEIGHT - MARGIN.top - MARGIN.bottom;
  }

  setDomain(xMin: number, xMax: number, yMin: number, yMax: number, padY = 0.06): void {
    if (xMax === xMin) {
      xMin -= 0.5;
      xMax += 0.5;
    }
    if (yMax === yMin) {
      yMin -= 0.5;
      yMax += 0.5;
    }
    const pad = (yMax - yMin) * padY;
    this.domain = { xMin, xMax, yMin: yMin - pad, yMax: yMax + pad };
  }

  px(x: number): number {
    const { xMin, xMax } = this.domain;
    return MARGIN.left + ((x - xMin) / (xMax - xMin)) * this.plotW();
  }

  py(y: number): number {
    const { yMin, yMax } = this.domain;
    return MARGIN.top + (1 - (y - yMin) / (yMax - yMin)) * this.plotH();
  }

  axes(): void {
    const ops = this.scene.ops;
    const x0 = MARGIN.left;
    const y0 = MARGIN.top;
    const x1 = MARGIN.left + this.plotW();
    const y1 = MARGIN.top + this.plotH();
    for (const tx of ticks(this.domain.xMin, this.domain.xMax)) {
      if (tx < this.domain.xMin || tx > this.domain.xMax) continue;
      const gx = this.px(tx);
      ops.push({ kind: "line", x1: gx, y1: y0, x2: gx, y2: y1, color: GRID });
      ops.push({ kind: "line", x1: gx, y1: y1, x2: gx, y2: y1 + 4, color: BLACK });
      ops.push({
        kind: "text", x: gx, y: y1 + 8, text: fmt(tx), scale: 1, color: BLACK, anchor: "middle",
      });
    }
    for (const ty of ticks(this.domain.yMin, this.domain.yMax)) {
      if (ty < this.domain.yMin || ty > this.domain.yMax) continue;
      const gy = this.py(ty);
      ops.push({ kind: "line", x1: x0, y1: gy, x2: x1, y2: gy, color: GRID });
      ops.push({ kind: "line", x1: x0 - 4, y1: gy, x2: x0, y2: gy, color: BLACK });
      ops.push({
        kind: "text", x: x0 - 8, y: gy - 3, text: fmt(ty), scale: 1, color: BLACK, anchor: "end",
      });
    }
    // frame on top of gridlines
    ops.push({ kind: "line", x1: x0, y1: y0, x2: x1, y2: y0, color: BLACK });
    ops.push({ kind: "line", x1: x0, y1: y1, x2: x1, y2: y1, color: BLACK });
    ops.push({ kind: "line", x1: x0, y1: y0, x2: x0, y2: y1, color: BLACK });
    ops.push({ kind: "line", x1: x1, y1: y0, x2: x1, y2: y1, color: BLACK });
  }

  polyline(points: Array<[number, number]>, color = SERIES): void {
    for (let i = 1; i < points.length; i++) {
      this.scene.ops.push({
        kind: "line",
        x1: this.px(points[i - 1][0]),
        y1: this.py(points[i - 1][1]),
        x2: this.px(points[i][0]),
        y2: this.py(points[i][1]),
        color,
      });
    }
  }

  dots(points: Array<[number, number]>, r = 3, color = SERIES): void {
    for (const [x, y] of points) {
      this.scene.ops.push({ kind: "disc", x: this.px(x), y: this.py(y), r, color });
    }
  }

  hline(y: number, color = ACCENT): void {
    this.scene.ops.push({
      kind: "line",
      x1: this.px(this.domain.xMin),
      y1: this.py(y),
      x2: this.px(this.domain.xMax),
      y2: this.py(y),
      color,
    });
  }

  vline(x: number, color = ACCENT): void {
    this.scene.ops.push({
      kind: "line",
      x1: this.px(x),
      y1: this.py(this.domain.yMin),
      x2: this.px(x),
      y2: this.py(this.domain.yMax),
      color,
    });
  }

  annotate(text: string): void {
    this.scene.ops.push({
      kind: "text",
      x: WIDTH - MARGIN.right - 6,
      y: MARGIN.top + 8,
      text: text.toUpperCase(),
      scale: 2,
      color: ACCENT,
      anchor: "end",
    });
  }
}

function requireExtras(report: Report, field: string): any {
  if (!(field in report.extras) || report.extras[field] == null) {
    throw new SchemaError(`report JSON: extras field "${field}" is required for this figure`);
  }
  return report.extras[field];
}

function buildLogLogFit(rows: Row[], report: Report, title?: string): Scene {
  const counts = levelCounts(rows);
  const base: number = report.extras.base ?? 2;
  const estimate = requireExtras(report, "estimate");
  const slope: number = estimate.slope;
  const intercept: number = estimate.intercept;
  const points: Array<[number, number]> = counts
    .filter((c) => c.count > 0)
    .map((c) => [c.level, Math.log(c.count) / Math.log(base)]);
  const chart = new Chart(
    title ?? `scale counts, base ${base}`,
    "level",
    `log${base} count`,
  );
  const xs = points.map((p) => p[0]);
  const ys = points.map((p) => p[1]);
  chart.setDomain(Math.min(...xs), Math.max(...xs), Math.min(...ys), Math.max(...ys));
  chart.axes();
  const lo: number = estimate.level_lo;
  const hi: number = estimate.level_hi;
  chart.polyline(
    [
      [lo, slope * lo + intercept],
      [hi, slope * hi + intercept],
    ],
    ACCENT,
  );
  chart.dots(points);
  chart.annotate(`slope = ${slope.toFixed(6)}`);
  return chart.scene;
}

function buildThresholdProfile(rows: Row[], report: Report, title?: string): Scene {
  const profile = requireExtras(report, "threshold_profile");
  const betas: number[] = profile.betas;
  const sums: number[] = profile.sums;
  if (!Array.isArray(betas) || !Array.isArray(sums) || betas.length !== sums.length) {
    throw new SchemaError('report JSON: "threshold_profile" must hold equal-length betas and sums');
  }
  const points: Array<[number, number]> = [];
  for (let i = 0; i < betas.length; i++) {
    if (sums[i] > 0) points.push([betas[i], Math.log10(sums[i])]);
  }
  if (points.length === 0) {
    throw new EmptyReportError("threshold profile has no positive sums to plot");
  }
  const chart = new Chart(title ?? "threshold profile", "beta", "log10 sum");
  const ys = points.map((p) => p[1]);
  chart.setDomain(points[0][0], points[points.length - 1][0], Math.min(...ys, 0), Math.max(...ys, 0));
  chart.axes();
  chart.hline(0);
  chart.polyline(points);
  chart.dots(points, 2);
  if (typeof report.extras.beta === "number") {
    chart.annotate(`critical beta = ${report.extras.beta.toFixed(4)}`);
  }
  return chart.scene;
}

function buildPerkinsConvergence(rows: Row[], report: Report, title?: string): Scene {
  const deltas: number[] = requireExtras(report, "deltas");
  const points: Array<[number, number]> = [];
  const prefix = "perkins_ratio_delta_";
  for (const [stat, agg] of Object.entries(report.aggregates)) {
    if (!stat.startsWith(prefix)) continue;
    const delta = Number(stat.slice(prefix.length));
    if (!Number.isFinite(delta) || delta <= 0) {
      throw new SchemaError(`report JSON: cannot parse delta from aggregate "${stat}"`);
    }
    points.push([Math.log2(delta), agg.mean]);
  }
  if (points.length === 0) {
    throw new SchemaError(`report JSON: no "${prefix}*" aggregates found`);
  }
  if (points.length !== deltas.length) {
    throw new SchemaError(
      `report JSON: ${deltas.length} deltas in extras but ${points.length} ratio aggregates`,
    );
  }
  points.sort((a, b) => a[0] - b[0]);
  const chart = new Chart(title ?? "occupation ratio vs delta", "log2 delta", "mean ratio");
  const ys = points.map((p) => p[1]);
  chart.setDomain(
    points[0][0],
    points[points.length - 1][0],
    Math.min(...ys, 1),
    Math.max(...ys, 1),
  );
  chart.axes();
  chart.hline(1.0);
  chart.polyline(points);
  chart.dots(points);
  chart.annotate(`target 1.0`);
  return chart.scene;
}

function buildDoublingHist(rows: Row[], report: Report, title?: string): Scene {
  const values = statValues(rows, "dim_slope");
  if (values.length === 0) {
    throw new SchemaError('rows CSV: no unflagged "dim_slope" rows to histogram');
  }
  const lo = Math.min(...values);
  const hi = Math.max(...values);
  const nBins = 12;
  const width = (hi - lo || 1e-9) / nBins;
  const counts = new Array<number>(nBins).fill(0);
  for (const v of values) {
    let b = Math.floor((v - lo) / width);
    if (b >= nBins) b = nBins - 1;
    counts[b]++;
  }
  const chart = new Chart(title ?? "image dimension histogram", "image dimension", "replicas");
  const target: number | undefined = report.extras.target_dimension;
  const xMin = Math.min(lo, target ?? lo);
  const xMax = Math.max(hi, target ?? hi);
  chart.setDomain(xMin - width, xMax + width, 0, Math.max(...counts));
  chart.axes();
  for (let b = 0; b < nBins; b++) {
    const x0 = chart.px(lo + b * width);
    const x1 = chart.px(lo + (b + 1) * width);
    const yTop = chart.py(counts[b]);
    const yBase = chart.py(0);
    chart.scene.ops.push({
      kind: "rect",
      x: x0 + 1,
      y: yTop,
      w: Math.max(1, x1 - x0 - 2),
      h: yBase - yTop,
      color: BAR,
    });
  }
  if (typeof target === "number") {
    chart.vline(target);
    chart.annotate(`target = ${target.toFixed(4)}`);
  }
  return chart.scene;
}

function quantiles(sorted: number[], n: number): number[] {
  const out: number[] = [];
  for (let i = 0; i < n; i++) {
    const pos = (i / (n - 1)) * (sorted.length - 1);
    const lo = Math.floor(pos);
    const hi = Math.ceil(pos);
    const frac = pos - lo;
    out.push(sorted[lo] * (1 - frac) + sorted[hi] * frac);
  }
  return out;
}

function buildLevyQq(rows: Row[], report: Report, title?: string): Scene {
  const lt = statValues(rows, "local_time").sort((a, b) => a - b);
  const mx = statValues(rows, "running_max").sort((a, b) => a - b);
  if (lt.length === 0 || mx.length === 0) {
    throw new SchemaError('rows CSV: need both "local_time" and "running_max" rows for a QQ plot');
  }
  const n = Math.min(lt.length, mx.length, 400);
  if (n < 2) {
    throw new EmptyReportError("QQ plot needs at least two replicas");
  }
  const qx = quantiles(lt, n);
  const qy = quantiles(mx, n);
  const points: Array<[number, number]> = qx.map((x, i) => [x, qy[i]]);
  const chart = new Chart(title ?? "local time vs running max", "local time quantiles", "running max quantiles");
  const lo = Math.min(qx[0], qy[0]);
  const hi = Math.max(qx[n - 1], qy[n - 1]);
  chart.setDomain(lo, hi, lo, hi);
  chart.axes();
  chart.polyline(
    [
      [lo, lo],
      [hi, hi],
    ],
    ACCENT,
  );
  chart.dots(points, 2);
  if (typeof report.extras.ks_statistic === "number") {
    chart.annotate(`ks = ${report.extras.ks_statistic.toFixed(4)}`);
  }
  return chart.scene;
}

export function buildFigure(kind: FigureKind, rows: Row[], report: Report, title?: string): Scene {
  switch (kind) {
    case "loglog_fit":
      return buildLogLogFit(rows, report, title);
    case "threshold_profile":
      return buildThresholdProfile(rows, report, title);
    case "perkins_convergence":
      return buildPerkinsConvergence(rows, report, title);
    case "doubling_hist":
      return buildDoublingHist(rows, report, title);
    case "levy_qq":
      return buildLevyQq(rows, report, title);
    default: {
      const never: never = kind;
      throw new SchemaError(`unknown figure kind ${never}`);
    }
  }
}
