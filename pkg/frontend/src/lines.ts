// Line-style plots: 1D profiles, divergence histories, refinement studies.

import { writeFileSync } from "node:fs";
import type { ConvergenceTable, DiagnosticsTable, SnapshotFrame } from "./csv.js";
import { LABELS, deriveQuantity, type Quantity } from "./derive.js";
import { DEFAULT_BOX, type Scale, axes, document, linear, logarithmic, num, tag, text } from "./svg.js";

const SERIES_COLORS = [
  "#1f77b4", "#d62728", "#2ca02c", "#9467bd",
  "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f",
];

function polyline(xs: ArrayLike<number>, ys: ArrayLike<number>, sx: Scale, sy: Scale, color: string): string {
  const pts: string[] = [];
  for (let i = 0; i < xs.length; i++) {
    pts.push(`${num(sx(xs[i]))},${num(sy(ys[i]))}`);
  }
  return tag("polyline", { points: pts.join(" "), fill: "none", stroke: color, "stroke-width": 1.5 });
}

function range(arrays: ArrayLike<number>[]): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const arr of arrays) {
    for (let i = 0; i < arr.length; i++) {
      const v = arr[i];
      if (v < lo) lo = v;
      if (v > hi) hi = v;
    }
  }
  if (!(hi > lo)) {
    // flat data still deserves a drawable window
    lo -= 0.5;
    hi += 0.5;
  }
  return [lo, hi];
}

function legend(entries: Array<[string, string]>, x: number, y: number): string {
  const parts: string[] = [];
  entries.forEach(([label, color], i) => {
    const py = y + 16 * i;
    parts.push(tag("line", { x1: x, y1: py - 4, x2: x + 18, y2: py - 4, stroke: color, "stroke-width": 2 }));
    parts.push(text(x + 23, py, label));
  });
  return tag("g", { class: "legend" }, parts.join("\n"));
}

/** 1D profile plot along x for one or more quantities. */
export function plotLine(frame: SnapshotFrame, quantities: Quantity[], outPath: string): string {
  if (frame.ny !== 1) {
    throw new Error(`profile plots need a 1D frame, got ${frame.nx} x ${frame.ny}`);
  }
  if (quantities.length === 0) {
    throw new Error("need at least one quantity");
  }
  const series = quantities.map((q) => deriveQuantity(frame, q));
  const box = DEFAULT_BOX;
  const sx = linear([frame.xs[0], frame.xs[frame.nx - 1]], [box.left, box.width - box.right]);
  const [lo, hi] = range(series);
  const pad = 0.05 * (hi - lo);
  const sy = linear([lo - pad, hi + pad], [box.height - box.bottom, box.top]);
  const body: string[] = [];
  series.forEach((vals, i) => {
    body.push(polyline(frame.xs, vals, sx, sy, SERIES_COLORS[i % SERIES_COLORS.length]));
  });
  body.push(axes(sx, sy, box, "x", quantities.length === 1 ? LABELS[quantities[0]] : "value"));
  body.push(legend(
    quantities.map((q, i) => [LABELS[q], SERIES_COLORS[i % SERIES_COLORS.length]]),
    box.width - box.right - 150, box.top + 14,
  ));
  body.push(text(box.left, box.top - 12, `t = ${num(frame.t)}`, { "font-size": 13 }));
  writeFileSync(outPath, document(box, body.join("\n")));
  return outPath;
}

/** Divergence-measure history on a log axis. */
export function plotDivergence(diag: DiagnosticsTable, outPath: string): string {
  const t: number[] = [];
  const eps: number[] = [];
  for (let i = 0; i < diag.t.length; i++) {
    if (diag.eps_div[i] > 0) {
      t.push(diag.t[i]);
      eps.push(diag.eps_div[i]);
    }
  }
  if (eps.length < 2) {
    throw new Error("diagnostics hold fewer than two positive divergence samples");
  }
  const box = DEFAULT_BOX;
  const sx = linear([t[0], t[t.length - 1]], [box.left, box.width - box.right]);
  const [lo, hi] = range([eps]);
  const sy = logarithmic([lo, hi], [box.height - box.bottom, box.top]);
  const body = [
    polyline(t, eps, sx, sy, SERIES_COLORS[0]),
    axes(sx, sy, box, "t", "divergence measure"),
  ];
  writeFileSync(outPath, document(box, body.join("\n")));
  return outPath;
}

export interface ConvergenceResult {
  path: string;
  /** least-squares slope of log(error) vs log(h) per plotted component */
  slopes: Record<string, number>;
}

function fitSlope(h: Float64Array, err: Float64Array): number {
  const n = h.length;
  let sx = 0;
  let sy = 0;
  let sxx = 0;
  let sxy = 0;
  for (let i = 0; i < n; i++) {
    const lx = Math.log(h[i]);
    const ly = Math.log(err[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

/**
 * Log-log error-vs-h plot with a slope-3 reference line.  Components
 * whose errors sit at rounding level (or exactly zero) are dropped:
 * their slopes are noise, not rates.  Slopes are re-measured here by
 * least squares and reported back to the caller.
 */
export function plotConvergence(table: ConvergenceTable, outPath: string): ConvergenceResult {
  if (table.levels.length < 2) {
    throw new Error("refinement table needs at least two levels");
  }
  const plotted: Array<[string, Float64Array]> = [];
  for (const [name, errs] of table.errors) {
    let ok = true;
    let peak = 0;
    for (const e of errs) {
      if (!(e > 0)) ok = false;
      if (e > peak) peak = e;
    }
    if (ok && peak > 1e-14) plotted.push([name, errs]);
  }
  if (plotted.length === 0) {
    throw new Error("no component carries a measurable error column");
  }

  const box = DEFAULT_BOX;
  const hs = table.h;
  const sx = logarithmic([hs[hs.length - 1], hs[0]], [box.left, box.width - box.right]);
  const [lo, hi] = range(plotted.map(([, e]) => e));
  const sy = logarithmic([lo, hi], [box.height - box.bottom, box.top]);

  const body: string[] = [];
  const slopes: Record<string, number> = {};
  const entries: Array<[string, string]> = [];
  plotted.forEach(([name, errs], i) => {
    const color = SERIES_COLORS[i % SERIES_COLORS.length];
    body.push(polyline(hs, errs, sx, sy, color));
    for (let j = 0; j < hs.length; j++) {
      body.push(tag("circle", { cx: sx(hs[j]), cy: sy(errs[j]), r: 3, fill: color }));
    }
    slopes[name] = fitSlope(hs, errs);
    entries.push([`${name} (${slopes[name].toFixed(2)})`, color]);
  });

  // slope-3 reference anchored below the first series' coarsest point
  const anchor = plotted[0][1][0] * 0.5;
  const refEnd = anchor * Math.pow(hs[hs.length - 1] / hs[0], 3);
  body.push(tag("line", {
    x1: sx(hs[0]), y1: sy(anchor), x2: sx(hs[hs.length - 1]), y2: sy(refEnd),
    stroke: "#555", "stroke-dasharray": "6 4",
  }));
  body.push(text(sx(hs[0]) - 40, sy(anchor) + 14, "slope 3"));

  body.push(axes(sx, sy, box, "h", "l1 error"));
  body.push(legend(entries, box.left + 14, box.top + 14));
  writeFileSync(outPath, document(box, body.join("\n")));
  return { path: outPath, slopes };
}
