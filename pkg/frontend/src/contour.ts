// Filled contour rendering for 2D snapshot frames.

import { writeFileSync } from "node:fs";
import { contours } from "d3-contour";
import { interpolateViridis } from "d3-scale-chromatic";
import type { SnapshotFrame } from "./csv.js";
import { LABELS, deriveQuantity, type Quantity } from "./derive.js";
import { DEFAULT_BOX, axes, document, linear, num, tag, text } from "./svg.js";

export interface ContourResult {
  path: string;
  min: number;
  max: number;
  bands: number;
}

const BANDS = 20;
const BAR_WIDTH = 14;
const BAR_GAP = 52;

function colorbar(lo: number, hi: number, x0: number, top: number, height: number): string {
  const parts: string[] = [];
  const steps = 64;
  for (let i = 0; i < steps; i++) {
    const frac = (i + 0.5) / steps;
    parts.push(tag("rect", {
      x: x0,
      y: top + height * (1 - (i + 1) / steps),
      width: BAR_WIDTH,
      height: height / steps + 0.5,
      fill: interpolateViridis(frac),
    }));
  }
  parts.push(tag("rect", {
    x: x0, y: top, width: BAR_WIDTH, height, fill: "none", stroke: "#333",
  }));
  const scale = linear([lo, hi], [top + height, top]);
  const fmt = scale.tickFormat(5);
  for (const t of scale.ticks(5)) {
    const py = scale(t);
    parts.push(tag("line", { x1: x0 + BAR_WIDTH, y1: py, x2: x0 + BAR_WIDTH + 4, y2: py, stroke: "#333" }));
    parts.push(text(x0 + BAR_WIDTH + 7, py + 4, fmt(t)));
  }
  return tag("g", { class: "colorbar" }, parts.join("\n"));
}

/**
 * Render a filled contour image with a colorbar.  The grid values are
 * contoured with marching squares at equally spaced thresholds; a
 * constant field degenerates to a single filled band rather than an
 * error.  Returns the value range and band count actually drawn.
 */
export function plotContour(frame: SnapshotFrame, quantity: Quantity, outPath: string): ContourResult {
  if (frame.nx < 2 || frame.ny < 2) {
    throw new Error("contour plots need a 2D frame with at least 2 cells per axis");
  }
  const values = deriveQuantity(frame, quantity);
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of values) {
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }

  const box = { ...DEFAULT_BOX, right: DEFAULT_BOX.right + BAR_GAP };
  // physical extents from cell centers plus half a cell on each side
  const dx = frame.nx > 1 ? frame.xs[1] - frame.xs[0] : 1;
  const dy = frame.ny > 1 ? frame.ys[1] - frame.ys[0] : 1;
  const xmin = frame.xs[0] - dx / 2;
  const xmax = frame.xs[frame.nx - 1] + dx / 2;
  const ymin = frame.ys[0] - dy / 2;
  const ymax = frame.ys[frame.ny - 1] + dy / 2;
  const sx = linear([xmin, xmax], [box.left, box.width - box.right]);
  const sy = linear([ymin, ymax], [box.height - box.bottom, box.top]);

  // grid index -> svg coordinates; the generator places value (i, j)
  // inside the unit square [i, i+1] x [j, j+1]
  const gx = (g: number) => sx(xmin + (g / frame.nx) * (xmax - xmin));
  const gy = (g: number) => sy(ymin + (g / frame.ny) * (ymax - ymin));

  const body: string[] = [];
  const plotW = box.width - box.right - box.left;
  const plotH = box.height - box.bottom - box.top;
  body.push(tag("rect", {
    x: box.left, y: box.top, width: plotW, height: plotH,
    fill: interpolateViridis(0),
  }));

  let bands = 1;
  if (hi > lo) {
    const step = (hi - lo) / BANDS;
    const thresholds = Array.from({ length: BANDS }, (_, i) => lo + step * (i + 1 / 2));
    const gen = contours().size([frame.nx, frame.ny]).thresholds(thresholds);
    const polys = gen(Array.from(values));
    bands = polys.length;
    for (const band of polys) {
      const frac = (band.value - lo) / (hi - lo);
      const d: string[] = [];
      for (const poly of band.coordinates) {
        for (const ring of poly) {
          d.push(`M${ring.map(([a, b]) => `${num(gx(a))},${num(gy(b))}`).join("L")}Z`);
        }
      }
      if (d.length > 0) {
        body.push(tag("path", {
          d: d.join(""),
          fill: interpolateViridis(Math.min(1, frac)),
          "fill-rule": "evenodd",
          stroke: "none",
        }));
      }
    }
  }

  body.push(tag("rect", {
    x: box.left, y: box.top, width: plotW, height: plotH,
    fill: "none", stroke: "#333",
  }));
  body.push(axes(sx, sy, box, "x", "y"));
  body.push(colorbar(lo, hi, box.width - box.right + 10, box.top, plotH));
  body.push(text(box.left, box.top - 12, `${LABELS[quantity]}, t = ${num(frame.t)}`, {
    "font-size": 13,
  }));

  writeFileSync(outPath, document(box, body.join("\n")));
  return { path: outPath, min: lo, max: hi, bands };
}
