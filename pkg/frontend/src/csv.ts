// Readers for the solver's CSV artifacts.  Everything is header-driven
// and numeric; the solver side promises stable column names.

import { readFileSync } from "node:fs";
import Papa from "papaparse";

export interface SnapshotFrame {
  t: number;
  /** sorted cell-center coordinates along each axis */
  xs: Float64Array;
  ys: Float64Array;
  nx: number;
  ny: number;
  /** row-major [iy * nx + ix] grids per column name */
  fields: Map<string, Float64Array>;
}

export interface DiagnosticsTable {
  t: Float64Array;
  dt: Float64Array;
  eps_div: Float64Array;
  min_rho: Float64Array;
  min_p: Float64Array;
  limited_cells: Float64Array;
}

export interface ConvergenceTable {
  /** cell counts per level, e.g. [[10,10],[20,20]] */
  levels: Array<[number, number]>;
  /** nominal mesh width per level, 1/nx (scale factors drop out of slopes) */
  h: Float64Array;
  /** per-component error columns, level-ordered */
  errors: Map<string, Float64Array>;
  eps: Float64Array;
}

function parseNumeric(text: string, what: string): { header: string[]; rows: number[][] } {
  const out = Papa.parse<string[]>(text.trim(), { skipEmptyLines: true });
  if (out.errors.length > 0) {
    throw new Error(`${what}: ${out.errors[0].message}`);
  }
  const table = out.data;
  if (table.length < 2) {
    throw new Error(`${what}: expected a header row plus data`);
  }
  const header = table[0].map((s) => s.trim());
  const rows = table.slice(1).map((row, i) => {
    const vals = row.map(Number);
    if (vals.length !== header.length || vals.some(Number.isNaN)) {
      throw new Error(`${what}: bad row ${i + 2}: ${row.join(",")}`);
    }
    return vals;
  });
  return { header, rows };
}

function uniqueSorted(values: number[]): Float64Array {
  const seen = Array.from(new Set(values));
  seen.sort((a, b) => a - b);
  return Float64Array.from(seen);
}

/**
 * Parse a solution snapshot and arrange it on its rectangular lattice.
 * Every (x, y) lattice point must be present exactly once; anything
 * else means the file is not a plain single-mesh snapshot and the
 * caller should hear about it rather than get a scrambled image.
 */
export function readSnapshot(path: string): SnapshotFrame {
  const { header, rows } = parseNumeric(readFileSync(path, "utf-8"), path);
  for (const need of ["t", "x", "y", "rho", "p"]) {
    if (!header.includes(need)) {
      throw new Error(`${path}: missing column ${need}`);
    }
  }
  const col = (name: string) => header.indexOf(name);
  const xs = uniqueSorted(rows.map((r) => r[col("x")]));
  const ys = uniqueSorted(rows.map((r) => r[col("y")]));
  const nx = xs.length;
  const ny = ys.length;
  if (nx * ny !== rows.length) {
    throw new Error(
      `${path}: ${rows.length} rows cannot fill a ${nx} x ${ny} rectangular lattice`
    );
  }
  const xIndex = new Map<number, number>();
  xs.forEach((v, i) => xIndex.set(v, i));
  const yIndex = new Map<number, number>();
  ys.forEach((v, i) => yIndex.set(v, i));

  const fields = new Map<string, Float64Array>();
  for (const name of header) {
    if (name !== "x" && name !== "y" && name !== "t") {
      fields.set(name, new Float64Array(nx * ny).fill(Number.NaN));
    }
  }
  for (const r of rows) {
    const slot = yIndex.get(r[col("y")])! * nx + xIndex.get(r[col("x")])!;
    for (const [name, grid] of fields) {
      if (!Number.isNaN(grid[slot])) {
        throw new Error(`${path}: duplicate lattice point in row near x=${r[col("x")]}`);
      }
      grid[slot] = r[col(name)];
    }
  }
  for (const [name, grid] of fields) {
    for (let i = 0; i < grid.length; i++) {
      if (Number.isNaN(grid[i])) {
        throw new Error(`${path}: lattice hole in column ${name}`);
      }
    }
  }
  return { t: rows[0][col("t")], xs, ys, nx, ny, fields };
}

export function readDiagnostics(path: string): DiagnosticsTable {
  const { header, rows } = parseNumeric(readFileSync(path, "utf-8"), path);
  const grab = (name: string) => {
    const i = header.indexOf(name);
    if (i < 0) throw new Error(`${path}: missing column ${name}`);
    return Float64Array.from(rows.map((r) => r[i]));
  };
  return {
    t: grab("t"),
    dt: grab("dt"),
    eps_div: grab("eps_div"),
    min_rho: grab("min_rho"),
    min_p: grab("min_p"),
    limited_cells: grab("limited_cells"),
  };
}

/**
 * Parse a refinement-study table.  The solver interleaves observed-rate
 * rows (first cell "rate") between the error rows; those are derived
 * data and get skipped here, slopes are re-measured from the errors.
 */
export function readConvergenceTable(path: string): ConvergenceTable {
  const text = readFileSync(path, "utf-8").trim();
  const lines = text
    .split(/\r?\n/)
    .filter((l) => l.trim().length > 0 && !l.trimStart().startsWith("#"));
  if (lines.length < 2) {
    throw new Error(`${path}: expected a header row plus data`);
  }
  const header = lines[0].split(",").map((s) => s.trim());
  if (header[0] !== "cells" || !header.includes("eps_div")) {
    throw new Error(`${path}: not a refinement table (header ${lines[0]})`);
  }
  const comps = header.slice(1, header.indexOf("eps_div"));
  const levels: Array<[number, number]> = [];
  const errRows: number[][] = [];
  const eps: number[] = [];
  for (const line of lines.slice(1)) {
    const parts = line.split(",").map((s) => s.trim());
    if (parts[0] === "rate") continue;
    const m = parts[0].match(/^(\d+)x(\d+)$/);
    if (!m) throw new Error(`${path}: bad cells tag ${parts[0]}`);
    levels.push([Number(m[1]), Number(m[2])]);
    const vals = parts.slice(1).map(Number);
    if (vals.length !== comps.length + 1 || vals.some(Number.isNaN)) {
      throw new Error(`${path}: bad error row ${line}`);
    }
    errRows.push(vals.slice(0, comps.length));
    eps.push(vals[comps.length]);
  }
  const errors = new Map<string, Float64Array>();
  comps.forEach((name, j) => {
    errors.set(name, Float64Array.from(errRows.map((r) => r[j])));
  });
  return {
    levels,
    h: Float64Array.from(levels.map(([nx]) => 1.0 / nx)),
    errors,
    eps: Float64Array.from(eps),
  };
}
