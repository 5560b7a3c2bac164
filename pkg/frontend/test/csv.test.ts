import { mkdtempSync, readFileSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { fileURLToPath } from "node:url";
import { describe, expect, it } from "vitest";
import { readConvergenceTable, readDiagnostics, readSnapshot } from "../src/csv.js";

const FIX = fileURLToPath(new URL("./fixtures", import.meta.url));

function scratch(name: string, content: string): string {
  const dir = mkdtempSync(join(tmpdir(), "plotkit-csv-"));
  const path = join(dir, name);
  writeFileSync(path, content);
  return path;
}

describe("readSnapshot", () => {
  it("arranges a 2D snapshot on its lattice", () => {
    const frame = readSnapshot(join(FIX, "ot_snapshot.csv"));
    expect(frame.nx).toBe(16);
    expect(frame.ny).toBe(16);
    expect(frame.t).toBeGreaterThan(0);
    for (const name of ["rho", "m1", "m2", "m3", "B1", "B2", "B3", "E", "p"]) {
      expect(frame.fields.get(name)?.length).toBe(16 * 16);
    }
    // lattice coordinates come out sorted
    for (let i = 1; i < frame.nx; i++) {
      expect(frame.xs[i]).toBeGreaterThan(frame.xs[i - 1]);
    }
  });

  it("reads a 1D snapshot as an nx-by-1 frame", () => {
    const frame = readSnapshot(join(FIX, "riemann_snapshot.csv"));
    expect(frame.ny).toBe(1);
    expect(frame.nx).toBe(50);
  });

  it("rejects a snapshot with a missing lattice point", () => {
    const lines = readFileSync(join(FIX, "ot_snapshot.csv"), "utf-8").trim().split("\n");
    const tampered = scratch("holey.csv", lines.slice(0, -1).join("\n") + "\n");
    expect(() => readSnapshot(tampered)).toThrow(/rectangular|lattice/);
  });

  it("rejects a duplicated lattice point", () => {
    const lines = readFileSync(join(FIX, "ot_snapshot.csv"), "utf-8").trim().split("\n");
    const tampered = scratch("dupe.csv", [...lines.slice(0, -1), lines[1]].join("\n") + "\n");
    expect(() => readSnapshot(tampered)).toThrow(/duplicate|lattice/);
  });

  it("rejects a snapshot without the required columns", () => {
    const bad = scratch("cols.csv", "a,b\n1,2\n");
    expect(() => readSnapshot(bad)).toThrow(/missing column/);
  });
});

describe("readDiagnostics", () => {
  it("pulls the per-step history columns", () => {
    const diag = readDiagnostics(join(FIX, "riemann_diagnostics.csv"));
    expect(diag.t.length).toBeGreaterThan(10);
    expect(diag.t.length).toBe(diag.eps_div.length);
    expect(diag.t.length).toBe(diag.min_p.length);
    for (const v of diag.min_rho) expect(v).toBeGreaterThan(0);
  });
});

describe("readConvergenceTable", () => {
  it("keeps error rows and skips the interleaved rate rows", () => {
    const table = readConvergenceTable(join(FIX, "vortex_table.csv"));
    expect(table.levels).toEqual([
      [10, 10],
      [20, 20],
      [40, 40],
    ]);
    expect(table.errors.get("m1")?.length).toBe(3);
    expect(table.eps.length).toBe(3);
    for (let i = 1; i < table.h.length; i++) {
      expect(table.h[i]).toBeLessThan(table.h[i - 1]);
    }
  });

  it("rejects a table without data rows", () => {
    const bad = scratch("empty.csv", "cells,rho,m1,m2,m3,B1,B2,B3,E,eps_div\n");
    expect(() => readConvergenceTable(bad)).toThrow(/header row plus data/);
  });

  it("rejects a non-table header", () => {
    const bad = scratch("noise.csv", "t,x,y\n0,1,2\n");
    expect(() => readConvergenceTable(bad)).toThrow(/not a refinement table/);
  });
});
