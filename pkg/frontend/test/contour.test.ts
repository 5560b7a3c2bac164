import { existsSync, mkdtempSync, readFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { fileURLToPath } from "node:url";
import { beforeAll, describe, expect, it } from "vitest";
import { readSnapshot, type SnapshotFrame } from "../src/csv.js";
import { plotContour } from "../src/contour.js";
import { QUANTITIES } from "../src/derive.js";

const FIX = fileURLToPath(new URL("./fixtures", import.meta.url));

let out: string;
let frame: SnapshotFrame;

beforeAll(() => {
  out = mkdtempSync(join(tmpdir(), "plotkit-contour-"));
  frame = readSnapshot(join(FIX, "ot_snapshot.csv"));
});

function constantFrame(n: number, value: number): SnapshotFrame {
  const fields = new Map<string, Float64Array>();
  for (const name of ["rho", "m1", "m2", "m3", "B1", "B2", "B3", "E", "p"]) {
    fields.set(name, new Float64Array(n * n).fill(name === "rho" ? value : 1.0));
  }
  const centers = Float64Array.from({ length: n }, (_, i) => (i + 0.5) / n);
  return { t: 0, xs: centers, ys: centers.slice(), nx: n, ny: n, fields };
}

describe("plotContour", () => {
  it("renders every supported quantity from a real snapshot", () => {
    for (const quantity of QUANTITIES) {
      const path = join(out, `ot_${quantity}.svg`);
      const res = plotContour(frame, quantity, path);
      expect(existsSync(path)).toBe(true);
      const svg = readFileSync(path, "utf-8");
      expect(svg.startsWith("<svg")).toBe(true);
      expect(svg).toContain("colorbar");
      expect(res.max).toBeGreaterThan(res.min);
      // a multi-shock frame must produce a healthy number of bands
      expect(res.bands).toBeGreaterThan(5);
      expect((svg.match(/<path /g) ?? []).length).toBeGreaterThan(5);
    }
  });

  it("degenerates to a single band on a constant field", () => {
    const path = join(out, "flat.svg");
    const res = plotContour(constantFrame(8, 2.5), "rho", path);
    expect(res.bands).toBe(1);
    expect(res.min).toBe(res.max);
    const svg = readFileSync(path, "utf-8");
    expect(svg.startsWith("<svg")).toBe(true);
  });

  it("refuses 1D frames", () => {
    const thin = readSnapshot(join(FIX, "riemann_snapshot.csv"));
    expect(() => plotContour(thin, "rho", join(out, "nope.svg"))).toThrow(/2D frame/);
  });
});
