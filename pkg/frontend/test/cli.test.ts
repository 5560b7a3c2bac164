import { existsSync, mkdtempSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { fileURLToPath } from "node:url";
import { beforeAll, describe, expect, it, vi } from "vitest";
import { main } from "../src/cli.js";

const FIX = fileURLToPath(new URL("./fixtures", import.meta.url));

let out: string;

beforeAll(() => {
  out = mkdtempSync(join(tmpdir(), "plotkit-cli-"));
});

async function run(argv: string[]): Promise<number> {
  // the CLI narrates to the console; tests only care about codes and files
  const log = vi.spyOn(console, "log").mockImplementation(() => {});
  const err = vi.spyOn(console, "error").mockImplementation(() => {});
  try {
    return await main(argv);
  } finally {
    log.mockRestore();
    err.mockRestore();
  }
}

describe("plot cli", () => {
  it("contour", async () => {
    const svg = join(out, "contour.svg");
    const code = await run(["contour", "--in", join(FIX, "ot_snapshot.csv"), "--out", svg, "--quantity", "pmag"]);
    expect(code).toBe(0);
    expect(existsSync(svg)).toBe(true);
  });

  it("line with a quantity list", async () => {
    const svg = join(out, "line.svg");
    const code = await run(["line", "--in", join(FIX, "riemann_snapshot.csv"), "--out", svg, "--quantity", "rho,p,mach"]);
    expect(code).toBe(0);
    expect(existsSync(svg)).toBe(true);
  });

  it("convergence", async () => {
    const svg = join(out, "conv.svg");
    const code = await run(["convergence", "--in", join(FIX, "vortex_table.csv"), "--out", svg]);
    expect(code).toBe(0);
    expect(existsSync(svg)).toBe(true);
  });

  it("divergence", async () => {
    const svg = join(out, "div.svg");
    const code = await run(["divergence", "--in", join(FIX, "ot_diagnostics.csv"), "--out", svg]);
    expect(code).toBe(0);
    expect(existsSync(svg)).toBe(true);
  });

  it("fails on a missing command", async () => {
    expect(await run(["--in", "x.csv", "--out", "y.svg"])).toBe(1);
  });

  it("fails on an unknown quantity", async () => {
    const code = await run(["line", "--in", join(FIX, "riemann_snapshot.csv"), "--out", join(out, "no.svg"), "--quantity", "vorticity"]);
    expect(code).toBe(1);
  });

  it("fails on a nonexistent input file", async () => {
    const code = await run(["contour", "--in", join(FIX, "absent.csv"), "--out", join(out, "no.svg")]);
    expect(code).toBe(1);
  });

  it("fails when the frame shape does not fit the command", async () => {
    const code = await run(["line", "--in", join(FIX, "ot_snapshot.csv"), "--out", join(out, "no.svg")]);
    expect(code).toBe(1);
  });
});
