#!/usr/bin/env node
// plot contour|line|convergence|divergence --in <csv> --out <svg> [--quantity q]

import { realpathSync } from "node:fs";
import { fileURLToPath } from "node:url";
import yargs from "yargs";
import { hideBin } from "yargs/helpers";
import { readConvergenceTable, readDiagnostics, readSnapshot } from "./csv.js";
import { QUANTITIES, type Quantity } from "./derive.js";
import { plotContour } from "./contour.js";
import { plotConvergence, plotDivergence, plotLine } from "./lines.js";

interface IoArgs {
  in: string;
  out: string;
  quantity?: string;
}

function splitQuantities(raw: string): Quantity[] {
  const names = raw.split(",").map((s) => s.trim()).filter((s) => s.length > 0);
  for (const n of names) {
    if (!QUANTITIES.includes(n as Quantity)) {
      throw new Error(`unknown quantity ${n}; know ${QUANTITIES.join(", ")}`);
    }
  }
  return names as Quantity[];
}

export async function main(argv: string[]): Promise<number> {
  let failed = false;
  const parser = yargs(argv)
    .scriptName("plot")
    .usage("$0 <command> --in <csv> --out <svg>")
    .option("in", { type: "string", demandOption: true, describe: "input CSV artifact" })
    .option("out", { type: "string", demandOption: true, describe: "output SVG path" })
    .command<IoArgs>(
      "contour",
      "filled contour of a 2D snapshot",
      (y) => y.option("quantity", {
        type: "string",
        default: "rho",
        choices: QUANTITIES as unknown as string[],
      }),
      (args) => {
        const res = plotContour(readSnapshot(args.in), args.quantity as Quantity, args.out);
        console.log(`${res.path}: ${res.bands} bands over [${res.min}, ${res.max}]`);
      },
    )
    .command<IoArgs>(
      "line",
      "1D profile plot",
      (y) => y.option("quantity", { type: "string", default: "rho,p" }),
      (args) => {
        console.log(plotLine(readSnapshot(args.in), splitQuantities(args.quantity ?? "rho,p"), args.out));
      },
    )
    .command<IoArgs>(
      "convergence",
      "log-log refinement errors with measured slopes",
      (y) => y,
      (args) => {
        const res = plotConvergence(readConvergenceTable(args.in), args.out);
        const slopes = Object.entries(res.slopes)
          .map(([name, s]) => `${name}=${s.toFixed(3)}`)
          .join(" ");
        console.log(`${res.path}: ${slopes}`);
      },
    )
    .command<IoArgs>(
      "divergence",
      "divergence-measure history",
      (y) => y,
      (args) => {
        console.log(plotDivergence(readDiagnostics(args.in), args.out));
      },
    )
    .demandCommand(1, "pick a plot command")
    .strict()
    .exitProcess(false)
    .fail((msg, err) => {
      failed = true;
      console.error(err ? `plot: ${err.message}` : `plot: ${msg}`);
    });

  try {
    await parser.parse();
  } catch {
    failed = true;
  }
  return failed ? 1 : 0;
}

// bin symlinks resolve to this file, vitest imports do not
let invokedDirectly = false;
if (process.argv[1]) {
  try {
    invokedDirectly = realpathSync(process.argv[1]) === fileURLToPath(import.meta.url);
  } catch {
    invokedDirectly = false;
  }
}
if (invokedDirectly) {
  main(hideBin(process.argv)).then((code) => {
    process.exitCode = code;
  });
}
