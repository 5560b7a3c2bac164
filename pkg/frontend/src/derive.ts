// Derived plot quantities, computed from the conserved columns so the
// solver CSV can stay minimal.

import type { SnapshotFrame } from "./csv.js";

export type Quantity = "rho" | "p" | "pmag" | "mach" | "log10_rho";

export const QUANTITIES: Quantity[] = ["rho", "p", "pmag", "mach", "log10_rho"];

export const LABELS: Record<Quantity, string> = {
  rho: "density",
  p: "thermal pressure",
  pmag: "magnetic pressure",
  mach: "Mach number",
  log10_rho: "log10 density",
};

function need(frame: SnapshotFrame, name: string): Float64Array {
  const grid = frame.fields.get(name);
  if (!grid) throw new Error(`snapshot has no column ${name}`);
  return grid;
}

/** |B|^2 / 2 */
function magneticPressure(frame: SnapshotFrame): Float64Array {
  const b1 = need(frame, "B1");
  const b2 = need(frame, "B2");
  const b3 = need(frame, "B3");
  const out = new Float64Array(b1.length);
  for (let i = 0; i < out.length; i++) {
    out[i] = 0.5 * (b1[i] * b1[i] + b2[i] * b2[i] + b3[i] * b3[i]);
  }
  return out;
}

/**
 * |v| / c_s.  The snapshot does not carry the adiabatic index, but it
 * carries both p and total energy, so gamma is recovered per point from
 * p = (gamma - 1) * (E - |m|^2/(2 rho) - |B|^2/2).
 */
function machNumber(frame: SnapshotFrame): Float64Array {
  const rho = need(frame, "rho");
  const m1 = need(frame, "m1");
  const m2 = need(frame, "m2");
  const m3 = need(frame, "m3");
  const p = need(frame, "p");
  const en = need(frame, "E");
  const pmag = magneticPressure(frame);
  const out = new Float64Array(rho.length);
  for (let i = 0; i < out.length; i++) {
    const ke = 0.5 * (m1[i] * m1[i] + m2[i] * m2[i] + m3[i] * m3[i]) / rho[i];
    const eint = en[i] - ke - pmag[i];
    const gamma = 1.0 + p[i] / eint;
    const speed = Math.sqrt(2.0 * ke / rho[i]);
    out[i] = speed / Math.sqrt((gamma * p[i]) / rho[i]);
  }
  return out;
}

export function deriveQuantity(frame: SnapshotFrame, quantity: Quantity): Float64Array {
  switch (quantity) {
    case "rho":
      return need(frame, "rho");
    case "p":
      return need(frame, "p");
    case "pmag":
      return magneticPressure(frame);
    case "mach":
      return machNumber(frame);
    case "log10_rho": {
      const rho = need(frame, "rho");
      return Float64Array.from(rho, (v) => Math.log10(v));
    }
  }
}
