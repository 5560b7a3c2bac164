export { readConvergenceTable, readDiagnostics, readSnapshot } from "./csv.js";
export type { ConvergenceTable, DiagnosticsTable, SnapshotFrame } from "./csv.js";
export { LABELS, QUANTITIES, deriveQuantity } from "./derive.js";
export type { Quantity } from "./derive.js";
export { plotContour } from "./contour.js";
export type { ContourResult } from "./contour.js";
export { plotConvergence, plotDivergence, plotLine } from "./lines.js";
export type { ConvergenceResult } from "./lines.js";
