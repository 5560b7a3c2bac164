// Small SVG string builder.  Plots here are batch artifacts, so plain
// string assembly beats dragging in a DOM.

import { scaleLinear, scaleLog, type ScaleContinuousNumeric } from "d3-scale";

export type Scale = ScaleContinuousNumeric<number, number>;

export function esc(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;").replace(/"/g, "&quot;");
}

export function num(v: number): string {
  return Number.isInteger(v) ? String(v) : v.toPrecision(6).replace(/\.?0+$/, "");
}

export function tag(name: string, attrs: Record<string, string | number>, body = ""): string {
  const parts = Object.entries(attrs).map(([k, v]) => `${k}="${typeof v === "number" ? num(v) : v}"`);
  return body.length > 0
    ? `<${name} ${parts.join(" ")}>${body}</${name}>`
    : `<${name} ${parts.join(" ")}/>`;
}

export function text(x: number, y: number, body: string, extra: Record<string, string | number> = {}): string {
  return tag("text", { x, y, "font-size": 11, "font-family": "sans-serif", ...extra }, esc(body));
}

export interface PlotBox {
  width: number;
  height: number;
  left: number;
  right: number;
  top: number;
  bottom: number;
}

export const DEFAULT_BOX: PlotBox = { width: 640, height: 480, left: 58, right: 24, top: 34, bottom: 44 };

export function linear(domain: [number, number], range: [number, number]): Scale {
  return scaleLinear().domain(domain).range(range);
}

export function logarithmic(domain: [number, number], range: [number, number]): Scale {
  return scaleLog().domain(domain).range(range);
}

/** bottom x axis + left y axis with ticks, grid-free */
export function axes(x: Scale, y: Scale, box: PlotBox, xLabel: string, yLabel: string): string {
  const innerBottom = box.height - box.bottom;
  const parts: string[] = [];
  parts.push(tag("line", {
    x1: box.left, y1: innerBottom, x2: box.width - box.right, y2: innerBottom,
    stroke: "#333", "stroke-width": 1,
  }));
  parts.push(tag("line", {
    x1: box.left, y1: box.top, x2: box.left, y2: innerBottom,
    stroke: "#333", "stroke-width": 1,
  }));
  const xfmt = x.tickFormat(6);
  for (const t of x.ticks(6)) {
    const px = x(t);
    parts.push(tag("line", { x1: px, y1: innerBottom, x2: px, y2: innerBottom + 5, stroke: "#333" }));
    parts.push(text(px, innerBottom + 17, xfmt(t), { "text-anchor": "middle" }));
  }
  const yfmt = y.tickFormat(6);
  for (const t of y.ticks(6)) {
    const py = y(t);
    parts.push(tag("line", { x1: box.left - 5, y1: py, x2: box.left, y2: py, stroke: "#333" }));
    parts.push(text(box.left - 8, py + 4, yfmt(t), { "text-anchor": "end" }));
  }
  parts.push(text((box.left + box.width - box.right) / 2, box.height - 10, xLabel, { "text-anchor": "middle" }));
  parts.push(text(14, (box.top + innerBottom) / 2, yLabel, {
    "text-anchor": "middle",
    transform: `rotate(-90 14 ${(box.top + innerBottom) / 2})`,
  }));
  return parts.join("\n");
}

export function document(box: PlotBox, body: string): string {
  return (
    `<svg xmlns="http://www.w3.org/2000/svg" width="${box.width}" height="${box.height}" ` +
    `viewBox="0 0 ${box.width} ${box.height}">\n` +
    tag("rect", { x: 0, y: 0, width: box.width, height: box.height, fill: "white" }) +
    "\n" + body + "\n</svg>\n"
  );
}
