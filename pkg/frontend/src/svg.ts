/** Deterministic SVG assembly: plain string building, fixed formatting. */

import { Series } from "./csv";
import { LinearScale, fmt, linearScale, tickLabel } from "./scale";

export const PALETTE = [
  "#1f77b4",
  "#d62728",
  "#2ca02c",
  "#9467bd",
  "#ff7f0e",
  "#8c564b",
];

export const MARKERS = ["circle", "square", "diamond", "triangle"] as const;

export interface PanelSpec {
  series: Series[];
  xLabel: string;
  yLabel: string;
  refDiagonal?: boolean; // draw the y = x reference line
}

export interface PanelLayout {
  x: number;
  y: number;
  width: number;
  height: number;
}

const MARGIN = { top: 28, right: 16, bottom: 44, left: 58 };

function markerSvg(
  kind: (typeof MARKERS)[number],
  cx: number,
  cy: number,
  color: string,
): string {
  const r = 3.2;
  const c = (v: number) => fmt(v);
  switch (kind) {
    case "circle":
      return `<circle class="marker" cx="${c(cx)}" cy="${c(cy)}" r="${r}" fill="${color}"/>`;
    case "square":
      return `<rect class="marker" x="${c(cx - r)}" y="${c(cy - r)}" width="${fmt(2 * r)}" height="${fmt(2 * r)}" fill="${color}"/>`;
    case "diamond":
      return `<path class="marker" d="M ${c(cx)} ${c(cy - r - 1)} L ${c(cx + r + 1)} ${c(cy)} L ${c(cx)} ${c(cy + r + 1)} L ${c(cx - r - 1)} ${c(cy)} Z" fill="${color}"/>`;
    case "triangle":
      return `<path class="marker" d="M ${c(cx)} ${c(cy - r - 1)} L ${c(cx + r + 1)} ${c(cy + r)} L ${c(cx - r - 1)} ${c(cy + r)} Z" fill="${color}"/>`;
  }
}

export function renderPanel(panel: PanelSpec, layout: PanelLayout): string {
  const plotX: [number, number] = [
    layout.x + MARGIN.left,
    layout.x + layout.width - MARGIN.right,
  ];
  const plotY: [number, number] = [
    layout.y + layout.height - MARGIN.bottom,
    layout.y + MARGIN.top,
  ];
  const xs = panel.series.flatMap((s) => s.points.map((p) => p.x));
  const ys = panel.series.flatMap((s) => s.points.map((p) => p.y));
  if (panel.refDiagonal) {
    ys.push(...xs); // keep the reference line inside the frame
  }
  const sx = linearScale(xs, plotX);
  const sy = linearScale(ys, plotY);

  const parts: string[] = [];
  parts.push(
    `<rect x="${fmt(plotX[0])}" y="${fmt(plotY[1])}" width="${fmt(plotX[1] - plotX[0])}" height="${fmt(plotY[0] - plotY[1])}" fill="none" stroke="#222" stroke-width="1"/>`,
  );
  for (const t of sx.ticks) {
    const px = sx.map(t);
    parts.push(
      `<line x1="${fmt(px)}" y1="${fmt(plotY[0])}" x2="${fmt(px)}" y2="${fmt(plotY[0] + 4)}" stroke="#222"/>`,
      `<text x="${fmt(px)}" y="${fmt(plotY[0] + 16)}" text-anchor="middle" class="tick">${tickLabel(t)}</text>`,
    );
  }
  for (const t of sy.ticks) {
    const py = sy.map(t);
    parts.push(
      `<line x1="${fmt(plotX[0] - 4)}" y1="${fmt(py)}" x2="${fmt(plotX[0])}" y2="${fmt(py)}" stroke="#222"/>`,
      `<text x="${fmt(plotX[0] - 7)}" y="${fmt(py + 3)}" text-anchor="end" class="tick">${tickLabel(t)}</text>`,
    );
  }
  parts.push(
    `<text x="${fmt((plotX[0] + plotX[1]) / 2)}" y="${fmt(plotY[0] + 34)}" text-anchor="middle" class="label">${panel.xLabel}</text>`,
    `<text transform="translate(${fmt(layout.x + 14)},${fmt((plotY[0] + plotY[1]) / 2)}) rotate(-90)" text-anchor="middle" class="label">${panel.yLabel}</text>`,
  );

  if (panel.refDiagonal) {
    const lo = Math.max(sx.domain[0], sy.domain[0]);
    const hi = Math.min(sx.domain[1], sy.domain[1]);
    if (hi > lo) {
      parts.push(
        `<line class="reference" x1="${fmt(sx.map(lo))}" y1="${fmt(sy.map(lo))}" x2="${fmt(sx.map(hi))}" y2="${fmt(sy.map(hi))}" stroke="#888" stroke-dasharray="5,4" stroke-width="1"/>`,
      );
    }
  }

  panel.series.forEach((series, idx) => {
    const color = PALETTE[idx % PALETTE.length];
    const marker = MARKERS[idx % MARKERS.length];
    const path = series.points
      .map(
        (p, i) =>
          `${i === 0 ? "M" : "L"} ${fmt(sx.map(p.x))} ${fmt(sy.map(p.y))}`,
      )
      .join(" ");
    parts.push(
      `<path class="curve" d="${path}" fill="none" stroke="${color}" stroke-width="1.6"/>`,
    );
    for (const p of series.points) {
      parts.push(markerSvg(marker, sx.map(p.x), sy.map(p.y), color));
    }
  });

  return parts.join("\n");
}

export function renderLegend(
  keys: string[],
  x: number,
  y: number,
): string {
  const parts: string[] = [`<g class="legend">`];
  keys.forEach((key, idx) => {
    const color = PALETTE[idx % PALETTE.length];
    const ly = y + idx * 16;
    parts.push(
      `<rect x="${fmt(x)}" y="${fmt(ly - 8)}" width="18" height="4" fill="${color}"/>`,
      `<text x="${fmt(x + 24)}" y="${fmt(ly - 1)}" class="legend-entry">${key}</text>`,
    );
  });
  parts.push("</g>");
  return parts.join("\n");
}

export function svgDocument(
  width: number,
  height: number,
  body: string,
): string {
  return [
    `<?xml version="1.0" encoding="UTF-8"?>`,
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" viewBox="0 0 ${width} ${height}">`,
    `<style>text{font-family:Helvetica,Arial,sans-serif}.tick{font-size:10px}.label{font-size:12px}.legend-entry{font-size:11px}</style>`,
    `<rect width="${width}" height="${height}" fill="#ffffff"/>`,
    body,
    `</svg>`,
    ``,
  ].join("\n");
}
