/** Figure assembly for the three tradeoff plot kinds. */

import { writeFileSync } from "fs";
import { Series, SweepRow, readCsv, toSeries } from "./csv";
import { encodePng } from "./png";
import { Raster, RGB } from "./raster";
import { linearScale, tickLabel } from "./scale";
import {
  MARKERS,
  PALETTE,
  PanelSpec,
  renderLegend,
  renderPanel,
  svgDocument,
} from "./svg";

export type FigureKind =
  | "sinr_vs_threshold"
  | "secrecy_vs_threshold"
  | "comparison";

export type FigureFormat = "svg" | "png";

export interface FigureSpec {
  csvPaths: string[];
  kind: FigureKind;
  seriesColumn: string;
  outPath: string;
  format: FigureFormat;
}

const PANEL_W = 420;
const PANEL_H = 320;

const X_COL = "r_m";
const SINR_COL = "mean_sinr_db";
const SECRECY_COL = "mean_secrecy_bits";

const X_LABEL = "secrecy rate threshold (bits)";
const SINR_LABEL = "mean SINR at the RR (dB)";
const SECRECY_LABEL = "achieved secrecy rate (bits)";

interface PanelData {
  spec: PanelSpec;
}

function loadRows(spec: FigureSpec, required: string[]): SweepRow[] {
  if (spec.csvPaths.length === 0) {
    throw new Error("at least one CSV path is required");
  }
  const rows: SweepRow[] = [];
  for (const path of spec.csvPaths) {
    rows.push(...readCsv(path, required.concat(spec.seriesColumn, X_COL)));
  }
  return rows;
}

export function panelsFor(spec: FigureSpec): PanelData[] {
  switch (spec.kind) {
    case "sinr_vs_threshold": {
      const rows = loadRows(spec, [SINR_COL]);
      return [
        {
          spec: {
            series: toSeries(rows, spec.seriesColumn, X_COL, SINR_COL),
            xLabel: X_LABEL,
            yLabel: SINR_LABEL,
          },
        },
      ];
    }
    case "secrecy_vs_threshold": {
      const rows = loadRows(spec, [SECRECY_COL]);
      return [
        {
          spec: {
            series: toSeries(rows, spec.seriesColumn, X_COL, SECRECY_COL),
            xLabel: X_LABEL,
            yLabel: SECRECY_LABEL,
            refDiagonal: true,
          },
        },
      ];
    }
    case "comparison": {
      // side-by-side SINR and secrecy panels, as in the published layout
      const rows = loadRows(spec, [SINR_COL, SECRECY_COL]);
      return [
        {
          spec: {
            series: toSeries(rows, spec.seriesColumn, X_COL, SINR_COL),
            xLabel: X_LABEL,
            yLabel: SINR_LABEL,
          },
        },
        {
          spec: {
            series: toSeries(rows, spec.seriesColumn, X_COL, SECRECY_COL),
            xLabel: X_LABEL,
            yLabel: SECRECY_LABEL,
            refDiagonal: true,
          },
        },
      ];
    }
    default:
      throw new Error(`unknown figure kind: ${spec.kind}`);
  }
}

export function renderSvg(spec: FigureSpec): string {
  const panels = panelsFor(spec);
  const width = PANEL_W * panels.length;
  const height = PANEL_H;
  const body: string[] = [];
  panels.forEach((panel, idx) => {
    body.push(
      renderPanel(panel.spec, {
        x: idx * PANEL_W,
        y: 0,
        width: PANEL_W,
        height: PANEL_H,
      }),
    );
  });
  const keys = panels[0].spec.series.map((s) => s.key);
  body.push(renderLegend(keys, width - 120, 28));
  return svgDocument(width, height, body.join("\n"));
}

const BLACK: RGB = [34, 34, 34];
const GREY: RGB = [136, 136, 136];

function hexToRgb(hex: string): RGB {
  return [
    parseInt(hex.slice(1, 3), 16),
    parseInt(hex.slice(3, 5), 16),
    parseInt(hex.slice(5, 7), 16),
  ];
}

function rasterPanel(
  raster: Raster,
  panel: PanelSpec,
  offsetX: number,
): void {
  const left = offsetX + 58;
  const right = offsetX + PANEL_W - 16;
  const top = 28;
  const bottom = PANEL_H - 44;
  const xs = panel.series.flatMap((s) => s.points.map((p) => p.x));
  const ys = panel.series.flatMap((s) => s.points.map((p) => p.y));
  if (panel.refDiagonal) {
    ys.push(...xs);
  }
  const sx = linearScale(xs, [left, right]);
  const sy = linearScale(ys, [bottom, top]);

  raster.line(left, top, right, top, BLACK);
  raster.line(left, bottom, right, bottom, BLACK);
  raster.line(left, top, left, bottom, BLACK);
  raster.line(right, top, right, bottom, BLACK);
  for (const t of sx.ticks) {
    const px = sx.map(t);
    raster.line(px, bottom, px, bottom + 4, BLACK);
    const label = tickLabel(t);
    raster.text(px - raster.textWidth(label) / 2, bottom + 8, label, BLACK);
  }
  for (const t of sy.ticks) {
    const py = sy.map(t);
    raster.line(left - 4, py, left, py, BLACK);
    const label = tickLabel(t);
    raster.text(left - 7 - raster.textWidth(label), py - 3, label, BLACK);
  }
  raster.text(
    (left + right) / 2 - raster.textWidth(panel.xLabel) / 2,
    bottom + 24,
    panel.xLabel,
    BLACK,
  );
  raster.text(offsetX + 6, top - 14, panel.yLabel, BLACK);

  if (panel.refDiagonal) {
    const lo = Math.max(sx.domain[0], sy.domain[0]);
    const hi = Math.min(sx.domain[1], sy.domain[1]);
    if (hi > lo) {
      raster.dashedLine(sx.map(lo), sy.map(lo), sx.map(hi), sy.map(hi), GREY);
    }
  }

  panel.series.forEach((series, idx) => {
    const color = hexToRgb(PALETTE[idx % PALETTE.length]);
    for (let i = 1; i < series.points.length; i++) {
      const a = series.points[i - 1];
      const b = series.points[i];
      raster.line(sx.map(a.x), sy.map(a.y), sx.map(b.x), sy.map(b.y), color);
    }
    for (const p of series.points) {
      raster.fillRect(sx.map(p.x) - 2, sy.map(p.y) - 2, 5, 5, color);
    }
  });
}

export function renderPngBuffer(spec: FigureSpec): Buffer {
  const panels = panelsFor(spec);
  const width = PANEL_W * panels.length;
  const raster = new Raster(width, PANEL_H);
  panels.forEach((panel, idx) => {
    rasterPanel(raster, panel.spec, idx * PANEL_W);
  });
  const keys = panels[0].spec.series.map((s) => s.key);
  keys.forEach((key, idx) => {
    const color = hexToRgb(PALETTE[idx % PALETTE.length]);
    const y = 20 + idx * 14;
    raster.fillRect(width - 118, y, 18, 4, color);
    raster.text(width - 94, y - 2, key, BLACK);
  });
  return encodePng(width, PANEL_H, raster.data);
}

/** Render the figure and write it to the spec's output path. */
export function render(spec: FigureSpec): void {
  if (spec.format === "svg") {
    writeFileSync(spec.outPath, renderSvg(spec), "utf8");
  } else if (spec.format === "png") {
    writeFileSync(spec.outPath, renderPngBuffer(spec));
  } else {
    throw new Error(`unknown format: ${spec.format}`);
  }
}
