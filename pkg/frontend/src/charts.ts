/**
 * The three report renderers.
 *
 * Curve reports draw simulation and closed-form error curves over a shared
 * continuous time axis (task-2 time is offset by the task-1 horizon) with a
 * dashed vertical marker at the task switch.  Heatmaps map the forgetting
 * value onto a monotone dark-to-light ramp, darker meaning smaller, with
 * divergent cells in red.  Phase diagrams color each (r, sigma2_sq) cell by
 * its overshoot classification, one panel per learning-rate value.
 */

import { PlotError } from "./errors.js";
import type { Row } from "./csv.js";
import {
  BLACK,
  Color,
  DIVERGED_COLOR,
  GRAY,
  LIGHT_GRAY,
  Raster,
  SIM_COLOR,
  THEORY_COLOR,
} from "./raster.js";
import { textWidth } from "./font.js";

export const MARGIN = { left: 64, right: 20, top: 30, bottom: 44 } as const;
export const CURVE_PANEL = { width: 360, height: 260, gap: 48 } as const;
export const HEATMAP_CELL = 16;

const CLASS_COLORS: Record<string, Color> = {
  may_not_occur: [158, 202, 225],
  does_not_occur: [49, 163, 84],
  occurs: [255, 127, 14],
  diverges: [178, 24, 43],
};

function finite(values: number[]): number[] {
  return values.filter((v) => Number.isFinite(v));
}

function range(values: number[]): [number, number] {
  const lo = Math.min(...values);
  const hi = Math.max(...values);
  if (lo === hi) return [lo - 0.5, hi + 0.5];
  const pad = 0.05 * (hi - lo);
  return [lo - pad, hi + pad];
}

function ticks(lo: number, hi: number, count = 5): number[] {
  const out: number[] = [];
  for (let i = 0; i < count; i++) out.push(lo + ((hi - lo) * i) / (count - 1));
  return out;
}

function fmt(value: number): string {
  const abs = Math.abs(value);
  if (abs !== 0 && (abs >= 1000 || abs < 0.01)) return value.toExponential(1);
  return Number(value.toFixed(2)).toString();
}

interface Frame {
  x0: number;
  y0: number; // top edge
  w: number;
  h: number;
  xRange: [number, number];
  yRange: [number, number];
}

function drawFrame(img: Raster, frame: Frame, xLabel: string, title: string): void {
  const { x0, y0, w, h } = frame;
  img.line(x0, y0 + h, x0 + w, y0 + h, BLACK);
  img.line(x0, y0, x0, y0 + h, BLACK);
  for (const tx of ticks(frame.xRange[0], frame.xRange[1])) {
    const px = xPixel(frame, tx);
    img.line(px, y0 + h, px, y0 + h + 4, BLACK);
    const label = fmt(tx);
    img.text(px - textWidth(label) / 2, y0 + h + 8, label, GRAY);
  }
  for (const ty of ticks(frame.yRange[0], frame.yRange[1])) {
    const py = yPixel(frame, ty);
    img.line(x0 - 4, py, x0, py, BLACK);
    const label = fmt(ty);
    img.text(x0 - 8 - textWidth(label), py - 3, label, GRAY);
  }
  img.text(x0 + w / 2 - textWidth(xLabel) / 2, y0 + h + 24, xLabel);
  img.text(x0 + w / 2 - textWidth(title) / 2, y0 - 14, title);
}

function xPixel(frame: Frame, x: number): number {
  return frame.x0 + ((x - frame.xRange[0]) / (frame.xRange[1] - frame.xRange[0])) * frame.w;
}

function yPixel(frame: Frame, y: number): number {
  return frame.y0 + frame.h - ((y - frame.yRange[0]) / (frame.yRange[1] - frame.yRange[0])) * frame.h;
}

function polyline(img: Raster, frame: Frame, xs: number[], ys: number[], color: Color, thick = 1): void {
  let prev: [number, number] | null = null;
  for (let i = 0; i < xs.length; i++) {
    if (!Number.isFinite(ys[i])) {
      prev = null;
      continue;
    }
    const px = xPixel(frame, xs[i]);
    const py = yPixel(frame, ys[i]);
    if (prev) img.line(prev[0], prev[1], px, py, color, thick);
    prev = [px, py];
  }
}

export function renderCurve(rows: Row[]): Raster {
  const phase1 = rows.filter((r) => r.phase === 1);
  const phase2 = rows.filter((r) => r.phase === 2);
  const boundary = phase1.length ? Math.max(...phase1.map((r) => r.t as number)) : 0;
  const time = [
    ...phase1.map((r) => r.t as number),
    ...phase2.map((r) => (r.t as number) + boundary),
  ];
  const ordered = [...phase1, ...phase2];

  const width = MARGIN.left + 2 * CURVE_PANEL.width + CURVE_PANEL.gap + MARGIN.right;
  const height = MARGIN.top + CURVE_PANEL.height + MARGIN.bottom;
  const img = new Raster(width, height);

  const panels: Array<{ sim: string; theory: string; title: string }> = [
    { sim: "eg1_sim", theory: "eg1_theory", title: "task 1 error" },
    { sim: "eg2_sim", theory: "eg2_theory", title: "task 2 error" },
  ];
  panels.forEach((panel, index) => {
    const values = finite([
      ...ordered.map((r) => r[panel.sim] as number),
      ...ordered.map((r) => r[panel.theory] as number),
    ]);
    const frame: Frame = {
      x0: MARGIN.left + index * (CURVE_PANEL.width + CURVE_PANEL.gap),
      y0: MARGIN.top,
      w: CURVE_PANEL.width,
      h: CURVE_PANEL.height,
      xRange: range(time),
      yRange: range(values.length ? values : [0, 1]),
    };
    drawFrame(img, frame, "t", panel.title);
    if (phase2.length && phase1.length) {
      img.dashedVLine(xPixel(frame, boundary), frame.y0, frame.y0 + frame.h, GRAY);
    }
    polyline(img, frame, time, ordered.map((r) => r[panel.sim] as number), SIM_COLOR, 3);
    polyline(img, frame, time, ordered.map((r) => r[panel.theory] as number), THEORY_COLOR, 1);
    img.text(frame.x0 + 8, frame.y0 + 6, "sim", SIM_COLOR);
    img.text(frame.x0 + 8 + textWidth("sim ") + 6, frame.y0 + 6, "theory", THEORY_COLOR);
  });
  return img;
}

export interface HeatmapGeometry {
  width: number;
  height: number;
  x0: number;
  y0: number;
  cellW: number;
  cellH: number;
}

export function heatmapGeometry(nx: number, ny: number): HeatmapGeometry {
  return {
    width: MARGIN.left + nx * HEATMAP_CELL + 60 + MARGIN.right,
    height: MARGIN.top + ny * HEATMAP_CELL + MARGIN.bottom,
    x0: MARGIN.left,
    y0: MARGIN.top,
    cellW: HEATMAP_CELL,
    cellH: HEATMAP_CELL,
  };
}

/** Monotone ramp: 0 -> near black, max -> near white (darker = smaller). */
function rampColor(value: number, vmax: number): Color {
  const level = vmax > 0 ? Math.max(0, Math.min(1, value / vmax)) : 0;
  const c = Math.round(25 + 220 * level);
  return [Math.round(c * 0.96), Math.round(c * 0.98), c];
}

function uniqueSorted(values: number[]): number[] {
  return [...new Set(values)].sort((a, b) => a - b);
}

export function renderHeatmap(rows: Row[]): Raster {
  const rs = uniqueSorted(rows.map((r) => r.r as number));
  const qs = uniqueSorted(rows.map((r) => r.q as number));
  const geom = heatmapGeometry(rs.length, qs.length);
  const img = new Raster(geom.width, geom.height);
  const values = finite(rows.map((r) => r.forgetting_value as number));
  const vmax = values.length ? Math.max(...values) : 1;

  for (const row of rows) {
    const ix = rs.indexOf(row.r as number);
    const iy = qs.indexOf(row.q as number);
    const px = geom.x0 + ix * geom.cellW;
    // q grows upward
    const py = geom.y0 + (qs.length - 1 - iy) * geom.cellH;
    const diverged = row.status === "diverged" || !Number.isFinite(row.forgetting_value as number);
    const color = diverged ? DIVERGED_COLOR : rampColor(row.forgetting_value as number, vmax);
    img.fillRect(px, py, geom.cellW, geom.cellH, color);
  }

  // Axis labels at the grid corners and centers.
  const label = (v: number) => fmt(v);
  [[0, rs[0]], [rs.length - 1, rs[rs.length - 1]], [(rs.length - 1) / 2, rs[Math.floor((rs.length - 1) / 2)]]]
    .forEach(([i, v]) => {
      const px = geom.x0 + (i as number) * geom.cellW + geom.cellW / 2;
      img.text(px - textWidth(label(v as number)) / 2, geom.y0 + qs.length * geom.cellH + 8, label(v as number), GRAY);
    });
  [[0, qs[0]], [qs.length - 1, qs[qs.length - 1]]].forEach(([i, v]) => {
    const py = geom.y0 + (qs.length - 1 - (i as number)) * geom.cellH + geom.cellH / 2;
    img.text(geom.x0 - 8 - textWidth(label(v as number)), py - 3, label(v as number), GRAY);
  });
  img.text(geom.x0 + (rs.length * geom.cellW) / 2 - textWidth("r") / 2,
           geom.y0 + qs.length * geom.cellH + 26, "r");
  img.text(geom.x0 - 40, geom.y0 + (qs.length * geom.cellH) / 2 - 3, "q");
  img.text(geom.x0, geom.y0 - 14, "forgetting value (darker = smaller)");

  // Color bar.
  const barX = geom.x0 + rs.length * geom.cellW + 24;
  const barH = qs.length * geom.cellH;
  for (let y = 0; y < barH; y++) {
    const v = vmax * (1 - y / (barH - 1));
    img.fillRect(barX, geom.y0 + y, 14, 1, rampColor(v, vmax));
  }
  img.text(barX + 18, geom.y0 - 3, fmt(vmax), GRAY);
  img.text(barX + 18, geom.y0 + barH - 4, fmt(0), GRAY);
  return img;
}

export function renderPhase(rows: Row[]): Raster {
  const etas = uniqueSorted(rows.map((r) => r.eta as number));
  const rs = uniqueSorted(rows.map((r) => r.r as number));
  const sigmas = uniqueSorted(rows.map((r) => r.sigma2_sq as number));
  const cell = Math.max(HEATMAP_CELL, 22);
  const panelW = rs.length * cell;
  const panelH = sigmas.length * cell;
  const gap = 36;
  const width = MARGIN.left + etas.length * panelW + (etas.length - 1) * gap + MARGIN.right;
  const height = MARGIN.top + 18 + panelH + MARGIN.bottom;
  const img = new Raster(width, height);

  // Legend across the top.
  let lx = MARGIN.left;
  for (const [name, color] of Object.entries(CLASS_COLORS)) {
    img.fillRect(lx, 8, 10, 10, color);
    img.text(lx + 14, 9, name, BLACK);
    lx += 14 + textWidth(name) + 16;
  }

  etas.forEach((eta, panel) => {
    const x0 = MARGIN.left + panel * (panelW + gap);
    const y0 = MARGIN.top + 18;
    for (const row of rows) {
      if (row.eta !== eta) continue;
      const ix = rs.indexOf(row.r as number);
      const iy = sigmas.indexOf(row.sigma2_sq as number);
      const color = CLASS_COLORS[row.classification as string] ?? LIGHT_GRAY;
      img.fillRect(x0 + ix * cell, y0 + (sigmas.length - 1 - iy) * cell, cell, cell, color);
    }
    const title = `eta=${fmt(eta)}`;
    img.text(x0 + panelW / 2 - textWidth(title) / 2, y0 - 12, title);
    [[0, rs[0]], [rs.length - 1, rs[rs.length - 1]]].forEach(([i, v]) => {
      const px = x0 + (i as number) * cell + cell / 2;
      img.text(px - textWidth(fmt(v as number)) / 2, y0 + panelH + 8, fmt(v as number), GRAY);
    });
    img.text(x0 + panelW / 2 - textWidth("r") / 2, y0 + panelH + 24, "r");
    if (panel === 0) {
      [[0, sigmas[0]], [sigmas.length - 1, sigmas[sigmas.length - 1]]].forEach(([i, v]) => {
        const py = y0 + (sigmas.length - 1 - (i as number)) * cell + cell / 2;
        img.text(x0 - 8 - textWidth(fmt(v as number)), py - 3, fmt(v as number), GRAY);
      });
      img.text(x0 - 56, y0 + panelH / 2 - 3, "s2sq");
    }
  });
  if (rows.length === 0) {
    throw new PlotError("EMPTY_INPUT", "phase diagram has no rows");
  }
  return img;
}
