/** Public API: validate a job, render it, write the PNG. */

import { writeFileSync } from "node:fs";
import { PlotError } from "./errors.js";
import { parseReport, PlotKind, SCHEMAS } from "./csv.js";
import { renderCurve, renderHeatmap, renderPhase } from "./charts.js";
import { encodePng } from "./png.js";

export interface PlotJob {
  kind: PlotKind;
  input: string;
  output: string;
}

export function render(job: PlotJob): void {
  if (!(job.kind in SCHEMAS)) {
    throw new PlotError("BAD_KIND", `kind must be one of ${Object.keys(SCHEMAS).join(", ")}`);
  }
  const rows = parseReport(job.kind, job.input);
  const raster =
    job.kind === "curve" ? renderCurve(rows)
    : job.kind === "heatmap" ? renderHeatmap(rows)
    : renderPhase(rows);
  writeFileSync(job.output, encodePng(raster.image()));
}

export { PlotError } from "./errors.js";
export { SCHEMAS, parseReport, validateHeader } from "./csv.js";
export type { PlotKind, Row } from "./csv.js";
export { heatmapGeometry, renderCurve, renderHeatmap, renderPhase, MARGIN, HEATMAP_CELL, CURVE_PANEL } from "./charts.js";
export { encodePng, decodePng } from "./png.js";
export type { Image } from "./png.js";
export { Raster, SIM_COLOR, THEORY_COLOR, DIVERGED_COLOR } from "./raster.js";
