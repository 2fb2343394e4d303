/**
 * Report CSV parsing with strict schema checks.
 *
 * The producing side documents one exact header per report kind; anything
 * else is rejected up front so a renamed or reordered column can never be
 * plotted as the wrong quantity.  Empty cells are undefined values (the
 * producer writes them for quantities with no defined theory), parsed as
 * NaN in numeric columns.
 */

import { readFileSync } from "node:fs";
import { PlotError } from "./errors.js";

export const SCHEMAS = {
  curve: [
    "phase", "t", "eg1_sim", "eg1_se", "eg2_sim", "eg2_se",
    "eg1_theory", "eg2_theory", "eg1_ode", "eg2_ode",
  ],
  heatmap: ["r", "q", "gamma2", "forgetting_value", "status", "eg1_sim_end", "eg1_sim_se"],
  phase: [
    "eta", "r", "sigma2_sq", "gamma2", "c1", "c2",
    "classification", "numerical_verdict", "peak_excess",
  ],
} as const;

export type PlotKind = keyof typeof SCHEMAS;

/** Columns holding labels rather than numbers. */
const TEXT_COLUMNS = new Set(["status", "classification", "numerical_verdict"]);

export type Row = Record<string, number | string>;

function splitLine(line: string): string[] {
  // Report CSVs are plain comma-separated with no quoting or embedded commas.
  return line.split(",");
}

export function validateHeader(kind: PlotKind, header: string[]): void {
  const expected = SCHEMAS[kind];
  const got = new Set(header);
  const missing = expected.filter((c) => !got.has(c));
  if (missing.length > 0 && header.every((c) => (expected as readonly string[]).includes(c))) {
    throw new PlotError(
      "MISSING_COLUMN",
      `${kind} input lacks column(s): ${missing.join(", ")}`,
    );
  }
  if (expected.length !== header.length || expected.some((c, i) => header[i] !== c)) {
    throw new PlotError(
      "SCHEMA_MISMATCH",
      `${kind} input header must be exactly "${expected.join(",")}", got "${header.join(",")}"`,
    );
  }
}

export function parseReport(kind: PlotKind, path: string): Row[] {
  const text = readFileSync(path, "utf8");
  const lines = text.split(/\r?\n/).filter((line) => line.length > 0);
  if (lines.length === 0) {
    throw new PlotError("EMPTY_INPUT", `${path} is empty`);
  }
  const header = splitLine(lines[0]);
  validateHeader(kind, header);
  const rows: Row[] = [];
  for (const line of lines.slice(1)) {
    const cells = splitLine(line);
    if (cells.length !== header.length) {
      throw new PlotError(
        "SCHEMA_MISMATCH",
        `${path}: row has ${cells.length} cells, header has ${header.length}`,
      );
    }
    const row: Row = {};
    header.forEach((name, i) => {
      if (TEXT_COLUMNS.has(name)) {
        row[name] = cells[i];
      } else {
        row[name] = cells[i] === "" ? NaN : Number(cells[i]);
      }
    });
    rows.push(row);
  }
  if (rows.length === 0) {
    throw new PlotError("EMPTY_INPUT", `${path} has a header but no data rows`);
  }
  return rows;
}
