#!/usr/bin/env node
/**
 * plots render --kind <curve|heatmap|phase> --in <csv> --out <png>
 *
 * Exit codes: 0 success, 2 usage error, 1 render error (the stderr line
 * carries the error code, e.g. SCHEMA_MISMATCH).
 */

import { pathToFileURL } from "node:url";
import { PlotError } from "./errors.js";
import { render } from "./index.js";
import type { PlotKind } from "./csv.js";

const USAGE = "usage: plots render --kind <curve|heatmap|phase> --in <report.csv> --out <image.png>";

function parseArgs(argv: string[]): { kind: PlotKind; input: string; output: string } {
  if (argv[0] !== "render") {
    throw new PlotError("BAD_ARGS", USAGE);
  }
  const options: Record<string, string> = {};
  for (let i = 1; i < argv.length; i += 2) {
    const flag = argv[i];
    const value = argv[i + 1];
    if (!flag.startsWith("--") || value === undefined) {
      throw new PlotError("BAD_ARGS", USAGE);
    }
    options[flag.slice(2)] = value;
  }
  const { kind, in: input, out: output } = options;
  if (!kind || !input || !output) {
    throw new PlotError("BAD_ARGS", USAGE);
  }
  if (kind !== "curve" && kind !== "heatmap" && kind !== "phase") {
    throw new PlotError("BAD_KIND", `unknown kind ${kind}; ${USAGE}`);
  }
  return { kind, input, output };
}

export function main(argv: string[]): number {
  let job;
  try {
    job = parseArgs(argv);
  } catch (error) {
    if (error instanceof PlotError) {
      process.stderr.write(`error[${error.code}]: ${error.message}\n`);
      return 2;
    }
    throw error;
  }
  try {
    render(job);
  } catch (error) {
    if (error instanceof PlotError) {
      process.stderr.write(`error[${error.code}]: ${error.message}\n`);
      return 1;
    }
    if (error instanceof Error && "code" in error && error.code === "ENOENT") {
      process.stderr.write(`error[NOT_FOUND]: ${error.message}\n`);
      return 1;
    }
    throw error;
  }
  process.stdout.write(`wrote ${job.output}\n`);
  return 0;
}

if (import.meta.url === pathToFileURL(process.argv[1] ?? "").href) {
  process.exit(main(process.argv.slice(2)));
}
