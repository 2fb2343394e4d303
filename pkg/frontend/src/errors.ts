/** Render errors carry a short machine-readable code for CLI consumers. */

export type PlotErrorCode =
  | "SCHEMA_MISMATCH"
  | "MISSING_COLUMN"
  | "EMPTY_INPUT"
  | "BAD_KIND"
  | "BAD_ARGS";

export class PlotError extends Error {
  readonly code: PlotErrorCode;

  constructor(code: PlotErrorCode, message: string) {
    super(message);
    this.code = code;
    this.name = "PlotError";
  }
}
