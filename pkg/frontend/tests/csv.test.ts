import { describe, expect, it } from "vitest";
import { fileURLToPath } from "node:url";
import { PlotError, parseReport, validateHeader, SCHEMAS } from "../src/index.js";

const fixture = (name: string) =>
  fileURLToPath(new URL(`../fixtures/${name}`, import.meta.url));

describe("schema validation", () => {
  it("accepts the documented headers", () => {
    for (const kind of ["curve", "heatmap", "phase"] as const) {
      expect(() => validateHeader(kind, [...SCHEMAS[kind]])).not.toThrow();
    }
  });

  it("rejects a renamed column as SCHEMA_MISMATCH", () => {
    expect.assertions(2);
    try {
      parseReport("curve", fixture("curve_bad_schema.csv"));
    } catch (error) {
      expect(error).toBeInstanceOf(PlotError);
      expect((error as PlotError).code).toBe("SCHEMA_MISMATCH");
    }
  });

  it("rejects dropped columns as MISSING_COLUMN", () => {
    try {
      parseReport("heatmap", fixture("heatmap_missing_column.csv"));
      expect.unreachable();
    } catch (error) {
      expect((error as PlotError).code).toBe("MISSING_COLUMN");
    }
  });

  it("rejects reordered columns as SCHEMA_MISMATCH", () => {
    const reordered = [...SCHEMAS.heatmap].reverse();
    try {
      validateHeader("heatmap", reordered);
      expect.unreachable();
    } catch (error) {
      expect((error as PlotError).code).toBe("SCHEMA_MISMATCH");
    }
  });

  it("rejects empty files and header-only files as EMPTY_INPUT", () => {
    for (const name of ["empty.csv", "curve_header_only.csv"]) {
      try {
        parseReport("curve", fixture(name));
        expect.unreachable();
      } catch (error) {
        expect((error as PlotError).code).toBe("EMPTY_INPUT");
      }
    }
  });

  it("parses numbers, empty cells and label columns", () => {
    const rows = parseReport("curve", fixture("curve_fig3a.csv"));
    expect(rows.length).toBeGreaterThan(50);
    expect(rows[0].phase).toBe(1);
    expect(typeof rows[0].eg1_sim).toBe("number");
    // Task-2 theory is undefined while task 1 trains.
    expect(Number.isNaN(rows[0].eg2_theory as number)).toBe(true);

    const heat = parseReport("heatmap", fixture("heatmap_fig4.csv"));
    expect(heat[0].status).toBe("ok");
  });
});
