import { describe, expect, it } from "vitest";
import * as fs from "fs";
import * as path from "path";
import { buildFigure } from "../src/figures";
import { SchemaError, parseReportJson, parseRowsCsv } from "../src/schema";
import { sceneTexts } from "../src/scene";

const FIXTURES = path.join(__dirname, "fixtures");

function load(name: string) {
  return {
    rows: parseRowsCsv(fs.readFileSync(path.join(FIXTURES, `${name}_rows.csv`), "utf-8")),
    report: parseReportJson(fs.readFileSync(path.join(FIXTURES, `${name}_report.json`), "utf-8")),
  };
}

describe("loglog_fit", () => {
  it("annotates the slope from the report JSON to six decimals", () => {
    const { rows, report } = load("cantor");
    const scene = buildFigure("loglog_fit", rows, report);
    const expected = `SLOPE = ${(report.extras.estimate.slope as number).toFixed(6)}`;
    expect(sceneTexts(scene)).toContain(expected);
    expect(expected).toBe("SLOPE = 0.630930");
  });

  it("requires count_level rows", () => {
    const { report } = load("cantor");
    const rows = parseRowsCsv("replica,seed,flag,stat_name,value\n0,1,,dim_slope,0.5\n");
    expect(() => buildFigure("loglog_fit", rows, report)).toThrowError(/count_level_NN/);
  });
});

describe("threshold_profile", () => {
  it("renders the beta grid from extras", () => {
    const { rows, report } = load("cantor");
    const scene = buildFigure("threshold_profile", rows, report);
    expect(scene.ops.length).toBeGreaterThan(20);
    expect(sceneTexts(scene).some((t) => t.includes("CRITICAL BETA"))).toBe(true);
  });

  it("fails with a named extras field when absent", () => {
    const { rows, report } = load("levy");
    expect(() => buildFigure("threshold_profile", rows, report)).toThrowError(
      /"threshold_profile"/,
    );
  });
});

describe("perkins_convergence", () => {
  it("plots one point per delta aggregate", () => {
    const { rows, report } = load("perkins");
    const scene = buildFigure("perkins_convergence", rows, report);
    const discs = scene.ops.filter((op) => op.kind === "disc");
    expect(discs.length).toBe(3);
  });
});

describe("doubling_hist", () => {
  it("renders bars and the target line", () => {
    const { rows, report } = load("doubling");
    const scene = buildFigure("doubling_hist", rows, report);
    expect(scene.ops.some((op) => op.kind === "rect")).toBe(true);
    expect(sceneTexts(scene).some((t) => t.startsWith("TARGET ="))).toBe(true);
  });

  it("rejects reports without dim_slope rows", () => {
    const { report } = load("doubling");
    const rows = parseRowsCsv("replica,seed,flag,stat_name,value\n0,1,sparse,dim_slope,0.1\n");
    expect(() => buildFigure("doubling_hist", rows, report)).toThrowError(SchemaError);
  });
});

describe("levy_qq", () => {
  it("draws matched quantiles with the KS annotation", () => {
    const { rows, report } = load("levy");
    const scene = buildFigure("levy_qq", rows, report);
    const discs = scene.ops.filter((op) => op.kind === "disc");
    expect(discs.length).toBeGreaterThan(10);
    expect(sceneTexts(scene).some((t) => t.startsWith("KS ="))).toBe(true);
  });
});
