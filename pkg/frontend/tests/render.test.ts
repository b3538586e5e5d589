import { describe, expect, it } from "vitest";
import * as fs from "fs";
import * as os from "os";
import * as path from "path";
import { main, parseArgs, renderToFiles } from "../src/cli";

const FIXTURES = path.join(__dirname, "fixtures");

function tmpdir(): string {
  return fs.mkdtempSync(path.join(os.tmpdir(), "flplots-"));
}

describe("parseArgs", () => {
  it("accepts the documented grammar", () => {
    const args = parseArgs([
      "render", "--kind", "loglog_fit", "--in", "r.csv", "--meta", "r.json", "--out", "fig/",
    ]);
    expect(args.kind).toBe("loglog_fit");
    expect(args.out).toBe("fig/");
  });

  it("rejects unknown kinds and flags", () => {
    expect(() => parseArgs(["--kind", "pie", "--in", "a", "--meta", "b", "--out", "c"])).toThrow();
    expect(() => parseArgs(["--bogus", "1"])).toThrow();
    expect(() => parseArgs(["--kind"])).toThrow();
  });
});

describe("renderToFiles", () => {
  it("writes pixel-identical PNG and identical SVG on repeated runs", () => {
    const out1 = tmpdir();
    const out2 = tmpdir();
    for (const out of [out1, out2]) {
      renderToFiles({
        kind: "loglog_fit",
        input: path.join(FIXTURES, "cantor_rows.csv"),
        meta: path.join(FIXTURES, "cantor_report.json"),
        out,
      });
    }
    const png1 = fs.readFileSync(path.join(out1, "loglog_fit.png"));
    const png2 = fs.readFileSync(path.join(out2, "loglog_fit.png"));
    expect(png1.equals(png2)).toBe(true);
    const svg1 = fs.readFileSync(path.join(out1, "loglog_fit.svg"), "utf-8");
    const svg2 = fs.readFileSync(path.join(out2, "loglog_fit.svg"), "utf-8");
    expect(svg1).toBe(svg2);
    expect(svg1).toContain("SLOPE = 0.630930");
  });

  it("renders every figure kind from its fixture", () => {
    const cases: Array<[string, string]> = [
      ["loglog_fit", "cantor"],
      ["threshold_profile", "cantor"],
      ["perkins_convergence", "perkins"],
      ["doubling_hist", "doubling"],
      ["levy_qq", "levy"],
    ];
    const out = tmpdir();
    for (const [kind, fixture] of cases) {
      const files = renderToFiles({
        kind: kind as any,
        input: path.join(FIXTURES, `${fixture}_rows.csv`),
        meta: path.join(FIXTURES, `${fixture}_report.json`),
        out,
      });
      expect(fs.statSync(files.png).size).toBeGreaterThan(500);
      expect(fs.statSync(files.svg).size).toBeGreaterThan(500);
    }
  });

  it("writes nothing when the CSV is empty", () => {
    const out = tmpdir();
    const empty = path.join(out, "empty.csv");
    fs.writeFileSync(empty, "replica,seed,flag,stat_name,value\n");
    expect(() =>
      renderToFiles({
        kind: "loglog_fit",
        input: empty,
        meta: path.join(FIXTURES, "cantor_report.json"),
        out: path.join(out, "fig"),
      }),
    ).toThrow(/empty report/);
    expect(fs.existsSync(path.join(out, "fig", "loglog_fit.png"))).toBe(false);
    expect(fs.existsSync(path.join(out, "fig", "loglog_fit.svg"))).toBe(false);
  });
});

describe("main", () => {
  it("returns 0 on success, 2 on usage error, 1 on data error", () => {
    const out = tmpdir();
    const ok = main([
      "render",
      "--kind", "loglog_fit",
      "--in", path.join(FIXTURES, "cantor_rows.csv"),
      "--meta", path.join(FIXTURES, "cantor_report.json"),
      "--out", out,
    ]);
    expect(ok).toBe(0);
    expect(main(["--kind", "nope"])).toBe(2);
    expect(
      main([
        "--kind", "loglog_fit",
        "--in", path.join(out, "missing.csv"),
        "--meta", path.join(FIXTURES, "cantor_report.json"),
        "--out", out,
      ]),
    ).toBe(1);
  });
});
