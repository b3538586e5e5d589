/**
 * render --kind <figure> --in rows.csv --meta report.json --out dir/
 *
 * Writes <out>/<name>.png and <out>/<name>.svg (name defaults to the
 * figure kind).  Exit codes: 0 success, 2 usage error, 1 data/IO error.
 * Rendering is fully deterministic: the same inputs produce
 * byte-identical PNG and SVG files on every run.
 */

import * as fs from "fs";
import * as path from "path";
import { FIGURE_KINDS, FigureKind, buildFigure } from "./figures";
import { encodePng, renderRaster } from "./raster";
import { EmptyReportError, SchemaError, parseReportJson, parseRowsCsv } from "./schema";
import { renderSvg } from "./svg";

const USAGE =
  "usage: render --kind <" +
  FIGURE_KINDS.join("|") +
  "> --in rows.csv --meta report.json --out dir/ [--title T] [--name base]";

export interface RenderArgs {
  kind: FigureKind;
  input: string;
  meta: string;
  out: string;
  title?: string;
  name?: string;
}

export class UsageError extends Error {}

export function parseArgs(argv: string[]): RenderArgs {
  const args = [...argv];
  if (args[0] === "render") args.shift();
  const flags = new Map<string, string>();
  for (let i = 0; i < args.length; i += 2) {
    const key = args[i];
    if (!key.startsWith("--")) {
      throw new UsageError(`unexpected argument "${key}"`);
    }
    const value = args[i + 1];
    if (value === undefined) {
      throw new UsageError(`flag ${key} needs a value`);
    }
    flags.set(key.slice(2), value);
  }
  for (const key of flags.keys()) {
    if (!["kind", "in", "meta", "out", "title", "name"].includes(key)) {
      throw new UsageError(`unknown flag --${key}`);
    }
  }
  const kind = flags.get("kind");
  const input = flags.get("in");
  const meta = flags.get("meta");
  const out = flags.get("out");
  if (!kind || !input || !meta || !out) {
    throw new UsageError("flags --kind, --in, --meta and --out are all required");
  }
  if (!(FIGURE_KINDS as readonly string[]).includes(kind)) {
    throw new UsageError(`unknown figure kind "${kind}"`);
  }
  return {
    kind: kind as FigureKind,
    input,
    meta,
    out,
    title: flags.get("title"),
    name: flags.get("name"),
  };
}

export function renderToFiles(args: RenderArgs): { png: string; svg: string } {
  const rows = parseRowsCsv(fs.readFileSync(args.input, "utf-8"));
  const report = parseReportJson(fs.readFileSync(args.meta, "utf-8"));
  const scene = buildFigure(args.kind, rows, report, args.title);
  // build first, write after: a schema or empty-report error leaves no files
  fs.mkdirSync(args.out, { recursive: true });
  const base = path.join(args.out, args.name ?? args.kind);
  const pngPath = `${base}.png`;
  const svgPath = `${base}.svg`;
  fs.writeFileSync(pngPath, encodePng(renderRaster(scene)));
  fs.writeFileSync(svgPath, renderSvg(scene), "utf-8");
  return { png: pngPath, svg: svgPath };
}

export function main(argv: string[]): number {
  let args: RenderArgs;
  try {
    args = parseArgs(argv);
  } catch (err) {
    if (err instanceof UsageError) {
      process.stderr.write(`error: ${err.message}\n${USAGE}\n`);
      return 2;
    }
    throw err;
  }
  try {
    const { png, svg } = renderToFiles(args);
    process.stdout.write(`wrote ${png} and ${svg}\n`);
    return 0;
  } catch (err) {
    if (err instanceof SchemaError || err instanceof EmptyReportError) {
      process.stderr.write(`error: ${err.message}\n`);
      return 1;
    }
    if ((err as NodeJS.ErrnoException).code) {
      process.stderr.write(`error: ${(err as Error).message}\n`);
      return 1;
    }
    throw err;
  }
}

if (require.main === module) {
  process.exit(main(process.argv.slice(2)));
}
