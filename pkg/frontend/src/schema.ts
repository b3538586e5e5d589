/**
 * Parsing and validation of the fractal-lab report formats.
 *
 * Two inputs exist: the rows CSV (replica,seed,flag,stat_name,value) and
 * the report JSON (config echo, aggregates, extras).  Figures read these
 * verbatim and never recompute statistics, so a figure can never disagree
 * with its report.
 */

export class SchemaError extends Error {}
export class EmptyReportError extends Error {}

export interface Row {
  replica: number;
  seed: string; // 64-bit; kept as text so no precision is lost
  flag: string;
  stat: string;
  value: number;
}

export const CSV_COLUMNS = ["replica", "seed", "flag", "stat_name", "value"];

export function parseRowsCsv(text: string): Row[] {
  const lines = text.split(/\r?\n/).filter((line) => line.length > 0);
  if (lines.length === 0) {
    throw new EmptyReportError("empty report: no CSV content");
  }
  const header = lines[0].split(",");
  for (let i = 0; i < CSV_COLUMNS.length; i++) {
    if (header[i] !== CSV_COLUMNS[i]) {
      throw new SchemaError(
        `rows CSV: expected column ${i + 1} to be "${CSV_COLUMNS[i]}", got "${header[i] ?? ""}"`,
      );
    }
  }
  if (lines.length === 1) {
    throw new EmptyReportError("empty report: CSV has a header but no rows");
  }
  const rows: Row[] = [];
  for (let ln = 1; ln < lines.length; ln++) {
    const parts = lines[ln].split(",");
    if (parts.length !== 5) {
      throw new SchemaError(`rows CSV line ${ln + 1}: expected 5 fields, got ${parts.length}`);
    }
    const replica = Number(parts[0]);
    const value = Number(parts[4]);
    if (!Number.isInteger(replica)) {
      throw new SchemaError(`rows CSV line ${ln + 1}: column "replica" is not an integer`);
    }
    if (!Number.isFinite(value)) {
      throw new SchemaError(`rows CSV line ${ln + 1}: column "value" is not a number`);
    }
    rows.push({ replica, seed: parts[1], flag: parts[2], stat: parts[3], value });
  }
  return rows;
}

export interface Aggregate {
  mean: number;
  std: number | null;
  count: number;
}

export interface Report {
  schema: string;
  kind: string;
  config: Record<string, unknown>;
  aggregates: Record<string, Aggregate>;
  extras: Record<string, any>;
  rows_used: number;
  rows_flagged: number;
  toolkit_version: string;
  prng_version: string;
}

export function parseReportJson(text: string): Report {
  let doc: any;
  try {
    doc = JSON.parse(text);
  } catch (err) {
    throw new SchemaError(`report JSON does not parse: ${(err as Error).message}`);
  }
  for (const field of ["schema", "kind", "aggregates", "extras"]) {
    if (!(field in doc)) {
      throw new SchemaError(`report JSON: missing field "${field}"`);
    }
  }
  if (doc.schema !== "fractal-lab/report-v1") {
    throw new SchemaError(`report JSON: unknown schema "${doc.schema}"`);
  }
  return doc as Report;
}

/** Values of one statistic, flagged rows excluded, replica order. */
export function statValues(rows: Row[], stat: string): number[] {
  const out = rows.filter((r) => r.stat === stat && r.flag === "").map((r) => r.value);
  return out;
}

/** level -> count pairs from count_level_NN stats (first replica only). */
export function levelCounts(rows: Row[]): Array<{ level: number; count: number }> {
  const first = rows.length ? rows[0].replica : 0;
  const out: Array<{ level: number; count: number }> = [];
  for (const row of rows) {
    if (row.replica !== first || row.flag !== "") continue;
    const match = /^count_level_(\d+)$/.exec(row.stat);
    if (match) {
      out.push({ level: Number(match[1]), count: row.value });
    }
  }
  out.sort((a, b) => a.level - b.level);
  if (out.length === 0) {
    throw new SchemaError('rows CSV: no "count_level_NN" statistics found for a log-log figure');
  }
  return out;
}
