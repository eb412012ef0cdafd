import { readFileSync } from "node:fs";

/** A parsed CSV row: numeric values plus the raw cell text. */
export interface Row {
  values: Record<string, number>;
  raw: Record<string, string>;
}

export interface Table {
  columns: string[];
  rows: Row[];
}

/** Raised when a CSV does not match the schema its panel kind requires. */
export class SchemaError extends Error {
  readonly column: string;

  constructor(message: string, column: string) {
    super(message);
    this.name = "SchemaError";
    this.column = column;
  }
}

/** Column contracts per CSV schema, as written by the ridgelab CLI. */
export const SCHEMAS: Record<string, string[]> = {
  curve: ["lambda", "mean_nmse", "std_err", "n_rep", "excluded"],
  dimsweep: ["p", "risk_minnorm", "risk_opt", "lambda_opt"],
  heatmap: ["n", "p", "lambda_opt", "boundary_hit"],
  sweep: ["q", "risk_trunc", "risk_full", "lambda_opt", "excluded"],
  derivative: ["p", "derivative", "std_err"],
};

/** Maps a manifest panel kind onto the CSV schema it consumes. */
export const KIND_SCHEMA: Record<string, string> = {
  curve: "curve",
  "dimsweep-risk": "dimsweep",
  "dimsweep-lambda": "dimsweep",
  heatmap: "heatmap",
  sweep: "sweep",
  "sweep-lambda": "sweep",
  derivative: "derivative",
};

/**
 * Reads a CSV artifact and validates it against a named schema.
 *
 * Values are parsed as numbers but the raw text of each cell is kept so
 * annotations can quote the file verbatim. NaN cells ("nan") are allowed;
 * anything else non-numeric is a schema violation.
 */
export function loadCsv(path: string, schema: string): Table {
  const required = SCHEMAS[schema];
  if (!required) throw new SchemaError(`unknown schema "${schema}"`, "");
  const text = readFileSync(path, "utf-8");
  const lines = text.split("\n").filter((line) => line.length > 0);
  if (lines.length === 0) throw new SchemaError(`${path}: empty file`, required[0]);
  const columns = lines[0].split(",");
  for (const col of required) {
    if (!columns.includes(col)) {
      throw new SchemaError(`${path}: missing column "${col}"`, col);
    }
  }
  if (lines.length === 1) {
    throw new SchemaError(`${path}: no data rows`, required[0]);
  }
  const rows: Row[] = [];
  for (const line of lines.slice(1)) {
    const cells = line.split(",");
    if (cells.length !== columns.length) {
      throw new SchemaError(`${path}: ragged row "${line}"`, columns[0]);
    }
    const values: Record<string, number> = {};
    const raw: Record<string, string> = {};
    columns.forEach((col, i) => {
      raw[col] = cells[i];
      const v = cells[i] === "nan" ? NaN : Number(cells[i]);
      if (Number.isNaN(v) && cells[i] !== "nan") {
        throw new SchemaError(`${path}: non-numeric value "${cells[i]}" in "${col}"`, col);
      }
      values[col] = v;
    });
    rows.push({ values, raw });
  }
  return { columns, rows };
}

/** Index of the row minimizing a column, ignoring NaN entries. */
export function argminRow(table: Table, column: string): number {
  let best = -1;
  for (let i = 0; i < table.rows.length; i++) {
    const v = table.rows[i].values[column];
    if (Number.isNaN(v)) continue;
    if (best < 0 || v < table.rows[best].values[column]) best = i;
  }
  if (best < 0) {
    throw new SchemaError(`no finite values in column "${column}"`, column);
  }
  return best;
}
