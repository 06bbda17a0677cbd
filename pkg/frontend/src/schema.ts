import Papa from "papaparse";

/** Exact header the results CSV must carry, in order. */
export const EXPECTED_COLUMNS = [
  "algo",
  "lr",
  "seed",
  "t",
  "f_gap",
  "eps_sq",
  "iterate_norm",
  "samples_used",
  "diverged",
] as const;

export interface ResultRow {
  algo: string;
  lr: number;
  seed: number;
  t: number;
  f_gap: number;
  eps_sq: number;
  iterate_norm: number;
  samples_used: number;
  diverged: boolean;
}

export class SchemaError extends Error {}

function parseFloatField(raw: string, column: string, line: number): number {
  const trimmed = raw.trim();
  if (trimmed === "inf") return Infinity;
  if (trimmed === "-inf") return -Infinity;
  if (trimmed === "nan" || trimmed === "") return NaN;
  const value = Number(trimmed);
  if (Number.isNaN(value)) {
    throw new SchemaError(
      `line ${line}: column '${column}' is not numeric: '${raw}'`,
    );
  }
  return value;
}

function parseIntField(raw: string, column: string, line: number): number {
  const value = parseFloatField(raw, column, line);
  if (!Number.isInteger(value)) {
    throw new SchemaError(
      `line ${line}: column '${column}' is not an integer: '${raw}'`,
    );
  }
  return value;
}

/**
 * Parse the results CSV text into typed rows.
 *
 * The header must match the expected schema exactly; the error message
 * names the first column that deviates (missing, extra, or out of order).
 * A schema-valid file with zero data rows raises "no rows".
 */
export function parseResults(csvText: string): ResultRow[] {
  const parsed = Papa.parse<string[]>(csvText.trim(), {
    skipEmptyLines: true,
  });
  if (parsed.data.length === 0) {
    throw new SchemaError("empty file: no header");
  }
  const header = parsed.data[0].map((h) => h.trim());
  for (let i = 0; i < EXPECTED_COLUMNS.length; i++) {
    if (i >= header.length) {
      throw new SchemaError(`schema mismatch: missing column '${EXPECTED_COLUMNS[i]}'`);
    }
    if (header[i] !== EXPECTED_COLUMNS[i]) {
      throw new SchemaError(
        `schema mismatch: expected column '${EXPECTED_COLUMNS[i]}' at position ${i + 1}, found '${header[i]}'`,
      );
    }
  }
  if (header.length > EXPECTED_COLUMNS.length) {
    throw new SchemaError(
      `schema mismatch: unexpected column '${header[EXPECTED_COLUMNS.length]}'`,
    );
  }
  const rows: ResultRow[] = [];
  for (let r = 1; r < parsed.data.length; r++) {
    const fields = parsed.data[r];
    const line = r + 1;
    if (fields.length !== EXPECTED_COLUMNS.length) {
      throw new SchemaError(
        `line ${line}: expected ${EXPECTED_COLUMNS.length} fields, found ${fields.length}`,
      );
    }
    const divergedRaw = fields[8].trim().toLowerCase();
    if (!["true", "false", "0", "1"].includes(divergedRaw)) {
      throw new SchemaError(
        `line ${line}: column 'diverged' must be true/false or 0/1: '${fields[8]}'`,
      );
    }
    rows.push({
      algo: fields[0].trim(),
      lr: parseFloatField(fields[1], "lr", line),
      seed: parseIntField(fields[2], "seed", line),
      t: parseIntField(fields[3], "t", line),
      f_gap: parseFloatField(fields[4], "f_gap", line),
      eps_sq: parseFloatField(fields[5], "eps_sq", line),
      iterate_norm: parseFloatField(fields[6], "iterate_norm", line),
      samples_used: parseIntField(fields[7], "samples_used", line),
      diverged: divergedRaw === "true" || divergedRaw === "1",
    });
  }
  if (rows.length === 0) {
    throw new SchemaError("no rows");
  }
  return rows;
}
