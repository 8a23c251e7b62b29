/**
 * Minimal reader for the simulator's CSV outputs: RFC-4180 style, header
 * row, all-numeric cells, LF line endings.
 */

export class SchemaError extends Error {}

export interface Table {
  columns: string[];
  rows: number[][];
}

export function parseCsv(text: string, path = "<csv>"): Table {
  const lines = text.split("\n").filter((ln) => ln.length > 0);
  if (lines.length === 0) {
    throw new SchemaError(`${path}: empty CSV (no header row)`);
  }
  const columns = lines[0].split(",").map((c) => c.trim());
  const rows: number[][] = [];
  for (let i = 1; i < lines.length; i++) {
    const cells = lines[i].split(",");
    if (cells.length !== columns.length) {
      throw new SchemaError(
        `${path}: row ${i} has ${cells.length} cells, expected ${columns.length}`
      );
    }
    rows.push(cells.map(Number));
  }
  return { columns, rows };
}

/** Column values by name; the error names the missing column. */
export function column(table: Table, name: string, path = "<csv>"): number[] {
  const idx = table.columns.indexOf(name);
  if (idx < 0) {
    throw new SchemaError(
      `${path}: missing required column "${name}" (have: ${table.columns.join(", ")})`
    );
  }
  return table.rows.map((r) => r[idx]);
}

export function requireColumns(table: Table, names: string[], path = "<csv>"): void {
  for (const name of names) {
    column(table, name, path);
  }
  if (table.rows.length === 0) {
    throw new SchemaError(`${path}: no data rows`);
  }
}
