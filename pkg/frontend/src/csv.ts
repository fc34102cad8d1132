import * as fs from "node:fs";
import * as path from "node:path";

/** One snapshot CSV parsed into column-major grids keyed by field name. */
export interface SnapshotTable {
  nx: number;
  ny: number;
  /** cell-center coordinates in meters */
  x: Float64Array;
  y: Float64Array;
  fields: Map<string, Float64Array>; // index = i * ny + j
  step: number;
  path: string;
}

export const SNAPSHOT_COLUMNS = ["i", "j", "x", "y", "n", "T", "ux", "uy", "p"];

function splitCsv(text: string): string[][] {
  return text
    .split(/\r?\n/)
    .filter((line) => line.length > 0)
    .map((line) => line.split(","));
}

export function stepFromFilename(file: string): number {
  const m = /fields_(\d+)\.csv$/.exec(path.basename(file));
  if (!m) throw new Error(`not a snapshot filename: ${file}`);
  return parseInt(m[1], 10);
}

export function parseSnapshot(file: string): SnapshotTable {
  const rows = splitCsv(fs.readFileSync(file, "utf8"));
  const header = rows[0];
  if (header.join(",") !== SNAPSHOT_COLUMNS.join(",")) {
    throw new Error(`unexpected snapshot header in ${file}: ${header.join(",")}`);
  }
  const body = rows.slice(1);
  let nx = 0;
  let ny = 0;
  for (const r of body) {
    nx = Math.max(nx, parseInt(r[0], 10) + 1);
    ny = Math.max(ny, parseInt(r[1], 10) + 1);
  }
  if (body.length !== nx * ny) {
    throw new Error(`snapshot ${file}: ${body.length} rows for ${nx}x${ny} lattice`);
  }
  const x = new Float64Array(nx);
  const y = new Float64Array(ny);
  const fields = new Map<string, Float64Array>();
  for (const name of ["n", "T", "ux", "uy", "p"]) {
    fields.set(name, new Float64Array(nx * ny));
  }
  const seen = new Uint8Array(nx * ny);
  for (const r of body) {
    const i = parseInt(r[0], 10);
    const j = parseInt(r[1], 10);
    const k = i * ny + j;
    seen[k] = 1;
    x[i] = Number(r[2]);
    y[j] = Number(r[3]);
    fields.get("n")![k] = Number(r[4]);
    fields.get("T")![k] = Number(r[5]);
    fields.get("ux")![k] = Number(r[6]);
    fields.get("uy")![k] = Number(r[7]);
    fields.get("p")![k] = Number(r[8]);
  }
  for (let k = 0; k < nx * ny; k++) {
    if (!seen[k]) throw new Error(`snapshot ${file}: missing cell index ${k}`);
  }
  return { nx, ny, x, y, fields, step: stepFromFilename(file), path: file };
}

/** diagnostics.csv parsed into numeric columns by header name. */
export interface DiagnosticsTable {
  columns: Map<string, Float64Array>;
  nRows: number;
}

export function parseDiagnostics(file: string): DiagnosticsTable {
  const rows = splitCsv(fs.readFileSync(file, "utf8"));
  const header = rows[0];
  const body = rows.slice(1);
  const columns = new Map<string, Float64Array>();
  header.forEach((name, c) => {
    const col = new Float64Array(body.length);
    for (let r = 0; r < body.length; r++) col[r] = Number(body[r][c]);
    columns.set(name, col);
  });
  return { columns, nRows: body.length };
}

export function listSnapshots(runDir: string): string[] {
  return fs
    .readdirSync(runDir)
    .filter((f) => /^fields_\d+\.csv$/.test(f))
    .sort()
    .map((f) => path.join(runDir, f));
}
