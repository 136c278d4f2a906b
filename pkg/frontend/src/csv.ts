/**
 * Reader for the simulator's CSV contract: a commented header block
 * (tool version, kind, config hash, embedded config, metadata, column
 * semantics) followed by a header row and data rows.
 *
 * Column layouts by kind:
 *   trace:         t,<unit>,S         (unit string repeated per row)
 *   scan:          param,<unit>,S
 *   direction-map: theta,deg,phi,deg,S
 *   dips:          center,depth,width (unit in the meta block)
 */

export interface CsvDocument {
  kind: string;
  columns: string[];
  rows: string[][];
  config: Record<string, unknown> | null;
  meta: Record<string, unknown>;
}

export interface Trace {
  times: number[];
  values: number[];
  unit: string;
  meta: Record<string, unknown>;
}

export interface Scan {
  grid: number[];
  values: number[];
  unit: string;
  meta: Record<string, unknown>;
}

export interface DirectionMap {
  theta: number[];
  phi: number[];
  /** values[i][j] for theta[i], phi[j] */
  values: number[][];
  meta: Record<string, unknown>;
}

export interface Dip {
  center: number;
  depth: number;
  width: number;
}

export interface DipReport {
  dips: Dip[];
  unit: string;
  meta: Record<string, unknown>;
}

export function parseDocument(text: string): CsvDocument {
  let kind = "";
  let config: Record<string, unknown> | null = null;
  let meta: Record<string, unknown> = {};
  let columns: string[] | null = null;
  const rows: string[][] = [];
  for (const raw of text.split(/\r?\n/)) {
    const line = raw.trim();
    if (!line) continue;
    if (line.startsWith("#")) {
      const body = line.slice(1).trim();
      if (body.startsWith("kind:")) kind = body.slice(5).trim();
      else if (body.startsWith("config:")) {
        config = JSON.parse(body.slice(7).trim());
      } else if (body.startsWith("meta:")) {
        meta = JSON.parse(body.slice(5).trim());
      }
      continue;
    }
    const fields = line.split(",");
    if (columns === null) columns = fields;
    else rows.push(fields);
  }
  if (columns === null) {
    throw new Error("no CSV header row found");
  }
  return { kind, columns, rows, config, meta };
}

function requireKind(doc: CsvDocument, expected: string): void {
  if (doc.kind !== expected) {
    throw new Error(`expected kind=${expected}, found kind=${doc.kind || "?"}`);
  }
}

const TIME_UNITS = new Set(["ms", "us", "s"]);
const FREQ_UNITS = new Set(["kHz", "MHz", "GHz"]);

export function parseTrace(text: string): Trace {
  const doc = parseDocument(text);
  requireKind(doc, "trace");
  const unit = doc.columns[1];
  if (!TIME_UNITS.has(unit)) {
    throw new Error(`trace unit ${unit} is not a time unit`);
  }
  if (doc.rows.length === 0) {
    throw new Error("trace holds no samples");
  }
  const times = doc.rows.map((r) => Number(r[0]));
  const values = doc.rows.map((r) => Number(r[2]));
  return { times, values, unit, meta: doc.meta };
}

export function parseScan(text: string): Scan {
  const doc = parseDocument(text);
  requireKind(doc, "scan");
  const unit = doc.columns[1];
  if (!FREQ_UNITS.has(unit)) {
    throw new Error(`scan unit ${unit} is not a frequency unit`);
  }
  if (doc.rows.length === 0) {
    throw new Error("scan holds no samples");
  }
  return {
    grid: doc.rows.map((r) => Number(r[0])),
    values: doc.rows.map((r) => Number(r[2])),
    unit,
    meta: doc.meta,
  };
}

export function parseDirectionMap(text: string): DirectionMap {
  const doc = parseDocument(text);
  requireKind(doc, "direction-map");
  if (doc.columns[1] !== "deg" || doc.columns[3] !== "deg") {
    throw new Error("direction map must carry angles in degrees");
  }
  const theta: number[] = [];
  const phi: number[] = [];
  for (const row of doc.rows) {
    const t = Number(row[0]);
    const p = Number(row[2]);
    if (theta.length === 0 || t !== theta[theta.length - 1]) theta.push(t);
    if (theta.length === 1) phi.push(p);
  }
  const nPhi = phi.length;
  if (nPhi === 0 || doc.rows.length !== theta.length * nPhi) {
    throw new Error("direction map grid is not rectangular");
  }
  const values: number[][] = [];
  for (let i = 0; i < theta.length; i++) {
    values.push(
      doc.rows.slice(i * nPhi, (i + 1) * nPhi).map((r) => Number(r[4])),
    );
  }
  return { theta, phi, values, meta: doc.meta };
}

export function parseDips(text: string): DipReport {
  const doc = parseDocument(text);
  requireKind(doc, "dips");
  const unit = String(doc.meta["unit"] ?? "");
  return {
    dips: doc.rows.map((r) => ({
      center: Number(r[0]),
      depth: Number(r[1]),
      width: Number(r[2]),
    })),
    unit,
    meta: doc.meta,
  };
}
