import { readFileSync } from "node:fs";
import Papa from "papaparse";

export type PlotKind = "bands" | "tau-scaling" | "clusters" | "thomas";

export interface PlotSpec {
  kind: PlotKind;
  input: string;
  output: string;
  width?: number;
  height?: number;
  /** thomas overlay: draw sigma = tau - overlayOffset when set */
  overlayOffset?: number;
  logLog?: boolean;
}

export class SchemaError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "SchemaError";
  }
}

/** Required CSV columns per plot kind; mismatches name the missing column. */
export const REQUIRED_COLUMNS: Record<PlotKind, string[]> = {
  bands: ["theta_1", "band_index", "re_lambda", "im_lambda"],
  "tau-scaling": ["tau", "value"],
  clusters: ["m", "constant"],
  thomas: ["tau", "sigma_min", "truncation_J", "truncation_K"],
};

export interface Table {
  columns: string[];
  rows: Record<string, number>[];
}

export function loadTable(path: string, kind: PlotKind): Table {
  const text = readFileSync(path, "utf8");
  const parsed = Papa.parse<Record<string, string>>(text.trim(), {
    header: true,
    skipEmptyLines: true,
  });
  if (parsed.errors.length > 0) {
    throw new SchemaError(`${path}: ${parsed.errors[0].message}`);
  }
  const columns = parsed.meta.fields ?? [];
  for (const col of REQUIRED_COLUMNS[kind]) {
    if (!columns.includes(col)) {
      throw new SchemaError(
        `${path}: missing column '${col}' required by plot kind '${kind}'`
      );
    }
  }
  const rows = parsed.data.map((raw) => {
    const row: Record<string, number> = {};
    for (const col of columns) {
      const v = raw[col];
      row[col] = v === "true" ? 1 : v === "false" ? 0 : Number(v);
    }
    return row;
  });
  return { columns, rows };
}

export function parseSpec(doc: unknown): PlotSpec {
  const d = doc as Partial<PlotSpec>;
  const kinds: PlotKind[] = ["bands", "tau-scaling", "clusters", "thomas"];
  if (!d || !d.kind || !kinds.includes(d.kind)) {
    throw new SchemaError(`spec. kind must be one of ${kinds.join(", ")}`);
  }
  if (!d.input || !d.output) {
    throw new SchemaError("spec: 'input' and 'output' paths are required");
  }
  return {
    kind: d.kind,
    input: d.input,
    output: d.output,
    width: d.width ?? 800,
    height: d.height ?? 560,
    overlayOffset: d.overlayOffset,
    logLog: d.logLog,
  };
}
