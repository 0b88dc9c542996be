/**
 * The topoprint/1 bundle schema and its strict parser.
 *
 * The viewer performs no topological computation: layouts, hole counts,
 * region tags and the watertight verdict are all read from the bundle.
 */

export type Region = "inside" | "outside";

export interface BundleNode {
  id: number;
  slice: number;
  component: number;
  holes: number;
  layout: [number, number];
  members: number[];
  region?: Region;
}

export interface BundleGraph {
  label: string;
  nodes: BundleNode[];
  edges: [number, number][];
  points?: [number, number, number][];
}

export interface Bundle {
  version: string;
  config: Record<string, unknown>;
  points: [number, number, number][];
  filled_graph: BundleGraph;
  empty_graph: BundleGraph;
  watertight: boolean;
  timings: Record<string, number> | null;
}

export class BundleSchemaError extends Error {
  readonly field: string;

  constructor(field: string, message: string) {
    super(`${field}: ${message}`);
    this.field = field;
  }
}

const TOP_KEYS = ["version", "config", "points", "filled_graph",
  "empty_graph", "watertight", "timings"];
const NODE_KEYS = ["id", "slice", "component", "holes", "layout", "members"];
const EMPTY_NODE_KEYS = [...NODE_KEYS, "region"];

function isRecord(value: unknown): value is Record<string, unknown> {
  return typeof value === "object" && value !== null && !Array.isArray(value);
}

function checkKeys(obj: Record<string, unknown>, allowed: string[],
                   field: string): void {
  for (const key of allowed) {
    if (!(key in obj)) throw new BundleSchemaError(field, `missing key '${key}'`);
  }
  for (const key of Object.keys(obj)) {
    if (!allowed.includes(key)) {
      throw new BundleSchemaError(field, `unknown key '${key}'`);
    }
  }
}

function parsePoints(value: unknown, field: string): [number, number, number][] {
  if (!Array.isArray(value)) throw new BundleSchemaError(field, "not an array");
  return value.map((row, i) => {
    if (!Array.isArray(row) || row.length !== 3 ||
        row.some((c) => typeof c !== "number" || !Number.isFinite(c))) {
      throw new BundleSchemaError(`${field}[${i}]`, "not a finite [x, y, z] row");
    }
    return [row[0], row[1], row[2]] as [number, number, number];
  });
}

function parseGraph(value: unknown, label: string,
                    pointCount: () => number): BundleGraph {
  const field = `${label}_graph`;
  if (!isRecord(value)) throw new BundleSchemaError(field, "not an object");
  const keys = label === "empty"
    ? ["label", "nodes", "edges", "points"] : ["label", "nodes", "edges"];
  checkKeys(value, keys, field);
  if (value.label !== label) {
    throw new BundleSchemaError(`${field}.label`, `expected '${label}'`);
  }
  const points = label === "empty"
    ? parsePoints(value.points, `${field}.points`) : undefined;
  const limit = label === "empty" ? (points as unknown[]).length : pointCount();

  if (!Array.isArray(value.nodes)) {
    throw new BundleSchemaError(`${field}.nodes`, "not an array");
  }
  const nodeKeys = label === "empty" ? EMPTY_NODE_KEYS : NODE_KEYS;
  const seen = new Set<number>();
  const nodes = value.nodes.map((raw, i) => {
    const where = `${field}.nodes[${i}]`;
    if (!isRecord(raw)) throw new BundleSchemaError(where, "not an object");
    checkKeys(raw, nodeKeys, where);
    const id = raw.id;
    if (typeof id !== "number" || seen.has(id)) {
      throw new BundleSchemaError(`${where}.id`, "missing or duplicate id");
    }
    seen.add(id);
    const layout = raw.layout;
    if (!Array.isArray(layout) || layout.length !== 2 ||
        typeof layout[0] !== "number" || typeof layout[1] !== "number") {
      throw new BundleSchemaError(`${where}.layout`, "not an [x, y] pair");
    }
    const members = raw.members;
    if (!Array.isArray(members)) {
      throw new BundleSchemaError(`${where}.members`, "not an array");
    }
    for (const m of members) {
      if (typeof m !== "number" || m < 0 || m >= limit) {
        throw new BundleSchemaError(`${where}.members`,
          `point id ${String(m)} outside 0..${limit - 1}`);
      }
    }
    if (typeof raw.holes !== "number" || raw.holes < 0) {
      throw new BundleSchemaError(`${where}.holes`, "negative or missing");
    }
    let region: Region | undefined;
    if (label === "empty") {
      if (raw.region !== "inside" && raw.region !== "outside") {
        throw new BundleSchemaError(`${where}.region`,
          "must be 'inside' or 'outside'");
      }
      region = raw.region;
    }
    return {
      id,
      slice: raw.slice as number,
      component: raw.component as number,
      holes: raw.holes,
      layout: [layout[0], layout[1]] as [number, number],
      members: members as number[],
      region,
    };
  });

  if (!Array.isArray(value.edges)) {
    throw new BundleSchemaError(`${field}.edges`, "not an array");
  }
  const edges = value.edges.map((pair, i) => {
    if (!Array.isArray(pair) || pair.length !== 2 ||
        typeof pair[0] !== "number" || typeof pair[1] !== "number") {
      throw new BundleSchemaError(`${field}.edges[${i}]`, "not an [a, b] pair");
    }
    for (const end of pair) {
      if (!seen.has(end as number)) {
        throw new BundleSchemaError(`${field}.edges[${i}]`,
          `references missing node ${String(end)}`);
      }
    }
    return [pair[0], pair[1]] as [number, number];
  });
  return { label, nodes, edges, points };
}

/** Parse and validate a topoprint/1 document; throws BundleSchemaError
 * naming the failing field. */
export function parseBundle(raw: unknown): Bundle {
  const doc = typeof raw === "string" ? JSON.parse(raw) : raw;
  if (!isRecord(doc)) throw new BundleSchemaError("bundle", "not an object");
  checkKeys(doc, TOP_KEYS, "bundle");
  if (doc.version !== "topoprint/1") {
    throw new BundleSchemaError("version",
      `expected 'topoprint/1', got '${String(doc.version)}'`);
  }
  if (!isRecord(doc.config)) throw new BundleSchemaError("config", "not an object");
  const points = parsePoints(doc.points, "points");
  const filled = parseGraph(doc.filled_graph, "filled", () => points.length);
  const empty = parseGraph(doc.empty_graph, "empty", () => 0);
  if (typeof doc.watertight !== "boolean") {
    throw new BundleSchemaError("watertight", "not a boolean");
  }
  if (doc.timings !== null && !isRecord(doc.timings)) {
    throw new BundleSchemaError("timings", "must be null or an object");
  }
  return {
    version: doc.version,
    config: doc.config,
    points,
    filled_graph: filled,
    empty_graph: empty,
    watertight: doc.watertight,
    timings: doc.timings as Record<string, number> | null,
  };
}
