/**
 * Selection and camera state shared by the four linked views.
 *
 * Filled-graph and empty-graph selections are independent sets. Selection
 * changes never touch the bundle itself; views re-render from the state.
 */

import { Bundle, BundleGraph, BundleNode } from "./types.js";

export type GraphKind = "filled" | "empty";

export interface CameraPose {
  yaw: number;
  pitch: number;
  zoom: number;
}

export class ViewState {
  readonly bundle: Bundle;
  readonly selected: Record<GraphKind, Set<number>> = {
    filled: new Set<number>(),
    empty: new Set<number>(),
  };
  activeSlice = 0;
  camera: CameraPose = { yaw: 0.6, pitch: 0.4, zoom: 1.0 };
  private readonly listeners: (() => void)[] = [];
  private readonly nodeById: Record<GraphKind, Map<number, BundleNode>>;
  readonly sliceCount: number;

  constructor(bundle: Bundle) {
    this.bundle = bundle;
    this.nodeById = {
      filled: new Map(bundle.filled_graph.nodes.map((n) => [n.id, n])),
      empty: new Map(bundle.empty_graph.nodes.map((n) => [n.id, n])),
    };
    let maxSlice = 0;
    for (const n of bundle.filled_graph.nodes) maxSlice = Math.max(maxSlice, n.slice);
    for (const n of bundle.empty_graph.nodes) maxSlice = Math.max(maxSlice, n.slice);
    this.sliceCount = maxSlice + 1;
  }

  graph(kind: GraphKind): BundleGraph {
    return kind === "filled" ? this.bundle.filled_graph : this.bundle.empty_graph;
  }

  node(kind: GraphKind, id: number): BundleNode | undefined {
    return this.nodeById[kind].get(id);
  }

  onChange(listener: () => void): void {
    this.listeners.push(listener);
  }

  private emit(): void {
    for (const fn of this.listeners) fn();
  }

  /** Replace the selection for one graph; unknown ids are dropped with a
   * console warning and everything else proceeds. */
  selectNodes(kind: GraphKind, ids: number[]): void {
    const valid: number[] = [];
    for (const id of ids) {
      if (this.nodeById[kind].has(id)) {
        valid.push(id);
      } else {
        console.warn(`ignoring unknown ${kind} node id ${id}`);
      }
    }
    this.selected[kind] = new Set(valid);
    const last = valid[valid.length - 1];
    if (last !== undefined) {
      this.activeSlice = this.nodeById[kind].get(last)!.slice;
    }
    this.emit();
  }

  toggleNode(kind: GraphKind, id: number): void {
    const node = this.nodeById[kind].get(id);
    if (node === undefined) {
      console.warn(`ignoring unknown ${kind} node id ${id}`);
      return;
    }
    const set = this.selected[kind];
    if (set.has(id)) {
      set.delete(id);
    } else {
      set.add(id);
      this.activeSlice = node.slice;
    }
    this.emit();
  }

  clearSelection(kind?: GraphKind): void {
    if (kind === undefined || kind === "filled") this.selected.filled.clear();
    if (kind === undefined || kind === "empty") this.selected.empty.clear();
    this.emit();
  }

  setActiveSlice(slice: number): void {
    if (slice < 0 || slice >= this.sliceCount) return;
    this.activeSlice = slice;
    this.emit();
  }

  setCamera(pose: Partial<CameraPose>): void {
    this.camera = { ...this.camera, ...pose };
    this.emit();
  }

  /** Union of the selected nodes' member point ids for one graph. */
  highlightedPointIds(kind: GraphKind): Set<number> {
    const out = new Set<number>();
    for (const id of this.selected[kind]) {
      const node = this.nodeById[kind].get(id);
      if (node) for (const m of node.members) out.add(m);
    }
    return out;
  }
}
