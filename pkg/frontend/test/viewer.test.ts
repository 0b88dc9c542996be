/**
 * Headless DOM tests against the sphere-fixture bundle produced by the
 * analysis pipeline (test/fixtures/sphere_bundle.json).
 */

import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";
import { beforeEach, describe, expect, it, vi } from "vitest";

import { loadBundle, mountBundle } from "../src/app.js";
import { parseBundle, BundleSchemaError } from "../src/types.js";

const here = dirname(fileURLToPath(import.meta.url));
const sphereJson = readFileSync(join(here, "fixtures", "sphere_bundle.json"),
  "utf-8");

function freshRoot(): HTMLElement {
  const root = document.createElement("div");
  document.body.appendChild(root);
  return root;
}

function domComponents(svg: SVGSVGElement): number {
  // union-find over the rendered node/edge elements only
  const ids = [...svg.querySelectorAll("g.node")]
    .map((g) => Number(g.getAttribute("data-node-id")));
  const parent = new Map<number, number>(ids.map((i) => [i, i]));
  const find = (x: number): number => {
    let r = x;
    while (parent.get(r) !== r) r = parent.get(r)!;
    parent.set(x, r);
    return r;
  };
  for (const line of svg.querySelectorAll("line.edge")) {
    const [a, b] = line.getAttribute("data-edge")!.split("-").map(Number);
    parent.set(find(a!), find(b!));
  }
  return new Set(ids.map(find)).size;
}

function highlightedSliceIds(svg: SVGSVGElement, kind: string): number[] {
  return [...svg.querySelectorAll(`circle.pt-${kind}.highlight`)]
    .map((c) => Number(c.getAttribute("data-point-id")))
    .sort((a, b) => a - b);
}

beforeEach(() => {
  document.body.innerHTML = "";
});

describe("bundle loading", () => {
  it("renders all four views for the sphere fixture", () => {
    const app = loadBundle(freshRoot(), sphereJson);
    expect(app).not.toBeNull();
    expect(document.querySelectorAll("svg.graph-view")).toHaveLength(2);
    expect(document.querySelectorAll("canvas.points-view")).toHaveLength(1);
    expect(document.querySelectorAll("svg.slice-view")).toHaveLength(1);
    expect(document.querySelector(".verdict")!.getAttribute("data-watertight"))
      .toBe("true");
  });

  it("shows the empty space as two disjoint subgraphs", () => {
    const app = loadBundle(freshRoot(), sphereJson)!;
    expect(domComponents(app.emptyGraphView.svg)).toBe(2);
    const regions = new Set(
      [...app.emptyGraphView.svg.querySelectorAll("g.node")]
        .map((g) => g.getAttribute("data-region")));
    expect(regions).toEqual(new Set(["inside", "outside"]));
  });

  it("draws one red dot per hole, reading counts from the bundle only", () => {
    const app = loadBundle(freshRoot(), sphereJson)!;
    const bundle = app.state.bundle;
    for (const node of bundle.filled_graph.nodes) {
      const g = app.filledGraphView.svg.querySelector(
        `g[data-node-id="${node.id}"]`)!;
      expect(g.querySelectorAll("circle.hole-dot")).toHaveLength(node.holes);
    }
  });

  it("caps hole dots at 12 with a +N overflow label", () => {
    const doc = JSON.parse(sphereJson);
    doc.filled_graph.nodes[0].holes = 15;
    const app = loadBundle(freshRoot(), JSON.stringify(doc))!;
    const g = app.filledGraphView.svg.querySelector(
      `g[data-node-id="${doc.filled_graph.nodes[0].id}"]`)!;
    expect(g.querySelectorAll("circle.hole-dot")).toHaveLength(12);
    expect(g.querySelector("text.hole-overflow")!.textContent).toBe("+3");
  });

  it("renders a minimal one-node bundle without error", () => {
    const minimal = {
      version: "topoprint/1",
      config: {},
      points: [[0, 0, 0], [0.5, 0, 0]],
      filled_graph: {
        label: "filled",
        nodes: [{ id: 0, slice: 0, component: 0, holes: 0,
                  layout: [0, 0], members: [0, 1] }],
        edges: [],
      },
      empty_graph: {
        label: "empty",
        nodes: [{ id: 0, slice: 0, component: 0, holes: 0, layout: [0, 0],
                  members: [0], region: "outside" }],
        edges: [],
        points: [[2, 2, 2]],
      },
      watertight: false,
      timings: null,
    };
    const app = loadBundle(freshRoot(), JSON.stringify(minimal));
    expect(app).not.toBeNull();
    expect(document.querySelectorAll("svg.graph-view")).toHaveLength(2);
  });

  it("rejects schema violations with an error panel naming the field", () => {
    const doc = JSON.parse(sphereJson);
    doc.filled_graph.nodes[0].surprise = true;
    const root = freshRoot();
    const app = loadBundle(root, JSON.stringify(doc));
    expect(app).toBeNull();
    const panel = root.querySelector(".error-panel")!;
    expect(panel.textContent).toContain("filled_graph.nodes[0]");
    expect(panel.textContent).toContain("surprise");
    // no partial render
    expect(root.querySelectorAll("svg.graph-view")).toHaveLength(0);
  });

  it("rejects dangling member references", () => {
    const doc = JSON.parse(sphereJson);
    doc.filled_graph.nodes[0].members = [999999];
    expect(() => parseBundle(JSON.stringify(doc)))
      .toThrow(BundleSchemaError);
  });
});

describe("selection", () => {
  it("highlights exactly the selected node's member ids in 3D and slice views",
     () => {
    const app = loadBundle(freshRoot(), sphereJson)!;
    const node = app.state.bundle.filled_graph.nodes
      .find((n) => n.holes > 0)!;
    app.state.selectNodes("filled", [node.id]);

    const expected = [...node.members].sort((a, b) => a - b);
    // 3D view: the highlight set equals the member ids exactly
    const highlight3d = [...app.pointsView.highlightedPointIds()]
      .sort((a, b) => a - b);
    expect(highlight3d).toEqual(expected);
    expect(app.pointsView.canvas.getAttribute("data-highlight-count"))
      .toBe(String(expected.length));
    // slice view switched to the node's slice and highlights its members
    expect(app.sliceView.svg.getAttribute("data-slice"))
      .toBe(String(node.slice));
    expect(highlightedSliceIds(app.sliceView.svg, "filled")).toEqual(expected);
  });

  it("unions highlights across a multi-select", () => {
    const app = loadBundle(freshRoot(), sphereJson)!;
    const [a, b] = app.state.bundle.filled_graph.nodes;
    app.state.selectNodes("filled", [a!.id, b!.id]);
    const expected = [...new Set([...a!.members, ...b!.members])]
      .sort((x, y) => x - y);
    expect([...app.pointsView.highlightedPointIds()].sort((x, y) => x - y))
      .toEqual(expected);
  });

  it("clears highlights on deselect", () => {
    const app = loadBundle(freshRoot(), sphereJson)!;
    const node = app.state.bundle.filled_graph.nodes[0]!;
    app.state.selectNodes("filled", [node.id]);
    app.state.clearSelection();
    expect(app.pointsView.highlightedPointIds().size).toBe(0);
    expect(highlightedSliceIds(app.sliceView.svg, "filled")).toEqual([]);
    expect(app.pointsView.canvas.getAttribute("data-highlight-count"))
      .toBe("0");
  });

  it("clicking a rendered node toggles its selection", () => {
    const app = loadBundle(freshRoot(), sphereJson)!;
    const node = app.state.bundle.filled_graph.nodes[1]!;
    const g = app.filledGraphView.svg.querySelector(
      `g[data-node-id="${node.id}"]`)! as SVGGElement;
    g.dispatchEvent(new MouseEvent("click", { bubbles: true }));
    expect([...app.state.selected.filled]).toEqual([node.id]);
    // the re-rendered element carries the selected class
    expect(app.filledGraphView.svg
      .querySelector(`g[data-node-id="${node.id}"]`)!
      .classList.contains("selected")).toBe(true);
  });

  it("empty-graph nodes are selectable with the same semantics", () => {
    const app = loadBundle(freshRoot(), sphereJson)!;
    const node = app.state.bundle.empty_graph.nodes
      .find((n) => n.region === "inside")!;
    app.state.selectNodes("empty", [node.id]);
    const expected = [...node.members].sort((a, b) => a - b);
    expect([...app.pointsView.highlightedEmptyPointIds()]
      .sort((a, b) => a - b)).toEqual(expected);
    expect(highlightedSliceIds(app.sliceView.svg, "empty")).toEqual(expected);
    // independent of the filled selection
    expect(app.pointsView.highlightedPointIds().size).toBe(0);
  });

  it("ignores invalid node ids with a console warning", () => {
    const app = loadBundle(freshRoot(), sphereJson)!;
    const warn = vi.spyOn(console, "warn").mockImplementation(() => {});
    app.state.selectNodes("filled", [123456]);
    expect(app.state.selected.filled.size).toBe(0);
    expect(warn).toHaveBeenCalled();
    warn.mockRestore();
  });

  it("selection never mutates the bundle", () => {
    const app = loadBundle(freshRoot(), sphereJson)!;
    const before = JSON.stringify(app.state.bundle);
    app.state.selectNodes("filled",
      app.state.bundle.filled_graph.nodes.map((n) => n.id));
    app.state.clearSelection();
    expect(JSON.stringify(app.state.bundle)).toBe(before);
  });
});

describe("layout comes from the bundle", () => {
  it("orders node y positions by slice index (slice 0 at the bottom)", () => {
    const app = mountBundle(freshRoot(), parseBundle(sphereJson));
    const bySlice = new Map<number, number>();
    for (const g of app.filledGraphView.svg.querySelectorAll("g.node")) {
      const slice = Number(g.getAttribute("data-slice"));
      const cy = Number(g.querySelector("circle")!.getAttribute("cy"));
      bySlice.set(slice, cy);
    }
    const slices = [...bySlice.keys()].sort((a, b) => a - b);
    for (let i = 1; i < slices.length; i++) {
      expect(bySlice.get(slices[i]!)!).toBeLessThan(bySlice.get(slices[i - 1]!)!);
    }
  });
});
