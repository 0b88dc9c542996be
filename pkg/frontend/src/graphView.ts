/**
 * SVG node-link rendering of one Mapper graph using the bundle's precomputed
 * layered layout. Each hole on a node shows as a red dot (capped at 12 with
 * a "+N" overflow label); empty-graph nodes are colored by region (green
 * outside, purple inside). Clicking a node toggles its selection.
 */

import { GraphKind, ViewState } from "./state.js";

const SVG_NS = "http://www.w3.org/2000/svg";
const NODE_RADIUS = 9;
const MAX_HOLE_DOTS = 12;

const REGION_FILL: Record<string, string> = {
  outside: "#3a9a4c",
  inside: "#7a4fa0",
};

export class GraphView {
  readonly svg: SVGSVGElement;
  private readonly state: ViewState;
  private readonly kind: GraphKind;

  constructor(state: ViewState, kind: GraphKind, width = 420, height = 480) {
    this.state = state;
    this.kind = kind;
    this.svg = document.createElementNS(SVG_NS, "svg") as SVGSVGElement;
    this.svg.setAttribute("width", String(width));
    this.svg.setAttribute("height", String(height));
    this.svg.setAttribute("class", `graph-view graph-${kind}`);
    this.svg.setAttribute("data-graph", kind);
    state.onChange(() => this.render());
    this.render();
  }

  private scales(): { x: (v: number) => number; y: (v: number) => number } {
    const graph = this.state.graph(this.kind);
    const width = Number(this.svg.getAttribute("width"));
    const height = Number(this.svg.getAttribute("height"));
    let xMin = Infinity;
    let xMax = -Infinity;
    let yMin = Infinity;
    let yMax = -Infinity;
    for (const n of graph.nodes) {
      xMin = Math.min(xMin, n.layout[0]);
      xMax = Math.max(xMax, n.layout[0]);
      yMin = Math.min(yMin, n.layout[1]);
      yMax = Math.max(yMax, n.layout[1]);
    }
    if (!Number.isFinite(xMin)) {
      xMin = xMax = yMin = yMax = 0;
    }
    const pad = 30;
    const xSpan = Math.max(xMax - xMin, 1e-9);
    const ySpan = Math.max(yMax - yMin, 1e-9);
    return {
      x: (v) => pad + ((v - xMin) / xSpan) * (width - 2 * pad),
      // slice 0 at the bottom, like a printed object
      y: (v) => height - pad - ((v - yMin) / ySpan) * (height - 2 * pad),
    };
  }

  render(): void {
    const graph = this.state.graph(this.kind);
    const selected = this.state.selected[this.kind];
    const { x, y } = this.scales();
    this.svg.textContent = "";

    const nodePos = new Map<number, [number, number]>();
    for (const n of graph.nodes) {
      nodePos.set(n.id, [x(n.layout[0]), y(n.layout[1])]);
    }

    for (const [a, b] of graph.edges) {
      const pa = nodePos.get(a)!;
      const pb = nodePos.get(b)!;
      const line = document.createElementNS(SVG_NS, "line");
      line.setAttribute("x1", String(pa[0]));
      line.setAttribute("y1", String(pa[1]));
      line.setAttribute("x2", String(pb[0]));
      line.setAttribute("y2", String(pb[1]));
      line.setAttribute("class", "edge");
      line.setAttribute("data-edge", `${a}-${b}`);
      line.setAttribute("stroke", "#999");
      this.svg.appendChild(line);
    }

    for (const n of graph.nodes) {
      const [cx, cy] = nodePos.get(n.id)!;
      const g = document.createElementNS(SVG_NS, "g");
      const isSelected = selected.has(n.id);
      g.setAttribute("class", `node${isSelected ? " selected" : ""}`);
      g.setAttribute("data-node-id", String(n.id));
      g.setAttribute("data-slice", String(n.slice));
      g.setAttribute("data-holes", String(n.holes));
      if (n.region) g.setAttribute("data-region", n.region);

      const circle = document.createElementNS(SVG_NS, "circle");
      circle.setAttribute("cx", String(cx));
      circle.setAttribute("cy", String(cy));
      circle.setAttribute("r", String(NODE_RADIUS));
      circle.setAttribute("fill",
        n.region ? REGION_FILL[n.region]! : "#4a7fb5");
      circle.setAttribute("stroke", isSelected ? "#ff8800" : "#333");
      circle.setAttribute("stroke-width", isSelected ? "3" : "1");
      g.appendChild(circle);

      const dots = Math.min(n.holes, MAX_HOLE_DOTS);
      for (let k = 0; k < dots; k++) {
        const angle = (2 * Math.PI * k) / Math.max(dots, 1);
        const dot = document.createElementNS(SVG_NS, "circle");
        const rr = n.holes === 1 ? 0 : NODE_RADIUS * 0.52;
        dot.setAttribute("cx", String(cx + rr * Math.cos(angle)));
        dot.setAttribute("cy", String(cy + rr * Math.sin(angle)));
        dot.setAttribute("r", "2.2");
        dot.setAttribute("fill", "#d62728");
        dot.setAttribute("class", "hole-dot");
        g.appendChild(dot);
      }
      if (n.holes > MAX_HOLE_DOTS) {
        const label = document.createElementNS(SVG_NS, "text");
        label.setAttribute("x", String(cx + NODE_RADIUS + 2));
        label.setAttribute("y", String(cy - NODE_RADIUS));
        label.setAttribute("class", "hole-overflow");
        label.setAttribute("font-size", "9");
        label.textContent = `+${n.holes - MAX_HOLE_DOTS}`;
        g.appendChild(label);
      }

      g.addEventListener("click", () => {
        this.state.toggleNode(this.kind, n.id);
      });
      this.svg.appendChild(g);
    }
  }
}
