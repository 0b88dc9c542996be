/**
 * 2D scatter of the active slice: xy positions of the model points whose
 * node lives on that slice, highlights driven by the graph selections.
 *
 * Display decimation only ever drops neutral points; every highlighted
 * member id is always drawn, so selection semantics stay exact.
 */

import { GraphKind, ViewState } from "./state.js";

const SVG_NS = "http://www.w3.org/2000/svg";
const MAX_NEUTRAL_POINTS = 20000;

export class SliceView {
  readonly svg: SVGSVGElement;
  private readonly state: ViewState;

  constructor(state: ViewState, width = 420, height = 420) {
    this.state = state;
    this.svg = document.createElementNS(SVG_NS, "svg") as SVGSVGElement;
    this.svg.setAttribute("width", String(width));
    this.svg.setAttribute("height", String(height));
    this.svg.setAttribute("class", "slice-view");
    state.onChange(() => this.render());
    this.render();
  }

  /** Point ids (per graph) that live on the active slice. */
  private sliceMembers(kind: GraphKind): number[] {
    const out: number[] = [];
    for (const node of this.state.graph(kind).nodes) {
      if (node.slice === this.state.activeSlice) out.push(...node.members);
    }
    return out;
  }

  render(): void {
    const state = this.state;
    this.svg.textContent = "";
    this.svg.setAttribute("data-slice", String(state.activeSlice));

    const width = Number(this.svg.getAttribute("width"));
    const height = Number(this.svg.getAttribute("height"));
    const filledIds = this.sliceMembers("filled");
    const emptyIds = this.sliceMembers("empty");
    const modelPts = state.bundle.points;
    const emptyPts = state.bundle.empty_graph.points ?? [];

    let xMin = Infinity;
    let xMax = -Infinity;
    let yMin = Infinity;
    let yMax = -Infinity;
    const consider = (p: [number, number, number]) => {
      xMin = Math.min(xMin, p[0]);
      xMax = Math.max(xMax, p[0]);
      yMin = Math.min(yMin, p[1]);
      yMax = Math.max(yMax, p[1]);
    };
    for (const i of filledIds) consider(modelPts[i]!);
    for (const i of emptyIds) consider(emptyPts[i]!);
    if (!Number.isFinite(xMin)) return;
    const pad = 14;
    const span = Math.max(xMax - xMin, yMax - yMin, 1e-9);
    const sx = (v: number) => pad + ((v - xMin) / span) * (width - 2 * pad);
    const sy = (v: number) => height - pad - ((v - yMin) / span) * (height - 2 * pad);

    const highlightFilled = state.highlightedPointIds("filled");
    const highlightEmpty = state.highlightedPointIds("empty");

    const draw = (kind: GraphKind, ids: number[],
                  pts: [number, number, number][], highlight: Set<number>) => {
      const neutral = ids.filter((i) => !highlight.has(i));
      const step = Math.max(1, Math.ceil(neutral.length / MAX_NEUTRAL_POINTS));
      neutral.forEach((i, k) => {
        if (k % step !== 0) return;
        this.svg.appendChild(this.dot(kind, i, sx(pts[i]![0]), sy(pts[i]![1]),
          false));
      });
      for (const i of ids) {
        if (highlight.has(i)) {
          this.svg.appendChild(this.dot(kind, i, sx(pts[i]![0]),
            sy(pts[i]![1]), true));
        }
      }
    };
    draw("filled", filledIds, modelPts, highlightFilled);
    draw("empty", emptyIds, emptyPts, highlightEmpty);
  }

  private dot(kind: GraphKind, id: number, cx: number, cy: number,
              highlighted: boolean): SVGCircleElement {
    const c = document.createElementNS(SVG_NS, "circle") as SVGCircleElement;
    c.setAttribute("cx", String(cx));
    c.setAttribute("cy", String(cy));
    c.setAttribute("r", highlighted ? "2.4" : "1.2");
    c.setAttribute("class",
      `pt pt-${kind}${highlighted ? " highlight" : ""}`);
    c.setAttribute("data-point-id", String(id));
    c.setAttribute("fill", highlighted ? "#ff8800"
      : kind === "filled" ? "#555" : "#b8c4d6");
    return c;
  }
}
