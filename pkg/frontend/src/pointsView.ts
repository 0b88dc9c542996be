/**
 * 3D point-cloud view on a canvas: orthographic projection with drag-to-
 * rotate and wheel zoom. Highlights mirror the graph selections exactly;
 * display decimation (for very large clouds) never drops highlighted points
 * and never affects the selection sets themselves.
 *
 * The highlight set is exposed for headless assertions both via
 * highlightedPointIds() and the canvas data-highlight-count attribute;
 * environments without a 2D context (headless DOM) skip the actual drawing.
 */

import { ViewState } from "./state.js";

const MAX_NEUTRAL_DRAWN = 300000;

export class PointsView {
  readonly canvas: HTMLCanvasElement;
  private readonly state: ViewState;
  private dragging = false;
  private lastX = 0;
  private lastY = 0;

  constructor(state: ViewState, width = 520, height = 480) {
    this.state = state;
    this.canvas = document.createElement("canvas");
    this.canvas.width = width;
    this.canvas.height = height;
    this.canvas.className = "points-view";
    this.canvas.addEventListener("mousedown", (e) => {
      this.dragging = true;
      this.lastX = e.clientX;
      this.lastY = e.clientY;
    });
    this.canvas.addEventListener("mousemove", (e) => {
      if (!this.dragging) return;
      const cam = this.state.camera;
      this.state.setCamera({
        yaw: cam.yaw + (e.clientX - this.lastX) * 0.01,
        pitch: Math.max(-1.5, Math.min(1.5,
          cam.pitch + (e.clientY - this.lastY) * 0.01)),
      });
      this.lastX = e.clientX;
      this.lastY = e.clientY;
    });
    this.canvas.addEventListener("mouseup", () => {
      this.dragging = false;
    });
    this.canvas.addEventListener("wheel", (e) => {
      e.preventDefault();
      const factor = e.deltaY > 0 ? 0.9 : 1.1;
      this.state.setCamera({ zoom: this.state.camera.zoom * factor });
    });
    state.onChange(() => this.render());
    this.render();
  }

  highlightedPointIds(): Set<number> {
    return this.state.highlightedPointIds("filled");
  }

  highlightedEmptyPointIds(): Set<number> {
    return this.state.highlightedPointIds("empty");
  }

  render(): void {
    const highlights = this.highlightedPointIds();
    const emptyHighlights = this.highlightedEmptyPointIds();
    this.canvas.setAttribute("data-highlight-count",
      String(highlights.size + emptyHighlights.size));

    const ctx = this.context();
    if (ctx === null) return;
    const { width, height } = this.canvas;
    ctx.clearRect(0, 0, width, height);
    ctx.fillStyle = "#101418";
    ctx.fillRect(0, 0, width, height);

    const pts = this.state.bundle.points;
    if (pts.length === 0) return;
    const project = this.projector();

    ctx.fillStyle = "#8fa8bf";
    const step = Math.max(1, Math.ceil(pts.length / MAX_NEUTRAL_DRAWN));
    for (let i = 0; i < pts.length; i += step) {
      if (highlights.has(i)) continue;
      const [x, y] = project(pts[i]!);
      ctx.fillRect(x, y, 1, 1);
    }
    // highlighted empty-space points: drawn faint beneath model highlights
    const emptyPts = this.state.bundle.empty_graph.points ?? [];
    ctx.fillStyle = "#68c0a8";
    for (const i of emptyHighlights) {
      const p = emptyPts[i];
      if (!p) continue;
      const [x, y] = project(p);
      ctx.fillRect(x - 1, y - 1, 2, 2);
    }
    ctx.fillStyle = "#ff8800";
    for (const i of highlights) {
      const [x, y] = project(pts[i]!);
      ctx.fillRect(x - 1, y - 1, 3, 3);
    }
  }

  private context(): CanvasRenderingContext2D | null {
    try {
      const ctx = this.canvas.getContext("2d");
      if (ctx && typeof ctx.clearRect === "function" &&
          typeof ctx.fillRect === "function") {
        return ctx;
      }
      return null;
    } catch {
      return null;
    }
  }

  private projector(): (p: [number, number, number]) => [number, number] {
    const pts = this.state.bundle.points;
    let min = [Infinity, Infinity, Infinity];
    let max = [-Infinity, -Infinity, -Infinity];
    for (const p of pts) {
      for (let a = 0; a < 3; a++) {
        min[a] = Math.min(min[a]!, p[a]!);
        max[a] = Math.max(max[a]!, p[a]!);
      }
    }
    const cx = (min[0]! + max[0]!) / 2;
    const cy = (min[1]! + max[1]!) / 2;
    const cz = (min[2]! + max[2]!) / 2;
    const span = Math.max(max[0]! - min[0]!, max[1]! - min[1]!,
      max[2]! - min[2]!, 1e-9);
    const { yaw, pitch, zoom } = this.state.camera;
    const cosY = Math.cos(yaw);
    const sinY = Math.sin(yaw);
    const cosP = Math.cos(pitch);
    const sinP = Math.sin(pitch);
    const scale = (Math.min(this.canvas.width, this.canvas.height) * 0.8 *
      zoom) / span;
    const w2 = this.canvas.width / 2;
    const h2 = this.canvas.height / 2;
    return (p) => {
      const dx = p[0] - cx;
      const dy = p[1] - cy;
      const dz = p[2] - cz;
      const rx = dx * cosY + dy * sinY;
      const ry = -dx * sinY + dy * cosY;
      const rz = dz * cosP - ry * sinP;
      return [w2 + rx * scale, h2 - rz * scale];
    };
  }
}
