/**
 * Application shell: four linked views of one analysis bundle, reproducing
 * the inspection workflow — filled-space Mapper graph with red hole dots,
 * 3D point cloud, single-slice 2D view, and the empty-space Mapper graph
 * colored by region. Selecting graph nodes highlights their member points
 * in the 3D and slice views; selections in the two graphs are independent
 * and multi-select unions the highlights.
 */

import { GraphView } from "./graphView.js";
import { PointsView } from "./pointsView.js";
import { SliceView } from "./sliceView.js";
import { ViewState } from "./state.js";
import { Bundle, BundleSchemaError, parseBundle } from "./types.js";

export interface App {
  state: ViewState;
  filledGraphView: GraphView;
  emptyGraphView: GraphView;
  pointsView: PointsView;
  sliceView: SliceView;
}

function panel(title: string, body: Element): HTMLElement {
  const div = document.createElement("section");
  div.className = "panel";
  const h = document.createElement("h2");
  h.textContent = title;
  div.appendChild(h);
  div.appendChild(body);
  return div;
}

export function renderError(root: HTMLElement, message: string): void {
  root.textContent = "";
  const box = document.createElement("div");
  box.className = "error-panel";
  box.textContent = `bundle rejected — ${message}`;
  root.appendChild(box);
}

/** Build the four views for an already-parsed bundle. No partial render:
 * the root is only touched after parsing succeeded. */
export function mountBundle(root: HTMLElement, bundle: Bundle): App {
  const state = new ViewState(bundle);
  const filledGraphView = new GraphView(state, "filled");
  const emptyGraphView = new GraphView(state, "empty");
  const pointsView = new PointsView(state);
  const sliceView = new SliceView(state);

  root.textContent = "";
  const header = document.createElement("header");
  const verdict = document.createElement("span");
  verdict.className = "verdict";
  verdict.setAttribute("data-watertight", String(bundle.watertight));
  verdict.textContent = bundle.watertight
    ? "watertight: yes" : "watertight: NO";
  header.appendChild(verdict);

  const sliceLabel = document.createElement("label");
  sliceLabel.textContent = " slice ";
  const slicePicker = document.createElement("input");
  slicePicker.type = "range";
  slicePicker.min = "0";
  slicePicker.max = String(state.sliceCount - 1);
  slicePicker.value = String(state.activeSlice);
  slicePicker.className = "slice-picker";
  slicePicker.addEventListener("input", () => {
    state.setActiveSlice(Number(slicePicker.value));
  });
  state.onChange(() => {
    slicePicker.value = String(state.activeSlice);
  });
  sliceLabel.appendChild(slicePicker);
  header.appendChild(sliceLabel);

  const clear = document.createElement("button");
  clear.textContent = "clear selection";
  clear.addEventListener("click", () => state.clearSelection());
  header.appendChild(clear);
  root.appendChild(header);

  const grid = document.createElement("main");
  grid.className = "grid";
  grid.appendChild(panel("filled space", filledGraphView.svg));
  grid.appendChild(panel("3D points", pointsView.canvas));
  grid.appendChild(panel("active slice", sliceView.svg));
  grid.appendChild(panel("empty space", emptyGraphView.svg));
  root.appendChild(grid);

  return { state, filledGraphView, emptyGraphView, pointsView, sliceView };
}

/** Parse raw JSON text and mount it; schema violations render an error
 * panel naming the failing field instead of a partial UI. */
export function loadBundle(root: HTMLElement, raw: string): App | null {
  let bundle: Bundle;
  try {
    bundle = parseBundle(raw);
  } catch (err) {
    const message = err instanceof BundleSchemaError
      ? err.message : `not a valid bundle (${String(err)})`;
    renderError(root, message);
    return null;
  }
  return mountBundle(root, bundle);
}

/** Wire up the file picker used by the static page. */
export function initFilePicker(root: HTMLElement): void {
  const picker = document.createElement("input");
  picker.type = "file";
  picker.accept = ".json,application/json";
  picker.addEventListener("change", async () => {
    const file = picker.files?.[0];
    if (!file) return;
    const text = await file.text();
    const host = document.createElement("div");
    root.appendChild(host);
    loadBundle(host, text);
  });
  root.appendChild(picker);
}
