"""Full pipeline orchestration, watertightness decision, bundle (de)serialization.

The exported bundle is a single JSON document, format "topoprint/1":

    {
      "version":      "topoprint/1",
      "config":       { ... echo of AnalysisConfig ... },
      "points":       [[x, y, z], ...]          # the (possibly rescaled) model
      "filled_graph": {"label": "filled", "nodes": [...], "edges": [[a, b], ...]},
      "empty_graph":  {"label": "empty",  "nodes": [...], "edges": [...],
                       "points": [[x, y, z], ...]},   # complement samples
      "watertight":   true | false,
      "timings":      null | {"slicing_ms": .., "mapper_s": ..,
                              "persistence_s": .., "total_s": ..}
    }

Graph nodes carry exactly: id, slice, component, holes, layout [x, y],
members (point-id array into the owning graph's point list); empty-graph
nodes additionally carry region: "inside" | "outside". Unknown fields are
rejected on import. Coordinates are quantized to 1e-6 cm when the bundle is
built, so export -> import -> export is byte-stable.
"""

from __future__ import annotations

import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from . import empty_space as _empty
from .components import connected_components
from .errors import BundleFormatError, GeometryError, PipelineError
from .mapper_graph import (MapperGraph, MapperNode, attach_hole_counts,
                           build_mapper, global_components, layered_layout)
from .model_ingest import IndexedMesh, PointCloud, densify_mesh, scale_to_height
from .persistence import DEFAULT_SIMPLEX_BUDGET, h1_intervals, holes_at_scale
from .slicing import DEFAULT_OVERLAP_CM, assign_points, build_cover

BUNDLE_VERSION = "topoprint/1"
COORD_QUANTUM_DECIMALS = 6

_TOP_LEVEL_KEYS = ("version", "config", "points", "filled_graph",
                   "empty_graph", "watertight", "timings")
_NODE_KEYS = ("id", "slice", "component", "holes", "layout", "members")
_EMPTY_NODE_KEYS = _NODE_KEYS + ("region",)


@dataclass(frozen=True)
class AnalysisConfig:
    """Validated pipeline parameters; lengths in cm."""

    xy_res: float
    z_res: float | None = None
    slice_count: int | None = None
    overlap: float = DEFAULT_OVERLAP_CM
    target_height: float | None = None
    densify_max_edge: float | None = None
    margin_cells: int = _empty.DEFAULT_MARGIN_CELLS
    cell_budget: int = _empty.DEFAULT_CELL_BUDGET
    simplex_budget: int = DEFAULT_SIMPLEX_BUDGET
    empty_z_res: float | None = None   # default: min(slice thickness, overlap)
    rips_max_scale: float | None = None  # default: 2 * xy_res, capped per component
    threads: int = 1

    def __post_init__(self):
        if self.xy_res is None or self.xy_res <= 0:
            raise GeometryError(f"xy_res must be positive, got {self.xy_res}")
        if (self.z_res is None) == (self.slice_count is None):
            raise GeometryError("give exactly one of z_res or slice_count")
        if self.overlap < 0:
            raise GeometryError(f"overlap must be >= 0, got {self.overlap}")
        if self.margin_cells < 1:
            raise GeometryError(f"margin_cells must be >= 1, got {self.margin_cells}")
        if self.threads < 1:
            raise GeometryError(f"threads must be >= 1, got {self.threads}")

    def hole_scale(self) -> float:
        """Rips scale at which layer holes are counted: a deposit of radius
        xy_res closes gaps up to that radius, i.e. pair diameter 2 * xy_res."""
        return 2.0 * self.xy_res

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class AnalysisBundle:
    """Everything a report or viewer needs, cross-referenced and immutable
    once built."""

    config: dict
    points: np.ndarray
    filled_graph: MapperGraph
    empty_graph: MapperGraph
    empty_points: np.ndarray
    watertight: bool
    timings: dict | None = None
    version: str = BUNDLE_VERSION


def _quantize(arr: np.ndarray) -> np.ndarray:
    return np.round(np.asarray(arr, dtype=np.float64), COORD_QUANTUM_DECIMALS)


def _h1_job(args):
    key, pts, max_scale, budget, label = args
    return key, h1_intervals(pts, max_scale, simplex_budget=budget, label=label)


def _component_hole_jobs(cloud, components_per_slice, cfg):
    s_star = cfg.hole_scale()
    floor_scale = max(s_star, cfg.rips_max_scale or 0.0)
    jobs = []
    for comps in components_per_slice:
        for comp in comps:
            key = (comp.slice_index, comp.component_id)
            pts = cloud.coords[comp.member_ids][:, :2]
            if comp.member_ids.size < 3:
                jobs.append((key, None, 0.0, 0, ""))
                continue
            span = pts.max(axis=0) - pts.min(axis=0)
            diag = float(math.hypot(span[0], span[1]))
            if diag <= 0.0:
                jobs.append((key, None, 0.0, 0, ""))
                continue
            max_scale = min(floor_scale, diag)
            label = f"slice {key[0]} component {key[1]}"
            jobs.append((key, pts, max_scale, cfg.simplex_budget, label))
    return jobs


def _run_persistence(jobs, threads: int) -> dict:
    """Hole intervals per (slice, component); deterministic regardless of
    worker scheduling."""
    trivial = {job[0]: [] for job in jobs if job[1] is None}
    real = [job for job in jobs if job[1] is not None]
    results = dict(trivial)
    if threads > 1 and len(real) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            for key, intervals in pool.map(_h1_job, real, chunksize=8):
                results[key] = intervals
    else:
        for job in real:
            key, intervals = _h1_job(job)
            results[key] = intervals
    return results


def watertightness(empty_graph: MapperGraph,
                   margin_mask: np.ndarray) -> tuple[bool, list[str]]:
    """Watertight iff the empty-space graph has >= 2 global components.

    The component holding the most distinct margin-shell points (ids flagged
    in ``margin_mask``) is the outside; every other component is inside.
    Returns the flag and a per-node region label list.
    """
    if not empty_graph.nodes:
        raise GeometryError(
            "empty-space graph has no nodes; with margin_cells >= 1 the "
            "complement cannot be empty")
    count, labels = global_components(empty_graph)
    margin_per_comp: dict[int, set] = {}
    for node, comp in zip(empty_graph.nodes, labels):
        ids = node.member_ids
        hits = ids[margin_mask[ids]]
        margin_per_comp.setdefault(comp, set()).update(int(i) for i in hits)
    best = max(sorted(margin_per_comp), key=lambda c: len(margin_per_comp[c]))
    regions = ["outside" if c == best else "inside" for c in labels]
    return count >= 2, regions


def analyze(source, config: AnalysisConfig) -> AnalysisBundle:
    """Run the full pipeline on a PointCloud or IndexedMesh.

    Stages: densify? -> scale? -> cover -> assignment -> per-slice components
    -> per-component H1 -> filled graph -> empty-space fill -> empty components
    -> empty graph -> watertightness. Deterministic for fixed input + config.
    """
    cfg = config
    timings = {"slicing_ms": 0.0, "mapper_s": 0.0, "persistence_s": 0.0,
               "total_s": 0.0}
    t_total = time.perf_counter()

    def run_stage(stage, fn, **params):
        try:
            return fn()
        except Exception as exc:
            raise PipelineError(stage, str(exc), params) from exc

    # -- ingest ------------------------------------------------------------
    def ingest():
        if isinstance(source, IndexedMesh):
            if cfg.densify_max_edge is not None:
                cloud = densify_mesh(source, cfg.densify_max_edge)
            else:
                cloud = source.vertices
        elif isinstance(source, PointCloud):
            cloud = source
        else:
            raise GeometryError(f"unsupported source type {type(source).__name__}")
        if len(cloud) == 0:
            raise GeometryError("no points to analyze")
        if cfg.target_height is not None:
            cloud = scale_to_height(cloud, cfg.target_height)
        return PointCloud(_quantize(cloud.coords))

    cloud = run_stage("ingest", ingest,
                      densify_max_edge=cfg.densify_max_edge,
                      target_height=cfg.target_height)

    # -- slicing -----------------------------------------------------------
    t0 = time.perf_counter()

    def slice_stage():
        z_lo, z_hi = cloud.z_extent()
        cover = build_cover((z_lo, z_hi), z_res=cfg.z_res,
                            slice_count=cfg.slice_count, overlap=cfg.overlap)
        return cover, assign_points(cloud, cover)

    cover, assignment = run_stage("slicing", slice_stage, z_res=cfg.z_res,
                                  slice_count=cfg.slice_count,
                                  overlap=cfg.overlap)
    timings["slicing_ms"] = (time.perf_counter() - t0) * 1000.0

    # -- filled-space components (mapper stage, part 1) ---------------------
    t0 = time.perf_counter()

    def filled_components():
        per_slice = []
        for s, member_ids in enumerate(assignment.members):
            pts = cloud.coords[member_ids][:, :2]
            per_slice.append(connected_components(
                pts, cfg.xy_res, ids=member_ids, slice_index=s))
        return per_slice

    components_per_slice = run_stage("components", filled_components,
                                     epsilon=cfg.xy_res)
    timings["mapper_s"] += time.perf_counter() - t0

    # -- per-component persistence ------------------------------------------
    t0 = time.perf_counter()

    def persistence_stage():
        jobs = _component_hole_jobs(cloud, components_per_slice, cfg)
        intervals = _run_persistence(jobs, cfg.threads)
        s_star = cfg.hole_scale()
        return {key: holes_at_scale(ivs, s_star) for key, ivs in intervals.items()}

    hole_counts = run_stage("persistence", persistence_stage,
                            hole_scale=cfg.hole_scale(),
                            simplex_budget=cfg.simplex_budget,
                            threads=cfg.threads)
    timings["persistence_s"] = time.perf_counter() - t0

    # -- filled graph (mapper stage, part 2) ---------------------------------
    t0 = time.perf_counter()

    def filled_graph_stage():
        graph = build_mapper(assignment, components_per_slice, label="filled")
        attach_hole_counts(graph, hole_counts)
        return layered_layout(graph)

    filled_graph = run_stage("mapper", filled_graph_stage)

    # -- empty space ----------------------------------------------------------
    def empty_stage():
        thickness = (cover[0].z_max - cover[0].z_min) - cfg.overlap / 2.0
        if cfg.empty_z_res is not None:
            ez = cfg.empty_z_res
        else:
            # a grid plane must land inside every overlap band (spacing <=
            # overlap) or the empty graph cannot see layer-to-layer contact;
            # spacing <= xy_res keeps vertical neighbors within the
            # connectivity radius
            ez = min(thickness, cfg.xy_res)
            if cfg.overlap > 0:
                ez = min(ez, cfg.overlap)
        grid = _empty.build_occupancy_grid(
            cloud, cfg.xy_res, ez, margin_cells=cfg.margin_cells,
            cell_budget=cfg.cell_budget)
        empty_pts, margin_mask = _empty.empty_space_points(grid)
        empty_assign = assign_points(empty_pts, cover)
        eps = _empty.empty_connectivity_epsilon(cfg.xy_res)
        per_slice = []
        for s, member_ids in enumerate(empty_assign.members):
            # full 3D metric: the xy projection would weld cells straddling a
            # horizontal wall thinner than one slice
            per_slice.append(connected_components(
                empty_pts.coords[member_ids], eps, ids=member_ids,
                slice_index=s, metric="xyz"))
        graph = build_mapper(empty_assign, per_slice, label="empty")
        attach_hole_counts(graph, {(n.slice_index, n.component_id): 0
                                   for n in graph.nodes})
        layered_layout(graph)
        return graph, empty_pts, margin_mask

    empty_graph, empty_pts, margin_mask = run_stage(
        "empty_space", empty_stage, xy_res=cfg.xy_res,
        margin_cells=cfg.margin_cells)

    # -- watertightness -------------------------------------------------------
    def watertight_stage():
        flag, regions = watertightness(empty_graph, margin_mask)
        for node, region in zip(empty_graph.nodes, regions):
            node.region = region
        return flag

    watertight = run_stage("watertightness", watertight_stage)
    timings["mapper_s"] += time.perf_counter() - t0
    timings["total_s"] = time.perf_counter() - t_total

    return AnalysisBundle(
        config=cfg.to_dict(),
        points=cloud.coords,
        filled_graph=filled_graph,
        empty_graph=empty_graph,
        empty_points=_quantize(empty_pts.coords),
        watertight=watertight,
        timings=timings,
    )


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def _node_to_dict(node: MapperNode, with_region: bool) -> dict:
    d = {
        "id": node.node_id,
        "slice": node.slice_index,
        "component": node.component_id,
        "holes": node.hole_count,
        "layout": [round(float(node.layout[0]), COORD_QUANTUM_DECIMALS),
                   round(float(node.layout[1]), COORD_QUANTUM_DECIMALS)],
        "members": [int(i) for i in node.member_ids],
    }
    if with_region:
        d["region"] = node.region
    return d


def _graph_to_dict(graph: MapperGraph, points: np.ndarray | None = None) -> dict:
    with_region = graph.label == "empty"
    d = {
        "label": graph.label,
        "nodes": [_node_to_dict(n, with_region) for n in graph.nodes],
        "edges": [[a, b] for a, b in graph.edges],
    }
    if points is not None:
        d["points"] = [[float(c) for c in row] for row in points]
    return d


def export_bundle(bundle: AnalysisBundle, *, include_timings: bool = False) -> bytes:
    """Canonical JSON serialization: fixed key order, shortest round-trip
    floats. Timings are omitted (null) by default so identical runs export
    byte-identical documents."""
    doc = {
        "version": bundle.version,
        "config": bundle.config,
        "points": [[float(c) for c in row] for row in bundle.points],
        "filled_graph": _graph_to_dict(bundle.filled_graph),
        "empty_graph": _graph_to_dict(bundle.empty_graph, bundle.empty_points),
        "watertight": bool(bundle.watertight),
        "timings": (dict(bundle.timings)
                    if include_timings and bundle.timings is not None else None),
    }
    return json.dumps(doc, separators=(",", ":"), allow_nan=False).encode("ascii")


def _require_keys(obj: dict, keys, what: str):
    missing = [k for k in keys if k not in obj]
    unknown = [k for k in obj if k not in keys]
    if missing:
        raise BundleFormatError(f"{what}: missing keys {missing}")
    if unknown:
        raise BundleFormatError(f"{what}: unknown keys {unknown} rejected")


def _points_from_json(rows, what: str) -> np.ndarray:
    arr = np.asarray(rows, dtype=np.float64)
    if arr.size == 0:
        return np.zeros((0, 3))
    if arr.ndim != 2 or arr.shape[1] != 3 or not np.isfinite(arr).all():
        raise BundleFormatError(f"{what}: points must be finite [x, y, z] rows")
    return arr


def _graph_from_dict(d: dict, label: str, n_points: int) -> MapperGraph:
    what = f"{label}_graph"
    keys = ("label", "nodes", "edges", "points") if label == "empty" \
        else ("label", "nodes", "edges")
    _require_keys(d, keys, what)
    if d["label"] != label:
        raise BundleFormatError(f"{what}: label is {d['label']!r}")
    node_keys = _EMPTY_NODE_KEYS if label == "empty" else _NODE_KEYS
    nodes = []
    seen_ids = set()
    for nd in d["nodes"]:
        _require_keys(nd, node_keys, f"{what} node")
        node_id = nd["id"]
        if node_id in seen_ids:
            raise BundleFormatError(f"{what}: duplicate node id {node_id}")
        seen_ids.add(node_id)
        members = np.asarray(nd["members"], dtype=np.int64)
        if members.size and (members.min() < 0 or members.max() >= n_points):
            raise BundleFormatError(
                f"{what}: node {node_id} references point id "
                f"{int(members.max())} outside 0..{n_points - 1}")
        if nd["holes"] < 0:
            raise BundleFormatError(f"{what}: node {node_id} has negative holes")
        region = nd.get("region")
        if label == "empty" and region not in ("inside", "outside"):
            raise BundleFormatError(
                f"{what}: node {node_id} region must be inside|outside")
        nodes.append(MapperNode(
            node_id=node_id, slice_index=nd["slice"],
            component_id=nd["component"], member_ids=members,
            hole_count=nd["holes"],
            layout=(float(nd["layout"][0]), float(nd["layout"][1])),
            region=region))
    by_id = {n.node_id: n for n in nodes}
    edges = []
    seen_edges = set()
    for pair in d["edges"]:
        if len(pair) != 2:
            raise BundleFormatError(f"{what}: edge {pair} is not a pair")
        a, b = int(pair[0]), int(pair[1])
        for e in (a, b):
            if e not in by_id:
                raise BundleFormatError(f"{what}: edge references missing node {e}")
        if a == b:
            raise BundleFormatError(f"{what}: self edge at node {a}")
        key = (min(a, b), max(a, b))
        if key in seen_edges:
            raise BundleFormatError(f"{what}: duplicate edge {key}")
        seen_edges.add(key)
        if abs(by_id[a].slice_index - by_id[b].slice_index) != 1:
            raise BundleFormatError(
                f"{what}: edge ({a}, {b}) joins non-adjacent slices "
                f"{by_id[a].slice_index} and {by_id[b].slice_index}")
        edges.append((a, b))
    return MapperGraph(nodes=nodes, edges=edges, label=label)


def import_bundle(data: bytes) -> AnalysisBundle:
    """Parse and validate a topoprint/1 bundle; every cross-reference is
    checked and unknown fields are rejected."""
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise BundleFormatError(f"not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise BundleFormatError("bundle must be a JSON object")
    _require_keys(doc, _TOP_LEVEL_KEYS, "bundle")
    if doc["version"] != BUNDLE_VERSION:
        raise BundleFormatError(
            f"version mismatch: got {doc['version']!r}, expected {BUNDLE_VERSION!r}")
    points = _points_from_json(doc["points"], "points")
    empty_points = _points_from_json(doc["empty_graph"].get("points", []),
                                     "empty_graph.points")
    filled = _graph_from_dict(doc["filled_graph"], "filled", len(points))
    empty = _graph_from_dict(doc["empty_graph"], "empty", len(empty_points))
    timings = doc["timings"]
    if timings is not None and not isinstance(timings, dict):
        raise BundleFormatError("timings must be null or an object")
    return AnalysisBundle(config=doc["config"], points=points,
                          filled_graph=filled, empty_graph=empty,
                          empty_points=empty_points,
                          watertight=bool(doc["watertight"]),
                          timings=timings)


def validate_bundle(bundle: AnalysisBundle) -> list[str]:
    """Re-check bundle invariants; returns a list of violation messages
    (empty when the bundle is sound)."""
    problems = []
    n = len(bundle.points)
    covered = np.zeros(n, dtype=bool)
    total_members = 0
    for node in bundle.filled_graph.nodes:
        covered[node.member_ids] = True
        total_members += node.member_ids.size
    if n and not covered.all():
        problems.append(
            f"{int((~covered).sum())} model points belong to no filled node")
    if total_members < n:
        problems.append("filled membership total below point count")

    for graph in (bundle.filled_graph, bundle.empty_graph):
        by_id = {node.node_id: node for node in graph.nodes}
        member_sets = {node.node_id: set(node.member_ids.tolist())
                       for node in graph.nodes}
        for a, b in graph.edges:
            if not member_sets[a] & member_sets[b]:
                problems.append(
                    f"{graph.label}_graph: edge ({a}, {b}) endpoints share no point id")
        # completeness: adjacent-slice components sharing an id must be linked
        by_slice: dict[int, list[MapperNode]] = {}
        for node in graph.nodes:
            by_slice.setdefault(node.slice_index, []).append(node)
        edge_set = {(min(a, b), max(a, b)) for a, b in graph.edges}
        for s in sorted(by_slice):
            if s + 1 not in by_slice:
                continue
            for na in by_slice[s]:
                for nb in by_slice[s + 1]:
                    if member_sets[na.node_id] & member_sets[nb.node_id]:
                        key = (min(na.node_id, nb.node_id),
                               max(na.node_id, nb.node_id))
                        if key not in edge_set:
                            problems.append(
                                f"{graph.label}_graph: components "
                                f"({na.slice_index},{na.component_id}) and "
                                f"({nb.slice_index},{nb.component_id}) share "
                                f"points but have no edge")

    count, _ = global_components(bundle.empty_graph)
    if bundle.watertight != (count >= 2):
        problems.append(
            f"watertight flag {bundle.watertight} inconsistent with "
            f"{count} empty components")
    for node in bundle.filled_graph.nodes:
        if node.hole_count < 0:
            problems.append(f"filled node {node.node_id} has negative holes")
    return problems
