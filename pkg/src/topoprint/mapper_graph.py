"""Mapper graph assembly, hole annotation, layered layout, global components.

Nodes are the per-slice components; an edge joins components of neighboring
slices exactly when they share a point id, which happens only through the
cover overlap (a shared id witnesses physical touching).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .components import LayerComponent, UnionFind
from .errors import MissingResultError
from .slicing import SliceAssignment


@dataclass
class MapperNode:
    """One per-slice component collapsed to a graph vertex."""

    node_id: int
    slice_index: int
    component_id: int
    member_ids: np.ndarray
    hole_count: int = 0
    layout: tuple[float, float] = (0.0, 0.0)
    region: str | None = None  # empty-space graphs: "inside" | "outside"


@dataclass
class MapperGraph:
    """Node/edge abstraction of the sliced model ("filled") or its
    complement ("empty"). Edges connect slice i to slice i+1 only."""

    nodes: list[MapperNode]
    edges: list[tuple[int, int]]
    label: str = "filled"

    def node_count(self) -> int:
        return len(self.nodes)

    def edge_count(self) -> int:
        return len(self.edges)

    def node_by_key(self) -> dict:
        return {(n.slice_index, n.component_id): n for n in self.nodes}

    def adjacency(self) -> dict[int, list[int]]:
        adj: dict[int, list[int]] = {n.node_id: [] for n in self.nodes}
        for a, b in self.edges:
            adj[a].append(b)
            adj[b].append(a)
        return adj


def build_mapper(assignment: SliceAssignment,
                 components_per_slice: list[list[LayerComponent]],
                 label: str = "filled") -> MapperGraph:
    """Assemble the graph: one node per component, an edge between components
    of adjacent slices iff their member id sets intersect."""
    if len(components_per_slice) != len(assignment):
        raise MissingResultError(
            f"components computed for {len(components_per_slice)} slices, "
            f"assignment has {len(assignment)}")
    nodes = []
    for slice_comps in components_per_slice:
        for comp in slice_comps:
            nodes.append(MapperNode(
                node_id=len(nodes),
                slice_index=comp.slice_index,
                component_id=comp.component_id,
                member_ids=comp.member_ids,
            ))

    # node lookup by (slice, component)
    first_node: dict[tuple[int, int], int] = {}
    for n in nodes:
        first_node[(n.slice_index, n.component_id)] = n.node_id

    edges: list[tuple[int, int]] = []
    for i in range(len(components_per_slice) - 1):
        below = components_per_slice[i]
        above = components_per_slice[i + 1]
        if not below or not above:
            continue
        ids_below = np.concatenate([c.member_ids for c in below])
        comp_below = np.concatenate([
            np.full(c.member_ids.size, c.component_id, dtype=np.int64)
            for c in below])
        order = np.argsort(ids_below, kind="stable")
        ids_below = ids_below[order]
        comp_below = comp_below[order]
        pairs = set()
        for comp in above:
            pos = np.searchsorted(ids_below, comp.member_ids)
            valid = pos < ids_below.size
            pos_v = pos[valid]
            hit = pos_v[ids_below[pos_v] == comp.member_ids[valid]]
            for c_below in np.unique(comp_below[hit]):
                pairs.add((int(c_below), comp.component_id))
        for c_below, c_above in sorted(pairs):
            edges.append((first_node[(i, c_below)], first_node[(i + 1, c_above)]))
    return MapperGraph(nodes=nodes, edges=edges, label=label)


def attach_hole_counts(graph: MapperGraph, hole_counts: dict) -> MapperGraph:
    """Populate node.hole_count from a {(slice_index, component_id): count}
    mapping; raises listing the missing keys if any node has no result."""
    missing = [(n.slice_index, n.component_id) for n in graph.nodes
               if (n.slice_index, n.component_id) not in hole_counts]
    if missing:
        raise MissingResultError(
            f"missing hole counts for {len(missing)} components: "
            f"{missing[:10]}{'...' if len(missing) > 10 else ''}",
            missing_keys=missing)
    for n in graph.nodes:
        n.hole_count = int(hole_counts[(n.slice_index, n.component_id)])
    return graph


def layered_layout(graph: MapperGraph) -> MapperGraph:
    """Deterministic layered layout: y = slice index; x from barycenter
    ordering (two bottom-up passes then one top-down), unit spacing, each
    layer centered on zero."""
    by_slice: dict[int, list[MapperNode]] = {}
    for n in graph.nodes:
        by_slice.setdefault(n.slice_index, []).append(n)
    slices = sorted(by_slice)
    adj = graph.adjacency()
    node_of = {n.node_id: n for n in graph.nodes}
    x: dict[int, float] = {}

    for s in slices:
        layer = sorted(by_slice[s], key=lambda n: n.component_id)
        for k, n in enumerate(layer):
            x[n.node_id] = float(k)

    def barycenter_pass(order_slices, reference_delta):
        for s in order_slices:
            layer = by_slice[s]
            keys = []
            for n in layer:
                ref = [x[v] for v in adj[n.node_id]
                       if node_of[v].slice_index == s + reference_delta]
                bary = sum(ref) / len(ref) if ref else x[n.node_id]
                keys.append((bary, n.component_id, n))
            keys.sort(key=lambda t: (t[0], t[1]))
            for k, (_, _, n) in enumerate(keys):
                x[n.node_id] = float(k)

    if len(slices) > 1:
        barycenter_pass(slices[1:], -1)
        barycenter_pass(slices[1:], -1)
        barycenter_pass(list(reversed(slices[:-1])), +1)

    for s in slices:
        layer = by_slice[s]
        mean = sum(x[n.node_id] for n in layer) / len(layer)
        for n in layer:
            n.layout = (x[n.node_id] - mean, float(n.slice_index))
    return graph


def global_components(graph: MapperGraph) -> tuple[int, list[int]]:
    """Connected components of the Mapper graph itself; labels are dense and
    ordered by each component's smallest node id."""
    n = len(graph.nodes)
    if n == 0:
        return 0, []
    uf = UnionFind(n)
    for a, b in graph.edges:
        uf.union(a, b)
    roots = uf.labels()
    seen: dict[int, int] = {}
    labels = []
    for node_id in range(n):
        root = roots[node_id]
        if root not in seen:
            seen[root] = len(seen)
        labels.append(seen[root])
    return len(seen), labels
