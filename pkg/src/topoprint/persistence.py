"""Vietoris-Rips persistent homology up to dimension 2, per component.

The filtration is the clique complex over xy-projected points: vertices enter
at diameter 0, an edge at the distance of its endpoints, a triangle at its
longest edge. Reduction runs over Z/2 dimension by dimension: triangle
columns through left-to-right column reduction, edge columns through the
equivalent merge-tree pairing; the combined output equals the plain global
reduction, which the test suite cross-checks.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from . import components as _components
from ._accel import forward_triangles, grid_edges, h0_pairs_union_find, reduce_columns
from .errors import BudgetExceededError, GeometryError

DEFAULT_SIMPLEX_BUDGET = 5_000_000


@dataclass(frozen=True)
class PersistenceInterval:
    """A birth/death scale pair (cm) for one homology class; death is
    math.inf for classes still open at the filtration's max scale."""

    dimension: int
    birth: float
    death: float

    def persistence(self) -> float:
        return self.death - self.birth

    def alive_at(self, scale: float) -> bool:
        return self.birth <= scale < self.death


@dataclass(frozen=True)
class Filtration:
    """Rips complex up to dimension 2, rows ordered by (diameter, dim, lex)."""

    n_vertices: int
    edges: np.ndarray              # (m, 2) u < v, filtration order
    edge_diameters: np.ndarray     # (m,)
    triangles: np.ndarray          # (t, 3) u < v < w, filtration order
    triangle_diameters: np.ndarray  # (t,)
    max_scale: float

    def simplex_count(self) -> int:
        return self.n_vertices + self.edges.shape[0] + self.triangles.shape[0]

    def simplices(self):
        """All simplices as (dimension, vertex tuple, diameter) in global
        filtration order, faces always before cofaces."""
        for v in range(self.n_vertices):
            yield (0, (v,), 0.0)
        e, t = 0, 0
        m, tt = self.edges.shape[0], self.triangles.shape[0]
        while e < m or t < tt:
            if t >= tt:
                take_edge = True
            elif e >= m:
                take_edge = False
            else:
                # equal diameters: lower dimension first
                take_edge = self.edge_diameters[e] <= self.triangle_diameters[t]
            if take_edge:
                yield (1, tuple(int(x) for x in self.edges[e]),
                       float(self.edge_diameters[e]))
                e += 1
            else:
                yield (2, tuple(int(x) for x in self.triangles[t]),
                       float(self.triangle_diameters[t]))
                t += 1


@dataclass(frozen=True)
class ReductionResult:
    """Persistence pairs for dimensions 0 and 1 plus the reduced triangle
    columns (keyed by triangle row) for inspection."""

    filtration: Filtration
    h0_pairs: np.ndarray          # (k, 2) rows (vertex_id, edge_row)
    h0_essential: np.ndarray      # vertex ids never killed
    h1_pairs: np.ndarray          # (k, 2) rows (edge_row, triangle_row)
    h1_essential: np.ndarray      # edge rows of cycles open at max_scale
    reduced_triangle_columns: dict

    def h0_deaths(self) -> np.ndarray:
        if self.h0_pairs.shape[0] == 0:
            return np.zeros(0)
        return self.filtration.edge_diameters[self.h0_pairs[:, 1]]

    def h0_alive_at(self, scale: float) -> int:
        """Number of H0 classes alive at ``scale`` (<= the filtration's
        max_scale): components at the closed threshold."""
        deaths = self.h0_deaths()
        return self.filtration.n_vertices - int(np.count_nonzero(deaths <= scale))

    def h1_intervals(self) -> list[PersistenceInterval]:
        """Dimension-1 intervals sorted by (birth, death); zero-persistence
        pairs (simultaneous edge/triangle insertions) are dropped."""
        filt = self.filtration
        out = []
        for e_row, t_row in self.h1_pairs:
            birth = float(filt.edge_diameters[e_row])
            death = float(filt.triangle_diameters[t_row])
            if birth < death:
                out.append(PersistenceInterval(1, birth, death))
        for e_row in self.h1_essential:
            out.append(PersistenceInterval(1, float(filt.edge_diameters[e_row]),
                                           math.inf))
        out.sort(key=lambda iv: (iv.birth, iv.death))
        return out


def _pair_distances(xy: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    diff = xy[a] - xy[b]
    return np.sqrt((diff * diff).sum(axis=1))


def _collect_edges(xy: np.ndarray, max_scale: float):
    """All unordered pairs within max_scale via the spatial grid; falls back
    to the dense matrix for small inputs."""
    n = xy.shape[0]
    if n <= 512:
        d2 = ((xy[:, None, :] - xy[None, :, :]) ** 2).sum(axis=2)
        ii, jj = np.nonzero(np.triu(d2 <= max_scale * max_scale, k=1))
        return ii.astype(np.int64), jj.astype(np.int64)
    grid = _components.build_grid_index(xy, max_scale)
    zero = np.zeros(0, dtype=np.int64)
    count = grid_edges(xy, grid.order, grid.starts, grid.keys, grid.key_stride,
                       max_scale * max_scale, zero, zero, np.zeros(0))
    out_i = np.empty(count, dtype=np.int64)
    out_j = np.empty(count, dtype=np.int64)
    out_d = np.empty(count, dtype=np.float64)
    grid_edges(xy, grid.order, grid.starts, grid.keys, grid.key_stride,
               max_scale * max_scale, out_i, out_j, out_d)
    swap = out_i > out_j
    out_i[swap], out_j[swap] = out_j[swap], out_i[swap]
    return out_i, out_j


def rips_filtration(points: np.ndarray, max_scale: float, *,
                    simplex_budget: int = DEFAULT_SIMPLEX_BUDGET,
                    label: str = "") -> Filtration:
    """Build the Rips filtration: all edges at pairwise distance <= max_scale,
    all triangles whose three edges qualify (diameter = longest edge).

    Raises BudgetExceededError naming ``label`` when the complex would exceed
    ``simplex_budget`` simplices.
    """
    if max_scale <= 0:
        raise GeometryError(f"max_scale must be positive, got {max_scale}")
    xy = _components._project_xy(points)
    n = xy.shape[0]
    if n == 0:
        raise GeometryError("rips_filtration needs at least one point")

    ei, ej = _collect_edges(xy, max_scale)
    m = ei.shape[0]
    if n + m > simplex_budget:
        raise BudgetExceededError(
            f"component {label or '<unnamed>'}: {n} vertices + {m} edges "
            f"exceed the simplex budget {simplex_budget}")

    diam = _pair_distances(xy, ei, ej)
    order = np.lexsort((ej, ei, diam))
    ei, ej, diam = ei[order], ej[order], diam[order]
    edges = np.column_stack([ei, ej])

    # forward adjacency in vertex-id order for triangle enumeration
    deg = np.bincount(ei, minlength=n)
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(deg, out=indptr[1:])
    by_vertex = np.lexsort((ej, ei))
    indices = ej[by_vertex].astype(np.int64)

    limit = simplex_budget - n - m
    zero = np.zeros(0, dtype=np.int64)
    t_count = forward_triangles(indptr, indices, limit, zero, zero, zero)
    if t_count > limit:
        raise BudgetExceededError(
            f"component {label or '<unnamed>'}: triangle count passed "
            f"{limit} with {n} vertices and {m} edges; simplex budget "
            f"{simplex_budget} exceeded")
    ta = np.empty(t_count, dtype=np.int64)
    tb = np.empty(t_count, dtype=np.int64)
    tc = np.empty(t_count, dtype=np.int64)
    forward_triangles(indptr, indices, limit, ta, tb, tc)

    t_diam = np.maximum(np.maximum(_pair_distances(xy, ta, tb),
                                   _pair_distances(xy, ta, tc)),
                        _pair_distances(xy, tb, tc))
    t_order = np.lexsort((tc, tb, ta, t_diam))
    triangles = np.column_stack([ta, tb, tc])[t_order]
    t_diam = t_diam[t_order]

    return Filtration(n_vertices=n, edges=edges, edge_diameters=diam,
                      triangles=triangles, triangle_diameters=t_diam,
                      max_scale=float(max_scale))


def _edge_rows_of_triangles(filt: Filtration) -> np.ndarray:
    """(t, 3) boundary row indices, each triangle's edge rows sorted asc."""
    n = filt.n_vertices
    key = filt.edges[:, 0] * n + filt.edges[:, 1]
    key_order = np.argsort(key)
    sorted_key = key[key_order]
    tri = filt.triangles
    rows = np.empty((tri.shape[0], 3), dtype=np.int64)
    for k, (a, b) in enumerate(((0, 1), (0, 2), (1, 2))):
        want = tri[:, a] * n + tri[:, b]
        pos = np.searchsorted(sorted_key, want)
        rows[:, k] = key_order[pos]
    rows.sort(axis=1)
    return rows


def reduce_boundary_matrix(filtration: Filtration) -> ReductionResult:
    """Standard Z/2 persistence reduction of the filtration's boundary matrix.

    Triangle columns are reduced left to right over edge rows; edge columns
    are paired by the equivalent merge-tree rule over vertex rows. Output is
    identical to reducing the full matrix in one pass.
    """
    filt = filtration
    # dimension 1: edges kill vertices
    pair_vertex, pair_edge, positive = h0_pairs_union_find(
        filt.edges, filt.n_vertices)
    killed = np.zeros(filt.n_vertices, dtype=bool)
    killed[pair_vertex] = True
    h0_pairs = np.column_stack([pair_vertex, pair_edge]) \
        if pair_vertex.size else np.zeros((0, 2), dtype=np.int64)
    h0_essential = np.nonzero(~killed)[0].astype(np.int64)

    # dimension 2: triangles kill cycle edges
    if filt.triangles.shape[0]:
        tri_rows = _edge_rows_of_triangles(filt)
        (p_row, p_col, s_start, s_len, s_col, pool) = reduce_columns(
            tri_rows, filt.edges.shape[0])
        h1_pairs = np.column_stack([p_row, p_col]) \
            if p_row.size else np.zeros((0, 2), dtype=np.int64)
        reduced = {}
        for low in np.nonzero(s_start >= 0)[0]:
            start = int(s_start[low])
            reduced[int(s_col[low])] = pool[start:start + int(s_len[low])].tolist()
    else:
        h1_pairs = np.zeros((0, 2), dtype=np.int64)
        reduced = {}

    paired_edges = np.zeros(filt.edges.shape[0], dtype=bool)
    if h1_pairs.shape[0]:
        paired_edges[h1_pairs[:, 0]] = True
    h1_essential = np.nonzero(positive & ~paired_edges)[0].astype(np.int64)

    return ReductionResult(filtration=filt, h0_pairs=h0_pairs,
                           h0_essential=h0_essential, h1_pairs=h1_pairs,
                           h1_essential=h1_essential,
                           reduced_triangle_columns=reduced)


def h1_intervals(points: np.ndarray, max_scale: float, *,
                 simplex_budget: int = DEFAULT_SIMPLEX_BUDGET,
                 label: str = "") -> list[PersistenceInterval]:
    """Dimension-1 birth/death intervals of the Rips filtration; classes still
    open at max_scale get death = +inf. Empty input yields an empty list."""
    pts = np.asarray(points, dtype=np.float64)
    if pts.size == 0:
        return []
    filt = rips_filtration(pts, max_scale, simplex_budget=simplex_budget,
                           label=label)
    return reduce_boundary_matrix(filt).h1_intervals()


def holes_at_scale(intervals, scale: float) -> int:
    """Count intervals alive at ``scale``: birth <= scale < death."""
    if scale <= 0:
        raise GeometryError(f"scale must be positive, got {scale}")
    return sum(1 for iv in intervals if iv.alive_at(scale))


def diagram_to_json(intervals) -> str:
    """Debug dump of a persistence diagram as JSON (birth/death in cm)."""
    return json.dumps([
        {"dimension": iv.dimension, "birth": iv.birth,
         "death": None if math.isinf(iv.death) else iv.death}
        for iv in intervals])
