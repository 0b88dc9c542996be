"""Per-slice connected components at a fixed connectivity radius.

Distances are measured on the xy projection of the slice's points (a printer
layer is treated as a planar cross-section) with a closed threshold: a pair at
distance exactly epsilon is connected. Components are canonically ordered and
numbered by their smallest member point id, so the partition is independent of
input point order.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._accel import grid_union, uf_flatten


@dataclass(frozen=True)
class LayerComponent:
    """One connected component of a slice; an H0 class at scale epsilon."""

    slice_index: int
    component_id: int
    member_ids: np.ndarray  # sorted global point ids


class UnionFind:
    """Union-find with path compression and union by size."""

    def __init__(self, size: int):
        self.parent = list(range(size))
        self.size = [1] * size
        self.count = size

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        self.count -= 1
        return True

    def labels(self) -> list[int]:
        return [self.find(i) for i in range(len(self.parent))]


@dataclass(frozen=True)
class GridIndex:
    """Spatial hash over xy cells of side ``cell``.

    Neighbor queries inspect the 3x3 cell block around a point, which is a
    superset of the epsilon-ball when cell >= epsilon. The flat arrays group
    point rows by cell for the compiled pair kernels.
    """

    cell: float
    coords: np.ndarray       # (n, 2) indexed xy coordinates
    cells: dict = field(repr=False)          # (ix, iy) -> row index array
    order: np.ndarray = field(repr=False)    # rows grouped by cell
    starts: np.ndarray = field(repr=False)   # group boundaries into order
    keys: np.ndarray = field(repr=False)     # sorted encoded cell keys
    key_stride: int = 0

    def query_candidates(self, point_xy) -> np.ndarray:
        """Row indices in the 3x3 cell block around the given xy location."""
        ix = int(np.floor(point_xy[0] / self.cell))
        iy = int(np.floor(point_xy[1] / self.cell))
        chunks = []
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                hit = self.cells.get((ix + dx, iy + dy))
                if hit is not None:
                    chunks.append(hit)
        if not chunks:
            return np.zeros(0, dtype=np.int64)
        return np.sort(np.concatenate(chunks))

    def occupied_cells(self) -> int:
        return len(self.cells)


def _project_xy(points: np.ndarray) -> np.ndarray:
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] not in (2, 3):
        raise ValueError(f"points must be (n, 2) or (n, 3), got {pts.shape}")
    return np.ascontiguousarray(pts[:, :2])


def build_grid_index(points: np.ndarray, cell: float) -> GridIndex:
    """Hash points into integer xy cells of side ``cell`` (floor(coord/cell))."""
    if cell <= 0:
        raise ValueError(f"cell must be positive, got {cell}")
    xy = _project_xy(points)
    n = xy.shape[0]
    if n == 0:
        empty = np.zeros(0, dtype=np.int64)
        return GridIndex(cell=cell, coords=xy, cells={}, order=empty,
                         starts=np.zeros(1, dtype=np.int64), keys=empty,
                         key_stride=1)
    ij = np.floor(xy / cell).astype(np.int64)
    lo = ij.min(axis=0)
    norm = ij - lo
    stride = int(norm[:, 1].max()) + 2
    encoded = norm[:, 0] * stride + norm[:, 1]
    order = np.argsort(encoded, kind="stable").astype(np.int64)
    sorted_keys = encoded[order]
    change = np.nonzero(sorted_keys[1:] != sorted_keys[:-1])[0] + 1
    starts = np.concatenate([[0], change, [n]]).astype(np.int64)
    keys = sorted_keys[starts[:-1]]
    cells = {}
    for c in range(keys.shape[0]):
        k = int(keys[c])
        cells[(k // stride + int(lo[0]), k % stride + int(lo[1]))] = \
            np.sort(order[starts[c]:starts[c + 1]])
    return GridIndex(cell=cell, coords=xy, cells=cells, order=order,
                     starts=starts, keys=keys, key_stride=stride)


def _canonical_components(roots: np.ndarray, ids: np.ndarray,
                          slice_index: int) -> list[LayerComponent]:
    """Partition rows by root label, numbering components by smallest id."""
    uniq, inverse = np.unique(roots, return_inverse=True)
    min_ids = np.full(uniq.shape[0], np.iinfo(np.int64).max, dtype=np.int64)
    np.minimum.at(min_ids, inverse, ids)
    comp_order = np.argsort(min_ids, kind="stable")
    rank = np.empty_like(comp_order)
    rank[comp_order] = np.arange(comp_order.size)
    comp_idx = rank[inverse]
    row_order = np.lexsort((ids, comp_idx))
    counts = np.bincount(comp_idx, minlength=uniq.shape[0])
    groups = np.split(ids[row_order], np.cumsum(counts)[:-1])
    return [LayerComponent(slice_index=slice_index, component_id=k,
                           member_ids=np.array(g))
            for k, g in enumerate(groups)]


def _metric_coords(points: np.ndarray, metric: str) -> np.ndarray:
    pts = np.asarray(points, dtype=np.float64)
    if metric == "xy":
        return _project_xy(pts)
    if metric == "xyz":
        if pts.ndim != 2 or pts.shape[1] != 3:
            raise ValueError("metric 'xyz' needs (n, 3) points")
        return np.ascontiguousarray(pts)
    raise ValueError(f"unknown metric {metric!r}")


def connected_components(points: np.ndarray, epsilon: float, *,
                         ids: np.ndarray | None = None,
                         slice_index: int = 0,
                         metric: str = "xy") -> list[LayerComponent]:
    """Single-linkage components at the closed distance threshold epsilon,
    accelerated by a spatial hash grid with cell size epsilon.

    The default metric projects onto xy (a printed layer is planar); "xyz"
    measures full 3D distance and exists for complement clouds, where the
    projection would connect cells across a thin horizontal wall.
    """
    if epsilon <= 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    pts = _metric_coords(points, metric)
    n = pts.shape[0]
    if ids is None:
        ids = np.arange(n, dtype=np.int64)
    else:
        ids = np.asarray(ids, dtype=np.int64)
        if ids.shape != (n,):
            raise ValueError("ids must have one entry per point")
    if n == 0:
        return []

    grid = build_grid_index(pts[:, :2], epsilon)
    parent = np.arange(n, dtype=np.int64)
    size = np.ones(n, dtype=np.int64)
    grid_union(pts, grid.order, grid.starts, grid.keys, grid.key_stride,
               epsilon * epsilon, parent, size)
    roots = uf_flatten(parent)
    return _canonical_components(roots, ids, slice_index)


def brute_force_components(points: np.ndarray, epsilon: float, *,
                           ids: np.ndarray | None = None,
                           slice_index: int = 0,
                           metric: str = "xy") -> list[LayerComponent]:
    """All-pairs transitive closure at threshold epsilon; the test oracle for
    connected_components. Quadratic, intended for small inputs."""
    if epsilon <= 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    pts = _metric_coords(points, metric)
    n = pts.shape[0]
    if ids is None:
        ids = np.arange(n, dtype=np.int64)
    else:
        ids = np.asarray(ids, dtype=np.int64)
    if n == 0:
        return []
    d2 = ((pts[:, None, :] - pts[None, :, :]) ** 2).sum(axis=2)
    uf = UnionFind(n)
    ii, jj = np.nonzero(np.triu(d2 <= epsilon * epsilon, k=1))
    for i, j in zip(ii, jj):
        uf.union(int(i), int(j))
    roots = np.asarray(uf.labels(), dtype=np.int64)
    return _canonical_components(roots, ids, slice_index)
