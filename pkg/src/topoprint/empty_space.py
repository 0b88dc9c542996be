"""Complement sampling: populate the space around and inside the model with
grid points so the same Mapper pipeline can run on the empty space.

A regular grid of candidate cell centers covers the model's bounding box
expanded by a margin; a candidate is emitted when no model point lies within
the occupancy radius (the printer's xy deposit footprint)."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BudgetExceededError, GeometryError
from .model_ingest import PointCloud

DEFAULT_MARGIN_CELLS = 2
DEFAULT_CELL_BUDGET = 50_000_000


@dataclass(frozen=True)
class OccupancyGrid:
    """Axis-aligned cell grid; a cell is occupied iff at least one model point
    lies within the occupancy radius of its center."""

    origin: np.ndarray           # (3,) grid corner (cm)
    xy_res: float
    z_res: float
    shape: tuple[int, int, int]  # cells along x, y, z
    margin_cells: int
    occupancy_radius: float
    occupied: np.ndarray         # bool, shape (nx, ny, nz)

    def cell_centers(self) -> np.ndarray:
        nx, ny, nz = self.shape
        xs = self.origin[0] + (np.arange(nx) + 0.5) * self.xy_res
        ys = self.origin[1] + (np.arange(ny) + 0.5) * self.xy_res
        zs = self.origin[2] + (np.arange(nz) + 0.5) * self.z_res
        return xs, ys, zs

    def margin_mask(self) -> np.ndarray:
        """True for cells in the outermost margin_cells layers of any axis."""
        nx, ny, nz = self.shape
        m = self.margin_cells
        mask = np.zeros((nx, ny, nz), dtype=bool)
        mask[:m, :, :] = True
        mask[nx - m:, :, :] = True
        mask[:, :m, :] = True
        mask[:, ny - m:, :] = True
        mask[:, :, :m] = True
        mask[:, :, nz - m:] = True
        return mask


def build_occupancy_grid(cloud: PointCloud, xy_res: float, z_res: float, *,
                         margin_cells: int = DEFAULT_MARGIN_CELLS,
                         cell_budget: int = DEFAULT_CELL_BUDGET,
                         bounds=None) -> OccupancyGrid:
    """Grid the expanded bounding box and mark cells whose centers fall within
    the occupancy radius (= xy_res) of any model point.

    ``bounds`` forces the unexpanded box for empty clouds; otherwise the cloud
    must be non-empty.
    """
    if xy_res <= 0 or z_res <= 0:
        raise GeometryError(f"resolutions must be positive, got {xy_res}, {z_res}")
    if margin_cells < 1:
        raise GeometryError(f"margin_cells must be >= 1, got {margin_cells}")
    if bounds is not None:
        lo = np.asarray(bounds[0], dtype=np.float64)
        hi = np.asarray(bounds[1], dtype=np.float64)
    elif len(cloud):
        lo, hi = cloud.bounds()
    else:
        raise GeometryError("empty cloud needs explicit bounds")
    span = hi - lo
    if (span < 0).any():
        raise GeometryError(f"invalid bounds: {lo} .. {hi}")

    res = np.array([xy_res, xy_res, z_res])
    inner = np.maximum(1, np.ceil(span / res - 1e-12).astype(np.int64))
    shape = tuple(int(k) for k in inner + 2 * margin_cells)
    total = shape[0] * shape[1] * shape[2]
    if total > cell_budget:
        raise BudgetExceededError(
            f"empty-space grid {shape[0]}x{shape[1]}x{shape[2]} = {total} cells "
            f"exceeds the budget {cell_budget}; use a coarser xy_res/z_res")
    origin = lo - margin_cells * res

    occupied = np.zeros(shape, dtype=bool)
    if len(cloud):
        pts = cloud.coords
        radius = xy_res
        base = np.floor((pts - origin) / res).astype(np.int64)
        # reach of the radius in cells per axis (+1 for center offset)
        reach = np.ceil(radius / res).astype(np.int64) + 1
        nx, ny, nz = shape
        for dx in range(-int(reach[0]), int(reach[0]) + 1):
            for dy in range(-int(reach[1]), int(reach[1]) + 1):
                for dz in range(-int(reach[2]), int(reach[2]) + 1):
                    cand = base + (dx, dy, dz)
                    ok = ((cand >= 0) & (cand < (nx, ny, nz))).all(axis=1)
                    if not ok.any():
                        continue
                    cc = cand[ok]
                    centers = origin + (cc + 0.5) * res
                    d2 = ((centers - pts[ok]) ** 2).sum(axis=1)
                    close = d2 <= radius * radius
                    if close.any():
                        hit = cc[close]
                        occupied[hit[:, 0], hit[:, 1], hit[:, 2]] = True
    return OccupancyGrid(origin=origin, xy_res=xy_res, z_res=z_res, shape=shape,
                         margin_cells=margin_cells, occupancy_radius=xy_res,
                         occupied=occupied)


def empty_space_points(grid: OccupancyGrid) -> tuple[PointCloud, np.ndarray]:
    """Centers of all unoccupied cells in canonical order (z major, then y,
    then x), plus a parallel bool mask marking margin-shell points."""
    nx, ny, nz = grid.shape
    keep = ~np.transpose(grid.occupied, (2, 1, 0)).ravel()
    flat = np.nonzero(keep)[0]
    iz = flat // (ny * nx)
    rem = flat % (ny * nx)
    iy = rem // nx
    ix = rem % nx
    res = np.array([grid.xy_res, grid.xy_res, grid.z_res])
    coords = grid.origin + (np.column_stack([ix, iy, iz]) + 0.5) * res
    margin = np.transpose(grid.margin_mask(), (2, 1, 0)).ravel()[flat]
    return PointCloud(coords), margin


def fill_empty_space(cloud: PointCloud, xy_res: float, z_res: float,
                     margin_cells: int = DEFAULT_MARGIN_CELLS, *,
                     cell_budget: int = DEFAULT_CELL_BUDGET,
                     bounds=None) -> PointCloud:
    """Sample the complement of the model as grid points (see module doc)."""
    grid = build_occupancy_grid(cloud, xy_res, z_res, margin_cells=margin_cells,
                                cell_budget=cell_budget, bounds=bounds)
    points, _ = empty_space_points(grid)
    return points


def empty_connectivity_epsilon(xy_res: float) -> float:
    """Connectivity radius for complement points: joins diagonal xy grid
    neighbors and, when the z spacing is <= xy_res, vertical neighbors too."""
    return xy_res * math.sqrt(2.0) + 1e-9
