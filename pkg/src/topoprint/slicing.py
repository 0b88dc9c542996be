"""Vertical cover construction and point-to-slice assignment.

The cover mirrors a 3D printer's layer structure: the z range is split into
equal base intervals, each widened by half the overlap on both sides (clamped
at the extremes), so interior neighbors share an overlap band of exactly the
requested width.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CoverError
from .model_ingest import PointCloud

DEFAULT_OVERLAP_CM = 0.05


@dataclass(frozen=True)
class CoverSlice:
    """One z-interval of the cover; membership uses the closed interval."""

    index: int
    z_min: float
    z_max: float
    overlap: float

    def __post_init__(self):
        if not self.z_min < self.z_max:
            raise CoverError(
                f"slice {self.index}: z_min {self.z_min} >= z_max {self.z_max}")


@dataclass(frozen=True)
class SliceAssignment:
    """Sorted point ids per slice. A point id appears in 1 or 2 slices; in 2
    exactly when its z lies in an overlap band."""

    members: tuple[np.ndarray, ...]

    def __len__(self) -> int:
        return len(self.members)

    def total_memberships(self) -> int:
        return int(sum(m.size for m in self.members))


def build_cover(z_extent: tuple[float, float], *, z_res: float | None = None,
                slice_count: int | None = None,
                overlap: float = DEFAULT_OVERLAP_CM) -> list[CoverSlice]:
    """Build the overlapping vertical cover over the closed range ``z_extent``.

    Exactly one of ``z_res`` (layer thickness, cm) or ``slice_count`` must be
    given; with ``z_res`` the count is ceil(extent / z_res). ``overlap`` is an
    absolute length in cm and must stay below the slice thickness, otherwise a
    point could fall into more than two slices and break the graph edge rule.
    """
    z_lo, z_hi = float(z_extent[0]), float(z_extent[1])
    extent = z_hi - z_lo
    if extent <= 0:
        raise CoverError(f"z extent must be positive, got {extent}")
    if (z_res is None) == (slice_count is None):
        raise CoverError("give exactly one of z_res or slice_count")
    if z_res is not None:
        if z_res <= 0:
            raise CoverError(f"z_res must be positive, got {z_res}")
        slice_count = math.ceil(extent / z_res)
    if slice_count < 1:
        raise CoverError(f"slice_count must be >= 1, got {slice_count}")
    if overlap < 0:
        raise CoverError(f"overlap must be >= 0, got {overlap}")
    thickness = extent / slice_count
    if overlap >= thickness:
        raise CoverError(
            f"overlap {overlap} must be smaller than the slice thickness "
            f"{thickness:.6g}; points would join more than 2 slices")

    half = overlap / 2.0
    slices = []
    for i in range(slice_count):
        base_lo = z_lo + extent * i / slice_count
        base_hi = z_lo + extent * (i + 1) / slice_count
        slices.append(CoverSlice(
            index=i,
            z_min=max(z_lo, base_lo - half),
            z_max=min(z_hi, base_hi + half),
            overlap=overlap,
        ))
    return slices


def member_slices_for_z(z: float, cover: list[CoverSlice]) -> tuple[list[int], int]:
    """Slice indices containing ``z`` plus the number of interval tests spent.

    The base cell comes from index arithmetic, then only the neighbor on the
    nearer side of the cell can also contain z (overlap < thickness), so at
    most 2 interval tests are ever needed. Out-of-cover z maps to the nearest
    slice.
    """
    m = len(cover)
    z_lo = cover[0].z_min
    z_hi = cover[-1].z_max
    span = z_hi - z_lo
    slot = min(m - 1, max(0, int((z - z_lo) / span * m)))

    tests = 1
    in_slot = cover[slot].z_min <= z <= cover[slot].z_max

    cell_lo = z_lo + span * slot / m
    cell_hi = z_lo + span * (slot + 1) / m
    nb = slot - 1 if (z - cell_lo) <= (cell_hi - z) else slot + 1
    in_nb = False
    if 0 <= nb < m:
        tests += 1
        in_nb = cover[nb].z_min <= z <= cover[nb].z_max

    hits = []
    if in_slot:
        hits.append(slot)
    if in_nb:
        hits.append(nb)
    if not hits:
        # numerical drift: clamp to the nearest slice
        hits.append(0 if z < z_lo else m - 1 if z > z_hi else slot)
    return sorted(hits), tests


def assign_points(cloud: PointCloud, cover: list[CoverSlice]) -> SliceAssignment:
    """Assign every point id to the slices whose closed interval contains its z.

    Boundary ties join both adjacent slices; a point outside the cover
    (numerical drift) is assigned to the nearest slice, never dropped. Work is
    O(n) in the point count: each point is checked against its arithmetic base
    cell and the one neighbor that could share it.
    """
    if not cover:
        raise CoverError("empty cover")
    m = len(cover)
    z = cloud.coords[:, 2]
    ids = np.arange(len(cloud), dtype=np.int64)
    z_lo = cover[0].z_min
    z_hi = cover[-1].z_max
    span = z_hi - z_lo
    z_min = np.array([s.z_min for s in cover])
    z_max = np.array([s.z_max for s in cover])

    slot = np.clip(((z - z_lo) / span * m).astype(np.int64), 0, m - 1)
    in_slot = (z >= z_min[slot]) & (z <= z_max[slot])

    cell_lo = z_lo + span * slot / m
    cell_hi = z_lo + span * (slot + 1) / m
    nb = np.where((z - cell_lo) <= (cell_hi - z), slot - 1, slot + 1)
    nb_valid = (nb >= 0) & (nb < m)
    nb_c = np.clip(nb, 0, m - 1)
    in_nb = nb_valid & (z >= z_min[nb_c]) & (z <= z_max[nb_c])

    drifted = ~in_slot & ~in_nb
    drift_slot = np.where(z < z_lo, 0, np.where(z > z_hi, m - 1, slot))

    pair_slice = np.concatenate([slot[in_slot], nb_c[in_nb], drift_slot[drifted]])
    pair_id = np.concatenate([ids[in_slot], ids[in_nb], ids[drifted]])
    order = np.lexsort((pair_id, pair_slice))
    pair_slice = pair_slice[order]
    pair_id = pair_id[order]
    counts = np.bincount(pair_slice, minlength=m)
    splits = np.cumsum(counts)[:-1]
    members = tuple(np.array(part) for part in np.split(pair_id, splits))
    return SliceAssignment(members=members)
