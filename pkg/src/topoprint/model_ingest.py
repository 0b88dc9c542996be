"""Model ingestion: PLY/STL parsing, mesh densification, and height normalization.

All coordinates are centimeters, stored as float64. Point ids are implicit
row positions and are never reshuffled by any operation in this module.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

import numpy as np

from .errors import DensifyError, GeometryError, MeshParseError, UnsupportedFormatError

MAX_SUBDIVISION_DEPTH = 16

_PLY_TYPES = {
    "char": "i1", "int8": "i1",
    "uchar": "u1", "uint8": "u1",
    "short": "i2", "int16": "i2",
    "ushort": "u2", "uint16": "u2",
    "int": "i4", "int32": "i4",
    "uint": "u4", "uint32": "u4",
    "float": "f4", "float32": "f4",
    "double": "f8", "float64": "f8",
}


@dataclass(frozen=True)
class PointCloud:
    """Ordered 3D points; the id of a point is its row index."""

    coords: np.ndarray  # (n, 3) float64

    def __post_init__(self):
        coords = np.ascontiguousarray(self.coords, dtype=np.float64)
        if coords.ndim != 2 or coords.shape[1] != 3:
            raise GeometryError(f"point cloud must be (n, 3), got {coords.shape}")
        if coords.size and not np.isfinite(coords).all():
            raise GeometryError("point cloud contains non-finite coordinates")
        object.__setattr__(self, "coords", coords)

    def __len__(self) -> int:
        return self.coords.shape[0]

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        """Axis-aligned bounding box as (min, max) corner vectors."""
        if len(self) == 0:
            raise GeometryError("empty point cloud has no bounds")
        return self.coords.min(axis=0), self.coords.max(axis=0)

    def z_extent(self) -> tuple[float, float]:
        lo, hi = self.bounds()
        return float(lo[2]), float(hi[2])


@dataclass(frozen=True)
class IndexedMesh:
    """Vertex cloud plus triangle index triples (degenerate triangles excluded)."""

    vertices: PointCloud
    triangles: np.ndarray  # (m, 3) int64, each index < len(vertices)

    def __post_init__(self):
        tris = np.ascontiguousarray(self.triangles, dtype=np.int64).reshape(-1, 3)
        n = len(self.vertices)
        if tris.size:
            if tris.min() < 0 or tris.max() >= n:
                raise MeshParseError(
                    f"triangle index out of range (vertex count {n})")
            degenerate = ((tris[:, 0] == tris[:, 1])
                          | (tris[:, 1] == tris[:, 2])
                          | (tris[:, 0] == tris[:, 2]))
            if degenerate.any():
                raise MeshParseError("degenerate triangle (repeated vertex index)")
        object.__setattr__(self, "triangles", tris)


def _drop_degenerate(tris: np.ndarray) -> np.ndarray:
    if tris.size == 0:
        return tris.reshape(-1, 3)
    keep = ((tris[:, 0] != tris[:, 1])
            & (tris[:, 1] != tris[:, 2])
            & (tris[:, 0] != tris[:, 2]))
    return tris[keep]


# ---------------------------------------------------------------------------
# PLY
# ---------------------------------------------------------------------------

@dataclass
class _PlyProperty:
    name: str
    dtype: str                 # numpy dtype code for scalars / list items
    count_dtype: str | None = None  # set for list properties


@dataclass
class _PlyElement:
    name: str
    count: int
    properties: list[_PlyProperty] = field(default_factory=list)

    def has_lists(self) -> bool:
        return any(p.count_dtype is not None for p in self.properties)


def _parse_ply_header(data: bytes):
    end = data.find(b"end_header")
    if end < 0:
        raise MeshParseError("missing end_header", byte_offset=len(data))
    nl = data.find(b"\n", end)
    if nl < 0:
        raise MeshParseError("end_header line not terminated", byte_offset=end)
    body_start = nl + 1
    header_text = data[:body_start].decode("ascii", errors="replace")

    fmt = None
    elements: list[_PlyElement] = []
    offset = 0
    for line in header_text.splitlines(keepends=True):
        stripped = line.strip()
        tokens = stripped.split()
        line_offset = offset
        offset += len(line.encode("ascii", errors="replace"))
        if not tokens or tokens[0] == "comment" or tokens[0] == "obj_info":
            continue
        if line_offset == 0:
            if tokens != ["ply"]:
                raise MeshParseError("not a PLY file (missing magic)", byte_offset=0)
            continue
        keyword = tokens[0]
        if keyword == "format":
            if len(tokens) != 3:
                raise MeshParseError("malformed format line", byte_offset=line_offset)
            fmt = tokens[1]
            if fmt == "binary_big_endian":
                raise UnsupportedFormatError(
                    "big-endian PLY bodies are not supported", byte_offset=line_offset)
            if fmt not in ("ascii", "binary_little_endian"):
                raise MeshParseError(f"unknown PLY format '{fmt}'",
                                     byte_offset=line_offset)
        elif keyword == "element":
            if len(tokens) != 3:
                raise MeshParseError("malformed element line", byte_offset=line_offset)
            try:
                count = int(tokens[2])
            except ValueError:
                raise MeshParseError(f"bad element count '{tokens[2]}'",
                                     byte_offset=line_offset) from None
            if count < 0:
                raise MeshParseError("negative element count", byte_offset=line_offset)
            elements.append(_PlyElement(tokens[1], count))
        elif keyword == "property":
            if not elements:
                raise MeshParseError("property before any element",
                                     byte_offset=line_offset)
            if len(tokens) >= 2 and tokens[1] == "list":
                if len(tokens) != 5:
                    raise MeshParseError("malformed list property",
                                         byte_offset=line_offset)
                count_t, item_t, name = tokens[2], tokens[3], tokens[4]
                if count_t not in _PLY_TYPES or item_t not in _PLY_TYPES:
                    raise MeshParseError(f"unknown property type in '{stripped}'",
                                         byte_offset=line_offset)
                elements[-1].properties.append(
                    _PlyProperty(name, _PLY_TYPES[item_t], _PLY_TYPES[count_t]))
            elif len(tokens) == 3:
                if tokens[1] not in _PLY_TYPES:
                    raise MeshParseError(f"unknown property type '{tokens[1]}'",
                                         byte_offset=line_offset)
                elements[-1].properties.append(_PlyProperty(tokens[2],
                                                            _PLY_TYPES[tokens[1]]))
            else:
                raise MeshParseError("malformed property line",
                                     byte_offset=line_offset)
        elif keyword == "end_header":
            break
        else:
            raise MeshParseError(f"unknown header keyword '{keyword}'",
                                 byte_offset=line_offset)
    if fmt is None:
        raise MeshParseError("header has no format line", byte_offset=body_start)
    return fmt, elements, body_start


def _ascii_tokens(data: bytes, start: int):
    text = data[start:].decode("ascii", errors="replace")
    return text.split(), start


def _read_ply_ascii(data, start, elements):
    tokens, _ = _ascii_tokens(data, start)
    pos = 0
    out: dict[str, dict[str, list]] = {}
    for elem in elements:
        columns: dict[str, list] = {p.name: [] for p in elem.properties}
        for _ in range(elem.count):
            for prop in elem.properties:
                try:
                    if prop.count_dtype is not None:
                        n = int(tokens[pos]); pos += 1
                        vals = [float(t) for t in tokens[pos:pos + n]]
                        if len(vals) != n:
                            raise IndexError
                        pos += n
                        columns[prop.name].append(vals)
                    else:
                        columns[prop.name].append(float(tokens[pos]))
                        pos += 1
                except (IndexError, ValueError):
                    raise MeshParseError(
                        f"truncated or malformed ASCII body in element '{elem.name}'",
                        byte_offset=start) from None
        out[elem.name] = columns
    return out


def _read_ply_binary(data, start, elements):
    out: dict[str, dict[str, list]] = {}
    pos = start
    for elem in elements:
        if not elem.has_lists():
            dtype = np.dtype([(p.name, "<" + p.dtype) for p in elem.properties])
            nbytes = dtype.itemsize * elem.count
            if pos + nbytes > len(data):
                raise MeshParseError(
                    f"binary body truncated in element '{elem.name}'",
                    byte_offset=len(data))
            rows = np.frombuffer(data, dtype=dtype, count=elem.count, offset=pos)
            pos += nbytes
            out[elem.name] = {p.name: rows[p.name] for p in elem.properties}
            continue

        # List-bearing element: try the homogeneous fast path (single list
        # property with a constant count), else walk record by record.
        columns: dict[str, list] = {p.name: [] for p in elem.properties}
        fast = None
        if len(elem.properties) == 1 and elem.count > 0:
            prop = elem.properties[0]
            cdt = np.dtype("<" + prop.count_dtype)
            idt = np.dtype("<" + prop.dtype)
            if pos + cdt.itemsize <= len(data):
                first_n = int(np.frombuffer(data, dtype=cdt, count=1, offset=pos)[0])
                stride = cdt.itemsize + first_n * idt.itemsize
                total = stride * elem.count
                if first_n > 0 and pos + total <= len(data):
                    rec = np.dtype([("n", cdt), ("v", idt, (first_n,))])
                    rows = np.frombuffer(data, dtype=rec, count=elem.count, offset=pos)
                    if (rows["n"] == first_n).all():
                        columns[prop.name] = [row.tolist() for row in rows["v"]]
                        pos += total
                        fast = True
        if fast is None:
            for _ in range(elem.count):
                for prop in elem.properties:
                    if prop.count_dtype is not None:
                        cdt = np.dtype("<" + prop.count_dtype)
                        if pos + cdt.itemsize > len(data):
                            raise MeshParseError(
                                f"binary body truncated in element '{elem.name}'",
                                byte_offset=len(data))
                        n = int(np.frombuffer(data, dtype=cdt, count=1, offset=pos)[0])
                        pos += cdt.itemsize
                        idt = np.dtype("<" + prop.dtype)
                        if pos + n * idt.itemsize > len(data):
                            raise MeshParseError(
                                f"binary body truncated in element '{elem.name}'",
                                byte_offset=len(data))
                        vals = np.frombuffer(data, dtype=idt, count=n, offset=pos)
                        pos += n * idt.itemsize
                        columns[prop.name].append(vals.tolist())
                    else:
                        dt = np.dtype("<" + prop.dtype)
                        if pos + dt.itemsize > len(data):
                            raise MeshParseError(
                                f"binary body truncated in element '{elem.name}'",
                                byte_offset=len(data))
                        columns[prop.name].append(
                            float(np.frombuffer(data, dtype=dt, count=1, offset=pos)[0]))
                        pos += dt.itemsize
        out[elem.name] = columns
    return out


def _fan_triangulate(polygons) -> np.ndarray:
    tris = []
    for poly in polygons:
        idx = [int(round(v)) for v in poly]
        if len(idx) < 3:
            raise MeshParseError(f"face with {len(idx)} vertices")
        for k in range(1, len(idx) - 1):
            tris.append((idx[0], idx[k], idx[k + 1]))
    if not tris:
        return np.zeros((0, 3), dtype=np.int64)
    return np.asarray(tris, dtype=np.int64)


def parse_ply(data: bytes) -> IndexedMesh:
    """Parse an ASCII or binary-little-endian PLY file into an IndexedMesh.

    Vertices keep declaration order. Polygonal faces are fan-triangulated;
    a faceless PLY yields an empty triangle list. Raises MeshParseError with
    a byte offset on malformed input, UnsupportedFormatError on big-endian
    bodies.
    """
    fmt, elements, body_start = _parse_ply_header(data)
    names = [e.name for e in elements]
    if "vertex" not in names:
        raise MeshParseError("PLY has no vertex element", byte_offset=body_start)
    if fmt == "ascii":
        parsed = _read_ply_ascii(data, body_start, elements)
    else:
        parsed = _read_ply_binary(data, body_start, elements)

    vertex = parsed["vertex"]
    for axis in ("x", "y", "z"):
        if axis not in vertex:
            raise MeshParseError(f"vertex element lacks '{axis}' property",
                                 byte_offset=body_start)
    coords = np.column_stack([
        np.asarray(vertex["x"], dtype=np.float64),
        np.asarray(vertex["y"], dtype=np.float64),
        np.asarray(vertex["z"], dtype=np.float64),
    ]) if len(vertex["x"]) else np.zeros((0, 3))

    if "face" in parsed:
        face_cols = parsed["face"]
        list_name = None
        for cand in ("vertex_indices", "vertex_index"):
            if cand in face_cols:
                list_name = cand
                break
        if list_name is None and face_cols:
            list_name = next(iter(face_cols))
        polygons = face_cols.get(list_name, []) if list_name else []
        triangles = _fan_triangulate(polygons)
    else:
        triangles = np.zeros((0, 3), dtype=np.int64)

    triangles = _drop_degenerate(triangles)
    return IndexedMesh(PointCloud(coords), triangles)


def write_ply_ascii(mesh: IndexedMesh) -> bytes:
    """Serialize a mesh as ASCII PLY; floats use shortest round-trip decimals."""
    lines = [
        "ply",
        "format ascii 1.0",
        f"element vertex {len(mesh.vertices)}",
        "property double x",
        "property double y",
        "property double z",
        f"element face {mesh.triangles.shape[0]}",
        "property list uchar int vertex_indices",
        "end_header",
    ]
    for x, y, z in mesh.vertices.coords:
        lines.append(f"{float(x)!r} {float(y)!r} {float(z)!r}")
    for a, b, c in mesh.triangles:
        lines.append(f"3 {int(a)} {int(b)} {int(c)}")
    return ("\n".join(lines) + "\n").encode("ascii")


# ---------------------------------------------------------------------------
# STL
# ---------------------------------------------------------------------------

_ASCII_VERTEX_RE = re.compile(
    rb"vertex\s+([^\s]+)\s+([^\s]+)\s+([^\s]+)", re.IGNORECASE)


def _looks_like_ascii_stl(data: bytes) -> bool:
    head = data[:512].lstrip()
    if not head.lower().startswith(b"solid"):
        return False
    probe = data[:4096].lower()
    return b"facet" in probe or b"endsolid" in probe


def _dedup_vertices(corners: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Exact-equality dedup keeping first-seen order; returns (verts, inverse)."""
    if corners.shape[0] == 0:
        return corners.reshape(0, 3), np.zeros(0, dtype=np.int64)
    uniq, first_idx, inverse = np.unique(
        corners, axis=0, return_index=True, return_inverse=True)
    order = np.argsort(first_idx, kind="stable")
    rank = np.empty_like(order)
    rank[order] = np.arange(order.size)
    return uniq[order], rank[inverse.reshape(-1)]


def parse_stl(data: bytes) -> IndexedMesh:
    """Parse binary or ASCII STL; vertices deduplicated by exact equality."""
    if _looks_like_ascii_stl(data):
        matches = _ASCII_VERTEX_RE.findall(data)
        try:
            corners = np.asarray([[float(v) for v in m] for m in matches],
                                 dtype=np.float64)
        except ValueError:
            raise MeshParseError("malformed ASCII STL vertex line") from None
        if corners.shape[0] % 3 != 0:
            raise MeshParseError(
                f"ASCII STL vertex count {corners.shape[0]} not a multiple of 3")
        corners = corners.reshape(-1, 3)
    else:
        if len(data) < 84:
            raise MeshParseError("binary STL shorter than its 84-byte preamble",
                                 byte_offset=len(data))
        count = int(np.frombuffer(data, dtype="<u4", count=1, offset=80)[0])
        expected = 84 + 50 * count
        if len(data) < expected:
            raise MeshParseError(
                f"binary STL truncated: header declares {count} triangles "
                f"({expected} bytes) but file has {len(data)}",
                byte_offset=len(data))
        rec = np.dtype([("normal", "<f4", (3,)), ("verts", "<f4", (3, 3)),
                        ("attr", "<u2")])
        rows = np.frombuffer(data, dtype=rec, count=count, offset=84)
        corners = rows["verts"].reshape(-1, 3).astype(np.float64)

    verts, inverse = _dedup_vertices(corners)
    triangles = _drop_degenerate(inverse.reshape(-1, 3).astype(np.int64))
    return IndexedMesh(PointCloud(verts), triangles)


# ---------------------------------------------------------------------------
# Densification and scaling
# ---------------------------------------------------------------------------

def _triangle_areas(coords: np.ndarray, tris: np.ndarray) -> np.ndarray:
    a = coords[tris[:, 0]]
    b = coords[tris[:, 1]]
    c = coords[tris[:, 2]]
    return 0.5 * np.linalg.norm(np.cross(b - a, c - a), axis=1)


def densify_mesh(mesh: IndexedMesh, max_edge: float) -> PointCloud:
    """Add midpoint-subdivision vertices until every triangle edge is <= max_edge.

    Each oversized triangle is split 4-way at its edge midpoints, recursively,
    up to MAX_SUBDIVISION_DEPTH levels. The result keeps the original vertices
    first (ids preserved) followed by new vertices in deterministic encounter
    order, exact-deduplicated.
    """
    if max_edge <= 0:
        raise DensifyError(f"max_edge must be positive, got {max_edge}")
    if mesh.triangles.shape[0] == 0:
        raise DensifyError("mesh has no triangles to subdivide")
    coords = mesh.vertices.coords
    areas = _triangle_areas(coords, mesh.triangles)
    if not (areas > 0).any():
        raise DensifyError("all triangles have zero area; nothing to subdivide")

    # Longest edge decides the recursion depth; bail out early if any triangle
    # would need more than the depth bound.
    edges = mesh.triangles[:, [0, 1, 1, 2, 0, 2]].reshape(-1, 2)
    lengths = np.linalg.norm(coords[edges[:, 0]] - coords[edges[:, 1]], axis=1)
    worst = float(lengths.max())
    if worst > max_edge * (2 ** MAX_SUBDIVISION_DEPTH):
        need = math.ceil(math.log2(worst / max_edge))
        raise DensifyError(
            f"edge of length {worst:.6g} needs {need} subdivision levels "
            f"(bound is {MAX_SUBDIVISION_DEPTH})")

    new_points: dict[tuple[float, float, float], int] = {}

    def emit(p: np.ndarray) -> None:
        key = (p[0], p[1], p[2])
        if key not in new_points:
            new_points[key] = len(new_points)

    def split(a, b, c, depth):
        ab = np.linalg.norm(a - b)
        bc = np.linalg.norm(b - c)
        ca = np.linalg.norm(c - a)
        if max(ab, bc, ca) <= max_edge:
            return
        if depth >= MAX_SUBDIVISION_DEPTH:
            raise DensifyError(
                f"subdivision exceeded depth bound {MAX_SUBDIVISION_DEPTH}")
        mab = (a + b) / 2.0
        mbc = (b + c) / 2.0
        mca = (c + a) / 2.0
        emit(mab); emit(mbc); emit(mca)
        split(a, mab, mca, depth + 1)
        split(mab, b, mbc, depth + 1)
        split(mca, mbc, c, depth + 1)
        split(mab, mbc, mca, depth + 1)

    tri_max_edge = lengths.reshape(-1, 3).max(axis=1)
    for tri_idx in np.nonzero(tri_max_edge > max_edge)[0]:
        ia, ib, ic = mesh.triangles[tri_idx]
        split(coords[ia].copy(), coords[ib].copy(), coords[ic].copy(), 0)

    if not new_points:
        return PointCloud(coords.copy())
    existing = {tuple(p): None for p in coords}
    added = [np.asarray(k) for k in new_points if k not in existing]
    if not added:
        return PointCloud(coords.copy())
    return PointCloud(np.vstack([coords, np.asarray(added)]))


def scale_to_height(cloud: PointCloud, target_height: float) -> PointCloud:
    """Uniformly scale about the bounding-box minimum so the z-extent equals
    target_height; x and y scale by the same factor."""
    if target_height <= 0:
        raise GeometryError(f"target_height must be positive, got {target_height}")
    if len(cloud) == 0:
        raise GeometryError("cannot scale an empty point cloud")
    lo, _ = cloud.bounds()
    z_lo, z_hi = cloud.z_extent()
    extent = z_hi - z_lo
    if extent <= 0:
        raise GeometryError("flat cloud (z-extent is zero) cannot be scaled to a height")
    factor = target_height / extent
    return PointCloud(lo + (cloud.coords - lo) * factor)
