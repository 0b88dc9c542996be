"""Shared geometric fixtures for the test suite."""

import numpy as np
import pytest

from topoprint import PointCloud


def fibonacci_sphere(n: int, radius: float, center) -> np.ndarray:
    """Near-uniform sample of a sphere surface (spacing ~ sqrt(4*pi*r^2/n))."""
    k = np.arange(n) + 0.5
    phi = np.arccos(1.0 - 2.0 * k / n)
    theta = np.pi * (1.0 + 5.0 ** 0.5) * k
    return np.asarray(center) + radius * np.column_stack([
        np.cos(theta) * np.sin(phi),
        np.sin(theta) * np.sin(phi),
        np.cos(phi),
    ])


def cylinder_shell(n: int, radius: float, height: float, center_xy,
                   seed: int = 7) -> np.ndarray:
    """Open tube surface (no caps), axis vertical, z in [0, height]."""
    rng = np.random.default_rng(seed)
    theta = rng.uniform(0.0, 2.0 * np.pi, n)
    z = rng.uniform(0.0, height, n)
    return np.column_stack([
        center_xy[0] + radius * np.cos(theta),
        center_xy[1] + radius * np.sin(theta),
        z,
    ])


def torus_shell(spacing: float, major_radius: float, tube_radius: float,
                center) -> np.ndarray:
    """Flat donut surface (axis vertical) sampled on a regular (u, v) lattice
    with gaps <= spacing: slicing it yields two concentric rings per middle
    layer that merge near the top and bottom."""
    nu = int(np.ceil(2.0 * np.pi * (major_radius + tube_radius) / spacing))
    nv = int(np.ceil(2.0 * np.pi * tube_radius / spacing))
    u = np.linspace(0.0, 2.0 * np.pi, nu, endpoint=False)
    v = np.linspace(0.0, 2.0 * np.pi, nv, endpoint=False)
    uu, vv = np.meshgrid(u, v, indexing="ij")
    uu, vv = uu.ravel(), vv.ravel()
    r = major_radius + tube_radius * np.cos(vv)
    return np.asarray(center) + np.column_stack([
        r * np.cos(uu),
        r * np.sin(uu),
        tube_radius * np.sin(vv),
    ])


def circle_points(n: int, radius: float = 1.0) -> np.ndarray:
    ang = np.linspace(0.0, 2.0 * np.pi, n, endpoint=False)
    return radius * np.column_stack([np.cos(ang), np.sin(ang)])


def helix_field(height: float = 10.0, pitch: float = 1.4,
                radii=(0.5, 0.85, 1.2, 1.55, 1.9), columns: int = 3,
                col_pitch: float = 4.1, n_target: int = 101_000) -> np.ndarray:
    """Nested-helix benchmark fixture (~n_target points).

    A helix's slice cross-section is an arc whose length scales with the
    slice thickness and never folds onto itself while pitch >= thickness +
    overlap, so per-layer Rips complexes stay substantial at every slice
    count of the 8..128 sweep."""
    per = []
    total_len = 0.0
    for r in radii:
        length = (height / pitch) * float(np.hypot(2 * np.pi * r, pitch))
        per.append(length)
        total_len += length * columns * columns
    spacing = total_len / n_target
    chunks = []
    for cx in range(columns):
        for cy in range(columns):
            ox = 2.3 + cx * col_pitch
            oy = 2.3 + cy * col_pitch
            for r, length in zip(radii, per):
                n = int(length / spacing)
                z = (np.arange(n) * spacing / length) * height
                ang = 2 * np.pi * z / pitch + r * 17.0
                chunks.append(np.column_stack([
                    ox + r * np.cos(ang), oy + r * np.sin(ang), z]))
    return np.vstack(chunks)


@pytest.fixture(scope="session")
def sphere_cloud() -> PointCloud:
    """Dense sealed hollow sphere: R = 3 cm, shell spacing ~0.09 cm."""
    return PointCloud(fibonacci_sphere(14000, 3.0, (5.0, 5.0, 5.0)))


@pytest.fixture(scope="session")
def punctured_sphere_cloud(sphere_cloud) -> PointCloud:
    """Same shell with a 1.0 cm diameter cap removed at the north pole."""
    pts = sphere_cloud.coords
    keep = np.linalg.norm(pts - np.array([5.0, 5.0, 8.0]), axis=1) > 0.5
    return PointCloud(pts[keep])
