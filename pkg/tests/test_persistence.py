"""Rips filtration and boundary-matrix reduction.

Two independent oracles guard the reduction:
  * betti numbers at a sweep of scales, computed from GF(2) ranks of
    boundary matrices enumerated from scratch;
  * a plain one-pass global column reduction over the full ordered simplex
    list (no clearing, no merge-tree shortcut).
"""

import itertools
import math

import numpy as np
import pytest

from topoprint import (BudgetExceededError, GeometryError, PersistenceInterval,
                       connected_components, diagram_to_json, h1_intervals,
                       holes_at_scale, reduce_boundary_matrix, rips_filtration)

from conftest import circle_points

SQRT2 = math.sqrt(2.0)


# ---------------------------------------------------------------------------
# oracles
# ---------------------------------------------------------------------------

def enumerate_clique_simplices(points, max_scale):
    """All simplices of the Rips complex (dim <= 2) by brute enumeration,
    sorted by (diameter, dimension, lexicographic vertices)."""
    pts = np.asarray(points, dtype=np.float64)
    n = len(pts)
    d = np.sqrt(((pts[:, None, :] - pts[None, :, :]) ** 2).sum(axis=2))
    simplices = [(0.0, 0, (v,)) for v in range(n)]
    for i, j in itertools.combinations(range(n), 2):
        if d[i, j] <= max_scale:
            simplices.append((d[i, j], 1, (i, j)))
    for i, j, k in itertools.combinations(range(n), 3):
        diam = max(d[i, j], d[i, k], d[j, k])
        if diam <= max_scale:
            simplices.append((diam, 2, (i, j, k)))
    simplices.sort(key=lambda s: (s[0], s[1], s[2]))
    return simplices


def gf2_rank(matrix):
    m = matrix.copy().astype(np.uint8)
    rank = 0
    rows, cols = m.shape
    for c in range(cols):
        pivots = np.nonzero(m[rank:, c])[0]
        if pivots.size == 0:
            continue
        p = rank + pivots[0]
        m[[rank, p]] = m[[p, rank]]
        hit = np.nonzero(m[:, c])[0]
        hit = hit[hit != rank]
        m[hit] ^= m[rank]
        rank += 1
        if rank == rows:
            break
    return rank


def betti_numbers_at_scale(points, scale):
    """(betti0, betti1) of the clique complex at the closed threshold."""
    simplices = enumerate_clique_simplices(points, scale)
    verts = [s for s in simplices if s[1] == 0]
    edges = [s[2] for s in simplices if s[1] == 1]
    tris = [s[2] for s in simplices if s[1] == 2]
    n = len(verts)
    if edges:
        d1 = np.zeros((n, len(edges)), dtype=np.uint8)
        for c, (i, j) in enumerate(edges):
            d1[i, c] = d1[j, c] = 1
        r1 = gf2_rank(d1)
    else:
        r1 = 0
    if tris:
        eidx = {e: r for r, e in enumerate(edges)}
        d2 = np.zeros((len(edges), len(tris)), dtype=np.uint8)
        for c, (i, j, k) in enumerate(tris):
            for face in ((i, j), (i, k), (j, k)):
                d2[eidx[face], c] = 1
        r2 = gf2_rank(d2)
    else:
        r2 = 0
    betti0 = n - r1
    betti1 = len(edges) - r1 - r2
    return betti0, betti1


def plain_reduction(points, max_scale):
    """Global left-to-right reduction with set columns; returns
    (pairs, essential) where pairs are ((dim, verts), (dim, verts)) and
    essential are (dim, verts)."""
    simplices = enumerate_clique_simplices(points, max_scale)
    index = {s[2]: i for i, s in enumerate(simplices)}
    low_to_col = {}
    pairs = []
    positive = []
    for j, (diam, dim, verts) in enumerate(simplices):
        if dim == 0:
            col = set()
        else:
            col = {index[f] for f in itertools.combinations(verts, dim)}
        while col:
            low = max(col)
            if low not in low_to_col:
                break
            col ^= low_to_col[low]
        if col:
            low = max(col)
            low_to_col[low] = col
            pairs.append((simplices[low][1:], simplices[j][1:]))
        else:
            positive.append(j)
    killed = set(low_to_col.keys())
    essential = [simplices[j][1:] for j in positive if j not in killed]
    return pairs, essential


def reduction_pairs_as_tuples(result):
    """Map the package's per-dimension pairing onto (dim, verts) tuples."""
    filt = result.filtration
    out = []
    for v, e in result.h0_pairs:
        out.append(((0, (int(v),)), (1, tuple(int(x) for x in filt.edges[e]))))
    for e, t in result.h1_pairs:
        out.append(((1, tuple(int(x) for x in filt.edges[e])),
                    (2, tuple(int(x) for x in filt.triangles[t]))))
    essential = [(0, (int(v),)) for v in result.h0_essential]
    essential += [(1, tuple(int(x) for x in filt.edges[e]))
                  for e in result.h1_essential]
    return sorted(out), sorted(essential)


def alive_counts(result, scale):
    """(h0, h1) classes alive at ``scale`` according to the reduction."""
    filt = result.filtration
    h0 = result.h0_alive_at(scale)
    h1 = 0
    for e, t in result.h1_pairs:
        if filt.edge_diameters[e] <= scale < filt.triangle_diameters[t]:
            h1 += 1
    for e in result.h1_essential:
        if filt.edge_diameters[e] <= scale:
            h1 += 1
    return h0, h1


# ---------------------------------------------------------------------------
# filtration construction
# ---------------------------------------------------------------------------

def test_triangle_clique_counts():
    pts = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, 0.8]])
    f = rips_filtration(pts, 3.0)
    assert (f.n_vertices, f.edges.shape[0], f.triangles.shape[0]) == (3, 3, 1)


def test_two_far_points_no_edge():
    pts = np.array([[0.0, 0.0], [5.0, 0.0]])
    f = rips_filtration(pts, 1.0)
    assert (f.n_vertices, f.edges.shape[0], f.triangles.shape[0]) == (2, 0, 0)


def test_unit_square_counts():
    pts = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    f = rips_filtration(pts, 2.0)
    assert (f.n_vertices, f.edges.shape[0], f.triangles.shape[0]) == (4, 6, 4)


def test_filtration_matches_brute_enumeration():
    rng = np.random.default_rng(17)
    for trial in range(25):
        n = int(rng.integers(1, 22))
        pts = rng.uniform(0, 2, size=(n, 2))
        scale = float(rng.uniform(0.2, 2.5))
        f = rips_filtration(pts, scale)
        got = [(round(d, 12), dim, v) for dim, v, d in f.simplices()]
        expect = [(round(d, 12), dim, v)
                  for d, dim, v in enumerate_clique_simplices(pts, scale)]
        assert got == expect, trial


def test_faces_precede_cofaces():
    rng = np.random.default_rng(19)
    pts = rng.uniform(0, 1.5, size=(18, 2))
    f = rips_filtration(pts, 1.0)
    seen = set()
    for dim, verts, _ in f.simplices():
        for face in itertools.combinations(verts, dim):
            if dim >= 1:
                assert face in seen
        seen.add(verts)


def test_simplex_budget_enforced():
    rng = np.random.default_rng(23)
    pts = rng.uniform(0, 1, size=(60, 2))
    with pytest.raises(BudgetExceededError) as err:
        rips_filtration(pts, 2.0, simplex_budget=500, label="slice 4 component 2")
    assert "slice 4 component 2" in str(err.value)


def test_empty_and_invalid_inputs():
    with pytest.raises(GeometryError):
        rips_filtration(np.zeros((0, 2)), 1.0)
    with pytest.raises(GeometryError):
        rips_filtration(np.zeros((3, 2)), -1.0)
    assert h1_intervals(np.zeros((0, 2)), 1.0) == []


# ---------------------------------------------------------------------------
# reduction
# ---------------------------------------------------------------------------

def test_triangle_has_no_h1():
    pts = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, 0.9]])
    assert h1_intervals(pts, 3.0) == []


def test_unit_square_single_interval():
    pts = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    (iv,) = h1_intervals(pts, 2.0)
    assert abs(iv.birth - 1.0) < 1e-9
    assert abs(iv.death - SQRT2) < 1e-9


def test_circle_single_positive_interval():
    ivs = h1_intervals(circle_points(12), 3.0)
    assert len(ivs) == 1
    assert ivs[0].persistence() > 0
    # thickening picture: the hole closes at the inscribed-triangle side
    assert ivs[0].death == pytest.approx(math.sqrt(3.0), rel=1e-12)


def test_figure_eight_component_has_two_holes():
    # two unit circles bridged by a 0.04 gap: one component, two tunnels
    a = circle_points(100) + np.array([-1.02, 0.0])
    b = circle_points(100) + np.array([1.02, 0.0])
    pts = np.vstack([a, b])
    assert len(connected_components(pts, 0.1)) == 1
    ivs = h1_intervals(pts, 0.5)
    assert holes_at_scale(ivs, 0.4) == 2


def test_annulus_dominant_interval():
    rng = np.random.default_rng(42)
    n = 150
    r = np.sqrt(rng.uniform(1.0 ** 2, 1.4 ** 2, n))
    ang = rng.uniform(0, 2 * np.pi, n)
    pts = np.column_stack([r * np.cos(ang), r * np.sin(ang)])
    ivs = h1_intervals(pts, 2.0)
    dominant = max(ivs, key=lambda iv: iv.persistence())
    assert dominant.persistence() >= 1.0  # inner-radius scale


def test_convex_blob_no_interval_above_noise_floor():
    rng = np.random.default_rng(52)
    pts = rng.uniform(0, 1, size=(200, 2))
    # sampling scale: largest nearest-neighbor gap
    d = np.sqrt(((pts[:, None, :] - pts[None, :, :]) ** 2).sum(axis=2))
    np.fill_diagonal(d, np.inf)
    eps = float(d.min(axis=1).max())
    ivs = h1_intervals(pts, 1.5)  # past the square's diameter: b1 ends at 0
    assert all(math.isfinite(iv.death) for iv in ivs)
    assert all(iv.persistence() <= 2 * eps for iv in ivs)


def test_reduction_matches_plain_reduction():
    rng = np.random.default_rng(101)
    for trial in range(30):
        n = int(rng.integers(2, 18))
        pts = rng.uniform(0, 2, size=(n, 2))
        scale = float(rng.uniform(0.3, 2.8))
        result = reduce_boundary_matrix(rips_filtration(pts, scale))
        got_pairs, got_essential = reduction_pairs_as_tuples(result)
        expect_pairs, expect_essential = plain_reduction(pts, scale)
        expect_pairs = sorted((a, b) for a, b in expect_pairs if a[0] <= 1)
        expect_essential = sorted(e for e in expect_essential if e[0] <= 1)
        assert got_pairs == expect_pairs, trial
        assert got_essential == expect_essential, trial


def betti_sweep_scales(points, cap=None):
    pts = np.asarray(points, dtype=np.float64)
    d = np.sqrt(((pts[:, None, :] - pts[None, :, :]) ** 2).sum(axis=2))
    diameters = np.unique(d[np.triu_indices(len(pts), 1)])
    if cap is not None and diameters.size > cap:
        pick = np.linspace(0, diameters.size - 1, cap).astype(int)
        diameters = diameters[np.unique(pick)]
    sweep = [0.0]
    for a, b in zip(diameters, diameters[1:]):
        sweep += [float(a), float((a + b) / 2)]
    sweep += [float(diameters[-1]), float(diameters[-1]) + 0.05]
    return sweep, float(np.max(d)) + 0.1


def test_betti_sweep_oracle_small_clouds():
    rng = np.random.default_rng(202)
    for trial in range(10):
        n = int(rng.integers(3, 26))
        pts = rng.uniform(0, 2, size=(n, 2))
        sweep, max_scale = betti_sweep_scales(pts, cap=40 if n > 15 else None)
        result = reduce_boundary_matrix(rips_filtration(pts, max_scale))
        for scale in sweep:
            b0, b1 = betti_numbers_at_scale(pts, scale)
            a0, a1 = alive_counts(result, scale)
            assert (a0, a1) == (b0, b1), (trial, scale)


def test_reduced_columns_have_distinct_lows():
    rng = np.random.default_rng(7)
    pts = rng.uniform(0, 1.5, size=(40, 2))
    result = reduce_boundary_matrix(rips_filtration(pts, 1.0))
    lows = [max(rows) for rows in result.reduced_triangle_columns.values()]
    assert len(lows) == len(set(lows))
    # stored columns are exactly the non-zero reduced columns: one per pair
    assert len(lows) == result.h1_pairs.shape[0]
    assert sorted(lows) == sorted(result.h1_pairs[:, 0].tolist())


def test_beta0_crosscheck_against_components():
    rng = np.random.default_rng(303)
    for trial in range(25):
        n = int(rng.integers(2, 300))
        pts = rng.uniform(0, 3, size=(n, 2))
        eps = float(rng.uniform(0.05, 1.0))
        result = reduce_boundary_matrix(rips_filtration(pts, eps))
        assert result.h0_alive_at(eps) == len(connected_components(pts, eps)), trial


def test_scale_equivariance():
    rng = np.random.default_rng(404)
    pts = rng.uniform(0, 1, size=(30, 2))
    base = h1_intervals(pts, 1.5)
    doubled = h1_intervals(pts * 2.0, 3.0)
    assert len(base) == len(doubled)
    for a, b in zip(base, doubled):
        assert b.birth == 2.0 * a.birth  # exact: power-of-two factor
        if math.isinf(a.death):
            assert math.isinf(b.death)
        else:
            assert b.death == 2.0 * a.death
    scaled = h1_intervals(pts * 3.7, 1.5 * 3.7)
    for a, b in zip(base, scaled):
        assert b.birth == pytest.approx(3.7 * a.birth, rel=1e-12)


def test_perturbation_stability_on_fixtures():
    delta = 1e-4
    rng = np.random.default_rng(11)
    square = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    circle = circle_points(12)
    for pts, scale in ((square, 2.0), (circle, 3.0)):
        base = h1_intervals(pts, scale)
        moved = h1_intervals(pts + rng.uniform(-delta, delta, pts.shape), scale)
        assert len(base) == len(moved)
        for a, b in zip(base, moved):
            assert abs(a.birth - b.birth) <= 2 * delta
            if math.isfinite(a.death):
                assert abs(a.death - b.death) <= 2 * delta


def test_infinite_interval_when_open_at_max_scale():
    ivs = h1_intervals(circle_points(24), 0.5)  # hole never closes by 0.5
    assert len(ivs) == 1
    assert math.isinf(ivs[0].death)


def test_holes_at_scale_counting():
    square_iv = PersistenceInterval(1, 1.0, SQRT2)
    assert holes_at_scale([square_iv], 1.2) == 1
    assert holes_at_scale([square_iv], 1.5) == 0
    assert holes_at_scale([square_iv], 1.0) == 1
    assert holes_at_scale([PersistenceInterval(1, 0.3, math.inf)], 99.0) == 1
    with pytest.raises(GeometryError):
        holes_at_scale([], 0.0)


def test_diagram_json_dump():
    ivs = [PersistenceInterval(1, 0.5, 1.25), PersistenceInterval(1, 0.75, math.inf)]
    assert diagram_to_json(ivs) == (
        '[{"dimension": 1, "birth": 0.5, "death": 1.25}, '
        '{"dimension": 1, "birth": 0.75, "death": null}]')
