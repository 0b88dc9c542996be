"""Cover construction and point assignment."""

import numpy as np
import pytest

from topoprint import (CoverError, PointCloud, assign_points, build_cover,
                       member_slices_for_z)


def column_cloud(zs):
    return PointCloud(np.column_stack([np.zeros_like(zs), np.zeros_like(zs), zs]))


def brute_force_assignment(cloud, cover):
    """Oracle: scan every slice interval for every point."""
    out = [[] for _ in cover]
    for pid, z in enumerate(cloud.coords[:, 2]):
        hits = [s.index for s in cover if s.z_min <= z <= s.z_max]
        if not hits:
            nearest = min(cover, key=lambda s: min(abs(z - s.z_min), abs(z - s.z_max)))
            hits = [nearest.index]
        for h in hits:
            out[h].append(pid)
    return [np.array(sorted(v), dtype=np.int64) for v in out]


def test_cover_31_slices_for_33mm_layers():
    cover = build_cover((0.0, 10.0), z_res=0.33)
    assert len(cover) == 31  # ceil(10 / 0.33)


def test_cover_degenerate_single_slice():
    (s,) = build_cover((0.0, 10.0), slice_count=1, overlap=0.0)
    assert (s.z_min, s.z_max) == (0.0, 10.0)


def test_cover_slice_count_sweep_is_valid():
    for count in range(8, 129):
        cover = build_cover((0.0, 10.0), slice_count=count, overlap=0.05)
        assert len(cover) == count
        thickness = 10.0 / count
        for a, b in zip(cover, cover[1:]):
            assert a.z_min < a.z_max
            # interior neighbors share exactly the overlap amount
            assert a.z_max - b.z_min == pytest.approx(0.05, abs=1e-12)
            assert b.z_min == pytest.approx(a.z_max - 0.05, abs=1e-12)
        assert cover[0].z_min == 0.0 and cover[-1].z_max == 10.0
        assert thickness > 0.05


def test_cover_overlap_must_stay_below_thickness():
    with pytest.raises(CoverError):
        build_cover((0.0, 10.0), slice_count=10, overlap=1.0)
    with pytest.raises(CoverError):
        build_cover((0.0, 10.0), slice_count=10, overlap=1.5)
    build_cover((0.0, 10.0), slice_count=10, overlap=0.999)


def test_cover_parameter_validation():
    with pytest.raises(CoverError):
        build_cover((0.0, 10.0))
    with pytest.raises(CoverError):
        build_cover((0.0, 10.0), z_res=0.5, slice_count=3)
    with pytest.raises(CoverError):
        build_cover((5.0, 5.0), z_res=0.5)
    with pytest.raises(CoverError):
        build_cover((0.0, 10.0), z_res=-1.0)


def test_midline_point_lands_in_both_slices():
    cover = build_cover((0.0, 10.0), slice_count=10, overlap=0.2)
    boundary = 4.0  # between slices 3 and 4
    cloud = column_cloud(np.array([boundary]))
    asn = assign_points(cloud, cover)
    hits = [i for i, m in enumerate(asn.members) if m.size]
    assert hits == [3, 4]


def test_zero_overlap_interior_point_single_slice():
    cover = build_cover((0.0, 10.0), slice_count=10, overlap=0.0)
    cloud = column_cloud(np.array([2.5]))
    asn = assign_points(cloud, cover)
    hits = [i for i, m in enumerate(asn.members) if m.size]
    assert hits == [2]


def test_uniform_column_membership_count():
    zs = np.linspace(0.0, 10.0, 1000)
    cloud = column_cloud(zs)
    thickness = 1.0
    overlap = 0.2 * thickness
    cover = build_cover((0.0, 10.0), slice_count=10, overlap=overlap)
    asn = assign_points(cloud, cover)
    # oracle: direct z-interval scan of the 9 overlap bands
    in_band = 0
    for i in range(9):
        b = (i + 1) * thickness
        in_band += int(np.count_nonzero((zs >= b - overlap / 2)
                                        & (zs <= b + overlap / 2)))
    assert asn.total_memberships() == 1000 + in_band


def test_assignment_matches_brute_force_scan():
    rng = np.random.default_rng(21)
    for trial in range(20):
        count = int(rng.integers(1, 40))
        thickness = 10.0 / count
        overlap = float(rng.uniform(0.0, thickness * 0.99))
        cloud = column_cloud(rng.uniform(-0.01, 10.01, size=60))
        cover = build_cover((0.0, 10.0), slice_count=count, overlap=overlap)
        expect = brute_force_assignment(cloud, cover)
        got = assign_points(cloud, cover)
        for e, g in zip(expect, got.members):
            assert np.array_equal(e, g), (trial, count, overlap)


def test_every_point_in_one_or_two_slices():
    rng = np.random.default_rng(33)
    cloud = column_cloud(rng.uniform(0, 10, size=5000))
    cover = build_cover((0.0, 10.0), slice_count=25, overlap=0.1)
    asn = assign_points(cloud, cover)
    counts = np.zeros(len(cloud), dtype=int)
    for m in asn.members:
        counts[m] += 1
    assert counts.min() >= 1 and counts.max() <= 2
    # exactly 2 iff in an overlap band
    zs = cloud.coords[:, 2]
    in_band = np.zeros(len(cloud), dtype=bool)
    for a, b in zip(cover, cover[1:]):
        in_band |= (zs >= b.z_min) & (zs <= a.z_max)
    assert np.array_equal(counts == 2, in_band)


def test_slice_membership_respects_z_order():
    rng = np.random.default_rng(8)
    cloud = column_cloud(rng.uniform(0, 10, size=2000))
    cover = build_cover((0.0, 10.0), slice_count=20, overlap=0.2)
    asn = assign_points(cloud, cover)
    zs = cloud.coords[:, 2]
    for i in range(len(cover)):
        if asn.members[i].size == 0:
            continue
        assert zs[asn.members[i]].max() <= cover[i].z_max
        assert zs[asn.members[i]].min() >= cover[i].z_min


def test_out_of_cover_points_snap_to_nearest_slice():
    cover = build_cover((0.0, 10.0), slice_count=10, overlap=0.1)
    cloud = column_cloud(np.array([-0.5, 10.5]))
    asn = assign_points(cloud, cover)
    assert asn.members[0].tolist() == [0]
    assert asn.members[9].tolist() == [1]


def test_per_point_interval_tests_bounded_by_two():
    rng = np.random.default_rng(55)
    cover = build_cover((0.0, 10.0), slice_count=37, overlap=0.11)
    for z in rng.uniform(-0.2, 10.2, size=4000):
        hits, tests = member_slices_for_z(float(z), cover)
        assert tests <= 2
        expect = [s.index for s in cover if s.z_min <= z <= s.z_max]
        if expect:
            assert hits == expect
        else:
            assert len(hits) == 1


def test_member_slices_agrees_with_assign_points():
    rng = np.random.default_rng(2)
    cloud = column_cloud(rng.uniform(0, 10, size=1500))
    cover = build_cover((0.0, 10.0), slice_count=13, overlap=0.3)
    asn = assign_points(cloud, cover)
    per_point = [[] for _ in cover]
    for pid, z in enumerate(cloud.coords[:, 2]):
        for h in member_slices_for_z(float(z), cover)[0]:
            per_point[h].append(pid)
    for i in range(len(cover)):
        assert np.array_equal(asn.members[i], np.array(sorted(per_point[i]),
                                                       dtype=np.int64))
