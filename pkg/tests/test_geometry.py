"""Smallest enclosing balls, geometric graphs and cloud IO."""

from __future__ import annotations

import math
from itertools import combinations

import numpy as np
import pytest

from cechlab.geometry import (Ball, GridIndex, PointCloud, ball_volume,
                              geometric_graph, miniball)


def _miniball_oracle(points: np.ndarray) -> float:
    """Radius by exhaustive support enumeration, independent of Welzl.

    The optimum ball is the circumball of some support subset of at most
    d+1 points; try them all and keep the smallest that contains
    everything.
    """
    pts = [tuple(map(float, p)) for p in points]
    d = len(pts[0])
    best = math.inf
    for size in range(1, min(d + 1, len(pts)) + 1):
        for support in combinations(pts, size):
            if size == 1:
                center, radius = np.asarray(support[0]), 0.0
            else:
                base = np.asarray(support[0])
                u = np.asarray(support[1:]) - base
                gram = u @ u.T
                rhs = 0.5 * np.einsum("ij,ij->i", u, u)
                try:
                    coeff = np.linalg.solve(gram, rhs)
                except np.linalg.LinAlgError:
                    continue
                center = base + coeff @ u
                radius = float(np.linalg.norm(center - base))
            if radius < best:
                dist = np.linalg.norm(points - center, axis=1)
                if float(dist.max()) <= radius * (1.0 + 1e-9) + 1e-12:
                    best = radius
    return best


def test_miniball_degenerate_sizes():
    assert miniball([(2.0, 1.0)]).radius == 0.0
    ball = miniball([(0.0, 0.0), (2.0, 0.0)])
    assert ball.center == pytest.approx((1.0, 0.0))
    assert ball.radius == pytest.approx(1.0)


def test_miniball_equilateral_triangle():
    s = 1.0
    pts = [(0.0, 0.0), (s, 0.0), (s / 2.0, s * math.sqrt(3.0) / 2.0)]
    assert miniball(pts).radius == pytest.approx(s / math.sqrt(3.0), abs=1e-12)


def test_miniball_obtuse_triangle_uses_longest_side():
    pts = [(0.0, 0.0), (4.0, 0.0), (2.0, 0.1)]
    ball = miniball(pts)
    assert ball.radius == pytest.approx(2.0, abs=1e-12)
    assert ball.center == pytest.approx((2.0, 0.0), abs=1e-12)


def test_miniball_square_and_cube():
    square = [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0)]
    assert miniball(square).radius == pytest.approx(math.sqrt(2.0) / 2.0, abs=1e-12)
    cube = [(x, y, z) for x in (0.0, 1.0) for y in (0.0, 1.0) for z in (0.0, 1.0)]
    assert miniball(cube).radius == pytest.approx(math.sqrt(3.0) / 2.0, abs=1e-12)


def test_miniball_matches_support_oracle():
    rng = np.random.default_rng(7)
    for _ in range(120):
        d = int(rng.integers(2, 4))
        n = int(rng.integers(2, 13))
        pts = rng.random((n, d)) * rng.choice([1e-3, 1.0, 50.0])
        ball = miniball(pts)
        assert ball.radius == pytest.approx(_miniball_oracle(pts), rel=1e-9)
        dist = np.linalg.norm(pts - np.asarray(ball.center), axis=1)
        assert float(dist.max()) <= ball.radius * (1.0 + 1e-9)


def test_miniball_translation_and_scale_equivariance():
    rng = np.random.default_rng(3)
    pts = rng.random((9, 3))
    base = miniball(pts)
    shifted = miniball(pts + 100.0)
    assert shifted.radius == pytest.approx(base.radius, rel=1e-9)
    scaled = miniball(pts * 0.001)
    assert scaled.radius == pytest.approx(base.radius * 0.001, rel=1e-9)


def test_miniball_duplicates_and_empty():
    assert miniball([(1.0, 2.0), (1.0, 2.0), (1.0, 2.0)]).radius == 0.0
    with pytest.raises(ValueError):
        miniball([])


def test_ball_contains_closed_boundary():
    ball = Ball((0.0, 0.0), 1.0)
    assert ball.contains((1.0, 0.0))
    assert not ball.contains((1.0 + 1e-6, 0.0))


def test_ball_volume_known_dimensions():
    assert ball_volume(1, 2.0) == pytest.approx(4.0)
    assert ball_volume(2, 3.0) == pytest.approx(math.pi * 9.0)
    assert ball_volume(3, 1.0) == pytest.approx(4.0 * math.pi / 3.0)


def test_geometric_graph_path_example():
    cloud = PointCloud.from_points([(0.0, 0.0), (1.0, 0.0), (2.0, 0.0)])
    graph = geometric_graph(cloud, 1.0)
    assert graph.edges == ((0, 1), (1, 2))
    assert graph.is_connected()
    assert graph.component_count() == 1


def test_geometric_graph_closed_at_exact_distance():
    cloud = PointCloud.from_points([(0.0, 0.0), (0.5, 0.0)])
    assert geometric_graph(cloud, 0.5).edges == ((0, 1),)
    assert geometric_graph(cloud, 0.5 - 1e-12).edges == ()


def test_geometric_graph_zero_radius_groups_duplicates():
    cloud = PointCloud.from_points([(0.0, 0.0), (0.0, 0.0), (1.0, 1.0)])
    graph = geometric_graph(cloud, 0.0)
    assert graph.edges == ((0, 1),)
    assert graph.component_count() == 2


def test_geometric_graph_grid_matches_brute_force():
    rng = np.random.default_rng(11)
    for n in (5, 47, 48, 49, 130):
        pts = rng.random((n, 2))
        cloud = PointCloud(2, pts)
        for r in (0.05, 0.2, 0.6):
            edges = set(geometric_graph(cloud, r).edges)
            expected = {(i, j) for i in range(n) for j in range(i + 1, n)
                        if np.linalg.norm(pts[i] - pts[j]) <= r}
            assert edges == expected


def test_geometric_graph_monotone_in_radius():
    rng = np.random.default_rng(2)
    cloud = PointCloud(3, rng.random((30, 3)))
    prev: set = set()
    for r in (0.1, 0.3, 0.5, 0.9):
        edges = set(geometric_graph(cloud, r).edges)
        assert prev <= edges
        prev = edges


def test_geometric_graph_translation_invariant():
    rng = np.random.default_rng(5)
    cloud = PointCloud(2, rng.random((25, 2)))
    moved = cloud.translated((17.0, -4.0))
    assert geometric_graph(cloud, 0.3).edges == geometric_graph(moved, 0.3).edges


def test_grid_index_query_matches_brute_force():
    rng = np.random.default_rng(13)
    pts = rng.random((80, 2)) * 3.0
    index = GridIndex(PointCloud(2, pts), 0.25)
    for center in rng.random((10, 2)) * 3.0:
        hits = sorted(index.query_ball(center, 0.25))
        expected = [i for i in range(80)
                    if np.linalg.norm(pts[i] - center) <= 0.25]
        assert hits == expected


def test_cloud_roundtrip_exact(tmp_path):
    rng = np.random.default_rng(19)
    cloud = PointCloud(3, rng.standard_normal((14, 3)))
    path = tmp_path / "cloud.txt"
    cloud.save(path)
    again = PointCloud.load(path)
    assert again.dim == 3
    assert np.array_equal(again.points, cloud.points)


def test_cloud_empty_roundtrip(tmp_path):
    cloud = PointCloud.from_points([], dim=2)
    path = tmp_path / "empty.txt"
    cloud.save(path)
    again = PointCloud.load(path)
    assert len(again) == 0 and again.dim == 2


def test_cloud_validation_and_flags():
    with pytest.raises(ValueError):
        PointCloud(2, np.array([[np.inf, 0.0]]))
    with pytest.raises(ValueError):
        PointCloud(2, np.zeros((3, 3)))
    dup = PointCloud.from_points([(0.0, 0.0), (0.0, 0.0)])
    assert dup.has_duplicates
    assert not PointCloud.from_points([(0.0, 0.0), (1.0, 0.0)]).has_duplicates
    assert PointCloud.from_points([(0.0, 0.0), (3.0, 4.0)]).diameter() == pytest.approx(5.0)


def test_cloud_points_are_read_only():
    cloud = PointCloud.from_points([(0.0, 0.0), (1.0, 0.0)])
    with pytest.raises(ValueError):
        cloud.points[0, 0] = 5.0
