"""Point clouds, smallest enclosing balls and geometric graphs.

Distances are Euclidean throughout and all ball conventions are closed:
a point at distance exactly r from the center lies inside the ball, and a
pair at distance exactly r is an edge of the geometric graph at scale r.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations, product
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np

__all__ = [
    "PointCloud",
    "Ball",
    "GeometricGraph",
    "GridIndex",
    "miniball",
    "geometric_graph",
    "ball_volume",
]

# Relative slack used when testing ball membership; keeps Welzl stable
# without inflating radii beyond the documented 1e-9 containment bound.
_EPS = 1e-12

# Below this size brute-force pair scans beat the grid's bookkeeping.
_BRUTE_FORCE_CUTOFF = 48


@dataclass(frozen=True)
class PointCloud:
    """Immutable finite point set in R^d.

    Duplicate points are permitted; `has_duplicates` flags them so callers
    that assume distinctness can check cheaply.
    """

    dim: int
    points: np.ndarray  # shape (n, dim), float64

    def __post_init__(self) -> None:
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[1] != self.dim:
            raise ValueError(f"expected shape (n, {self.dim}), got {pts.shape}")
        if self.dim < 1:
            raise ValueError("dimension must be at least 1")
        if pts.size and not np.isfinite(pts).all():
            raise ValueError("coordinates must be finite")
        pts = pts.copy()
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @staticmethod
    def from_points(points: Iterable[Sequence[float]], dim: int | None = None) -> "PointCloud":
        arr = np.atleast_2d(np.asarray(list(points), dtype=np.float64))
        if arr.size == 0:
            if dim is None:
                raise ValueError("dimension required for an empty cloud")
            arr = arr.reshape(0, dim)
        return PointCloud(dim=arr.shape[1], points=arr)

    def __len__(self) -> int:
        return self.points.shape[0]

    @cached_property
    def has_duplicates(self) -> bool:
        if len(self) < 2:
            return False
        return len({tuple(p) for p in self.points}) < len(self)

    @cached_property
    def as_tuples(self) -> tuple[tuple[float, ...], ...]:
        # Plain-float view; the pairwise loops below are faster off numpy.
        return tuple(map(tuple, self.points.tolist()))

    def diameter(self) -> float:
        if len(self) < 2:
            return 0.0
        best = 0.0
        pts = self.as_tuples
        for i, p in enumerate(pts):
            for q in pts[i + 1:]:
                d2 = _dist2(p, q)
                if d2 > best:
                    best = d2
        return math.sqrt(best)

    def translated(self, offset: Sequence[float]) -> "PointCloud":
        return PointCloud(self.dim, self.points + np.asarray(offset, dtype=np.float64))

    def scaled(self, factor: float) -> "PointCloud":
        return PointCloud(self.dim, self.points * float(factor))

    def save(self, path: str | Path) -> None:
        """Write the text format: header `d n`, then one point per line."""
        lines = [f"{self.dim} {len(self)}"]
        for p in self.points:
            lines.append(" ".join(repr(float(x)) for x in p))
        Path(path).write_text("\n".join(lines) + "\n")

    @staticmethod
    def load(path: str | Path) -> "PointCloud":
        text = Path(path).read_text().split("\n")
        header = text[0].split()
        if len(header) != 2:
            raise ValueError(f"malformed header {text[0]!r}: expected 'd n'")
        dim, n = int(header[0]), int(header[1])
        rows = []
        for line in text[1:]:
            if line.strip():
                rows.append([float(x) for x in line.split()])
        if len(rows) != n:
            raise ValueError(f"header promised {n} points, found {len(rows)}")
        arr = np.asarray(rows, dtype=np.float64).reshape(n, dim) if rows else np.zeros((0, dim))
        return PointCloud(dim, arr)


@dataclass(frozen=True)
class Ball:
    """Closed ball with center and radius."""

    center: tuple[float, ...]
    radius: float

    def contains(self, point: Sequence[float], rel_tol: float = 1e-9) -> bool:
        d2 = _dist2(self.center, tuple(point))
        bound = self.radius * (1.0 + rel_tol)
        return d2 <= bound * bound


def _dist2(p: Sequence[float], q: Sequence[float]) -> float:
    s = 0.0
    for a, b in zip(p, q):
        t = a - b
        s += t * t
    return s


# ---------------------------------------------------------------------------
# Smallest enclosing ball (Welzl, move-to-front)
# ---------------------------------------------------------------------------


def _circumball(boundary: list[tuple[float, ...]]) -> tuple[tuple[float, ...], float]:
    """Smallest ball with all boundary points on its surface.

    The boundary set has at most d+1 affinely independent points; a
    least-squares solve keeps degenerate supports from blowing up.
    """
    if not boundary:
        return (), -1.0
    base = boundary[0]
    if len(boundary) == 1:
        return base, 0.0
    if len(boundary) == 2:
        q = boundary[1]
        center = tuple((a + b) / 2.0 for a, b in zip(base, q))
        return center, math.sqrt(_dist2(center, base))
    u = np.asarray(boundary[1:], dtype=np.float64) - np.asarray(base, dtype=np.float64)
    gram = u @ u.T
    rhs = 0.5 * np.einsum("ij,ij->i", u, u)
    try:
        coeff = np.linalg.solve(gram, rhs)
    except np.linalg.LinAlgError:
        coeff = np.linalg.lstsq(gram, rhs, rcond=None)[0]
    center_arr = np.asarray(base, dtype=np.float64) + coeff @ u
    center = tuple(center_arr.tolist())
    return center, math.sqrt(max(_dist2(center, base), 0.0))


def _mtf_miniball(points: list[tuple[float, ...]], boundary: list[tuple[float, ...]],
                  dim: int) -> tuple[tuple[float, ...], float]:
    """Move-to-front Welzl recursion; depth bounded by the boundary size."""
    center, radius = _circumball(boundary)
    if len(boundary) == dim + 1:
        return center, radius
    for i, p in enumerate(points):
        if radius < 0.0 or _dist2(center, p) > radius * radius * (1.0 + _EPS):
            center, radius = _mtf_miniball(points[:i], boundary + [p], dim)
            points.insert(0, points.pop(i))
    return center, radius


def miniball(points: Iterable[Sequence[float]] | PointCloud | np.ndarray) -> Ball:
    """Smallest closed ball containing all points.

    Exact (up to roundoff) because the optimum is determined by at most
    d+1 support points; deterministic for a fixed input order.
    """
    if isinstance(points, PointCloud):
        pts = list(points.as_tuples)
    else:
        pts = [tuple(float(x) for x in p) for p in points]
    if not pts:
        raise ValueError("miniball of an empty point set is undefined")
    dim = len(pts[0])
    if len(pts) == 1:
        return Ball(pts[0], 0.0)
    if len(pts) == 2:
        c, r = _circumball(pts)
        return Ball(c, r)
    if len(pts) == 3:
        # Hot path in filtration building: try each pair's diametral ball,
        # fall back to the circumball of all three.
        best = None
        for a, b in ((0, 1), (0, 2), (1, 2)):
            c, r = _circumball([pts[a], pts[b]])
            k = 3 - a - b
            if _dist2(c, pts[k]) <= r * r * (1.0 + _EPS):
                if best is None or r < best[1]:
                    best = (c, r)
        if best is not None:
            return Ball(best[0], best[1])
        c, r = _circumball(pts)
        return Ball(c, r)
    order = list(pts)
    if len(order) > 8:
        # Fixed-seed shuffle: defuses adversarial orders, stays deterministic.
        random.Random(0x5EED).shuffle(order)
    c, r = _mtf_miniball(order, [], dim)
    return Ball(c, r)


def ball_volume(dim: int, radius: float) -> float:
    """Lebesgue volume of a d-ball."""
    return math.pi ** (dim / 2.0) / math.gamma(dim / 2.0 + 1.0) * radius ** dim


# ---------------------------------------------------------------------------
# Geometric graphs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GeometricGraph:
    """Graph on cloud indices with edges between points at distance <= r."""

    cloud: PointCloud
    r: float
    edges: tuple[tuple[int, int], ...]  # i < j, sorted

    @cached_property
    def adjacency(self) -> tuple[frozenset[int], ...]:
        adj: list[set[int]] = [set() for _ in range(len(self.cloud))]
        for i, j in self.edges:
            adj[i].add(j)
            adj[j].add(i)
        return tuple(frozenset(s) for s in adj)

    @cached_property
    def adjacency_above(self) -> tuple[tuple[int, ...], ...]:
        """Neighbors with larger index, ascending; used by clique growth."""
        adj: list[list[int]] = [[] for _ in range(len(self.cloud))]
        for i, j in self.edges:
            adj[i].append(j)
        return tuple(tuple(sorted(s)) for s in adj)

    def edge_count(self) -> int:
        return len(self.edges)

    def is_connected(self) -> bool:
        n = len(self.cloud)
        if n == 0:
            return True
        seen = {0}
        stack = [0]
        adj = self.adjacency
        while stack:
            for j in adj[stack.pop()]:
                if j not in seen:
                    seen.add(j)
                    stack.append(j)
        return len(seen) == n

    def component_count(self) -> int:
        n = len(self.cloud)
        seen: set[int] = set()
        comps = 0
        adj = self.adjacency
        for start in range(n):
            if start in seen:
                continue
            comps += 1
            stack = [start]
            seen.add(start)
            while stack:
                for j in adj[stack.pop()]:
                    if j not in seen:
                        seen.add(j)
                        stack.append(j)
        return comps


def _brute_force_edges(pts: Sequence[tuple[float, ...]], r: float) -> list[tuple[int, int]]:
    r2 = r * r
    out = []
    for i in range(len(pts)):
        pi = pts[i]
        for j in range(i + 1, len(pts)):
            if _dist2(pi, pts[j]) <= r2:
                out.append((i, j))
    return out


def _grid_edges(pts: Sequence[tuple[float, ...]], r: float, dim: int) -> list[tuple[int, int]]:
    inv = 1.0 / r
    cells: dict[tuple[int, ...], list[int]] = {}
    keys: list[tuple[int, ...]] = []
    for idx, p in enumerate(pts):
        key = tuple(int(math.floor(x * inv)) for x in p)
        keys.append(key)
        cells.setdefault(key, []).append(idx)
    r2 = r * r
    out = []
    offsets = [off for off in product((-1, 0, 1), repeat=dim)]
    for key, members in cells.items():
        for a_pos, i in enumerate(members):
            pi = pts[i]
            for j in members[a_pos + 1:]:
                if _dist2(pi, pts[j]) <= r2:
                    out.append((i, j))
        for off in offsets:
            if off <= (0,) * dim:
                continue  # scan each unordered cell pair once
            other = cells.get(tuple(k + o for k, o in zip(key, off)))
            if not other:
                continue
            for i in members:
                pi = pts[i]
                for j in other:
                    if _dist2(pi, pts[j]) <= r2:
                        out.append((i, j) if i < j else (j, i))
    out.sort()
    return out


def geometric_graph(cloud: PointCloud, r: float) -> GeometricGraph:
    """Geometric graph at scale r via grid bucketing (cells of width r).

    Expected work is near-linear in the number of edges for clouds of
    bounded density; tiny clouds fall back to a direct pair scan.
    """
    if not (r >= 0.0) or not math.isfinite(r):
        raise ValueError(f"scale must be a finite nonnegative real, got {r}")
    pts = cloud.as_tuples
    n = len(pts)
    if n < 2:
        return GeometricGraph(cloud, r, ())
    if r == 0.0:
        groups: dict[tuple[float, ...], list[int]] = {}
        for idx, p in enumerate(pts):
            groups.setdefault(p, []).append(idx)
        edges = []
        for members in groups.values():
            edges.extend(combinations(members, 2))
        edges.sort()
        return GeometricGraph(cloud, r, tuple(edges))
    if n <= _BRUTE_FORCE_CUTOFF:
        return GeometricGraph(cloud, r, tuple(_brute_force_edges(pts, r)))
    return GeometricGraph(cloud, r, tuple(_grid_edges(pts, r, cloud.dim)))


class GridIndex:
    """Uniform-grid point index supporting closed-ball range queries."""

    def __init__(self, cloud: PointCloud, cell: float):
        if not (cell > 0.0) or not math.isfinite(cell):
            raise ValueError(f"cell width must be positive and finite, got {cell}")
        self._pts = cloud.as_tuples
        self._dim = cloud.dim
        self._cell = cell
        self._cells: dict[tuple[int, ...], list[int]] = {}
        inv = 1.0 / cell
        for idx, p in enumerate(self._pts):
            key = tuple(int(math.floor(x * inv)) for x in p)
            self._cells.setdefault(key, []).append(idx)

    def query_ball(self, center: Sequence[float], radius: float) -> Iterator[int]:
        """Indices of points within `radius` (closed) of `center`."""
        if radius < 0.0:
            return
        c = tuple(float(x) for x in center)
        inv = 1.0 / self._cell
        reach = int(math.floor(radius * inv)) + 1
        base = tuple(int(math.floor(x * inv)) for x in c)
        r2 = radius * radius
        for off in product(range(-reach, reach + 1), repeat=self._dim):
            members = self._cells.get(tuple(k + o for k, o in zip(base, off)))
            if not members:
                continue
            for i in members:
                if _dist2(c, self._pts[i]) <= r2:
                    yield i
