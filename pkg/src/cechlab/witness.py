"""Explicit witnesses for persistent cycles and arity searches.

A witness is a finite point set Q with persistent_betti(Q, r, theta, k)
at least one: a degree-k cycle alive from radius r out to theta*r. The
deterministic construction places Q on the boundary of a regular
(k+1)-simplex, subdivided until the mesh is fine enough that the union
of r-balls covers the boundary while theta*r-balls still miss the
circumcenter. The randomized search estimates the minimal number of
points that can support such a cycle by brute sampling.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from itertools import combinations, permutations
from pathlib import Path

import numpy as np

from .geometry import PointCloud
from .persistence import FieldSpec, GF2, compute_persistence, persistent_betti
from .filtration import _build
from .sampling import sample_in_ball

__all__ = [
    "CycleWitness",
    "MBracket",
    "zeta_indicator",
    "construct_witness",
    "perturbation_radius",
    "perturb_and_verify",
    "search_m",
    "bracket_m",
    "upper_bound_constant",
]


@dataclass(frozen=True)
class CycleWitness:
    """Point set supporting a degree-k cycle alive on [r, R], with R >= theta*r."""

    points: PointCloud
    r: float
    theta: float
    k: int
    R: float
    verified_rank: int

    def __post_init__(self) -> None:
        if self.theta < 1.0:
            raise ValueError(f"persistence factor must satisfy theta >= 1, got {self.theta}")
        if self.R < self.theta * self.r:
            raise ValueError(f"outer radius {self.R} below theta*r = {self.theta * self.r}")
        if self.verified_rank < 1:
            raise ValueError("witnesses must carry a verified rank of at least 1")

    def verify(self, field_spec: FieldSpec = GF2) -> int:
        """Recompute the persistent rank; raises if the cycle is gone."""
        rank = persistent_betti(self.points, self.r, self.theta, self.k, field_spec)
        if rank < 1:
            raise ValueError("witness failed re-verification: no persistent cycle")
        return rank

    def save(self, path: str | Path) -> None:
        """Header `k theta r R rank`, then the point cloud text format."""
        head = f"{self.k} {self.theta!r} {self.r!r} {self.R!r} {self.verified_rank}\n"
        body = [f"{self.points.dim} {len(self.points)}"]
        for p in self.points.points:
            body.append(" ".join(repr(float(x)) for x in p))
        Path(path).write_text(head + "\n".join(body) + "\n")

    @staticmethod
    def load(path: str | Path) -> "CycleWitness":
        lines = Path(path).read_text().strip().split("\n")
        k_s, theta_s, r_s, big_r_s, rank_s = lines[0].split()
        dim, n = (int(x) for x in lines[1].split())
        rows = [[float(x) for x in line.split()] for line in lines[2:2 + n]]
        cloud = PointCloud(dim, np.asarray(rows, dtype=np.float64).reshape(n, dim))
        witness = CycleWitness(points=cloud, r=float(r_s), theta=float(theta_s),
                               k=int(k_s), R=float(big_r_s), verified_rank=int(rank_s))
        witness.verify()
        return witness


@dataclass(frozen=True)
class MBracket:
    """Bracket on the minimal cycle arity: no witness found at lower_searched,
    witness in hand at upper."""

    theta: float
    k: int
    d: int
    upper: int
    lower_searched: int
    trials_per_arity: int
    witness: CycleWitness | None = None

    def __post_init__(self) -> None:
        if self.upper < self.k + 2:
            raise ValueError(f"no degree-{self.k} cycle fits on {self.upper} points")
        if self.lower_searched >= self.upper:
            raise ValueError("bracket is empty: lower bound reached the upper")


def zeta_indicator(points: PointCloud | np.ndarray, r: float, theta: float, k: int,
                   field_spec: FieldSpec = GF2) -> int:
    """1 iff the point set supports a k-cycle alive from r through theta*r."""
    if not isinstance(points, PointCloud):
        points = np.asarray(points, dtype=np.float64)
        points = PointCloud(points.shape[1], points)
    return int(persistent_betti(points, r, theta, k, field_spec) >= 1)


# ---------------------------------------------------------------------------
# Deterministic construction on a subdivided simplex boundary
# ---------------------------------------------------------------------------


def _barycentric_subdivision(coords: dict[int, np.ndarray],
                             cells: list[tuple[int, ...]]) -> tuple[dict[int, np.ndarray],
                                                                    list[tuple[int, ...]]]:
    """One round of barycentric subdivision of a pure simplicial complex."""
    face_ids: dict[frozenset[int], int] = {}
    new_coords: dict[int, np.ndarray] = {}

    def face_id(face: frozenset[int]) -> int:
        known = face_ids.get(face)
        if known is None:
            known = len(face_ids)
            face_ids[face] = known
            members = sorted(face)
            new_coords[known] = sum(coords[v] for v in members) / len(members)
        return known

    # Deterministic id assignment: visit faces in sorted order.
    all_faces: set[frozenset[int]] = set()
    for cell in cells:
        for size in range(1, len(cell) + 1):
            for sub in combinations(cell, size):
                all_faces.add(frozenset(sub))
    for face in sorted(all_faces, key=lambda fs: tuple(sorted(fs))):
        face_id(face)

    new_cells: list[tuple[int, ...]] = []
    for cell in cells:
        for perm in permutations(cell):
            chain = tuple(face_id(frozenset(perm[:i + 1])) for i in range(len(cell)))
            new_cells.append(tuple(sorted(chain)))
    return new_coords, new_cells


def _max_cell_diameter(coords: dict[int, np.ndarray], cells: list[tuple[int, ...]]) -> float:
    worst = 0.0
    for cell in cells:
        for a, b in combinations(cell, 2):
            worst = max(worst, float(np.linalg.norm(coords[a] - coords[b])))
    return worst


def construct_witness(k: int, theta: float, field_spec: FieldSpec = GF2,
                      max_rounds: int = 12) -> CycleWitness:
    """Witness for a theta-persistent k-cycle on k+2+ points in R^(k+2).

    Takes the boundary of the regular (k+1)-simplex spanned by the unit
    basis vectors, whose circumcenter sits at distance
    R* = 1/sqrt((k+1)(k+2)) from the boundary. With r = 0.99 * R* / theta
    the boundary is subdivided until every simplex has diameter at most
    r: then r-balls around the vertices cover the boundary sphere while
    theta*r-balls still miss the circumcenter, so the boundary cycle
    survives from r to theta*r. The result is verified before returning.
    """
    if k < 1:
        raise ValueError(f"cycle degree must be at least 1, got {k}")
    if theta < 1.0 or not math.isfinite(theta):
        raise ValueError(f"persistence factor must satisfy theta >= 1, got {theta}")
    ambient = k + 2
    coords = {i: np.eye(ambient)[i] for i in range(ambient)}
    cells = [tuple(sorted(c)) for c in combinations(range(ambient), ambient - 1)]
    center = np.full(ambient, 1.0 / ambient)
    facet_barycenter = np.array([0.0] + [1.0 / (ambient - 1)] * (ambient - 1))
    boundary_distance = float(np.linalg.norm(center - facet_barycenter))
    r = 0.99 * boundary_distance / theta

    rounds = 0
    while _max_cell_diameter(coords, cells) > r:
        if rounds >= max_rounds:
            raise RuntimeError(f"subdivision did not reach mesh {r} in {max_rounds} rounds")
        coords, cells = _barycentric_subdivision(coords, cells)
        rounds += 1

    points = np.vstack([coords[i] for i in sorted(coords)])
    cloud = PointCloud(ambient, points)
    rank = persistent_betti(cloud, r, theta, k, field_spec)
    if rank < 1:
        raise RuntimeError("construction failed verification; this is a bug")
    return CycleWitness(points=cloud, r=r, theta=theta, k=k,
                        R=boundary_distance, verified_rank=rank)


def perturbation_radius(R: float, r: float, theta: float) -> float:
    """Largest safe displacement delta = (R - theta*r) / (theta + 1).

    Moving each witness point less than delta keeps a cycle alive from
    r + delta through R - delta, and (R - delta) / (r + delta) = theta.
    """
    if theta < 1.0 or not math.isfinite(theta):
        raise ValueError(f"persistence factor must satisfy theta >= 1, got {theta}")
    if not (r > 0.0) or not (R > 0.0):
        raise ValueError(f"radii must be positive, got r={r}, R={R}")
    if R <= theta * r:
        raise ValueError(f"no perturbation margin: R={R} <= theta*r={theta * r}")
    return (R - theta * r) / (theta + 1.0)


def perturb_and_verify(witness: CycleWitness, rng: np.random.Generator, trials: int,
                       delta_scale: float = 1.0, field_spec: FieldSpec = GF2) -> float:
    """Fraction of uniformly perturbed copies that keep their persistent cycle.

    Each point moves by an independent uniform draw from the open ball
    of radius delta (times delta_scale, for negative controls); the
    perturbed cloud is tested at radius r + delta with the same theta.
    """
    if trials < 0:
        raise ValueError(f"trials must be nonnegative, got {trials}")
    if trials == 0:
        warnings.warn("perturb_and_verify called with zero trials; nothing was checked")
        return 1.0
    delta = perturbation_radius(witness.R, witness.r, witness.theta)
    move = delta * delta_scale
    n, d = witness.points.points.shape
    successes = 0
    for _ in range(trials):
        offsets = sample_in_ball(n, d, move, rng)
        shifted = PointCloud(d, witness.points.points + offsets)
        if persistent_betti(shifted, witness.r + delta, witness.theta, witness.k,
                            field_spec) >= 1:
            successes += 1
    return successes / trials


# ---------------------------------------------------------------------------
# Randomized arity search
# ---------------------------------------------------------------------------


def _diagram_witness_interval(points: np.ndarray, k: int, theta: float,
                              field_spec: FieldSpec) -> tuple[float, float] | None:
    """Best (birth, death) pair with death > theta * birth, if any.

    One diagram answers the whole radius scan exactly: a witness radius
    exists iff some degree-k interval satisfies death/birth > theta.
    """
    cloud = PointCloud(points.shape[1], points)
    diameter = cloud.diameter()
    if diameter == 0.0:
        return None
    complex_ = _build(cloud, r_max=diameter, max_dim=k + 1, force=True)
    diagram = compute_persistence(complex_, field_spec)
    best: tuple[float, float] | None = None
    for birth, death in diagram.in_dimension(k):
        if birth > 0.0 and death > theta * birth:
            if best is None or death / birth > best[1] / best[0]:
                best = (birth, death)
    return best


def _triangle_persistence_ratios(configs: np.ndarray) -> np.ndarray:
    """death/birth for the 1-cycle of each 3-point configuration (vectorized).

    The cycle of a triangle is born once all edges are present (half the
    longest side) and dies at the miniball radius: the circumradius for
    acute triangles, half the longest side otherwise (ratio 1).
    """
    a2 = np.sum((configs[:, 0] - configs[:, 1]) ** 2, axis=1)
    b2 = np.sum((configs[:, 0] - configs[:, 2]) ** 2, axis=1)
    c2 = np.sum((configs[:, 1] - configs[:, 2]) ** 2, axis=1)
    d2 = np.stack([a2, b2, c2], axis=1)
    longest2 = d2.max(axis=1)
    others2 = d2.sum(axis=1) - longest2
    acute = longest2 < others2
    # circumradius^2 = a^2 b^2 c^2 / (16 * area^2) via Heron's formula
    s2 = d2.sum(axis=1)
    area16 = np.maximum(4.0 * (a2 * b2 + b2 * c2 + c2 * a2) - s2 * s2, 1e-300)
    with np.errstate(over="ignore", invalid="ignore"):
        circum2 = a2 * b2 * c2 / area16
        ratio2 = np.where(acute, 4.0 * circum2 / longest2, 1.0)
    return np.sqrt(ratio2)


def _config_ratio(points: np.ndarray, k: int, field_spec: FieldSpec) -> float:
    """Best death/birth over degree-k intervals; 1.0 when no cycle forms."""
    if k == 1 and points.shape[0] == 3:
        return float(_triangle_persistence_ratios(points[None])[0])
    cloud = PointCloud(points.shape[1], points)
    diameter = cloud.diameter()
    if diameter == 0.0:
        return 1.0
    complex_ = _build(cloud, r_max=diameter, max_dim=k + 1, force=True)
    diagram = compute_persistence(complex_, field_spec)
    best = 1.0
    for birth, death in diagram.in_dimension(k):
        if birth > 0.0 and math.isfinite(death):
            best = max(best, death / birth)
    return best


def _witness_from_config(points: np.ndarray, d: int, k: int, theta: float,
                         field_spec: FieldSpec) -> CycleWitness | None:
    span = PointCloud(d, points).diameter()
    if span == 0.0:
        return None
    points = points / span
    interval = _diagram_witness_interval(points, k, theta, field_spec)
    if interval is None:
        return None
    birth, death = interval
    r = math.sqrt(birth * (death / theta))
    cloud = PointCloud(d, points)
    rank = persistent_betti(cloud, r, theta, k, field_spec)
    if rank < 1:
        return None  # borderline roundoff; treat as not found
    return CycleWitness(points=cloud, r=r, theta=theta, k=k,
                        R=theta * r, verified_rank=rank)


def search_m(d: int, k: int, theta: float, p: int, trials: int,
             rng: np.random.Generator, refine: bool = True,
             field_spec: FieldSpec = GF2) -> CycleWitness | None:
    """Random search for a theta-persistent k-cycle on exactly p points.

    Configurations are sampled uniformly in the unit box and normalized
    to unit diameter; each is scanned over every radius at once through
    its persistence diagram. Near-extremal persistence (say squares at
    theta close to sqrt(2)) occupies far too little volume for uniform
    sampling alone, so each batch's most persistent configuration is
    additionally pushed uphill by a derivative-free local search; any
    candidate is verified through `persistent_betti` before it is
    returned. Finding no witness suggests (but never proves) that p is
    below the minimal cycle arity.
    """
    if d < 1 or k < 1 or p < 1:
        raise ValueError(f"invalid search parameters d={d}, k={k}, p={p}")
    if theta < 1.0 or not math.isfinite(theta):
        raise ValueError(f"persistence factor must satisfy theta >= 1, got {theta}")
    if trials < 1:
        raise ValueError(f"trials must be positive, got {trials}")
    from scipy.optimize import minimize

    batch = 4096
    done = 0
    while done < trials:
        count = min(batch, trials - done)
        configs = rng.random((count, p, d))
        if k == 1 and p == 3:
            # Vectorized: the triangle diagram is analytic.
            ratios = _triangle_persistence_ratios(configs)
        else:
            ratios = np.fromiter((_config_ratio(configs[i], k, field_spec)
                                  for i in range(count)), dtype=np.float64, count=count)
        for i in np.flatnonzero(ratios > theta):
            witness = _witness_from_config(configs[i], d, k, theta, field_spec)
            if witness is not None:
                return witness
        if refine:
            start = configs[int(ratios.argmax())].reshape(-1)
            result = minimize(lambda x: -_config_ratio(x.reshape(p, d), k, field_spec),
                              start, method="Nelder-Mead",
                              options={"maxfev": 400, "xatol": 1e-4, "fatol": 1e-6})
            if -result.fun > theta:
                witness = _witness_from_config(result.x.reshape(p, d), d, k, theta,
                                               field_spec)
                if witness is not None:
                    return witness
        done += count
    return None


def bracket_m(d: int, k: int, theta: float, trials_per_arity: int,
              rng: np.random.Generator, max_arity: int | None = None,
              field_spec: FieldSpec = GF2) -> MBracket | None:
    """Bracket the minimal arity by searching p = k+2, k+3, ... in turn."""
    if max_arity is None:
        max_arity = k + 6
    for p in range(k + 2, max_arity + 1):
        witness = search_m(d, k, theta, p, trials_per_arity, rng,
                           field_spec=field_spec)
        if witness is not None:
            return MBracket(theta=theta, k=k, d=d, upper=p, lower_searched=p - 1,
                            trials_per_arity=trials_per_arity, witness=witness)
    return None


def upper_bound_constant(p: int, k: int, m: int) -> int:
    """Combinatorial bound sum_i C(p, m+i) * C(m+i, k+1) for i = 0..p-m.

    Bounds the expected-count constant for arity-p persistent cycles;
    zero when p < m since no cycle fits on fewer than m points.
    """
    if p < 1 or k < 0 or m < 1:
        raise ValueError(f"invalid parameters p={p}, k={k}, m={m}")
    if p < m:
        return 0
    return sum(math.comb(p, m + i) * math.comb(m + i, k + 1) for i in range(p - m + 1))
