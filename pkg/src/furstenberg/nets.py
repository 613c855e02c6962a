"""Separated packings and finite nets of plane codes through fixed cubes.

build_epsilon_net realizes the grid construction: planes through m+1 cube
centers and through grid heights over k-m basis corners.  Its covering
radius is bounded by K_cov * delta / vol(center simplex) with the explicit
constant assembled from the Cramer rigidity bound, the basis-extension
volume loss and the slope bound on the horizontal family.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from itertools import product
from typing import Sequence

import numpy as np

from .cubes import FrostmanSample
from .planes import Dims, PlaneCode, in_horizontal_family, plane_meets_box
from .simplex import InterpolationSystem, simplex_volume, solve_plane_through

__all__ = [
    "NetRequest",
    "NetFamily",
    "maximal_separated_subset",
    "packing_lower_bound",
    "covering_constant",
    "build_epsilon_net",
    "sample_qualifying_plane",
    "covering_radius_check",
    "code_ball_measure",
    "verify_net",
    "save_net",
    "load_net",
]


@dataclass(frozen=True)
class NetRequest:
    """Cubes (given by centers and side delta) that net planes must thread.

    centers are m+1 points of [0,1]^n whose horizontal projections span a
    nondegenerate m-simplex; basis_indices are the k-m corner anchors
    (0 = origin, i = i-th horizontal unit vector) completing them to an
    interpolation system.
    """

    dims: Dims
    m: int
    delta: float
    centers: np.ndarray
    basis_indices: tuple[int, ...]

    def __post_init__(self) -> None:
        centers = np.atleast_2d(np.asarray(self.centers, dtype=float))
        object.__setattr__(self, "centers", centers)
        object.__setattr__(self, "basis_indices", tuple(int(i) for i in self.basis_indices))
        k = self.dims.k
        if not 1 <= self.m <= k:
            raise ValueError("need 1 <= m <= k")
        if not 0 < self.delta < 1:
            raise ValueError("need 0 < delta < 1")
        if centers.shape != (self.m + 1, self.dims.n):
            raise ValueError(f"need {self.m + 1} centers in R^{self.dims.n}")
        if len(self.basis_indices) != k - self.m:
            raise ValueError(f"need {k - self.m} basis indices")
        if any(not 0 <= i <= k for i in self.basis_indices):
            raise ValueError("basis indices must lie in 0..k")
        if self.simplex_volume() <= 0:
            raise ValueError("cube centers project to a degenerate simplex")

    def projected_centers(self) -> np.ndarray:
        return self.centers[:, : self.dims.k]

    def vertical_centers(self) -> np.ndarray:
        return self.centers[:, self.dims.k :]

    def simplex_volume(self) -> float:
        return simplex_volume(self.projected_centers())

    def cube_bounds(self) -> list[tuple[np.ndarray, np.ndarray]]:
        half = self.delta / 2.0
        return [(c - half, c + half) for c in self.centers]

    def interpolation_system(self) -> InterpolationSystem:
        k = self.dims.k
        corners = np.vstack([np.zeros(k), np.eye(k)])
        nodes = np.vstack([self.projected_centers(), corners[list(self.basis_indices)]])
        return InterpolationSystem(nodes)


@dataclass(frozen=True)
class NetFamily:
    """Finite family of plane codes with grid step delta and a claimed radius."""

    codes: tuple
    grid_step: float
    claimed_radius: float

    def __len__(self) -> int:
        return len(self.codes)

    def code_matrix(self) -> np.ndarray:
        return np.array([c.vector() for c in self.codes])

    def min_distance(self, code: PlaneCode) -> float:
        diffs = np.abs(self.code_matrix() - code.vector())
        return float(np.min(np.max(diffs, axis=1)))


def maximal_separated_subset(codes: Sequence[PlaneCode], delta: float) -> list[PlaneCode]:
    """Greedy-in-order maximal subset with pairwise code distance >= delta."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    kept: list[PlaneCode] = []
    kept_vecs: list[np.ndarray] = []
    for code in codes:
        v = code.vector()
        if all(np.max(np.abs(v - w)) >= delta for w in kept_vecs):
            kept.append(code)
            kept_vecs.append(v)
    return kept


def packing_lower_bound(mu: FrostmanSample, qualifying_mass: float, delta: float) -> float:
    """Guaranteed size of any maximal delta-separated subset of the qualifying support.

    The qualifying mass is covered by M closed delta-balls, each of mass at
    most C * delta^s, whence M >= lambda / (C * delta^s).
    """
    return qualifying_mass / (mu.constant * delta**mu.exponent)


def code_ball_measure(delta: float, dims: Dims) -> float:
    """Lebesgue measure (2 delta)^((k+1)(n-k)) of a code-metric ball."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    return (2.0 * delta) ** dims.code_dim


def covering_constant(dims: Dims, m: int) -> float:
    """Explicit K_cov with covering radius <= K_cov * delta / vol(center simplex).

    Composition of: height perturbation c1 = (1 + k^(3/2))/2 over a
    delta-cube (slopes in the horizontal family are bounded by 1), the
    Cramer/Hadamard rigidity constant (k+1) k^(k/2) / k! vol, and the
    basis-extension volume loss vol' >= vol * (1/(2 sqrt k))^(k-m) * m!/k!.
    """
    k = dims.k
    c1 = (1.0 + k**1.5) / 2.0
    return c1 * (k + 1) * k ** (k / 2.0) * (2.0 * math.sqrt(k)) ** (k - m) / math.factorial(m)


def build_epsilon_net(req: NetRequest) -> NetFamily:
    """Planes through the cube centers and all grid heights at the basis corners.

    The grid is delta Z^(n-k) restricted to [0,1]^(n-k) per basis corner, so
    the family has exactly (floor(1/delta)+1)^((n-k)(k-m)) members.
    """
    dims = req.dims
    sys = req.interpolation_system()
    if abs(sys.det()) <= 1e-12:
        raise ValueError("interpolation nodes are degenerate")
    grid_1d = np.arange(int(1.0 / req.delta) + 1) * req.delta
    vert = req.vertical_centers()
    free = dims.k - req.m
    axis_values = list(product(grid_1d, repeat=dims.codim))  # grid of one corner height
    codes = []
    for combo in product(axis_values, repeat=free):
        heights = np.vstack([vert] + [np.asarray(u) for u in combo]) if free else vert
        codes.append(solve_plane_through(sys, heights))
    radius = covering_constant(dims, req.m) * req.delta / req.simplex_volume()
    return NetFamily(tuple(codes), req.delta, radius)


def sample_qualifying_plane(
    req: NetRequest, rng: np.random.Generator, max_tries: int = 2000
) -> PlaneCode:
    """Rejection-sample a horizontal-family plane meeting all request cubes.

    Anchors one point per cube and free grid-corner heights, solves, and
    rejects codes outside the horizontal family.
    """
    dims = req.dims
    bounds = req.cube_bounds()
    free = dims.k - req.m
    corners = np.vstack([np.zeros(dims.k), np.eye(dims.k)])[list(req.basis_indices)]
    for _ in range(max_tries):
        anchors = np.array([rng.uniform(lo, hi) for lo, hi in bounds])
        nodes = np.vstack([anchors[:, : dims.k], corners])
        heights = np.vstack(
            [anchors[:, dims.k :], rng.uniform(0.0, 1.0, size=(free, dims.codim))]
        )
        try:
            code = solve_plane_through(InterpolationSystem(nodes), heights)
        except ValueError:
            continue
        if in_horizontal_family(code):
            return code
    raise RuntimeError("no qualifying plane found; the request cubes appear incompatible")


def _radius_batch(args) -> float:
    net_matrix, req, trials, seed = args
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        code = sample_qualifying_plane(req, rng)
        dist = float(np.min(np.max(np.abs(net_matrix - code.vector()), axis=1)))
        worst = max(worst, dist)
    return worst


def covering_radius_check(
    net: NetFamily,
    req: NetRequest,
    trials: int,
    rng: np.random.Generator | None = None,
    jobs: int = 1,
) -> float:
    """Empirical covering radius: max over sampled qualifying planes of the
    distance to the nearest net element.  Trials are split across `jobs`
    worker processes when jobs > 1 (deterministic for fixed seed and jobs)."""
    if trials < 1:
        raise ValueError("need trials >= 1")
    rng = rng or np.random.default_rng(0)
    matrix = net.code_matrix()
    if jobs <= 1:
        return _radius_batch((matrix, req, trials, rng))
    from concurrent.futures import ProcessPoolExecutor

    seeds = rng.spawn(jobs)
    per = [trials // jobs + (1 if i < trials % jobs else 0) for i in range(jobs)]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        results = pool.map(_radius_batch, [(matrix, req, n, s) for n, s in zip(per, seeds)])
    return max(results)


def verify_net(net: NetFamily, req: NetRequest) -> None:
    """Check net membership invariants; raises AssertionError on violation."""
    expected = (int(1.0 / req.delta) + 1) ** (req.dims.codim * (req.dims.k - req.m))
    assert len(net) == expected, f"cardinality {len(net)} != {expected}"
    for code in net.codes:
        assert in_horizontal_family(code), "net element left the horizontal family"
        for lo, hi in req.cube_bounds():
            assert plane_meets_box(code, lo, hi), "net element misses a request cube"


def save_net(path_planes, path_meta, net: NetFamily, req: NetRequest) -> None:
    """Write the family in plane-code format plus a JSON sidecar."""
    from .planes import save_plane_file

    save_plane_file(path_planes, net.codes)
    meta = {
        "delta": net.grid_step,
        "m": req.m,
        "centers": req.centers.tolist(),
        "basis_indices": list(req.basis_indices),
        "claimed_radius": net.claimed_radius,
        "cardinality": len(net),
    }
    with open(path_meta, "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_net(path_planes, path_meta) -> tuple[NetFamily, dict]:
    from .planes import load_plane_file

    codes = load_plane_file(path_planes)
    with open(path_meta) as fh:
        meta = json.load(fh)
    net = NetFamily(tuple(codes), float(meta["delta"]), float(meta["claimed_radius"]))
    return net, meta
