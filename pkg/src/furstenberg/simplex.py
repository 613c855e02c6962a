"""Simplex volumes, affine-hull distances, and the small interpolation solvers.

Contains the quantitative ingredients used by the net construction: a
perturbation certificate for simplex volumes under per-vertex cube moves,
the greedy basis extension that fattens an m-simplex to a k-simplex, and
the Cramer-rule plane solver with its explicit rigidity constant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product
from typing import Sequence

import numpy as np

from .planes import Dims, PlaneCode

__all__ = [
    "Simplex",
    "InterpolationSystem",
    "PerturbationCertificate",
    "CounterexampleError",
    "simplex_volume",
    "dist_to_affine_hull",
    "dists_to_affine_hull",
    "perturbation_check",
    "extend_with_basis",
    "solve_plane_through",
    "rigidity_bound",
]

_SINGULAR_TOL = 1e-12


class CounterexampleError(RuntimeError):
    """A sampled configuration violated a volume bound that must always hold."""


@dataclass(frozen=True)
class Simplex:
    """Ordered vertex list of an m-simplex in R^K (K >= m)."""

    vertices: np.ndarray

    def __post_init__(self) -> None:
        v = np.atleast_2d(np.asarray(self.vertices, dtype=float))
        object.__setattr__(self, "vertices", v)

    @property
    def m(self) -> int:
        return self.vertices.shape[0] - 1


def simplex_volume(vertices) -> float:
    """m-dimensional volume of the convex hull of m+1 points.

    Computed as sqrt(det Gram)/m! on the edge vectors from the first vertex;
    0 iff the vertices are affinely dependent.  A single vertex has volume 1
    (counting measure).
    """
    if isinstance(vertices, Simplex):
        vertices = vertices.vertices
    v = np.atleast_2d(np.asarray(vertices, dtype=float))
    m = v.shape[0] - 1
    if m == 0:
        return 1.0
    edges = v[1:] - v[0]
    gram = edges @ edges.T
    det = float(np.linalg.det(gram))
    return math.sqrt(max(det, 0.0)) / math.factorial(m)


def _volumes_batch(vertex_stacks: np.ndarray) -> np.ndarray:
    """Volumes of a stack of simplices, shape (T, m+1, K)."""
    m = vertex_stacks.shape[1] - 1
    if m == 0:
        return np.ones(vertex_stacks.shape[0])
    edges = vertex_stacks[:, 1:, :] - vertex_stacks[:, :1, :]
    gram = edges @ edges.transpose(0, 2, 1)
    det = np.linalg.det(gram)
    return np.sqrt(np.clip(det, 0.0, None)) / math.factorial(m)


def dists_to_affine_hull(points: np.ndarray, hull_points: np.ndarray) -> np.ndarray:
    """Euclidean distances from each row of points to the affine span of hull_points."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    hull = np.atleast_2d(np.asarray(hull_points, dtype=float))
    rel = points - hull[0]
    if hull.shape[0] == 1:
        return np.linalg.norm(rel, axis=1)
    basis = (hull[1:] - hull[0]).T  # (K, j-1)
    q, r = np.linalg.qr(basis)
    # drop directions lost to affine dependence among the hull points
    keep = np.abs(np.diag(r)) > _SINGULAR_TOL
    q = q[:, keep]
    resid = rel - (rel @ q) @ q.T
    return np.linalg.norm(resid, axis=1)


def dist_to_affine_hull(p, hull_points) -> float:
    """Distance from a single point to the affine span of hull_points."""
    hull = np.atleast_2d(np.asarray(hull_points, dtype=float))
    if hull.size == 0:
        raise ValueError("hull_points must be nonempty")
    return float(dists_to_affine_hull(np.asarray(p, dtype=float)[None, :], hull)[0])


@dataclass(frozen=True)
class PerturbationCertificate:
    """Outcome of sampling vertex tuples from per-vertex cubes.

    min_volume is over all corner tuples plus num_samples random tuples;
    threshold is the guaranteed lower bound f_x / 2^(m+1).
    """

    num_tuples: int
    min_volume: float
    threshold: float


def perturbation_check(
    cube_corners,
    side: float,
    witnesses,
    f_x: float,
    samples: int = 200,
    rng: np.random.Generator | None = None,
) -> PerturbationCertificate:
    """Certify that moving each vertex within its cube keeps the volume large.

    cube_corners are the lower corners of m+1 axis-parallel cubes of the given
    side in the unit box; witnesses are points y_i in cube_i whose simplex has
    volume >= f_x.  Requires side <= (m/(2^(m+1) k)) * f_x; under that
    hypothesis every choice z_i in cube_i satisfies
    vol(z_0..z_m) >= f_x / 2^(m+1), which is verified on all corner tuples
    plus `samples` random tuples.  A violating tuple raises
    CounterexampleError.
    """
    corners = np.atleast_2d(np.asarray(cube_corners, dtype=float))
    wit = np.atleast_2d(np.asarray(witnesses, dtype=float))
    m = corners.shape[0] - 1
    k = corners.shape[1]
    if wit.shape != corners.shape:
        raise ValueError("witnesses must be one point per cube")
    if side <= 0:
        raise ValueError("cube side must be positive")
    admissible = (m / (2 ** (m + 1) * k)) * f_x
    if side > admissible * (1 + 1e-12):
        raise ValueError(
            f"hypothesis violated: side {side} exceeds (m/(2^(m+1) k)) f = {admissible}"
        )
    if np.any(wit < corners - 1e-12) or np.any(wit > corners + side + 1e-12):
        raise ValueError("each witness must lie in its cube")
    wit_vol = simplex_volume(wit)
    if wit_vol < f_x * (1 - 1e-12):
        raise ValueError(f"witness simplex volume {wit_vol} is below f = {f_x}")

    threshold = f_x / 2 ** (m + 1)
    rng = rng or np.random.default_rng(0)

    # all corner tuples: (2^k)^(m+1) simplices
    corner_offsets = np.array(list(product((0.0, side), repeat=k)))  # (2^k, k)
    choices = list(product(range(len(corner_offsets)), repeat=m + 1))
    tuples = np.empty((len(choices), m + 1, k))
    for t_idx, choice in enumerate(choices):
        tuples[t_idx] = corners + corner_offsets[list(choice)]
    rand = corners + rng.uniform(0.0, side, size=(samples, m + 1, k))
    stacked = np.concatenate([tuples, rand])
    vols = _volumes_batch(stacked)
    min_vol = float(vols.min())
    if min_vol < threshold - 1e-12:
        raise CounterexampleError(
            f"sampled tuple has volume {min_vol} below guaranteed {threshold}"
        )
    return PerturbationCertificate(len(stacked), min_vol, threshold)


def extend_with_basis(v) -> list[int]:
    """Indices of corner anchors that fatten an m-simplex to a full k-simplex.

    v holds m+1 points of [0,1]^k with positive m-volume a.  Greedily appends,
    from the candidates {0, e_1, ..., e_k} (index 0 is the origin), the one
    farthest from the current affine hull, smallest index on ties.  The
    resulting k-simplex has volume >= a * (1/(2 sqrt(k)))^(k-m) * m!/k!.
    """
    v = np.atleast_2d(np.asarray(v, dtype=float))
    m = v.shape[0] - 1
    k = v.shape[1]
    if m > k:
        raise ValueError("more vertices than the ambient dimension allows")
    if simplex_volume(v) <= 0.0:
        raise ValueError("input simplex is degenerate")
    candidates = np.vstack([np.zeros(k), np.eye(k)])  # rows e_0..e_k
    hull = v
    chosen: list[int] = []
    for _ in range(k - m):
        dists = dists_to_affine_hull(candidates, hull)
        best = int(np.argmax(dists))  # first max = smallest index
        chosen.append(best)
        hull = np.vstack([hull, candidates[best]])
    return chosen


@dataclass(frozen=True)
class InterpolationSystem:
    """k+1 interpolation nodes in [0,1]^k and the matrix with rows (1, s^i)."""

    s_points: np.ndarray

    def __post_init__(self) -> None:
        s = np.atleast_2d(np.asarray(self.s_points, dtype=float))
        if s.shape[0] != s.shape[1] + 1:
            raise ValueError("need k+1 nodes in R^k")
        object.__setattr__(self, "s_points", s)

    @property
    def k(self) -> int:
        return self.s_points.shape[1]

    @property
    def matrix(self) -> np.ndarray:
        return np.hstack([np.ones((self.k + 1, 1)), self.s_points])

    def det(self) -> float:
        return float(np.linalg.det(self.matrix))


def solve_plane_through(sys: InterpolationSystem, heights) -> PlaneCode:
    """The unique plane whose graph passes through (s^i, p^i) for all i.

    heights is a (k+1, n-k) array of prescribed values p^0..p^k.  Solved
    coordinate-by-coordinate with Cramer's rule on the node matrix.
    """
    heights = np.atleast_2d(np.asarray(heights, dtype=float))
    k = sys.k
    if heights.shape[0] != k + 1:
        raise ValueError("need one height vector per node")
    mat = sys.matrix
    det_m = float(np.linalg.det(mat))
    if abs(det_m) <= _SINGULAR_TOL:
        raise ValueError("interpolation nodes are affinely dependent")
    codim = heights.shape[1]
    coeffs = np.empty((k + 1, codim))
    for col in range(k + 1):
        replaced = mat.copy()
        for j in range(codim):
            replaced[:, col] = heights[:, j]
            coeffs[col, j] = np.linalg.det(replaced) / det_m
        replaced[:, col] = mat[:, col]
    dims = Dims(k + codim, k)
    return PlaneCode(dims, coeffs[0], coeffs[1:])


def rigidity_bound(sys: InterpolationSystem, height_perturbation: float) -> float:
    """Worst-case code-coordinate move when every height moves by at most d.

    Explicit constant (k+1) k^(k/2) / |det M| from cofactor expansion with the
    Hadamard bound on the k x k minors (node coordinates lie in [0,1]).
    """
    det_m = abs(sys.det())
    if det_m <= _SINGULAR_TOL:
        raise ValueError("interpolation nodes are affinely dependent")
    k = sys.k
    return height_perturbation * (k + 1) * k ** (k / 2.0) / det_m
