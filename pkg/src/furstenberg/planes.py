"""Coded affine k-planes in R^n.

A plane in the horizontal family is the graph of an affine map
t -> a0 + t_1 b^1 + ... + t_k b^k from R^k to R^(n-k); the vector
(a0, b^1, ..., b^k) is its code.  This module provides the code chart,
the two metrics (max-norm code metric and the projection+offset metric
on affine subspaces), and exact plane/box intersection tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "Dims",
    "PlaneCode",
    "MetricEquivalenceReport",
    "point_on_plane",
    "code_from_intersections",
    "in_horizontal_family",
    "metric_code",
    "metric_natural",
    "plane_box_intersects",
    "plane_meets_box",
    "random_horizontal_code",
    "metric_equivalence_report",
    "save_plane_file",
    "load_plane_file",
]


@dataclass(frozen=True)
class Dims:
    """Ambient dimension n and plane dimension k, with 1 <= k < n."""

    n: int
    k: int

    def __post_init__(self) -> None:
        if not (isinstance(self.n, int) and isinstance(self.k, int)):
            raise TypeError("n and k must be integers")
        if not 1 <= self.k < self.n:
            raise ValueError(f"need 1 <= k < n, got k={self.k}, n={self.n}")

    @property
    def codim(self) -> int:
        return self.n - self.k

    @property
    def code_dim(self) -> int:
        """Dimension (k+1)(n-k) of the code space."""
        return (self.k + 1) * (self.n - self.k)


@dataclass(frozen=True)
class PlaneCode:
    """Code (a0, b^1..b^k) of a k-plane that is a graph over the first k axes.

    a0 is the intersection height with the vertical flat through the origin;
    b^i is the height increment along the i-th horizontal unit step.
    """

    dims: Dims
    a0: np.ndarray
    b: np.ndarray  # shape (k, n-k)

    def __post_init__(self) -> None:
        a0 = np.asarray(self.a0, dtype=float).reshape(-1)
        b = np.atleast_2d(np.asarray(self.b, dtype=float))
        if a0.shape != (self.dims.codim,):
            raise ValueError(f"a0 must have dimension {self.dims.codim}")
        if b.shape != (self.dims.k, self.dims.codim):
            raise ValueError(f"b must have shape ({self.dims.k}, {self.dims.codim})")
        object.__setattr__(self, "a0", a0)
        object.__setattr__(self, "b", b)

    def vector(self) -> np.ndarray:
        """Flat code vector in R^((k+1)(n-k)): a0 followed by b^1..b^k."""
        return np.concatenate([self.a0, self.b.reshape(-1)])

    @classmethod
    def from_vector(cls, dims: Dims, vec: Sequence[float]) -> "PlaneCode":
        v = np.asarray(vec, dtype=float).reshape(-1)
        if v.shape != (dims.code_dim,):
            raise ValueError(f"code vector must have length {dims.code_dim}")
        q = dims.codim
        return cls(dims, v[:q], v[q:].reshape(dims.k, q))


@dataclass(frozen=True)
class MetricEquivalenceReport:
    """Empirical two-sided comparison of the natural and code metrics."""

    sample_size: int
    max_ratio_m_over_d: float
    max_ratio_d_over_m: float


def point_on_plane(code: PlaneCode, t: Sequence[float]) -> np.ndarray:
    """Evaluate the plane's graph parametrization at t, returning a point of R^n."""
    t = np.asarray(t, dtype=float).reshape(-1)
    if t.shape != (code.dims.k,):
        raise ValueError(f"t must have dimension k={code.dims.k}")
    return np.concatenate([t, code.a0 + t @ code.b])


def code_from_intersections(dims: Dims, points: Sequence[Sequence[float]]) -> PlaneCode:
    """Recover a code from the k+1 intersection points with the reference flats.

    points[i] must have horizontal part equal to the i-th anchor (the origin
    for i=0, the i-th horizontal unit vector for i>=1).
    """
    pts = np.asarray(points, dtype=float)
    if pts.shape != (dims.k + 1, dims.n):
        raise ValueError(f"need {dims.k + 1} points of R^{dims.n}")
    anchors = np.zeros((dims.k + 1, dims.k))
    anchors[1:] = np.eye(dims.k)
    if not np.array_equal(pts[:, : dims.k], anchors):
        raise ValueError("horizontal parts must be 0, e_1, ..., e_k exactly")
    a0 = pts[0, dims.k :]
    b = pts[1:, dims.k :] - a0
    return PlaneCode(dims, a0, b)


def in_horizontal_family(code: PlaneCode) -> bool:
    """True iff all k+1 reference intersection heights lie in the unit box."""
    heights = np.vstack([code.a0, code.a0 + code.b])
    return bool(np.all(heights >= 0.0) and np.all(heights <= 1.0))


def metric_code(p: PlaneCode, q: PlaneCode) -> float:
    """Max-norm distance between the two code vectors."""
    if p.dims != q.dims:
        raise ValueError("codes must share dims")
    return float(np.max(np.abs(p.vector() - q.vector())))


def _direction_projector(code: PlaneCode) -> np.ndarray:
    """Orthogonal projector onto the plane's direction space."""
    d = np.zeros((code.dims.n, code.dims.k))
    d[: code.dims.k] = np.eye(code.dims.k)
    d[code.dims.k :] = code.b.T
    qmat, _ = np.linalg.qr(d)
    return qmat @ qmat.T


def metric_natural(p: PlaneCode, q: PlaneCode) -> float:
    """Operator-norm gap of the direction projectors plus base-point distance.

    The base point of a plane is the orthogonal projection of any of its
    points onto the orthogonal complement of its direction space.
    """
    if p.dims != q.dims:
        raise ValueError("codes must share dims")
    pi_p = _direction_projector(p)
    pi_q = _direction_projector(q)
    op_gap = float(np.linalg.norm(pi_p - pi_q, 2))
    n, k = p.dims.n, p.dims.k
    x_p = np.concatenate([np.zeros(k), p.a0])
    x_q = np.concatenate([np.zeros(k), q.a0])
    base_p = x_p - pi_p @ x_p
    base_q = x_q - pi_q @ x_q
    return op_gap + float(np.linalg.norm(base_p - base_q))


# -- exact linear feasibility ------------------------------------------------

_FEAS_TOL = 1e-9


def _fourier_motzkin_feasible(lhs: np.ndarray, rhs: np.ndarray, tol: float = _FEAS_TOL) -> bool:
    """Decide whether {t : lhs @ t <= rhs} is nonempty by variable elimination.

    Intended for the small systems arising from axis-aligned boxes (a handful
    of variables); constraint count can grow quadratically per elimination.
    """
    lhs = np.asarray(lhs, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    for _ in range(lhs.shape[1]):
        col = lhs[:, 0]
        pos = col > tol
        neg = col < -tol
        zero = ~(pos | neg)
        new_lhs = [lhs[zero, 1:]]
        new_rhs = [rhs[zero]]
        if pos.any() and neg.any():
            # pair every upper bound on t_0 with every lower bound
            lp, rp = lhs[pos] / col[pos, None], rhs[pos] / col[pos]
            ln, rn = lhs[neg] / -col[neg, None], rhs[neg] / -col[neg]
            n_comb = lp.shape[0] * ln.shape[0]
            comb_lhs = (lp[:, None, 1:] + ln[None, :, 1:]).reshape(n_comb, lhs.shape[1] - 1)
            comb_rhs = (rp[:, None] + rn[None, :]).reshape(n_comb)
            new_lhs.append(comb_lhs)
            new_rhs.append(comb_rhs)
        lhs = np.vstack(new_lhs)
        rhs = np.concatenate(new_rhs)
        if lhs.size == 0:
            break
    return bool(np.all(rhs >= -tol))


def plane_meets_box(
    code: PlaneCode,
    lo: Sequence[float],
    hi: Sequence[float],
    t_lo: Sequence[float] | None = None,
    t_hi: Sequence[float] | None = None,
) -> bool:
    """Exact test whether the (optionally t-restricted) graph meets a closed box.

    The box is axis-parallel with corners lo, hi in R^n.  If t_lo/t_hi are
    given, the parameter t is additionally confined to that closed box in R^k.
    """
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    k, q = code.dims.k, code.dims.codim
    rows = []
    rhs = []
    eye = np.eye(k)
    rows += [eye, -eye]
    rhs += [hi[:k], -lo[:k]]
    bt = code.b.T  # (q, k): rows are the vertical-coordinate gradients
    rows += [bt, -bt]
    rhs += [hi[k:] - code.a0, code.a0 - lo[k:]]
    if t_lo is not None or t_hi is not None:
        t_lo = np.asarray(t_lo, dtype=float)
        t_hi = np.asarray(t_hi, dtype=float)
        rows += [eye, -eye]
        rhs += [t_hi, -t_lo]
    return _fourier_motzkin_feasible(np.vstack(rows), np.concatenate(rhs))


def plane_box_intersects(code: PlaneCode, cube) -> bool:
    """True iff the plane meets the closed dyadic cube."""
    if cube.ndim != code.dims.n:
        raise ValueError("cube ambient dimension must match the plane's")
    lo, hi = cube.bounds()
    return plane_meets_box(code, lo, hi)


# -- sampling and calibration --------------------------------------------------


def random_horizontal_code(dims: Dims, rng: np.random.Generator) -> PlaneCode:
    """Uniform code in the horizontal family via i.i.d. intersection heights."""
    heights = rng.uniform(0.0, 1.0, size=(dims.k + 1, dims.codim))
    return PlaneCode(dims, heights[0], heights[1:] - heights[0])


def metric_equivalence_report(
    dims: Dims, sample_size: int, rng: np.random.Generator
) -> MetricEquivalenceReport:
    """Sample code pairs in the horizontal family and record both metric ratios."""
    max_m_over_d = 0.0
    max_d_over_m = 0.0
    for _ in range(sample_size):
        p = random_horizontal_code(dims, rng)
        q = random_horizontal_code(dims, rng)
        d = metric_code(p, q)
        m = metric_natural(p, q)
        if d > 0 and m > 0:
            max_m_over_d = max(max_m_over_d, m / d)
            max_d_over_m = max(max_d_over_m, d / m)
    return MetricEquivalenceReport(sample_size, max_m_over_d, max_d_over_m)


# -- plane-code files ----------------------------------------------------------


def save_plane_file(path, codes: Iterable[PlaneCode]) -> None:
    """Write one plane per line: n k then the code coordinates."""
    with open(path, "w") as fh:
        for code in codes:
            nums = " ".join(repr(float(x)) for x in code.vector())
            fh.write(f"{code.dims.n} {code.dims.k} {nums}\n")


def load_plane_file(path) -> list[PlaneCode]:
    codes = []
    with open(path) as fh:
        for line_no, line in enumerate(fh, 1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) < 2:
                raise ValueError(f"{path}:{line_no}: expected 'n k code...'")
            dims = Dims(int(parts[0]), int(parts[1]))
            vec = [float(x) for x in parts[2:]]
            if len(vec) != dims.code_dim:
                raise ValueError(
                    f"{path}:{line_no}: expected {dims.code_dim} code coordinates"
                )
            codes.append(PlaneCode.from_vector(dims, vec))
    return codes
