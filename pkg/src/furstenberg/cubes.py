"""Dyadic cubes, digit-restriction Cantor rasterization and box-counting.

CubeSet stores the cells of one grid level as a unique, lexicographically
sorted integer index array.  The grid base is 2 for dyadic sets; Cantor
constructions start base-b and are converted with snap_to_dyadic.  Files
(header "n l", one index vector per line) are always dyadic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .planes import PlaneCode, metric_code

__all__ = [
    "DyadicCube",
    "CubeSet",
    "FrostmanSample",
    "rasterize_cantor",
    "snap_to_dyadic",
    "product_set",
    "dyadic_counts",
    "box_dimension_estimate",
    "net_premeasure",
    "frostman_verify",
    "scale_select",
    "save_cube_file",
    "load_cube_file",
]


@dataclass(frozen=True)
class DyadicCube:
    """Closed cube prod_j [i_j 2^-l, (i_j+1) 2^-l] given by level l and index."""

    level: int
    index: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "index", tuple(int(i) for i in self.index))
        if self.level < 0:
            raise ValueError("level must be >= 0")

    @property
    def ndim(self) -> int:
        return len(self.index)

    @property
    def side(self) -> float:
        return 2.0 ** -self.level

    @property
    def diameter(self) -> float:
        return math.sqrt(self.ndim) * self.side

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        lo = np.array(self.index, dtype=float) * self.side
        return lo, lo + self.side

    def center(self) -> np.ndarray:
        lo, hi = self.bounds()
        return (lo + hi) / 2.0


def _normalize_indices(indices) -> np.ndarray:
    arr = np.asarray(list(indices) if not isinstance(indices, np.ndarray) else indices)
    if arr.size == 0:
        width = arr.shape[1] if arr.ndim == 2 else 1
        return np.empty((0, width), dtype=np.int64)
    arr = np.atleast_2d(arr).astype(np.int64)
    return np.unique(arr, axis=0)


@dataclass(frozen=True)
class CubeSet:
    """All cells of one level of a base^level grid; indices unique and sorted."""

    level: int
    indices: np.ndarray
    base: int = 2

    def __post_init__(self) -> None:
        object.__setattr__(self, "indices", _normalize_indices(self.indices))
        if self.level < 0 or self.base < 2:
            raise ValueError("need level >= 0 and base >= 2")

    @property
    def ndim(self) -> int:
        return self.indices.shape[1]

    @property
    def side(self) -> float:
        return float(self.base) ** -self.level

    @property
    def dyadic_level(self) -> float:
        """Level on the log2 scale; integer-valued exactly when base == 2."""
        return self.level * math.log2(self.base)

    def __len__(self) -> int:
        return self.indices.shape[0]

    def cubes(self) -> list[DyadicCube]:
        if self.base != 2:
            raise ValueError("only dyadic cube sets enumerate DyadicCubes")
        return [DyadicCube(self.level, tuple(row)) for row in self.indices]

    def index_set(self) -> set[tuple[int, ...]]:
        return {tuple(int(x) for x in row) for row in self.indices}

    def union(self, other: "CubeSet") -> "CubeSet":
        if (self.level, self.base, self.ndim) != (other.level, other.base, other.ndim):
            raise ValueError("cube sets must share level, base and dimension")
        return CubeSet(self.level, np.vstack([self.indices, other.indices]), self.base)


def rasterize_cantor(base: int, digits: Sequence[int], depth: int) -> CubeSet:
    """Level-depth cells of the digit-restriction Cantor set in [0,1].

    digits is a nonempty subset of {0..base-1}; the result has exactly
    |digits|^depth base-b cells and box dimension log|digits|/log base.
    """
    digits = sorted(set(int(d) for d in digits))
    if not digits:
        raise ValueError("digit set must be nonempty")
    if digits[0] < 0 or digits[-1] >= base:
        raise ValueError(f"digits must lie in 0..{base - 1}")
    if depth < 0:
        raise ValueError("depth must be >= 0")
    cells = np.array([0], dtype=np.int64)
    dig = np.array(digits, dtype=np.int64)
    for _ in range(depth):
        cells = (cells[:, None] * base + dig[None, :]).reshape(-1)
    return CubeSet(depth, cells[:, None], base)


def snap_to_dyadic(cs: CubeSet) -> CubeSet:
    """Cover each base-b cell by enclosing dyadic cubes at level ceil(l*log2 b).

    Exact integer arithmetic: cell [i b^-l, (i+1) b^-l] maps per axis to
    dyadic indices i*2^L // b^l through ((i+1)*2^L - 1) // b^l.
    """
    if cs.base == 2:
        return cs
    level = math.ceil(cs.level * math.log2(cs.base))
    pow2 = 2**level
    powb = cs.base**cs.level
    out = []
    for row in cs.indices:
        ranges = []
        for i in row:
            j0 = (int(i) * pow2) // powb
            j1 = ((int(i) + 1) * pow2 - 1) // powb
            ranges.append(range(j0, j1 + 1))
        grids = np.meshgrid(*[np.array(r, dtype=np.int64) for r in ranges], indexing="ij")
        out.append(np.stack([g.reshape(-1) for g in grids], axis=1))
    return CubeSet(level, np.vstack(out), 2)


def product_set(a: CubeSet, flat_dims: int, ambient: int) -> CubeSet:
    """Cells of [0,1]^p x A x {0}^(n-p-1) at A's level, for a 1-d cube set A."""
    if a.ndim != 1:
        raise ValueError("the factor set must be 1-dimensional")
    if flat_dims < 0 or flat_dims + 1 > ambient:
        raise ValueError("need flat_dims + 1 <= ambient")
    per_axis = a.base**a.level
    full = np.arange(per_axis, dtype=np.int64)
    axes = [full] * flat_dims + [a.indices[:, 0]] + [np.zeros(1, dtype=np.int64)] * (
        ambient - flat_dims - 1
    )
    grids = np.meshgrid(*axes, indexing="ij")
    indices = np.stack([g.reshape(-1) for g in grids], axis=1)
    return CubeSet(a.level, indices, a.base)


def dyadic_counts(cs: CubeSet, levels: Iterable[int]) -> list[tuple[int, int]]:
    """Distinct ancestor-cube counts of a dyadic set at the given coarser levels."""
    if cs.base != 2:
        raise ValueError("snap to dyadic before counting")
    out = []
    for level in levels:
        if level > cs.level or level < 0:
            raise ValueError(f"level {level} outside 0..{cs.level}")
        shifted = cs.indices >> (cs.level - level)
        out.append((level, int(np.unique(shifted, axis=0).shape[0])))
    return out


def box_dimension_estimate(counts, fit_range: tuple[float, float] | None = None) -> float:
    """Least-squares slope of log2(count) against level.

    counts is a sequence of (level, cell_count); fit_range = (lmin, lmax)
    restricts which levels enter the fit.
    """
    pts = [(float(l), float(c)) for l, c in counts if c > 0]
    if fit_range is not None:
        lmin, lmax = fit_range
        pts = [(l, c) for l, c in pts if lmin <= l <= lmax]
    if len(pts) < 2:
        raise ValueError("need at least two levels in the fit range")
    levels = np.array([p[0] for p in pts])
    logs = np.log2([p[1] for p in pts])
    slope = np.polyfit(levels, logs, 1)[0]
    return float(slope)


def net_premeasure(cover, s: float) -> float:
    """Sum of diameter^s over the given cubes (no infimum over covers).

    cover is a CubeSet or an iterable of DyadicCube; the diameter of a cell
    at side h in R^n is sqrt(n) * h.
    """
    if s < 0:
        raise ValueError("s must be >= 0")
    if isinstance(cover, CubeSet):
        if len(cover) == 0:
            return 0.0
        diam = math.sqrt(cover.ndim) * cover.side
        return len(cover) * diam**s
    return float(sum(c.diameter**s for c in cover))


@dataclass(frozen=True)
class FrostmanSample:
    """Weighted plane codes with a claimed ball-growth exponent and constant."""

    atoms: tuple
    exponent: float
    constant: float

    def __post_init__(self) -> None:
        atoms = tuple((code, float(w)) for code, w in self.atoms)
        if any(w < 0 for _, w in atoms):
            raise ValueError("weights must be >= 0")
        if sum(w for _, w in atoms) > 1 + 1e-12:
            raise ValueError("weights must sum to at most 1")
        object.__setattr__(self, "atoms", atoms)

    def total_mass(self) -> float:
        return float(sum(w for _, w in self.atoms))


def frostman_verify(mu: FrostmanSample, radii: Sequence[float], centers) -> float:
    """Max over centers and radii of ball mass / r^s, in the code metric.

    The caller compares the returned ratio against the sample's constant.
    """
    radii = [float(r) for r in radii]
    if any(r <= 0 for r in radii):
        raise ValueError("radii must be positive")
    atom_vecs = np.array([code.vector() for code, _ in mu.atoms])
    weights = np.array([w for _, w in mu.atoms])
    worst = 0.0
    for center in centers:
        c = center.vector() if isinstance(center, PlaneCode) else np.asarray(center)
        dists = np.max(np.abs(atom_vecs - c), axis=1)
        for r in radii:
            mass = float(weights[dists <= r].sum())
            worst = max(worst, mass / r**mu.exponent)
    return worst


def scale_select(masses: Sequence[tuple[int, float]]) -> int:
    """Smallest level l among the inputs whose qualifying mass is >= 1/l^2."""
    qualifying = [int(l) for l, q in masses if q >= 1.0 / int(l) ** 2]
    if not qualifying:
        raise ValueError(
            "no level carries mass >= 1/l^2; the masses are inconsistent "
            "with the pigeonhole hypothesis"
        )
    return min(qualifying)


def save_cube_file(path, cs: CubeSet) -> None:
    """Write header 'n l' then one index vector per line (dyadic sets only)."""
    if cs.base != 2:
        raise ValueError("cube-set files are dyadic; snap_to_dyadic first")
    with open(path, "w") as fh:
        fh.write(f"{cs.ndim} {cs.level}\n")
        for row in cs.indices:
            fh.write(" ".join(str(int(i)) for i in row) + "\n")


def load_cube_file(path) -> CubeSet:
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise ValueError(f"{path}: expected header 'n l'")
        ndim, level = int(header[0]), int(header[1])
        rows = []
        for line_no, line in enumerate(fh, 2):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != ndim:
                raise ValueError(f"{path}:{line_no}: expected {ndim} indices")
            rows.append([int(p) for p in parts])
    arr = np.array(rows, dtype=np.int64) if rows else np.empty((0, ndim), dtype=np.int64)
    return CubeSet(level, arr, 2)
