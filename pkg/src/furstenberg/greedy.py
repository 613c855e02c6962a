"""Greedy mass concentration on a plane's parameter grid.

greedy_select picks m+1 grid cells, each carrying a large share of the
supplied mass map, with centers quantitatively independent: every center
after the first keeps distance >= d0 from the affine hull of its
predecessors.  The share guarantee (each mass >= beta r^k / 2^(k+1)) holds
whenever the recorded hull-neighborhood masses stay <= beta/2; both sides
of that dichotomy are recorded on the Selection rather than assumed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .simplex import dists_to_affine_hull, simplex_volume

__all__ = [
    "GreedyParams",
    "MassMap",
    "Selection",
    "GreedySelectionError",
    "default_l2",
    "default_kprime",
    "derive_params",
    "make_params",
    "uniform_mass_map",
    "neighborhood_mass",
    "greedy_select",
    "witness_simplex",
    "save_mass_file",
    "load_mass_file",
]


class GreedySelectionError(RuntimeError):
    """No grid cell center reaches the required hull distance."""


def default_l2(n: int, k: int) -> float:
    """Upper Lipschitz constant of the graph chart on the horizontal family.

    Slopes are coordinatewise bounded by 1 there, so |f(t)-f(t')| <=
    sqrt(1 + k(n-k)) |t-t'|.
    """
    return math.sqrt(1.0 + k * (n - k))


def default_kprime(k: int, alpha: float) -> float:
    """Admissible covering constant for slab-by-cube counting, 2^a (3 sqrt k)^(m-1) k^(a/2)."""
    m = math.ceil(alpha)
    return 2.0**alpha * (3.0 * math.sqrt(k)) ** (m - 1) * k ** (alpha / 2.0)


@dataclass(frozen=True)
class GreedyParams:
    """Scales of the greedy construction.

    m = ceil(alpha), eps = alpha - (m-1); d0 = d/(2 L2) is the hull
    separation and r = d0^m / (2^(k+1) k m!) the grid cell side.
    """

    k: int
    alpha: float
    beta: float
    d: float
    l2: float

    def __post_init__(self) -> None:
        if not 0 < self.alpha <= self.k:
            raise ValueError("need 0 < alpha <= k")
        if not 0 < self.beta:
            raise ValueError("beta must be positive")
        if self.d > self.beta + 1e-12:
            raise ValueError("need d <= beta")
        if self.l2 < 1:
            raise ValueError("L2 must be >= 1")

    @property
    def m(self) -> int:
        return math.ceil(self.alpha)

    @property
    def eps(self) -> float:
        return self.alpha - (self.m - 1)

    @property
    def d0(self) -> float:
        return self.d / (2.0 * self.l2)

    @property
    def r(self) -> float:
        return self.d0**self.m / (2 ** (self.k + 1) * self.k * math.factorial(self.m))

    @property
    def phi(self) -> float:
        return self.m / self.eps

    @property
    def psi(self) -> float:
        return 1.0 + self.m * self.k / self.eps


def derive_params(k: int, alpha: float, beta: float, l2: float, kprime: float) -> GreedyParams:
    """Parameters with d = (beta/(2 K'))^(1/eps) capped at beta."""
    if kprime <= 0:
        raise ValueError("K' must be positive")
    m = math.ceil(alpha)
    eps = alpha - (m - 1)
    d = min((beta / (2.0 * kprime)) ** (1.0 / eps), beta)
    return GreedyParams(k, alpha, beta, d, l2)


def make_params(k: int, alpha: float, beta: float, l2: float, d: float | None = None) -> GreedyParams:
    """Parameters with an explicitly chosen d (defaults to the cap value beta)."""
    return GreedyParams(k, alpha, beta, beta if d is None else d, l2)


@dataclass(frozen=True)
class MassMap:
    """Nonnegative masses on the side-r grid over [0,1]^k (cells clipped at 1)."""

    k: int
    cell_side: float
    masses: np.ndarray

    def __post_init__(self) -> None:
        masses = np.asarray(self.masses, dtype=float)
        cells = math.ceil(1.0 / self.cell_side)
        if masses.shape != (cells,) * self.k:
            raise ValueError(f"masses must have shape {(cells,) * self.k}")
        if np.any(masses < 0):
            raise ValueError("masses must be >= 0")
        object.__setattr__(self, "masses", masses)

    @property
    def cells_per_axis(self) -> int:
        return self.masses.shape[0]

    def total(self) -> float:
        return float(self.masses.sum())

    def centers(self) -> np.ndarray:
        """Clipped cell centers, flattened in index order, shape (N^k, k)."""
        n = self.cells_per_axis
        r = self.cell_side
        lo_1d = np.arange(n) * r
        hi_1d = np.minimum(lo_1d + r, 1.0)
        mid_1d = (lo_1d + hi_1d) / 2.0
        grids = np.meshgrid(*([mid_1d] * self.k), indexing="ij")
        return np.stack([g.reshape(-1) for g in grids], axis=1)

    def indices(self) -> np.ndarray:
        n = self.cells_per_axis
        grids = np.meshgrid(*([np.arange(n)] * self.k), indexing="ij")
        return np.stack([g.reshape(-1) for g in grids], axis=1)


def uniform_mass_map(k: int, cell_side: float, total: float) -> MassMap:
    cells = math.ceil(1.0 / cell_side)
    masses = np.full((cells,) * k, total / cells**k)
    return MassMap(k, cell_side, masses)


@dataclass(frozen=True)
class Selection:
    """Greedy output: cells, clipped centers, masses and hull separations.

    hull_separations[0] is inf; hull_separations[i] is the distance from
    center i to the affine hull of centers 0..i-1.  neighborhood_masses[i-1]
    is the mass within width 2 d0 of that hull, recorded before step i.
    property_one_ok states whether every selected mass reached
    beta r^k / 2^(k+1) (asserted by callers only when all neighborhood
    masses stay <= beta/2).
    """

    cells: tuple[tuple[int, ...], ...]
    centers: np.ndarray
    masses: tuple[float, ...]
    hull_separations: tuple[float, ...]
    neighborhood_masses: tuple[float, ...]
    mass_threshold: float
    property_one_ok: bool

    def to_dict(self) -> dict:
        return {
            "cells": [list(c) for c in self.cells],
            "centers": self.centers.tolist(),
            "masses": list(self.masses),
            "hull_separations": list(self.hull_separations),
            "neighborhood_masses": list(self.neighborhood_masses),
            "mass_threshold": self.mass_threshold,
            "property_one_ok": self.property_one_ok,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Selection":
        return cls(
            cells=tuple(tuple(int(i) for i in c) for c in data["cells"]),
            centers=np.asarray(data["centers"], dtype=float),
            masses=tuple(float(x) for x in data["masses"]),
            hull_separations=tuple(float(x) for x in data["hull_separations"]),
            neighborhood_masses=tuple(float(x) for x in data["neighborhood_masses"]),
            mass_threshold=float(data["mass_threshold"]),
            property_one_ok=bool(data["property_one_ok"]),
        )


def neighborhood_mass(mass_map: MassMap, hull_points, width: float) -> float:
    """Total mass of cells whose center sits within width of the affine hull.

    A cell counts iff its center distance is <= width + sqrt(k) r / 2, a
    conservative closed test that includes every cell touching the
    width-neighborhood.
    """
    hull = np.atleast_2d(np.asarray(hull_points, dtype=float))
    if hull.size == 0:
        raise ValueError("hull_points must be nonempty")
    margin = width + math.sqrt(mass_map.k) * mass_map.cell_side / 2.0
    dists = dists_to_affine_hull(mass_map.centers(), hull)
    return float(mass_map.masses.reshape(-1)[dists <= margin].sum())


def greedy_select(mass_map: MassMap, params: GreedyParams) -> Selection:
    """Pick m+1 cells: max mass first, then max mass at hull distance >= d0.

    Ties break to the lexicographically smallest cell index.  Masses,
    separations and hull-neighborhood masses are recorded; the share bound
    (each mass >= beta r^k / 2^(k+1), with r the map's cell side) is checked
    and reported, not raised.  Raises GreedySelectionError only when no cell
    center attains the required distance.
    """
    if mass_map.k != params.k:
        raise ValueError("mass map and params disagree on k")
    if mass_map.total() < params.beta * (1 - 1e-9):
        raise ValueError(
            f"total mass {mass_map.total()} is below the target beta {params.beta}"
        )
    flat = mass_map.masses.reshape(-1)
    centers = mass_map.centers()
    index_list = mass_map.indices()
    d0 = params.d0
    m = params.m

    first = int(np.argmax(flat))  # C order = lexicographic index order
    picked = [first]
    seps = [math.inf]
    nbhd = []
    for _ in range(m):
        hull = centers[picked]
        nbhd.append(neighborhood_mass(mass_map, hull, 2.0 * d0))
        dists = dists_to_affine_hull(centers, hull)
        eligible = dists >= d0
        if not eligible.any():
            raise GreedySelectionError(
                f"no cell center is at distance >= d0={d0} from the hull of {hull.tolist()}"
            )
        masked = np.where(eligible, flat, -np.inf)
        nxt = int(np.argmax(masked))
        picked.append(nxt)
        seps.append(float(dists[nxt]))

    threshold = params.beta * mass_map.cell_side**params.k / 2 ** (params.k + 1)
    masses = tuple(float(flat[i]) for i in picked)
    return Selection(
        cells=tuple(tuple(int(x) for x in index_list[i]) for i in picked),
        centers=centers[picked],
        masses=masses,
        hull_separations=tuple(seps),
        neighborhood_masses=tuple(nbhd),
        mass_threshold=threshold,
        property_one_ok=bool(all(a >= threshold - 1e-12 for a in masses)),
    )


def witness_simplex(selection: Selection, params: GreedyParams) -> float:
    """Volume of the selected-center simplex; >= d0^m / m! by construction."""
    return simplex_volume(selection.centers)


def save_mass_file(path, mass_map: MassMap) -> None:
    """Write header 'k r' then 'i_1 ... i_k mass' for each nonzero cell."""
    with open(path, "w") as fh:
        fh.write(f"{mass_map.k} {repr(float(mass_map.cell_side))}\n")
        flat = mass_map.masses.reshape(-1)
        for idx, mass in zip(mass_map.indices(), flat):
            if mass != 0.0:
                fh.write(" ".join(str(int(i)) for i in idx) + f" {repr(float(mass))}\n")


def load_mass_file(path) -> MassMap:
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise ValueError(f"{path}: expected header 'k r'")
        k, side = int(header[0]), float(header[1])
        cells = math.ceil(1.0 / side)
        masses = np.zeros((cells,) * k)
        for line_no, line in enumerate(fh, 2):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != k + 1:
                raise ValueError(f"{path}:{line_no}: expected {k} indices and a mass")
            idx = tuple(int(p) for p in parts[:k])
            masses[idx] = float(parts[k])
    return MassMap(k, side, masses)
