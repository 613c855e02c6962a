"""End-to-end discretized incidence experiments on plane families.

Pipeline: generate a sharp-example set and a separated family of planes,
rasterize at scale delta = 2^-l, run the greedy cell selection on each
plane's induced mass map, count the incidence tuples, and verify the lower
and upper counting chains with measured constants.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from itertools import product
from typing import Sequence

import numpy as np

from .cubes import (
    CubeSet,
    FrostmanSample,
    frostman_verify,
    product_set,
    rasterize_cantor,
    snap_to_dyadic,
)
from .greedy import GreedyParams, MassMap, Selection, default_l2, greedy_select
from .nets import (
    NetRequest,
    build_epsilon_net,
    code_ball_measure,
    maximal_separated_subset,
    packing_lower_bound,
    verify_net,
)
from .planes import Dims, PlaneCode, plane_meets_box
from .simplex import extend_with_basis, simplex_volume

__all__ = [
    "ExperimentConfig",
    "IncidenceReport",
    "dimension_bound",
    "bounds_table",
    "gen_sharp_flat",
    "gen_sharp_product",
    "rasterize_plane",
    "induced_mass_map",
    "build_incidence",
    "verify_lower_chain",
    "verify_upper_chain",
    "run_incidence",
    "brute_force_incidence_count",
    "save_report",
    "load_report",
]


# -- closed-form bounds --------------------------------------------------------


def dimension_bound(alpha: float, k: int, n: int, s: float) -> float:
    """Lower bound alpha + (s - (k - ceil(alpha))(n-k)) / (ceil(alpha) + 1)."""
    if not 1 <= k < n:
        raise ValueError("need 1 <= k < n")
    if not 0 < alpha <= k:
        raise ValueError("need 0 < alpha <= k")
    if not 0 <= s <= (k + 1) * (n - k):
        raise ValueError("need 0 <= s <= (k+1)(n-k)")
    m = math.ceil(alpha)
    return alpha + (s - (k - m) * (n - k)) / (m + 1)


def bounds_table(k: int, n: int, s_grid: Sequence[float]) -> list[tuple[float, float, float, float]]:
    """Rows (s, f, g, h) of the three competing union-of-planes bounds.

    f combines the earlier projection/slicing bounds with the positive-measure
    cap n; g = k + s/(k+1); h is the dimension of the product construction.
    """
    rows = []
    for s in s_grid:
        if not 0 <= s <= (k + 1) * (n - k):
            raise ValueError(f"s={s} outside 0..(k+1)(n-k)")
        f = max(min(s - k * (n - k) + 2 * k, float(n)), k + min(s, 1.0))
        g = k + s / (k + 1)
        m = math.ceil(s / (k + 1))
        if m >= (k + s) / (k + 1):
            h = s - k * m + 2 * k
        else:
            h = float(k + m)
        rows.append((float(s), float(f), float(g), float(h)))
    return rows


# -- generators ------------------------------------------------------------------


def _auto_digit_set(frac: float, max_base: int = 9) -> tuple[int, tuple[int, ...]]:
    """Base and digit set whose restriction set best approximates dimension frac."""
    if frac >= 1.0 - 1e-9:
        return 2, (0, 1)
    best = None
    for base in range(3, max_base + 1):
        for count in range(2, base):
            err = abs(math.log(count) / math.log(base) - frac)
            if best is None or err < best[0]:
                digits = tuple(int(round(x)) for x in np.linspace(0, base - 1, count))
                best = (err, base, digits)
    return best[1], best[2]


def _grid_axis(delta: float) -> np.ndarray:
    return np.arange(int(1.0 / delta) + 1) * delta


def _subsample(items: list, max_items: int | None, rng: np.random.Generator | None):
    if max_items is None or len(items) <= max_items:
        return items
    rng = rng or np.random.default_rng(0)
    idx = rng.choice(len(items), size=max_items, replace=False)
    return [items[i] for i in sorted(idx)]


def gen_sharp_flat(
    dims: Dims,
    alpha: float,
    depth: int,
    delta: float,
    base: int | None = None,
    digits: Sequence[int] | None = None,
    max_planes: int | None = None,
    rng: np.random.Generator | None = None,
) -> tuple[CubeSet, list[PlaneCode]]:
    """A set of dimension alpha inside the span of the first ceil(alpha) axes,
    plus a delta-separated grid family of planes containing that flat.

    The family has dimension (k - ceil(alpha))(n - k): free slope vectors on
    the step-delta grid, all other code coordinates zero.
    """
    k, n = dims.k, dims.n
    m = math.ceil(alpha)
    if alpha > k - 1:
        raise ValueError("flat construction needs alpha <= k - 1")
    frac = alpha - (m - 1)
    if base is None or digits is None:
        base, digits = _auto_digit_set(frac)
    cantor = rasterize_cantor(base, digits, depth)
    cube_set = product_set(cantor, m - 1, n)

    grid = _grid_axis(delta)
    free = k - m
    combos = list(product(grid, repeat=free * dims.codim))
    combos = _subsample(combos, max_planes, rng)
    codes = []
    zeros = np.zeros(dims.codim)
    for combo in combos:
        b = np.zeros((k, dims.codim))
        b[m:] = np.asarray(combo).reshape(free, dims.codim)
        codes.append(PlaneCode(dims, zeros, b))
    return cube_set, codes


def gen_sharp_product(
    dims: Dims,
    m_flat: int,
    depth: int,
    delta: float,
    level: int,
    base: int = 3,
    digits: Sequence[int] = (0, 2),
    max_planes: int | None = None,
    rng: np.random.Generator | None = None,
) -> tuple[CubeSet, list[PlaneCode]]:
    """The product sharp example: [0,1]^(m_flat+k-1) x A x {0}, with the
    k-planes of the thick flat translated by representatives of A.

    Plane heights use centers of level-`level` dyadic cubes interior to the
    cells of A, so the emitted codes are delta-separated for delta = 2^-level.
    """
    k, n = dims.k, dims.n
    if not 1 <= m_flat <= n - k:
        raise ValueError("need 1 <= m_flat <= n - k")
    if 2**-level > float(base) ** -depth:
        raise ValueError("need 2^-level <= base^-depth so representatives stay interior")
    cantor = rasterize_cantor(base, digits, depth)
    cube_set = product_set(cantor, m_flat + k - 1, n)

    # representative heights: dyadic cube centers at the cell midpoints
    reps = []
    for (cell,) in cantor.indices:
        mid = (cell + 0.5) * float(base) ** -depth
        j = math.floor(mid * 2**level)
        reps.append((j + 0.5) / 2**level)

    free_coords = m_flat - 1  # vertical coordinates below the A coordinate
    grid = _grid_axis(delta)
    combos = list(product(grid, repeat=(k + 1) * free_coords))
    combos = _subsample(combos, max_planes, rng)
    codes = []
    for a_val in reps:
        for combo in combos:
            block = np.asarray(combo).reshape(k + 1, free_coords) if free_coords else None
            a0 = np.zeros(dims.codim)
            b = np.zeros((k, dims.codim))
            if free_coords:
                a0[:free_coords] = block[0]
                b[:, :free_coords] = block[1:]
            a0[m_flat - 1] = a_val  # vertical coordinate m_flat carries A
            codes.append(PlaneCode(dims, a0, b))
    return cube_set, codes


# -- rasterization ---------------------------------------------------------------


_RASTER_TOL = 1e-9


def _interval_indices(lo: float, hi: float, side: float, max_index: int) -> range:
    """Indices j with [j*side, (j+1)*side] meeting [lo, hi], clipped to the unit box.

    The window is widened by the feasibility tolerance so no cube accepted by
    the exact test can fall outside it; candidates are confirmed exactly.
    """
    j_min = max(math.ceil((lo - _RASTER_TOL) / side - 1.0), 0)
    j_max = min(math.floor((hi + _RASTER_TOL) / side), max_index)
    return range(j_min, j_max + 1)


def rasterize_plane(
    code: PlaneCode,
    level: int,
    t_lo: np.ndarray | None = None,
    t_hi: np.ndarray | None = None,
) -> CubeSet:
    """All level-`level` dyadic cubes of [0,1]^n meeting the (restricted) graph."""
    dims = code.dims
    side = 2.0**-level
    max_index = 2**level - 1
    if t_lo is None:
        t_lo = np.zeros(dims.k)
    if t_hi is None:
        t_hi = np.ones(dims.k)
    col_ranges = [_interval_indices(t_lo[i], t_hi[i], side, max_index) for i in range(dims.k)]
    found = []
    for col in product(*col_ranges):
        box_lo = np.maximum(np.array(col, dtype=float) * side, t_lo)
        box_hi = np.minimum(np.array(col, dtype=float) * side + side, t_hi)
        # per-term interval arithmetic (mixed-sign slopes need per-term minima)
        terms_lo = np.minimum(code.b * box_lo[:, None], code.b * box_hi[:, None]).sum(axis=0)
        terms_hi = np.maximum(code.b * box_lo[:, None], code.b * box_hi[:, None]).sum(axis=0)
        vert_lo = code.a0 + terms_lo
        vert_hi = code.a0 + terms_hi
        vert_ranges = [
            _interval_indices(vert_lo[j], vert_hi[j], side, max_index)
            for j in range(dims.codim)
        ]
        for rows in product(*vert_ranges):
            idx = col + rows
            lo = np.array(idx, dtype=float) * side
            if plane_meets_box(code, lo, lo + side, box_lo, box_hi):
                found.append(idx)
    arr = np.array(found, dtype=np.int64) if found else np.empty((0, dims.n), dtype=np.int64)
    return CubeSet(level, arr)


def rasterize_union(codes: Sequence[PlaneCode], level: int) -> CubeSet:
    sets = [rasterize_plane(code, level) for code in codes]
    out = sets[0]
    for cs in sets[1:]:
        out = out.union(cs)
    return out


def _cell_bounds(cell: tuple[int, ...], side: float) -> tuple[np.ndarray, np.ndarray]:
    lo = np.array(cell, dtype=float) * side
    return lo, np.minimum(lo + side, 1.0)


def patch_cubes(
    code: PlaneCode, cell: tuple[int, ...], cell_side: float, b_l: CubeSet
) -> list[tuple[int, ...]]:
    """Cubes of b_l meeting the graph patch over one parameter grid cell."""
    lo, hi = _cell_bounds(cell, cell_side)
    raster = rasterize_plane(code, b_l.level, lo, hi)
    members = b_l.index_set()
    return sorted(idx for idx in raster.index_set() if idx in members)


def induced_mass_map(code: PlaneCode, b_l: CubeSet, cell_side: float, alpha: float) -> MassMap:
    """Mass per grid cell: (cubes of b_l meeting the patch) * (sqrt(n) delta)^alpha.

    This is the net-premeasure of the covering cubes, the discrete surrogate
    for the restricted content on the plane.
    """
    dims = code.dims
    cells = math.ceil(1.0 / cell_side)
    weight = (math.sqrt(dims.n) * 2.0**-b_l.level) ** alpha
    masses = np.zeros((cells,) * dims.k)
    for cell in product(range(cells), repeat=dims.k):
        masses[cell] = len(patch_cubes(code, cell, cell_side, b_l)) * weight
    return MassMap(dims.k, cell_side, masses)


# -- configuration and report ------------------------------------------------------


@dataclass(frozen=True)
class ExperimentConfig:
    """Parameters of one incidence run; delta = 2^-l, lam defaults to 1/l^2."""

    dims: Dims
    alpha: float
    s: float
    l: int
    lam: float | None = None
    generator: str = "sharp_product"
    seed: int = 0
    depth: int | None = None
    max_planes: int | None = None

    def __post_init__(self) -> None:
        if not 0 < self.alpha <= self.dims.k:
            raise ValueError("need 0 < alpha <= k")
        if not 0 <= self.s <= self.dims.code_dim:
            raise ValueError("need 0 <= s <= (k+1)(n-k)")
        if self.l < 1:
            raise ValueError("need l >= 1")
        if self.generator not in ("sharp_flat", "sharp_product", "custom"):
            raise ValueError("generator must be sharp_flat, sharp_product or custom")

    @property
    def delta(self) -> float:
        return 2.0**-self.l

    @property
    def qualifying_mass(self) -> float:
        return self.lam if self.lam is not None else 1.0 / self.l**2


@dataclass
class IncidenceReport:
    """Counts, exponents and measured constants of one incidence run."""

    n: int
    k: int
    alpha: float
    s: float
    l: int
    delta: float
    lam: float
    m: int
    eps: float
    phi: float
    psi: float
    zeta: float
    t_bound: float
    M: int
    j_count: int
    a_count: int
    per_plane_counts: list[list[int]]
    per_tuple_max: int
    planes: list[list[float]]
    selections: list[dict]
    tuples: list[dict]
    b_l_level: int
    b_l_indices: list[list[int]]
    params: dict
    measured: dict = field(default_factory=dict)

    @property
    def dims(self) -> Dims:
        return Dims(self.n, self.k)

    def plane_codes(self) -> list[PlaneCode]:
        return [PlaneCode.from_vector(self.dims, v) for v in self.planes]

    def selection_objects(self) -> list[Selection]:
        return [Selection.from_dict(d) for d in self.selections]

    def b_l(self) -> CubeSet:
        arr = (
            np.array(self.b_l_indices, dtype=np.int64)
            if self.b_l_indices
            else np.empty((0, self.n), dtype=np.int64)
        )
        return CubeSet(self.b_l_level, arr)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "k": self.k,
            "alpha": self.alpha,
            "s": self.s,
            "l": self.l,
            "delta": self.delta,
            "lambda": self.lam,
            "m": self.m,
            "epsilon": self.eps,
            "phi": self.phi,
            "psi": self.psi,
            "zeta": self.zeta,
            "t_bound": self.t_bound,
            "m_count": self.M,
            "j_count": self.j_count,
            "a_count": self.a_count,
            "per_plane_counts": self.per_plane_counts,
            "per_tuple_max": self.per_tuple_max,
            "planes": self.planes,
            "selections": self.selections,
            "tuples": self.tuples,
            "b_l_level": self.b_l_level,
            "b_l_indices": self.b_l_indices,
            "params": self.params,
            "measured": self.measured,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "IncidenceReport":
        return cls(
            n=int(data["n"]),
            k=int(data["k"]),
            alpha=float(data["alpha"]),
            s=float(data["s"]),
            l=int(data["l"]),
            delta=float(data["delta"]),
            lam=float(data["lambda"]),
            m=int(data["m"]),
            eps=float(data["epsilon"]),
            phi=float(data["phi"]),
            psi=float(data["psi"]),
            zeta=float(data["zeta"]),
            t_bound=float(data["t_bound"]),
            M=int(data["m_count"]),
            j_count=int(data["j_count"]),
            a_count=int(data["a_count"]),
            per_plane_counts=[[int(c) for c in row] for row in data["per_plane_counts"]],
            per_tuple_max=int(data["per_tuple_max"]),
            planes=[list(map(float, v)) for v in data["planes"]],
            selections=list(data["selections"]),
            tuples=list(data["tuples"]),
            b_l_level=int(data["b_l_level"]),
            b_l_indices=[[int(i) for i in row] for row in data["b_l_indices"]],
            params=dict(data["params"]),
            measured=dict(data.get("measured", {})),
        )


def save_report(path, report: IncidenceReport) -> None:
    with open(path, "w") as fh:
        json.dump(report.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_report(path) -> IncidenceReport:
    with open(path) as fh:
        return IncidenceReport.from_dict(json.load(fh))


# -- incidence counting -------------------------------------------------------------


def build_incidence(
    config: ExperimentConfig,
    planes: Sequence[PlaneCode],
    selections: Sequence[Selection],
    b_l: CubeSet,
    params: GreedyParams,
) -> IncidenceReport:
    """Count tuples (j_0..j_m, i): plane i's r-th selected patch meets b_l in cube j_r.

    Planes must be pairwise delta-separated; b_l must live at level l.
    """
    dims = config.dims
    if b_l.level != config.l or b_l.base != 2:
        raise ValueError(f"b_l level {b_l.level} does not match the scale l={config.l}")
    if b_l.ndim != dims.n:
        raise ValueError("b_l dimension mismatch")
    if len(planes) != len(selections):
        raise ValueError("need one selection per plane")
    vecs = [p.vector() for p in planes]
    for i in range(len(vecs)):
        for j in range(i + 1, len(vecs)):
            if np.max(np.abs(vecs[i] - vecs[j])) < config.delta - 1e-12:
                raise ValueError(f"planes {i} and {j} are closer than delta")

    m = params.m
    per_plane_sets: list[list[list[tuple[int, ...]]]] = []
    for code, sel in zip(planes, selections):
        sets_r = [
            patch_cubes(code, sel.cells[r], params.r, b_l) for r in range(m + 1)
        ]
        per_plane_sets.append(sets_r)

    tuples: dict[tuple, list[int]] = {}
    for i, sets_r in enumerate(per_plane_sets):
        for combo in product(*sets_r):
            tuples.setdefault(combo, []).append(i)

    per_plane_counts = [[len(s) for s in sets_r] for sets_r in per_plane_sets]
    a_count = int(sum(int(np.prod([len(s) for s in sets_r])) for sets_r in per_plane_sets))
    per_tuple_max = max((len(v) for v in tuples.values()), default=0)

    lam = config.qualifying_mass
    eps = params.eps
    phi = params.phi
    psi = params.psi
    zeta = 1.0 / (m + 1) + psi + phi * dims.code_dim / (m + 1)
    t_bound = dimension_bound(config.alpha, dims.k, dims.n, config.s)

    delta = config.delta
    lower_denom = delta ** -(config.s + config.alpha * (m + 1)) * lam ** (1 + psi * (m + 1))
    witness_vols = [simplex_volume(sel.centers) for sel in selections]

    mu = FrostmanSample(
        tuple((p, 1.0 / len(planes)) for p in planes), config.s, 1.0
    )
    sweep = [2.0**-j for j in range(0, config.l + 1)]
    frostman_c = frostman_verify(mu, sweep, planes)
    pack_bound = packing_lower_bound(
        FrostmanSample(mu.atoms, config.s, frostman_c), lam, delta
    )

    report = IncidenceReport(
        n=dims.n,
        k=dims.k,
        alpha=config.alpha,
        s=config.s,
        l=config.l,
        delta=delta,
        lam=lam,
        m=m,
        eps=eps,
        phi=phi,
        psi=psi,
        zeta=zeta,
        t_bound=t_bound,
        M=len(planes),
        j_count=len(b_l),
        a_count=a_count,
        per_plane_counts=per_plane_counts,
        per_tuple_max=per_tuple_max,
        planes=[v.tolist() for v in vecs],
        selections=[sel.to_dict() for sel in selections],
        tuples=[
            {"cubes": [list(c) for c in combo], "planes": members}
            for combo, members in sorted(tuples.items())
        ],
        b_l_level=b_l.level,
        b_l_indices=b_l.indices.tolist(),
        params={
            "k": params.k,
            "alpha": params.alpha,
            "beta": params.beta,
            "d": params.d,
            "l2": params.l2,
            "d0": params.d0,
            "r": params.r,
        },
        measured={
            "witness_volume_min": float(min(witness_vols)) if witness_vols else 0.0,
            "lower_chain_ratio": a_count / lower_denom if lower_denom > 0 else 0.0,
            "packing_ratio": len(planes) / pack_bound if pack_bound > 0 else math.inf,
            "frostman_constant": frostman_c,
            "j_lower_bound": delta**-t_bound * lam**zeta,
        },
    )
    return report


def brute_force_incidence_count(report: IncidenceReport) -> int:
    """Oracle: test every (j_0..j_m, i) tuple against the geometry directly."""
    params = report.params
    planes = report.plane_codes()
    sels = report.selection_objects()
    b_l = report.b_l()
    side = 2.0**-report.b_l_level
    all_cubes = sorted(b_l.index_set())
    count = 0
    for i, (code, sel) in enumerate(zip(planes, sels)):
        memberships = []
        for r in range(report.m + 1):
            lo, hi = _cell_bounds(sel.cells[r], params["r"])
            row = []
            for idx in all_cubes:
                cube_lo = np.array(idx, dtype=float) * side
                if plane_meets_box(code, cube_lo, cube_lo + side, lo, hi):
                    row.append(idx)
            memberships.append(row)
        count += int(np.prod([len(r) for r in memberships]))
    return count


# -- verification chains --------------------------------------------------------------


def verify_lower_chain(report: IncidenceReport) -> tuple[bool, dict]:
    """Check the combinatorial steps of the lower count.

    (1) a_count >= sum_i prod_r |A_r(i)|; (2) each |A_r(i)| is at least the
    recorded patch mass divided by (sqrt(n) delta)^alpha.  Reports the
    implied constant against delta^-(s + alpha(m+1)) lambda^(1 + psi(m+1)).
    """
    product_sum = sum(int(np.prod(row)) for row in report.per_plane_counts)
    ok_product = report.a_count >= product_sum
    weight = (math.sqrt(report.n) * report.delta) ** report.alpha
    ok_mass = True
    worst_margin = math.inf
    for sel_data, row in zip(report.selections, report.per_plane_counts):
        for mass, count in zip(sel_data["masses"], row):
            required = mass / weight
            worst_margin = min(worst_margin, count - required)
            if count < required - 1e-9:
                ok_mass = False
    lower_denom = report.delta ** -(report.s + report.alpha * (report.m + 1)) * (
        report.lam ** (1 + report.psi * (report.m + 1))
    )
    details = {
        "product_sum": product_sum,
        "a_count": report.a_count,
        "mass_margin_min": worst_margin,
        "implied_constant": report.a_count / lower_denom if lower_denom > 0 else 0.0,
        "product_step_ok": ok_product,
        "mass_step_ok": ok_mass,
    }
    return ok_product and ok_mass, details


def verify_upper_chain(
    report: IncidenceReport, nets: dict | None = None
) -> tuple[bool, dict]:
    """Check the per-tuple upper-count machinery.

    (a) every nonempty tuple's projected-center simplex has volume above the
    perturbed witness bound d0^m/(2^(m+1) m!) / 2^(m+1) (the scale hypothesis
    delta <= (m/(2^(m+1) k)) * witness bound must hold); (b) every plane of a
    tuple lies within the tuple net's claimed radius; (c) the ball-volume
    packing count transfers through the net.
    """
    dims = report.dims
    m = report.m
    k = report.k
    d0 = float(report.params["d0"])
    delta = report.delta
    witness_bound = d0**m / (2 ** (m + 1) * math.factorial(m))
    scale_ok = delta <= (m / (2 ** (m + 1) * k)) * witness_bound + 1e-12
    planes = report.plane_codes()
    side = 2.0**-report.b_l_level

    min_tuple_volume = math.inf
    max_radius = 0.0
    packing_ok = True
    coverage_ok = True
    volume_ok = True
    ball_dim = dims.code_dim
    built_nets = {} if nets is None else nets

    for entry in report.tuples:
        cubes = [tuple(c) for c in entry["cubes"]]
        members = entry["planes"]
        centers = np.array([(np.array(c, dtype=float) + 0.5) * side for c in cubes])
        vol = simplex_volume(centers[:, :k])
        min_tuple_volume = min(min_tuple_volume, vol)
        if vol < witness_bound / 2 ** (m + 1) - 1e-12:
            volume_ok = False
        key = tuple(cubes)
        if key not in built_nets:
            basis = extend_with_basis(centers[:, :k])
            req = NetRequest(dims, m, delta, centers, tuple(basis))
            built_nets[key] = (build_epsilon_net(req), req)
        net, req = built_nets[key]
        verify_net(net, req)
        matrix = net.code_matrix()
        tuple_radius = 0.0
        for i in members:
            dist = float(np.min(np.max(np.abs(matrix - planes[i].vector()), axis=1)))
            tuple_radius = max(tuple_radius, dist)
            if dist > net.claimed_radius + 1e-9:
                coverage_ok = False
        max_radius = max(max_radius, tuple_radius)
        lhs = len(members) * code_ball_measure(delta / 3.0, dims)
        rhs = len(net) * code_ball_measure(tuple_radius + delta / 3.0, dims)
        if lhs > rhs * (1 + 1e-9):
            packing_ok = False

    ok = scale_ok and volume_ok and coverage_ok and packing_ok
    details = {
        "scale_hypothesis_ok": scale_ok,
        "tuple_volume_min": min_tuple_volume,
        "tuple_volume_threshold": witness_bound / 2 ** (m + 1),
        "volume_step_ok": volume_ok,
        "coverage_ok": coverage_ok,
        "covering_radius_max": max_radius,
        "packing_transfer_ok": packing_ok,
    }
    return ok, details


# -- orchestration -----------------------------------------------------------------


def required_d0(k: int, m: int, delta: float) -> float:
    """Smallest hull separation making the perturbation hypothesis hold at delta."""
    return (delta * 4 ** (m + 1) * k * math.factorial(m) / m) ** (1.0 / m)


def run_incidence(
    config: ExperimentConfig,
    planes: Sequence[PlaneCode] | None = None,
    b_l: CubeSet | None = None,
) -> IncidenceReport:
    """Generate (or accept) a plane family, select patches, count incidences.

    The greedy separation d0 is chosen as the smallest value satisfying the
    perturbation hypothesis at scale delta, so the upper-chain volume step is
    checkable; the derived beta is each plane's total induced mass.
    """
    dims = config.dims
    rng = np.random.default_rng(config.seed)
    if config.generator == "custom":
        if planes is None or b_l is None:
            raise ValueError("custom generator needs explicit planes and b_l")
    elif config.generator == "sharp_product":
        depth = config.depth if config.depth is not None else 3
        m_flat = 1
        _, planes = gen_sharp_product(
            dims,
            m_flat,
            depth,
            config.delta,
            config.l,
            base=2,
            digits=(0, 1),
            max_planes=config.max_planes,
            rng=rng,
        )
        b_l = rasterize_union(planes, config.l)
    else:  # sharp_flat
        depth = config.depth if config.depth is not None else config.l
        cube_set, planes = gen_sharp_flat(
            dims,
            config.alpha,
            depth,
            config.delta,
            base=2,
            digits=(0, 1),
            max_planes=config.max_planes,
            rng=rng,
        )
        b_l = snap_to_dyadic(cube_set)
        if b_l.level != config.l:
            raise ValueError(
                f"flat raster level {b_l.level} != l={config.l}; pick depth = l for base 2"
            )

    sep = maximal_separated_subset(planes, config.delta)
    if len(sep) != len(planes):
        raise ValueError("generated planes were not delta-separated")

    m = math.ceil(config.alpha)
    l2 = default_l2(dims.n, dims.k)
    d0 = required_d0(dims.k, m, config.delta)
    d = 2.0 * l2 * d0

    selections = []
    report_params = None
    for code in planes:
        mass_map = induced_mass_map(code, b_l, _cell_side_for(d0, dims.k, m), config.alpha)
        beta = mass_map.total()
        if d > beta:
            raise ValueError(
                f"scale too coarse: required d={d} exceeds a plane's total mass {beta}"
            )
        params = GreedyParams(dims.k, config.alpha, beta, d, l2)
        if report_params is None or beta < report_params.beta:
            report_params = params
        selections.append(greedy_select(mass_map, params))
    return build_incidence(config, planes, selections, b_l, report_params)


def _cell_side_for(d0: float, k: int, m: int) -> float:
    return d0**m / (2 ** (k + 1) * k * math.factorial(m))
