"""Command-line interface.

Subcommands: gen (sharp-example cube set + plane family), dim (box-dimension
fit of a cube-set file), net (build an eps-net and measure its covering
radius), greedy (cell selection from a mass-map file), incidence (full
experiment report), bounds (comparison table CSV), check (verify a report).

Exit codes: 0 success, 1 check failure, 2 input error.  Verbosity via the
FURSTENBERG_LOG environment variable (DEBUG, INFO, ...).
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys

import numpy as np

from .cubes import (
    CubeSet,
    box_dimension_estimate,
    dyadic_counts,
    load_cube_file,
    save_cube_file,
    snap_to_dyadic,
)
from .experiment import (
    ExperimentConfig,
    bounds_table,
    gen_sharp_flat,
    gen_sharp_product,
    load_report,
    run_incidence,
    save_report,
    verify_lower_chain,
    verify_upper_chain,
)
from .greedy import (
    default_kprime,
    default_l2,
    derive_params,
    greedy_select,
    load_mass_file,
    make_params,
    witness_simplex,
)
from .nets import NetRequest, build_epsilon_net, covering_radius_check, save_net
from .planes import Dims, load_plane_file, save_plane_file
from .simplex import extend_with_basis

log = logging.getLogger("furstenberg")


def _parse_fit_range(text: str) -> tuple[float, float]:
    lo, _, hi = text.partition(":")
    return float(lo), float(hi)


def _parse_centers(text: str) -> np.ndarray:
    return np.array(
        [[float(x) for x in point.split(",")] for point in text.split(";")], dtype=float
    )


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="furstenberg")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a sharp-example cube set and plane family")
    kind = gen.add_mutually_exclusive_group(required=True)
    kind.add_argument("--flat", action="store_true", help="set inside a low-dimensional flat")
    kind.add_argument("--product", action="store_true", help="thick-flat product set")
    gen.add_argument("--n", type=int, required=True)
    gen.add_argument("--k", type=int, required=True)
    gen.add_argument("--alpha", type=float, default=1.0)
    gen.add_argument("--l", type=int, required=True, help="dyadic scale exponent")
    gen.add_argument("--depth", type=int, default=None)
    gen.add_argument("--base", type=int, default=None)
    gen.add_argument("--digits", type=str, default=None, help="comma-separated digit set")
    gen.add_argument("--m-flat", type=int, default=1, dest="m_flat")
    gen.add_argument("--delta", type=float, default=None, help="family grid step (default 2^-l)")
    gen.add_argument("--max-planes", type=int, default=None)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", type=str, required=True, help="output path prefix")

    dim = sub.add_parser("dim", help="box-dimension estimate from a cube-set file")
    dim.add_argument("--input", type=str, required=True)
    dim.add_argument("--fit-range", type=str, default=None, help="lmin:lmax")

    net = sub.add_parser("net", help="build an eps-net and check its covering radius")
    net.add_argument("--n", type=int, required=True)
    net.add_argument("--k", type=int, required=True)
    net.add_argument("--m", type=int, required=True)
    net.add_argument("--delta", type=float, required=True)
    net.add_argument("--centers", type=str, required=True, help="points as 'x,y,..;x,y,..'")
    net.add_argument("--trials", type=int, default=200)
    net.add_argument("--seed", type=int, default=0)
    net.add_argument("--jobs", type=int, default=1)
    net.add_argument("--out", type=str, default=None, help="prefix for planes + sidecar files")

    greedy = sub.add_parser("greedy", help="greedy cell selection from a mass-map file")
    greedy.add_argument("--alpha", type=float, required=True)
    greedy.add_argument("--beta", type=float, default=None, help="default: total map mass")
    greedy.add_argument("--mass-file", type=str, required=True)
    greedy.add_argument("--l2", type=float, default=None)
    greedy.add_argument("--n", type=int, default=None, help="ambient dimension for the default L2")
    greedy.add_argument("--d", type=float, default=None, help="explicit neighborhood scale")
    greedy.add_argument("--out", type=str, default=None)

    inc = sub.add_parser("incidence", help="run a full incidence experiment")
    inc.add_argument("--n", type=int, required=True)
    inc.add_argument("--k", type=int, required=True)
    inc.add_argument("--alpha", type=float, required=True)
    inc.add_argument("--s", type=float, required=True)
    inc.add_argument("--l", type=int, required=True)
    inc.add_argument("--lambda", type=float, default=None, dest="lam")
    inc.add_argument("--generator", choices=["sharp_flat", "sharp_product", "custom"],
                     default="sharp_product")
    inc.add_argument("--planes", type=str, default=None, help="plane file (custom generator)")
    inc.add_argument("--cubes", type=str, default=None, help="cube-set file (custom generator)")
    inc.add_argument("--depth", type=int, default=None)
    inc.add_argument("--max-planes", type=int, default=None)
    inc.add_argument("--seed", type=int, default=0)
    inc.add_argument("--jobs", type=int, default=1)
    inc.add_argument("--out", type=str, required=True)

    bounds = sub.add_parser("bounds", help="bound-comparison table CSV")
    bounds.add_argument("--k", type=int, required=True)
    bounds.add_argument("--n", type=int, required=True)
    bounds.add_argument("--step", type=float, default=0.5)
    bounds.add_argument("--out", type=str, default=None)

    check = sub.add_parser("check", help="verify both counting chains of a report")
    check.add_argument("--report", type=str, required=True)
    return parser


def _cmd_gen(args) -> int:
    dims = Dims(args.n, args.k)
    delta = args.delta if args.delta is not None else 2.0**-args.l
    digits = tuple(int(d) for d in args.digits.split(",")) if args.digits else None
    rng = np.random.default_rng(args.seed)
    if args.flat:
        depth = args.depth if args.depth is not None else args.l
        base = args.base if args.base is not None else (2 if args.alpha == math.ceil(args.alpha) else None)
        cube_set, codes = gen_sharp_flat(
            dims, args.alpha, depth, delta, base=base,
            digits=digits if digits else ((0, 1) if base == 2 else None),
            max_planes=args.max_planes, rng=rng,
        )
    else:
        depth = args.depth if args.depth is not None else 3
        base = args.base if args.base is not None else 3
        cube_set, codes = gen_sharp_product(
            dims, args.m_flat, depth, delta, args.l, base=base,
            digits=digits if digits else ((0, 2) if base == 3 else tuple(range(base))),
            max_planes=args.max_planes, rng=rng,
        )
    dyadic = snap_to_dyadic(cube_set)
    save_cube_file(f"{args.out}.cubes.txt", dyadic)
    save_plane_file(f"{args.out}.planes.txt", codes)
    print(json.dumps({
        "cubes": f"{args.out}.cubes.txt",
        "planes": f"{args.out}.planes.txt",
        "cube_count": len(dyadic),
        "cube_level": dyadic.level,
        "plane_count": len(codes),
    }, sort_keys=True))
    return 0


def _cmd_dim(args) -> int:
    cs = load_cube_file(args.input)
    counts = dyadic_counts(cs, range(0, cs.level + 1))
    fit_range = _parse_fit_range(args.fit_range) if args.fit_range else None
    est = box_dimension_estimate(counts, fit_range)
    print(f"{est:.6f}")
    return 0


def _cmd_net(args) -> int:
    dims = Dims(args.n, args.k)
    centers = _parse_centers(args.centers)
    basis = extend_with_basis(centers[:, : args.k]) if args.m < args.k else []
    req = NetRequest(dims, args.m, args.delta, centers, tuple(basis))
    net = build_epsilon_net(req)
    radius = covering_radius_check(
        net, req, args.trials, np.random.default_rng(args.seed), jobs=args.jobs
    )
    if args.out:
        save_net(f"{args.out}.planes.txt", f"{args.out}.json", net, req)
    print(json.dumps({
        "delta": net.grid_step,
        "m": args.m,
        "centers": centers.tolist(),
        "basis_indices": list(basis),
        "claimed_radius": net.claimed_radius,
        "cardinality": len(net),
        "empirical_radius": radius,
    }, sort_keys=True))
    return 0


def _cmd_greedy(args) -> int:
    mass_map = load_mass_file(args.mass_file)
    beta = args.beta if args.beta is not None else mass_map.total()
    l2 = args.l2 if args.l2 is not None else default_l2(args.n or mass_map.k + 1, mass_map.k)
    if args.d is not None:
        params = make_params(mass_map.k, args.alpha, beta, l2, d=args.d)
    else:
        params = derive_params(mass_map.k, args.alpha, beta, l2,
                               default_kprime(mass_map.k, args.alpha))
    selection = greedy_select(mass_map, params)
    payload = selection.to_dict()
    payload["witness_volume"] = float(witness_simplex(selection, params))
    text = json.dumps(payload, indent=2, sort_keys=True)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    print(text)
    return 0


def _cmd_incidence(args) -> int:
    dims = Dims(args.n, args.k)
    config = ExperimentConfig(
        dims, alpha=args.alpha, s=args.s, l=args.l, lam=args.lam,
        generator=args.generator, seed=args.seed, depth=args.depth,
        max_planes=args.max_planes,
    )
    planes = load_plane_file(args.planes) if args.planes else None
    b_l = load_cube_file(args.cubes) if args.cubes else None
    report = run_incidence(config, planes=planes, b_l=b_l)
    save_report(args.out, report)
    print(json.dumps({
        "report": args.out,
        "m_count": report.M,
        "j_count": report.j_count,
        "a_count": report.a_count,
        "per_tuple_max": report.per_tuple_max,
    }, sort_keys=True))
    return 0


def _cmd_bounds(args) -> int:
    top = (args.k + 1) * (args.n - args.k)
    steps = int(round(top / args.step))
    grid = [i * args.step for i in range(steps + 1)]
    rows = bounds_table(args.k, args.n, grid)
    lines = ["s,f,g,h"] + [f"{s:.6f},{f:.6f},{g:.6f},{h:.6f}" for (s, f, g, h) in rows]
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_check(args) -> int:
    report = load_report(args.report)
    ok_lower, lower = verify_lower_chain(report)
    ok_upper, upper = verify_upper_chain(report)
    print(json.dumps({
        "lower_chain_ok": ok_lower,
        "lower": lower,
        "upper_chain_ok": ok_upper,
        "upper": upper,
    }, sort_keys=True, default=float))
    return 0 if (ok_lower and ok_upper) else 1


def main(argv: list[str] | None = None) -> int:
    level = os.environ.get("FURSTENBERG_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING))
    parser = _build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "gen": _cmd_gen,
        "dim": _cmd_dim,
        "net": _cmd_net,
        "greedy": _cmd_greedy,
        "incidence": _cmd_incidence,
        "bounds": _cmd_bounds,
        "check": _cmd_check,
    }
    try:
        return handlers[args.command](args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
