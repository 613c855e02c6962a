"""Discretized machinery for Furstenberg-type families of affine k-planes.

Plane codes and their metrics, dyadic cube sets and box-counting, separated
packings and finite nets, greedy mass concentration, and the incidence
double-counting experiment, with a CLI (`furstenberg`) on top.
"""

from .cubes import (
    CubeSet,
    DyadicCube,
    FrostmanSample,
    box_dimension_estimate,
    dyadic_counts,
    frostman_verify,
    load_cube_file,
    net_premeasure,
    product_set,
    rasterize_cantor,
    save_cube_file,
    scale_select,
    snap_to_dyadic,
)
from .experiment import (
    ExperimentConfig,
    IncidenceReport,
    bounds_table,
    build_incidence,
    dimension_bound,
    gen_sharp_flat,
    gen_sharp_product,
    induced_mass_map,
    load_report,
    rasterize_plane,
    rasterize_union,
    run_incidence,
    save_report,
    verify_lower_chain,
    verify_upper_chain,
)
from .greedy import (
    GreedyParams,
    GreedySelectionError,
    MassMap,
    Selection,
    default_kprime,
    default_l2,
    derive_params,
    greedy_select,
    load_mass_file,
    make_params,
    neighborhood_mass,
    save_mass_file,
    uniform_mass_map,
    witness_simplex,
)
from .nets import (
    NetFamily,
    NetRequest,
    build_epsilon_net,
    code_ball_measure,
    covering_constant,
    covering_radius_check,
    maximal_separated_subset,
    packing_lower_bound,
    sample_qualifying_plane,
    verify_net,
)
from .planes import (
    Dims,
    MetricEquivalenceReport,
    PlaneCode,
    code_from_intersections,
    in_horizontal_family,
    load_plane_file,
    metric_code,
    metric_equivalence_report,
    metric_natural,
    plane_box_intersects,
    plane_meets_box,
    point_on_plane,
    random_horizontal_code,
    save_plane_file,
)
from .simplex import (
    CounterexampleError,
    InterpolationSystem,
    PerturbationCertificate,
    Simplex,
    dist_to_affine_hull,
    extend_with_basis,
    perturbation_check,
    rigidity_bound,
    simplex_volume,
    solve_plane_through,
)

__version__ = "0.1.0"
