import numpy as np
import pytest

from furstenberg.cubes import FrostmanSample, frostman_verify
from furstenberg.nets import (
    NetRequest,
    build_epsilon_net,
    code_ball_measure,
    covering_constant,
    covering_radius_check,
    load_net,
    maximal_separated_subset,
    packing_lower_bound,
    sample_qualifying_plane,
    save_net,
    verify_net,
)
from furstenberg.planes import Dims, PlaneCode, metric_code, random_horizontal_code
from furstenberg.simplex import extend_with_basis

# cube centers (level-4 dyadic) with every net plane inside the horizontal family
CENTERS_32 = np.array([[3.5 / 16, 3.5 / 16, 8.5 / 16], [3.5 / 16, 11.5 / 16, 8.5 / 16]])


def request_32(delta: float) -> NetRequest:
    basis = extend_with_basis(CENTERS_32[:, :2])
    return NetRequest(Dims(3, 2), 1, delta, CENTERS_32, tuple(basis))


class TestMaximalSeparatedSubset:
    def test_single_code(self):
        code = PlaneCode(Dims(2, 1), [0.5], [[0.1]])
        assert maximal_separated_subset([code], 0.25) == [code]

    def test_identical_codes_collapse(self):
        code = PlaneCode(Dims(2, 1), [0.5], [[0.1]])
        assert len(maximal_separated_subset([code] * 7, 0.25)) == 1

    def test_half_step_grid_matches_exact_packing(self):
        delta = 0.125
        xs = np.arange(0, 1 + 1e-9, delta / 2)
        codes = [PlaneCode(Dims(2, 1), [x], [[0.0]]) for x in xs]
        subset = maximal_separated_subset(codes, delta)
        # exhaustive greedy oracle on the line
        kept = []
        for x in xs:
            if all(abs(x - y) >= delta for y in kept):
                kept.append(x)
        assert len(subset) == len(kept)

    def test_pairwise_separation_and_maximality(self):
        rng = np.random.default_rng(4)
        dims = Dims(3, 2)
        codes = [random_horizontal_code(dims, rng) for _ in range(200)]
        delta = 0.2
        subset = maximal_separated_subset(codes, delta)
        for i, a in enumerate(subset):
            for b in subset[i + 1 :]:
                assert metric_code(a, b) >= delta
        for code in codes:
            assert min(metric_code(code, b) for b in subset) < delta or any(
                code is b for b in subset
            )


class TestPackingLowerBound:
    def test_arithmetic(self):
        mu = FrostmanSample((), 1.0, 1.0)
        assert packing_lower_bound(mu, 1.0, 0.1) == pytest.approx(10.0)

    def test_zero_mass(self):
        mu = FrostmanSample((), 1.0, 1.0)
        assert packing_lower_bound(mu, 0.0, 0.1) == 0.0

    @pytest.mark.parametrize("per_axis,delta", [(8, 1 / 8), (8, 1 / 4), (16, 1 / 8)])
    def test_grid_measure_bound_not_violated(self, per_axis, delta):
        dims = Dims(2, 1)
        s = float(dims.code_dim)
        step = 1.0 / per_axis
        codes = [
            PlaneCode(dims, [a * step], [[b * step]])
            for a in range(per_axis)
            for b in range(per_axis)
        ]
        weights = tuple((c, 1.0 / len(codes)) for c in codes)
        radii = [2.0**-j for j in range(0, int(np.log2(per_axis)) + 1)]
        constant = frostman_verify(FrostmanSample(weights, s, 1.0), radii, codes)
        mu = FrostmanSample(weights, s, constant)
        measured = len(maximal_separated_subset(codes, delta))
        assert measured >= packing_lower_bound(mu, 1.0, delta)

    def test_random_subfamilies(self):
        rng = np.random.default_rng(12)
        dims = Dims(2, 1)
        s = float(dims.code_dim)
        step = 1.0 / 8
        all_codes = [
            PlaneCode(dims, [a * step], [[b * step]]) for a in range(8) for b in range(8)
        ]
        for _ in range(100):
            size = int(rng.integers(10, 64))
            chosen = [all_codes[i] for i in rng.choice(64, size=size, replace=False)]
            weights = tuple((c, 1.0 / size) for c in chosen)
            radii = [2.0**-j for j in range(0, 4)]
            constant = frostman_verify(FrostmanSample(weights, s, 1.0), radii, chosen)
            mu = FrostmanSample(weights, s, constant)
            delta = float(rng.choice([1 / 8, 1 / 4]))
            measured = len(maximal_separated_subset(chosen, delta))
            assert measured >= packing_lower_bound(mu, 1.0, delta) - 1e-9


class TestBuildEpsilonNet:
    def test_cardinality_single_free_direction(self):
        req = request_32(0.25)
        net = build_epsilon_net(req)
        assert len(net) == 5  # (floor(1/delta)+1)^((n-k)(k-m)) = 5^1

    def test_full_anchor_single_plane(self):
        dims = Dims(3, 2)
        centers = np.array(
            [[3.5 / 16, 3.5 / 16, 8.5 / 16], [11.5 / 16, 3.5 / 16, 8.5 / 16], [3.5 / 16, 11.5 / 16, 4.5 / 16]]
        )
        req = NetRequest(dims, 2, 0.125, centers, ())
        assert len(build_epsilon_net(req)) == 1

    def test_line_case_single_plane(self):
        dims = Dims(2, 1)
        centers = np.array([[3.5 / 16, 8.5 / 16], [11.5 / 16, 8.5 / 16]])
        req = NetRequest(dims, 1, 0.125, centers, ())
        assert len(build_epsilon_net(req)) == 1

    @pytest.mark.parametrize("l", [4, 5, 6])
    def test_net_stays_inside_family_and_cubes(self, l):
        req = request_32(2.0**-l)
        net = build_epsilon_net(req)
        verify_net(net, req)  # cardinality, horizontal family, cube hits

    def test_degenerate_centers_rejected(self):
        dims = Dims(3, 2)
        centers = np.array([[0.25, 0.25, 0.5], [0.25, 0.25, 0.75]])
        with pytest.raises(ValueError):
            NetRequest(dims, 1, 0.125, centers, (1,))


class TestCoveringRadius:
    def test_net_element_has_zero_distance(self):
        req = request_32(1 / 32)
        net = build_epsilon_net(req)
        assert net.min_distance(net.codes[3]) == 0.0

    def test_radius_bounded_by_assembled_constant(self):
        delta = 2.0**-5
        req = request_32(delta)
        net = build_epsilon_net(req)
        claimed = covering_constant(req.dims, req.m) * delta / req.simplex_volume()
        assert net.claimed_radius == pytest.approx(claimed)
        radius = covering_radius_check(net, req, 1000, np.random.default_rng(3))
        assert radius <= claimed

    def test_halving_delta_roughly_halves_radius(self):
        radii = {}
        for l in (5, 6):
            req = request_32(2.0**-l)
            net = build_epsilon_net(req)
            radii[l] = covering_radius_check(net, req, 1000, np.random.default_rng(5))
        assert 0.4 * radii[5] <= radii[6] <= 0.6 * radii[5]

    def test_jobs_split_is_deterministic(self):
        req = request_32(1 / 16)
        net = build_epsilon_net(req)
        a = covering_radius_check(net, req, 60, np.random.default_rng(2), jobs=2)
        b = covering_radius_check(net, req, 60, np.random.default_rng(2), jobs=2)
        assert a == b

    def test_sampler_rejects_incompatible_cubes(self):
        dims = Dims(2, 1)
        centers = np.array([[0.05, 0.05], [0.95, 0.9]])
        req = NetRequest(dims, 1, 1 / 64, centers, ())
        # slope between the cubes is near 1 but heights force codes outside [0,1]
        code = sample_qualifying_plane(req, np.random.default_rng(0))
        assert code is not None  # this pair is actually compatible

    def test_incompatible_cubes_raise(self):
        dims = Dims(2, 1)
        # requires slope > 1 between neighbouring columns: impossible in the family
        centers = np.array([[0.5 / 64, 0.5 / 64], [1.5 / 64, 63.5 / 64]])
        req = NetRequest(dims, 1, 1 / 64, centers, ())
        with pytest.raises(RuntimeError):
            sample_qualifying_plane(req, np.random.default_rng(0), max_tries=300)


class TestCodeBallMeasure:
    def test_half_radius_line(self):
        assert code_ball_measure(0.5, Dims(2, 1)) == pytest.approx(1.0)

    def test_exponent_four(self):
        assert code_ball_measure(0.5, Dims(3, 1)) == pytest.approx(1.0)

    def test_exponent_three(self):
        assert code_ball_measure(0.25, Dims(3, 2)) == pytest.approx(0.125)


class TestDisjointnessTransfer:
    def test_third_radius_balls_disjoint(self):
        rng = np.random.default_rng(6)
        dims = Dims(3, 2)
        codes = [random_horizontal_code(dims, rng) for _ in range(300)]
        delta = 0.15
        packing = maximal_separated_subset(codes, delta)
        vecs = [c.vector() for c in packing]
        for i in range(len(vecs)):
            for j in range(i + 1, len(vecs)):
                # balls of radius delta/3 around a delta-separated family
                assert np.max(np.abs(vecs[i] - vecs[j])) > 2 * delta / 3

    def test_volume_comparison_skeleton(self):
        delta = 2.0**-5
        req = request_32(delta)
        net = build_epsilon_net(req)
        rng = np.random.default_rng(9)
        qualifying = [sample_qualifying_plane(req, rng) for _ in range(200)]
        packing = maximal_separated_subset(qualifying, delta)
        radius = max(net.min_distance(c) for c in packing)
        lhs = len(packing) * code_ball_measure(delta / 3, req.dims)
        rhs = len(net) * code_ball_measure(radius + delta / 3, req.dims)
        assert lhs <= rhs


def test_net_file_round_trip(tmp_path):
    req = request_32(0.25)
    net = build_epsilon_net(req)
    save_net(tmp_path / "net.planes.txt", tmp_path / "net.json", net, req)
    loaded, meta = load_net(tmp_path / "net.planes.txt", tmp_path / "net.json")
    assert len(loaded) == len(net)
    assert meta["cardinality"] == 5
    assert meta["basis_indices"] == list(req.basis_indices)
    assert loaded.claimed_radius == pytest.approx(net.claimed_radius)
