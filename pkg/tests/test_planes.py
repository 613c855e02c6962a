import numpy as np
import pytest

from furstenberg.cubes import DyadicCube
from furstenberg.planes import (
    Dims,
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

# calibration oracle output (400k-pair sweep per dims); tests allow 1.05x
FROZEN_CSTAR = {
    (2, 1): (2.414, 1.673),
    (3, 1): (3.099, 1.480),
    (3, 2): (3.000, 1.789),
}


def test_dims_validation():
    Dims(2, 1)
    with pytest.raises(ValueError):
        Dims(2, 2)
    with pytest.raises(ValueError):
        Dims(1, 1)


class TestPointOnPlane:
    def test_at_origin_returns_base_height(self):
        code = PlaneCode(Dims(2, 1), [0.5], [[0.2]])
        assert np.allclose(point_on_plane(code, [0]), [0, 0.5])

    def test_at_unit_step(self):
        code = PlaneCode(Dims(2, 1), [0.5], [[0.2]])
        assert np.allclose(point_on_plane(code, [1]), [1, 0.7])

    def test_two_dim_plane(self):
        code = PlaneCode(Dims(3, 2), [0.1], [[0.2], [0.3]])
        assert np.allclose(point_on_plane(code, [1, 1]), [1, 1, 0.6])

    def test_dimension_mismatch(self):
        code = PlaneCode(Dims(3, 2), [0.1], [[0.2], [0.3]])
        with pytest.raises(ValueError):
            point_on_plane(code, [1])


class TestCodeFromIntersections:
    def test_line_in_plane(self):
        code = code_from_intersections(Dims(2, 1), [[0, 0.3], [1, 0.8]])
        assert np.allclose(code.a0, [0.3])
        assert np.allclose(code.b, [[0.5]])

    def test_diagonal_line_in_space(self):
        code = code_from_intersections(Dims(3, 1), [[0, 0, 0], [1, 1, 1]])
        assert np.allclose(code.a0, [0, 0])
        assert np.allclose(code.b, [[1, 1]])

    def test_two_plane(self):
        code = code_from_intersections(
            Dims(3, 2), [[0, 0, 0.2], [1, 0, 0.5], [0, 1, 0.9]]
        )
        assert np.allclose(code.a0, [0.2])
        assert np.allclose(code.b, [[0.3], [0.7]])

    def test_malformed_horizontal_part(self):
        with pytest.raises(ValueError):
            code_from_intersections(Dims(2, 1), [[0.1, 0.3], [1, 0.8]])

    def test_round_trip(self):
        rng = np.random.default_rng(3)
        for dims in [Dims(2, 1), Dims(3, 2), Dims(4, 2)]:
            for _ in range(50):
                code = random_horizontal_code(dims, rng)
                anchors = np.vstack([np.zeros(dims.k), np.eye(dims.k)])
                points = [point_on_plane(code, t) for t in anchors]
                back = code_from_intersections(dims, points)
                assert np.max(np.abs(back.vector() - code.vector())) < 1e-12


class TestHorizontalFamily:
    def test_inside(self):
        assert in_horizontal_family(PlaneCode(Dims(2, 1), [0.5], [[0.2]]))

    def test_slope_leaves_box(self):
        assert not in_horizontal_family(PlaneCode(Dims(2, 1), [0.9], [[0.5]]))

    def test_negative_height(self):
        assert not in_horizontal_family(PlaneCode(Dims(2, 1), [-0.1], [[0.2]]))


class TestMetricCode:
    def test_identical(self):
        p = PlaneCode(Dims(2, 1), [0.2], [[0.5]])
        assert metric_code(p, p) == 0.0

    def test_offset_only(self):
        p = PlaneCode(Dims(4, 2), [0.2, 0.3], [[0, 0], [0, 0]])
        q = PlaneCode(Dims(4, 2), [0.3, 0.25], [[0, 0], [0, 0]])
        assert metric_code(p, q) == pytest.approx(0.1)

    def test_max_over_coordinates(self):
        p = PlaneCode(Dims(2, 1), [0.2], [[0.5]])
        q = PlaneCode(Dims(2, 1), [0.3], [[0.1]])
        assert metric_code(p, q) == pytest.approx(0.4)

    def test_metric_axioms_on_random_triples(self):
        rng = np.random.default_rng(11)
        dims = Dims(3, 2)
        for _ in range(10_000):
            p, q, r = (random_horizontal_code(dims, rng) for _ in range(3))
            dpq, dqp = metric_code(p, q), metric_code(q, p)
            assert dpq == dqp
            assert metric_code(p, r) <= dpq + metric_code(q, r) + 1e-15


class TestMetricNatural:
    def test_identical_planes(self):
        p = PlaneCode(Dims(3, 2), [0.4], [[0.1], [0.2]])
        assert metric_natural(p, p) == 0.0

    def test_parallel_offset(self):
        # same direction space, base points 0.2 apart orthogonally
        p = PlaneCode(Dims(2, 1), [0.3], [[0.0]])
        q = PlaneCode(Dims(2, 1), [0.5], [[0.0]])
        assert metric_natural(p, q) == pytest.approx(0.2, abs=1e-12)

    def test_crossing_lines_against_angular_grid(self):
        p = PlaneCode(Dims(2, 1), [0.0], [[0.0]])
        q = PlaneCode(Dims(2, 1), [0.0], [[1.0]])

        def projector(direction):
            d = np.asarray(direction) / np.linalg.norm(direction)
            return np.outer(d, d)

        pi_p, pi_q = projector([1, 0]), projector([1, 1])
        thetas = np.linspace(0, 2 * np.pi, 20_000)
        circle = np.stack([np.cos(thetas), np.sin(thetas)], axis=1)
        oracle = np.max(np.linalg.norm(circle @ (pi_p - pi_q).T, axis=1))
        assert metric_natural(p, q) == pytest.approx(oracle, abs=1e-4)


class TestPlaneBoxIntersects:
    def test_unit_cube(self):
        line = PlaneCode(Dims(2, 1), [0.5], [[0.0]])
        assert plane_box_intersects(line, DyadicCube(0, (0, 0)))

    def test_boundary_touch_counts(self):
        line = PlaneCode(Dims(2, 1), [0.5], [[0.0]])
        assert plane_box_intersects(line, DyadicCube(1, (0, 0)))

    def test_miss(self):
        line = PlaneCode(Dims(2, 1), [0.5], [[0.0]])
        assert not plane_meets_box(line, [0, 0], [0.5, 0.25])

    def test_shared_face_counts_for_both(self):
        line = PlaneCode(Dims(2, 1), [0.5], [[0.0]])
        assert plane_box_intersects(line, DyadicCube(1, (0, 0)))
        assert plane_box_intersects(line, DyadicCube(1, (0, 1)))

    @pytest.mark.parametrize("dims", [Dims(2, 1), Dims(3, 2), Dims(3, 1)])
    def test_no_false_negatives_against_monte_carlo(self, dims):
        rng = np.random.default_rng(5)
        for _ in range(40):
            code = random_horizontal_code(dims, rng)
            level = int(rng.integers(1, 4))
            index = tuple(int(i) for i in rng.integers(0, 2**level, size=dims.n))
            cube = DyadicCube(level, index)
            lo, hi = cube.bounds()
            ts = rng.uniform(lo[: dims.k], hi[: dims.k], size=(10_000, dims.k))
            heights = ts @ code.b + code.a0
            oracle_hit = bool(
                np.any(
                    np.all((heights >= lo[dims.k:]) & (heights <= hi[dims.k:]), axis=1)
                )
            )
            if oracle_hit:
                assert plane_box_intersects(code, cube)


class TestMetricEquivalence:
    @pytest.mark.parametrize("n,k", [(2, 1), (3, 1)])
    def test_frozen_constants_hold_on_fresh_pairs(self, n, k):
        c_md, c_dm = FROZEN_CSTAR[(n, k)]
        rep = metric_equivalence_report(Dims(n, k), 10_000, np.random.default_rng(7))
        assert rep.max_ratio_m_over_d <= 1.05 * c_md
        assert rep.max_ratio_d_over_m <= 1.05 * c_dm


def test_plane_file_round_trip(tmp_path):
    rng = np.random.default_rng(9)
    codes = [random_horizontal_code(Dims(3, 2), rng) for _ in range(5)]
    path = tmp_path / "planes.txt"
    save_plane_file(path, codes)
    loaded = load_plane_file(path)
    assert len(loaded) == 5
    for a, b in zip(codes, loaded):
        assert np.array_equal(a.vector(), b.vector())
        assert a.dims == b.dims
