import numpy as np
import pytest

from molrdf.errors import InputError
from molrdf.geometry import (
    CellTensor,
    cell_volume,
    min_image_cutoff,
    min_image_displacement,
    nint,
    periodic_mask,
    to_real,
    to_reduced,
    wrap_point,
)

TRICLINIC = np.array(
    [
        [10.0, 0.0, 0.0],
        [1.5, 9.0, 0.0],
        [1.0, 1.2, 8.0],
    ]
)


def adjugate_inverse(m):
    """Independent 3x3 inverse via the cofactor expansion."""
    cof = np.empty((3, 3))
    for i in range(3):
        for j in range(3):
            minor = np.delete(np.delete(m, i, axis=0), j, axis=1)
            cof[i, j] = (-1) ** (i + j) * (
                minor[0, 0] * minor[1, 1] - minor[0, 1] * minor[1, 0]
            )
    det = m[0] @ np.cross(m[1], m[2])
    return cof.T / det


class TestNint:
    def test_half_rounds_away_from_zero(self):
        assert nint(0.5) == 1.0
        assert nint(-0.5) == -1.0
        assert nint(2.5) == 3.0
        assert nint(-2.5) == -3.0

    def test_near_half(self):
        assert nint(0.49) == 0.0
        assert nint(-0.49) == 0.0
        assert nint(1.51) == 2.0

    def test_vectorized(self):
        np.testing.assert_array_equal(
            nint([-1.5, -0.2, 0.0, 0.2, 1.5]), [-2.0, 0.0, 0.0, 0.0, 2.0]
        )


class TestCellTensor:
    def test_cubic_factory(self):
        cell = CellTensor.cubic(12.0)
        assert cell.imcon == 1
        np.testing.assert_array_equal(cell.matrix, 12.0 * np.eye(3))

    def test_cubic_requires_equal_edges(self):
        with pytest.raises(InputError):
            CellTensor(np.diag([10.0, 10.0, 11.0]), imcon=1)

    def test_orthorhombic_rejects_off_diagonal(self):
        bad = np.diag([10.0, 11.0, 12.0])
        bad[0, 1] = 0.5
        with pytest.raises(InputError):
            CellTensor(bad, imcon=2)

    def test_singular_rejected(self):
        m = np.array([[1.0, 0, 0], [2.0, 0, 0], [0, 0, 1.0]])
        with pytest.raises(InputError, match="singular"):
            CellTensor(m, imcon=3)

    def test_unsupported_imcon(self):
        with pytest.raises(InputError, match="imcon"):
            CellTensor(np.eye(3), imcon=5)

    def test_periodic_mask_codes(self):
        np.testing.assert_array_equal(periodic_mask(0), [False, False, False])
        np.testing.assert_array_equal(periodic_mask(1), [True, True, True])
        np.testing.assert_array_equal(periodic_mask(6), [True, True, False])
        with pytest.raises(InputError):
            periodic_mask(4)


class TestReducedCoordinates:
    def test_round_trip_against_cofactor_inverse(self):
        cell = CellTensor(TRICLINIC, imcon=3)
        rng = np.random.default_rng(7)
        points = rng.uniform(-30, 30, size=(1000, 3))
        s = to_reduced(points, cell)
        np.testing.assert_allclose(s, points @ adjugate_inverse(TRICLINIC), atol=1e-12)
        np.testing.assert_allclose(to_real(s, cell), points, atol=1e-12 * 30)

    def test_lattice_vectors_reduce_to_unit_rows(self):
        cell = CellTensor(TRICLINIC, imcon=3)
        np.testing.assert_allclose(to_reduced(TRICLINIC, cell), np.eye(3), atol=1e-14)

    def test_no_inverse_without_periodicity(self):
        cell = CellTensor(np.zeros((3, 3)), imcon=0)
        with pytest.raises(InputError):
            to_reduced(np.zeros(3), cell)


class TestVolume:
    def test_matches_scalar_triple_product(self):
        cell = CellTensor(TRICLINIC, imcon=3)
        expected = abs(TRICLINIC[0] @ np.cross(TRICLINIC[1], TRICLINIC[2]))
        assert cell_volume(cell) == pytest.approx(expected, rel=1e-14)

    def test_cubic(self):
        assert cell_volume(CellTensor.cubic(30.0)) == pytest.approx(27000.0, rel=1e-14)

    def test_imcon_zero_is_zero(self):
        assert cell_volume(CellTensor(np.zeros((3, 3)), 0)) == 0.0


class TestMinImage:
    def test_reduced_components_fold_to_half(self):
        d = min_image_displacement(np.zeros(3), np.array([0.9, -0.6, 0.4]), imcon=1)
        np.testing.assert_allclose(d, [-0.1, 0.4, 0.4], atol=1e-15)

    def test_slab_leaves_third_direction_alone(self):
        d = min_image_displacement(np.zeros(3), np.array([0.9, 0.9, 0.9]), imcon=6)
        np.testing.assert_allclose(d, [-0.1, -0.1, 0.9], atol=1e-15)

    def test_no_periodicity_is_plain_difference(self):
        a, b = np.array([0.1, 0.2, 0.3]), np.array([5.0, -4.0, 3.0])
        np.testing.assert_array_equal(min_image_displacement(a, b, 0), b - a)

    def test_components_bounded_by_half(self):
        rng = np.random.default_rng(11)
        d = min_image_displacement(rng.uniform(-5, 5, (500, 3)), rng.uniform(-5, 5, (500, 3)), 1)
        assert np.all(np.abs(d) <= 0.5 + 1e-15)


class TestWrapPoint:
    def test_known_cubic_values(self):
        cell = CellTensor.cubic(10.0)
        np.testing.assert_allclose(wrap_point(np.array([6.0, -6.0, 4.9]), cell), [-4.0, 4.0, 4.9])

    def test_cell_midpoint_goes_to_corner(self):
        # Reduced 0.5 lies on the upper boundary and folds to the lower one.
        cell = CellTensor.cubic(10.0)
        np.testing.assert_allclose(wrap_point(np.full(3, 5.0), cell), np.full(3, -5.0))

    def test_idempotent_bitwise(self):
        cell = CellTensor(TRICLINIC, imcon=3)
        rng = np.random.default_rng(3)
        pts = rng.uniform(-40, 40, (300, 3))
        once = wrap_point(pts, cell)
        np.testing.assert_array_equal(wrap_point(once, cell), once)

    def test_invariant_under_lattice_translation(self):
        cell = CellTensor(TRICLINIC, imcon=3)
        rng = np.random.default_rng(5)
        pts = rng.uniform(-10, 10, (200, 3))
        shifts = rng.integers(-3, 4, (200, 3)) @ TRICLINIC
        np.testing.assert_allclose(wrap_point(pts + shifts, cell), wrap_point(pts, cell), atol=1e-10)

    def test_wrapped_reduced_range(self):
        cell = CellTensor(TRICLINIC, imcon=3)
        rng = np.random.default_rng(9)
        s = to_reduced(wrap_point(rng.uniform(-50, 50, (400, 3)), cell), cell)
        assert np.all(s >= -0.5 - 1e-12) and np.all(s < 0.5 + 1e-12)

    def test_slab_wraps_two_directions(self):
        cell = CellTensor(np.diag([10.0, 10.0, 40.0]), imcon=6)
        wrapped = wrap_point(np.array([11.0, -7.0, 35.0]), cell)
        np.testing.assert_allclose(wrapped, [1.0, 3.0, 35.0])

    def test_imcon_zero_copies(self):
        cell = CellTensor(np.zeros((3, 3)), 0)
        p = np.array([100.0, -200.0, 3.0])
        out = wrap_point(p, cell)
        np.testing.assert_array_equal(out, p)
        assert out is not p


class TestMinImageCutoff:
    def test_cubic_half_edge(self):
        assert min_image_cutoff(CellTensor.cubic(30.0)) == pytest.approx(15.0)

    def test_orthorhombic_shortest_half_edge(self):
        cell = CellTensor.orthorhombic(10.0, 24.0, 18.0)
        assert min_image_cutoff(cell) == pytest.approx(5.0)

    def test_triclinic_uses_perpendicular_widths(self):
        cell = CellTensor(TRICLINIC, imcon=3)
        m = TRICLINIC
        widths = []
        vol = abs(m[0] @ np.cross(m[1], m[2]))
        for i in range(3):
            area = np.linalg.norm(np.cross(m[(i + 1) % 3], m[(i + 2) % 3]))
            widths.append(vol / area)
        assert min_image_cutoff(cell) == pytest.approx(min(widths) / 2, rel=1e-12)

    def test_unbounded_without_periodicity(self):
        assert min_image_cutoff(CellTensor(np.zeros((3, 3)), 0)) == np.inf
