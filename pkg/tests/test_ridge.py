import unittest

import numpy as np
from numpy.testing import assert_allclose, assert_array_equal

from src.errors import DegenerateGeometryError, RejectedCylinderError
from src.geom.primitives import Cylinder, random_rotation
from src.mesh.types import SurfaceMesh
from src.ridge.cylinder_ridge import LENGTH_REJECTION, cylinder_plane, cylinder_ridge, ridge, select_cylinder_vertices
from tests.helpers import ridge_cylinder, ridge_head, unit_tet


class CylinderPlaneTest(unittest.TestCase):
    def test_worked_example(self):
        plane = cylinder_plane(ridge_cylinder(), ridge_head())
        assert_array_equal(plane.point, [0, 0, 0])
        assert_array_equal(plane.normal, [0, 0, 1])

    def test_translation_moves_point_not_normal(self):
        t = np.array([0.3, -2.0, 5.0])
        head, cylinder = ridge_head(), ridge_cylinder()
        moved = cylinder_plane(cylinder.transformed(np.eye(3), t), head.transformed(np.eye(3), t))
        assert_allclose(moved.point, t, atol=1e-12)
        assert_allclose(moved.normal, [0, 0, 1], atol=1e-12)

    def test_midpoint_at_head_mean_is_degenerate(self):
        head = SurfaceMesh([[-1, 0, 0], [1, 0, 0]], [])
        with self.assertRaises(DegenerateGeometryError):
            cylinder_plane(ridge_cylinder(), head)


class RidgeTest(unittest.TestCase):
    def test_worked_example_targets(self):
        targets = ridge([5, 7, 9], ridge_head(), ridge_cylinder())
        self.assertEqual([i for i, _ in targets.entries], [5, 7, 9])
        assert_allclose(targets.targets, [[0, 0, 2], [-1, 0, 0], [0.5, 0, 1]], rtol=0, atol=1e-12)
        assert_allclose(targets.kappa_values, [1.0, 0.0, 0.5], rtol=0, atol=1e-12)

    def test_input_order_is_kept(self):
        targets = ridge([9, 5], ridge_head(), ridge_cylinder())
        assert_array_equal(targets.indices, [9, 5])

    def test_empty_index_set(self):
        targets = ridge([], ridge_head(), ridge_cylinder())
        self.assertEqual(len(targets), 0)
        self.assertEqual(targets.kappa_values, [])

    def test_invalid_index_raises(self):
        with self.assertRaises(IndexError):
            ridge([10], ridge_head(), ridge_cylinder())

    def test_short_cylinder_is_rejected(self):
        short = Cylinder([0, 0, 0], [0.01, 0, 0], 0.005)
        with self.assertRaises(RejectedCylinderError) as ctx:
            ridge([5], ridge_head(), short)
        self.assertEqual(ctx.exception.reason, LENGTH_REJECTION)

    def test_targets_lie_on_normal_ray(self):
        rng = np.random.default_rng(11)
        head = SurfaceMesh(rng.normal(size=(60, 3)) + [0, 0, -3], [])
        cylinder = Cylinder([-1, 0.1, 0.2], [1, -0.1, 0.3], 0.8)
        targets = ridge(range(60), head, cylinder)
        for (i, target), kappa in zip(targets.entries, targets.kappa_values):
            projected = head.vertices[i] - np.dot(head.vertices[i] - targets.plane.point, targets.plane.normal) * targets.plane.normal
            offset = target - projected
            along = np.dot(offset, targets.plane.normal)
            self.assertGreaterEqual(kappa, 0.0)
            self.assertLess(np.linalg.norm(offset - along * targets.plane.normal), 1e-12 * 10)
            self.assertAlmostEqual(along, kappa * cylinder.length, places=12)

    def test_rigid_equivariance(self):
        rng = np.random.default_rng(12)
        head, cylinder = ridge_head(), ridge_cylinder()
        base = ridge([5, 7, 9], head, cylinder).targets
        for _ in range(100):
            r, t = random_rotation(rng), rng.normal(size=3) * 2
            moved = ridge([5, 7, 9], head.transformed(r, t), cylinder.transformed(r, t))
            assert_allclose(moved.targets, base @ r.T + t, atol=1e-9)

    def test_deterministic(self):
        a = ridge([5, 7, 9], ridge_head(), ridge_cylinder())
        b = ridge([5, 7, 9], ridge_head(), ridge_cylinder())
        assert_array_equal(a.targets, b.targets)

    def test_kappa_is_not_clamped_off_axis(self):
        head = SurfaceMesh([[0, 3, 0.1], [0, 0, -1], [0, -3, -2]], [])
        cylinder = Cylinder([-1, 0, 0], [1, 0, 0], 5.0)
        targets = ridge([0], head, cylinder)
        self.assertGreater(targets.kappa_values[0], 1.0)


class SelectVerticesTest(unittest.TestCase):
    def test_worked_example_selection(self):
        assert_array_equal(select_cylinder_vertices(ridge_head(), ridge_cylinder()), [5, 7, 9])

    def test_unit_tet_against_thin_cylinder(self):
        head = SurfaceMesh(unit_tet().vertices, [])
        assert_array_equal(select_cylinder_vertices(head, Cylinder([-1, 0, 0], [1, 0, 0], 0.25)), [0, 1])

    def test_none_and_all(self):
        on_axis = SurfaceMesh([[-0.5, 0, 0], [0, 0, 0], [0.5, 0, 0]], [])
        far = SurfaceMesh([[0, 5, 0], [0, -5, 0]], [])
        cylinder = Cylinder([-1, 0, 0], [1, 0, 0], 0.25)
        assert_array_equal(select_cylinder_vertices(on_axis, cylinder), [0, 1, 2])
        self.assertEqual(len(select_cylinder_vertices(far, cylinder)), 0)

    def test_cylinder_ridge_combines_selection_and_targets(self):
        targets = cylinder_ridge(ridge_head(), ridge_cylinder())
        assert_allclose(targets.targets, [[0, 0, 2], [-1, 0, 0], [0.5, 0, 1]], atol=1e-12)

    def test_to_model_shape(self):
        model = cylinder_ridge(ridge_head(), ridge_cylinder()).to_model(3)
        self.assertEqual(model.cylinder, 3)
        self.assertEqual([e.index for e in model.entries], [5, 7, 9])
        self.assertEqual(model.plane.normal, (0.0, 0.0, 1.0))


if __name__ == "__main__":
    unittest.main()
