import io
import unittest

import numpy as np
from numpy.testing import assert_allclose, assert_array_equal

from src.errors import EmptyMeshError, MeshParseError
from src.mesh.io import parse_obj, parse_tetgen, read_obj, read_tetgen, write_obj, write_tetgen
from src.mesh.synth import jitter_surface, synth_ellipsoid, synth_sphere, synth_sphere_tet
from src.mesh.types import SurfaceMesh, TetMesh, mesh_mean, tet_boundary, vertex_normals
from src.mesh.validate import (
    DUPLICATED_VERTEX,
    INVERTED_TET,
    OUT_OF_RANGE,
    compare_expected,
    validate_surface,
    validate_tet,
)
from tests.helpers import UNIT_TET_ELE, UNIT_TET_NODES, asset_dir, unit_tet

TRIANGLE_OBJ = "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n"


class ParseObjTest(unittest.TestCase):
    def test_minimal_triangle(self):
        mesh = parse_obj(TRIANGLE_OBJ)
        self.assertEqual(mesh.vertex_count, 3)
        assert_array_equal(mesh.faces, [[0, 1, 2]])

    def test_out_of_range_index_is_rejected(self):
        with self.assertRaisesRegex(MeshParseError, "out-of-range"):
            parse_obj("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 9\n")

    def test_quad_is_fan_triangulated(self):
        mesh = parse_obj("v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n")
        assert_array_equal(mesh.faces, [[0, 1, 2], [0, 2, 3]])

    def test_attributes_and_other_records_are_ignored(self):
        text = "# head\nmtllib a.mtl\nv 0 0 0\nv 1 0 0\nv 0 1 0\nvn 0 0 1\nvt 0 0\ng skin\nf 1/1/1 2/2/1 3//1\n"
        mesh = parse_obj(text)
        assert_array_equal(mesh.faces, [[0, 1, 2]])

    def test_rejects_malformed_records(self):
        cases = {
            "v 0 zero 0\n": "non-numeric",
            "v 0 0 0\nv 1 0 0\nf 1 2\n": "at least 3",
            "v 0 0 0\nv 1 0 0\nv 0 1 0\nf -3 -2 -1\n": "negative",
            "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 1 2\n": "same vertex",
        }
        for text, message in cases.items():
            with self.subTest(text=text):
                with self.assertRaisesRegex(MeshParseError, message):
                    parse_obj(text)

    def test_accepts_streams(self):
        self.assertEqual(parse_obj(io.StringIO(TRIANGLE_OBJ)).face_count, 1)


class WriteObjTest(unittest.TestCase):
    def test_minimal_triangle_text(self):
        text = write_obj(parse_obj(TRIANGLE_OBJ))
        lines = text.splitlines()
        self.assertEqual(sum(line.startswith("v ") for line in lines), 3)
        self.assertEqual([line for line in lines if line.startswith("f ")], ["f 1 2 3"])

    def test_empty_mesh_round_trips(self):
        mesh = parse_obj(write_obj(SurfaceMesh(np.zeros((0, 3)), np.zeros((0, 3)))))
        self.assertEqual(mesh.vertex_count, 0)
        self.assertEqual(mesh.face_count, 0)

    def test_random_mesh_round_trips(self):
        rng = np.random.default_rng(7)
        vertices = rng.normal(size=(50, 3))
        faces = np.array([rng.permutation(50)[:3] for _ in range(80)])
        mesh = SurfaceMesh(vertices, faces)

        back = parse_obj(write_obj(mesh))
        assert_allclose(back.vertices, mesh.vertices, atol=1e-9)
        assert_array_equal(back.faces, mesh.faces)


class ParseTetgenTest(unittest.TestCase):
    def test_unit_tet(self):
        mesh = parse_tetgen(UNIT_TET_NODES, UNIT_TET_ELE)
        self.assertEqual(mesh.tet_count, 1)
        assert_allclose(mesh.signed_volumes(), [1 / 6])

    def test_negative_orientation_is_fixed(self):
        mesh = parse_tetgen(UNIT_TET_NODES, "1 4 0\n1 1 2 4 3\n")
        assert_array_equal(mesh.tets, [[0, 1, 2, 3]])
        assert_allclose(mesh.signed_volumes(), [1 / 6])

    def test_zero_based_numbering(self):
        nodes = "4 3 0 0\n0 0 0 0\n1 1 0 0\n2 0 1 0\n3 0 0 1\n"
        mesh = parse_tetgen(nodes, "1 4 0\n0 0 1 2 3\n")
        assert_array_equal(mesh.tets, [[0, 1, 2, 3]])

    def test_rejects_bad_files(self):
        cases = {
            (UNIT_TET_NODES, "1 4 0\n1 1 2 3 7\n"): "out-of-range",
            (UNIT_TET_NODES, "2 4 0\n1 1 2 3 4\n"): "declares 2 tets",
            ("5 3 0 0\n1 0 0 0\n2 1 0 0\n3 0 1 0\n4 0 0 1\n", UNIT_TET_ELE): "declares 5 nodes",
            ("4 3 0 0\n1 0 0 0\n2 1 0 0\n3 2 0 0\n4 3 0 0\n", UNIT_TET_ELE): "zero volume",
        }
        for (nodes, ele), message in cases.items():
            with self.subTest(message=message):
                with self.assertRaisesRegex(MeshParseError, message):
                    parse_tetgen(nodes, ele)

    def test_write_then_parse_reproduces_mesh(self):
        mesh = synth_sphere_tet(4, 1.0)
        back = parse_tetgen(*write_tetgen(mesh))
        assert_allclose(back.vertices, mesh.vertices, atol=1e-12)
        assert_array_equal(back.tets, mesh.tets)


class MeshTypesTest(unittest.TestCase):
    def test_mesh_mean(self):
        assert_allclose(mesh_mean(SurfaceMesh([[0, 0, 0], [2, 0, 0]], [])), [1, 0, 0])
        assert_allclose(mesh_mean(SurfaceMesh([[0.3, -2.0, 7.5]], [])), [0.3, -2.0, 7.5])
        assert_allclose(mesh_mean(SurfaceMesh(unit_tet().vertices, [])), [0.25, 0.25, 0.25])

    def test_mesh_mean_of_empty_mesh_raises(self):
        with self.assertRaises(EmptyMeshError):
            mesh_mean(SurfaceMesh(np.zeros((0, 3)), []))

    def test_mesh_mean_is_translation_equivariant(self):
        rng = np.random.default_rng(3)
        mesh = SurfaceMesh(rng.normal(size=(40, 3)), [])
        t = rng.normal(size=3)
        assert_allclose(mesh_mean(mesh.with_vertices(mesh.vertices + t)), mesh_mean(mesh) + t, atol=1e-12)

    def test_arrays_are_read_only(self):
        mesh = unit_tet()
        with self.assertRaises(ValueError):
            mesh.vertices[0, 0] = 1.0

    def test_tet_boundary_faces_point_outward(self):
        surface, vertex_map = tet_boundary(synth_sphere_tet(4, 1.0))
        tris = surface.triangles()
        outward = np.einsum("ij,ij->i", surface.face_cross(), tris.mean(axis=1))
        self.assertTrue((outward > 0).all())
        self.assertEqual(len(vertex_map), surface.vertex_count)

    def test_unit_tet_boundary_is_the_tet(self):
        surface, vertex_map = tet_boundary(unit_tet())
        self.assertEqual(surface.face_count, 4)
        assert_array_equal(vertex_map, [0, 1, 2, 3])

    def test_vertex_normals_of_sphere_are_radial(self):
        sphere = synth_sphere(3, 1.0)
        normals = vertex_normals(sphere)
        radial = sphere.vertices / np.linalg.norm(sphere.vertices, axis=1, keepdims=True)
        self.assertGreater(np.einsum("ij,ij->i", normals, radial).min(), 0.999)


class ValidateTest(unittest.TestCase):
    def test_synthetic_fixtures_pass(self):
        self.assertEqual(validate_surface(synth_sphere(2, 1.0)).defects, [])
        self.assertEqual(validate_surface(synth_ellipsoid(2, 0.1)).defects, [])
        self.assertEqual(validate_tet(synth_sphere_tet(6, 1.0)).defects, [])

    def test_seeded_defects_are_reported_distinctly(self):
        triangle = [[0, 0, 0], [1, 0, 0], [0, 1, 0]]
        out_of_range = validate_surface(SurfaceMesh(triangle, [[0, 1, 5]])).defects
        duplicated = validate_surface(SurfaceMesh(triangle, [[0, 1, 1]])).defects
        inverted = validate_tet(TetMesh(unit_tet().vertices, [[0, 1, 3, 2]])).defects

        self.assertTrue(out_of_range[0].startswith(OUT_OF_RANGE))
        self.assertTrue(duplicated[0].startswith(DUPLICATED_VERTEX))
        self.assertTrue(inverted[0].startswith(INVERTED_TET))
        self.assertEqual(len({out_of_range[0], duplicated[0], inverted[0]}), 3)

    def test_report_json_field_names(self):
        report = validate_surface(parse_obj(TRIANGLE_OBJ))
        self.assertEqual(
            set(report.model_dump(by_alias=True)),
            {"vertex_count", "element_count", "bbox_diag", "min_measure", "defects"},
        )
        self.assertAlmostEqual(report.min_element_measure, 0.5)

    def test_compare_expected_tries_both_tet_interpretations(self):
        report = validate_tet(unit_tet()).model_copy(update={"vertex_count": 11001, "face_or_tet_count": 31456})
        self.assertEqual(compare_expected(report, "ts").interpretation, "tets")

        report = report.model_copy(update={"face_or_tet_count": 60000})
        self.assertEqual(compare_expected(report, "ts", boundary_face_count=31456).interpretation, "faces")
        self.assertFalse(compare_expected(report, "ts", boundary_face_count=10).matched)

    @unittest.skipUnless(asset_dir() and (asset_dir() / "H.obj").is_file(), "template assets not supplied")
    def test_head_asset_matches_dimension_table(self):
        mesh = read_obj(asset_dir() / "H.obj")
        self.assertEqual((mesh.vertex_count, mesh.face_count), (6688, 13372))
        self.assertTrue(compare_expected(validate_surface(mesh), "h").matched)

    @unittest.skipUnless(asset_dir() and (asset_dir() / "tet_J.node").is_file(), "template assets not supplied")
    def test_tet_asset_matches_dimension_table(self):
        mesh = read_tetgen(asset_dir() / "tet_J.node")
        report = validate_tet(mesh)
        self.assertTrue(compare_expected(report, "tj", tet_boundary(mesh)[0].face_count).matched)


class SynthTest(unittest.TestCase):
    def test_icosahedron(self):
        mesh = synth_sphere(0, 1.0)
        self.assertEqual((mesh.vertex_count, mesh.face_count), (12, 20))
        assert_allclose(np.linalg.norm(mesh.vertices, axis=1), 1.0)

    def test_subdivision_counts(self):
        mesh = synth_sphere(2, 0.5)
        self.assertEqual((mesh.vertex_count, mesh.face_count), (162, 320))

    def test_ball_tets_have_positive_volume(self):
        mesh = synth_sphere_tet(6, 1.0)
        self.assertGreater(mesh.signed_volumes().min(), 0)

    def test_ball_volume_close_to_sphere(self):
        volume = synth_sphere_tet(16, 1.0).signed_volumes().sum()
        self.assertLess(abs(volume - 4 * np.pi / 3) / (4 * np.pi / 3), 0.05)

    def test_ball_boundary_lies_on_sphere(self):
        surface, _ = tet_boundary(synth_sphere_tet(8, 0.1))
        assert_allclose(np.linalg.norm(surface.vertices, axis=1), 0.1, rtol=1e-12)

    def test_zero_resolution_raises(self):
        with self.assertRaises(EmptyMeshError):
            synth_sphere_tet(0, 1.0)

    def test_jitter_is_seeded(self):
        sphere = synth_sphere(1, 1.0)
        a = jitter_surface(sphere, 0.01, seed=4)
        b = jitter_surface(sphere, 0.01, seed=4)
        assert_array_equal(a.vertices, b.vertices)
        radii = np.linalg.norm(a.vertices, axis=1)
        self.assertLessEqual(np.abs(radii - 1.0).max(), 0.01 + 1e-12)


if __name__ == "__main__":
    unittest.main()
