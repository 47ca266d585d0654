from src.mesh.types import SurfaceMesh, TetMesh, mesh_mean, tet_boundary, vertex_normals
from src.mesh.io import (
    parse_obj,
    write_obj,
    parse_tetgen,
    write_tetgen,
    read_obj,
    write_obj_file,
    read_tetgen,
    write_tetgen_files,
    atomic_write_text,
)
from src.mesh.validate import validate_surface, validate_tet, compare_expected, TEMPLATE_DIMENSIONS
from src.mesh.synth import synth_sphere, synth_sphere_tet, synth_ellipsoid, jitter_surface

__all__ = [
    "SurfaceMesh",
    "TetMesh",
    "mesh_mean",
    "tet_boundary",
    "vertex_normals",
    "parse_obj",
    "write_obj",
    "parse_tetgen",
    "write_tetgen",
    "read_obj",
    "write_obj_file",
    "read_tetgen",
    "write_tetgen_files",
    "atomic_write_text",
    "validate_surface",
    "validate_tet",
    "compare_expected",
    "TEMPLATE_DIMENSIONS",
    "synth_sphere",
    "synth_sphere_tet",
    "synth_ellipsoid",
    "jitter_surface",
]
