"""
Synthetic fixtures standing in for template assets: icospheres, ellipsoids
and tetrahedralized balls.
"""

from itertools import permutations
from typing import Dict, Sequence, Tuple

import numpy as np
from loguru import logger

from src.errors import EmptyMeshError
from src.mesh.types import SurfaceMesh, TetMesh

_PHI = (1.0 + 5.0 ** 0.5) / 2.0

_ICOSAHEDRON_VERTICES = np.array([
    [-1, _PHI, 0], [1, _PHI, 0], [-1, -_PHI, 0], [1, -_PHI, 0],
    [0, -1, _PHI], [0, 1, _PHI], [0, -1, -_PHI], [0, 1, -_PHI],
    [_PHI, 0, -1], [_PHI, 0, 1], [-_PHI, 0, -1], [-_PHI, 0, 1],
])

_ICOSAHEDRON_FACES = np.array([
    [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
    [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
    [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
    [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
])


def _subdivide(vertices: list, faces: np.ndarray) -> np.ndarray:
    midpoints: Dict[Tuple[int, int], int] = {}

    def midpoint(a: int, b: int) -> int:
        key = (a, b) if a < b else (b, a)
        if key not in midpoints:
            p = vertices[a] + vertices[b]
            vertices.append(p / np.linalg.norm(p))
            midpoints[key] = len(vertices) - 1
        return midpoints[key]

    out = []
    for a, b, c in faces:
        ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
        out += [[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]
    return np.array(out, dtype=np.int64)


def synth_sphere(subdivisions: int, radius: float) -> SurfaceMesh:
    """
    Icosphere centered at the origin with outward-facing triangles.

    subdivisions=0 is the icosahedron (12 vertices, 20 faces); each level
    splits every face into four.
    """
    if subdivisions < 0:
        raise ValueError(f"subdivisions must be >= 0, got {subdivisions}")
    if not radius > 0:
        raise ValueError(f"radius must be > 0, got {radius}")

    vertices = [v / np.linalg.norm(v) for v in _ICOSAHEDRON_VERTICES.astype(np.float64)]
    faces = _ICOSAHEDRON_FACES.copy()
    for _ in range(subdivisions):
        faces = _subdivide(vertices, faces)

    points = np.array(vertices)
    tris = points[faces]
    normals = np.cross(tris[:, 1] - tris[:, 0], tris[:, 2] - tris[:, 0])
    inward = np.einsum("ij,ij->i", normals, tris.mean(axis=1)) < 0
    faces[inward] = faces[inward][:, [0, 2, 1]]
    return SurfaceMesh(points * radius, faces)


def synth_ellipsoid(subdivisions: int, radius: float, axes: Sequence[float] = (1.0, 1.2, 0.8)) -> SurfaceMesh:
    """Icosphere scaled per axis; `axes` are multiples of `radius`."""
    axes = np.asarray(axes, dtype=np.float64)
    if axes.shape != (3,) or not (axes > 0).all():
        raise ValueError(f"axes must be three positive factors, got {axes.tolist()}")
    sphere = synth_sphere(subdivisions, radius)
    return sphere.with_vertices(sphere.vertices * axes)


def jitter_surface(mesh: SurfaceMesh, amplitude: float, seed: int = 0) -> SurfaceMesh:
    """Move every vertex along its radial direction by uniform noise in [-amplitude, amplitude]."""
    if amplitude == 0:
        return mesh
    rng = np.random.default_rng(seed)
    radial = mesh.vertices / np.linalg.norm(mesh.vertices, axis=1, keepdims=True)
    offsets = rng.uniform(-amplitude, amplitude, size=(mesh.vertex_count, 1))
    return mesh.with_vertices(mesh.vertices + radial * offsets)


def synth_sphere_tet(resolution: int, radius: float) -> TetMesh:
    """
    Tetrahedralized ball from a regular grid.

    The cube [-1, 1]^3 is split into `resolution` cells per axis (rounded up
    to even), each cut into 6 tets along the diagonal pointing away from the
    center, mirrored per octant. Every grid node is then pushed radially by
    p * |p|_inf / |p|_2, which snaps the grid boundary onto the sphere.
    """
    if not radius > 0:
        raise ValueError(f"radius must be > 0, got {radius}")
    half = -(-resolution // 2) if resolution > 0 else 0
    if half < 1:
        raise EmptyMeshError(f"resolution {resolution} produces no tets")

    side = 2 * half + 1
    steps = np.arange(-half, half + 1)
    grid = np.stack(np.meshgrid(steps, steps, steps, indexing="ij"), axis=-1).reshape(-1, 3)

    def node(i: int, j: int, k: int) -> int:
        return ((i + half) * side + (j + half)) * side + (k + half)

    tets = []
    for cell in np.stack(np.meshgrid(steps[:-1], steps[:-1], steps[:-1], indexing="ij"), axis=-1).reshape(-1, 3):
        signs = np.where(cell >= 0, 1, -1)
        near = np.where(signs > 0, cell, cell + 1)
        for order in permutations(range(3)):
            corner = near.copy()
            path = [node(*corner)]
            for axis in order:
                corner[axis] += signs[axis]
                path.append(node(*corner))
            tets.append(path)
    tets = np.array(tets, dtype=np.int64)

    # Orientation is fixed on the undistorted grid, where every tet has volume +-h^3/6.
    corners = grid[tets].astype(np.float64)
    edges = np.transpose(corners[:, 1:] - corners[:, :1], (0, 2, 1))
    negative = np.linalg.det(edges) < 0
    tets[negative] = tets[negative][:, [0, 1, 3, 2]]

    points = grid.astype(np.float64) / half
    inf_norm = np.abs(points).max(axis=1)
    two_norm = np.linalg.norm(points, axis=1)
    scale = np.divide(inf_norm, two_norm, out=np.zeros_like(inf_norm), where=two_norm > 0)
    vertices = points * scale[:, None] * radius

    logger.debug(f"Synthesized ball: {len(vertices)} nodes, {len(tets)} tets (resolution {2 * half})")
    return TetMesh(vertices, tets)
