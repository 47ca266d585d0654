"""
Immutable triangle and tetrahedral meshes.

Arrays are copied on construction and marked read-only, so meshes can be
shared freely between threads. Construction never validates: use
`src.mesh.validate` to get a MeshReport with the defects of a mesh.
"""

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from src.errors import EmptyMeshError


def _frozen(array, dtype, width: int) -> np.ndarray:
    out = np.array(array, dtype=dtype, copy=True)
    out = out.reshape(-1, width) if out.size else np.zeros((0, width), dtype=dtype)
    out.setflags(write=False)
    return out


def _bbox_diag(vertices: np.ndarray) -> float:
    if len(vertices) == 0:
        return 0.0
    return float(np.linalg.norm(vertices.max(axis=0) - vertices.min(axis=0)))


@dataclass(frozen=True, eq=False)
class SurfaceMesh:
    """Triangle surface: (n, 3) vertex positions in meters, (m, 3) 0-based faces."""
    vertices: np.ndarray
    faces: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "vertices", _frozen(self.vertices, np.float64, 3))
        object.__setattr__(self, "faces", _frozen(self.faces, np.int64, 3))

    @property
    def vertex_count(self) -> int:
        return len(self.vertices)

    @property
    def face_count(self) -> int:
        return len(self.faces)

    @property
    def bbox_diag(self) -> float:
        return _bbox_diag(self.vertices)

    def triangles(self) -> np.ndarray:
        """(m, 3, 3) corner positions per face."""
        return self.vertices[self.faces]

    def face_cross(self) -> np.ndarray:
        tris = self.triangles()
        return np.cross(tris[:, 1] - tris[:, 0], tris[:, 2] - tris[:, 0])

    def face_areas(self) -> np.ndarray:
        return 0.5 * np.linalg.norm(self.face_cross(), axis=1)

    def face_normals(self) -> np.ndarray:
        """Unit face normals; zero-area faces get a zero normal."""
        cross = self.face_cross()
        norms = np.linalg.norm(cross, axis=1, keepdims=True)
        return np.divide(cross, norms, out=np.zeros_like(cross), where=norms > 0)

    def with_vertices(self, vertices) -> "SurfaceMesh":
        return SurfaceMesh(vertices, self.faces)

    def transformed(self, rotation, translation=(0.0, 0.0, 0.0)) -> "SurfaceMesh":
        return self.with_vertices(self.vertices @ np.asarray(rotation).T + np.asarray(translation))


@dataclass(frozen=True, eq=False)
class TetMesh:
    """Tetrahedral volume: (n, 3) vertex positions in meters, (m, 4) 0-based tets."""
    vertices: np.ndarray
    tets: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "vertices", _frozen(self.vertices, np.float64, 3))
        object.__setattr__(self, "tets", _frozen(self.tets, np.int64, 4))

    @property
    def vertex_count(self) -> int:
        return len(self.vertices)

    @property
    def tet_count(self) -> int:
        return len(self.tets)

    @property
    def bbox_diag(self) -> float:
        return _bbox_diag(self.vertices)

    def edge_matrices(self) -> np.ndarray:
        """(m, 3, 3) matrices whose columns are x1-x0, x2-x0, x3-x0."""
        corners = self.vertices[self.tets]
        return np.transpose(corners[:, 1:] - corners[:, :1], (0, 2, 1))

    def signed_volumes(self) -> np.ndarray:
        if self.tet_count == 0:
            return np.zeros(0)
        return np.linalg.det(self.edge_matrices()) / 6.0

    def with_vertices(self, vertices) -> "TetMesh":
        return TetMesh(vertices, self.tets)


def mesh_mean(mesh: SurfaceMesh) -> np.ndarray:
    """Arithmetic mean of all vertex positions."""
    if mesh.vertex_count == 0:
        raise EmptyMeshError("mean of an empty mesh is undefined")
    return mesh.vertices.mean(axis=0)


# Faces of a positively oriented tet (a, b, c, d), each wound to face outward.
_OUTWARD_FACES = np.array([[0, 2, 1], [0, 1, 3], [0, 3, 2], [1, 2, 3]])


def tet_boundary(mesh: TetMesh) -> Tuple[SurfaceMesh, np.ndarray]:
    """
    Extract the outward-oriented boundary surface of a tet mesh.

    Returns:
        (surface, vertex_map) where vertex_map[i] is the tet vertex of surface vertex i
    """
    if mesh.tet_count == 0:
        return SurfaceMesh(np.zeros((0, 3)), np.zeros((0, 3))), np.zeros(0, dtype=np.int64)

    faces = mesh.tets[:, _OUTWARD_FACES].reshape(-1, 3)
    keys = np.sort(faces, axis=1)
    _, first, inverse, counts = np.unique(keys, axis=0, return_index=True, return_inverse=True, return_counts=True)
    boundary = faces[counts[inverse.reshape(-1)] == 1]

    vertex_map = np.unique(boundary)
    local_faces = np.searchsorted(vertex_map, boundary)
    return SurfaceMesh(mesh.vertices[vertex_map], local_faces), vertex_map


def vertex_normals(mesh: SurfaceMesh) -> np.ndarray:
    """Unit angle-weighted vertex normals (pseudonormals)."""
    normals = np.zeros((mesh.vertex_count, 3))
    if mesh.face_count == 0:
        return normals

    tris = mesh.triangles()
    face_normals = mesh.face_normals()
    for corner in range(3):
        e1 = tris[:, (corner + 1) % 3] - tris[:, corner]
        e2 = tris[:, (corner + 2) % 3] - tris[:, corner]
        n1 = np.linalg.norm(e1, axis=1)
        n2 = np.linalg.norm(e2, axis=1)
        denom = n1 * n2
        cos = np.divide(np.einsum("ij,ij->i", e1, e2), denom, out=np.ones_like(denom), where=denom > 0)
        angle = np.arccos(np.clip(cos, -1.0, 1.0))
        np.add.at(normals, mesh.faces[:, corner], face_normals * angle[:, None])

    norms = np.linalg.norm(normals, axis=1, keepdims=True)
    return np.divide(normals, norms, out=np.zeros_like(normals), where=norms > 0)
