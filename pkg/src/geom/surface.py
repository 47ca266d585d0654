"""
Closest-point and inside/outside queries against a triangle surface.
"""

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from loguru import logger

from src.config.settings import geometry_settings
from src.errors import EmptyMeshError
from src.geom.bvh import TriangleBVH, brute_force_closest
from src.mesh.types import SurfaceMesh, vertex_normals

_EDGE_CORNERS = ((0, 1), (1, 2), (2, 0))


@dataclass(frozen=True)
class SurfaceHit:
    point: np.ndarray
    face: int
    distance: float
    barycentric: np.ndarray
    normal: np.ndarray


class SurfaceQuery:
    """
    Immutable query structure over a SurfaceMesh.

    Normals at the closest point are pseudonormals of the closest feature:
    the face normal inside a face, the mean of the two face normals on an
    edge, the angle-weighted normal at a vertex. Their sign against p - closest
    decides inside versus outside on closed, outward-oriented surfaces.
    """

    def __init__(self, mesh: SurfaceMesh, brute_force: Optional[bool] = None, leaf_size: Optional[int] = None):
        if mesh.face_count == 0:
            raise EmptyMeshError("surface query needs at least one face")
        self.mesh = mesh
        self.brute_force = geometry_settings.brute_force if brute_force is None else brute_force
        self._triangles = mesh.triangles()
        self._face_normals = mesh.face_normals()
        self._vertex_normals = vertex_normals(mesh)

        edges = mesh.faces[:, _EDGE_CORNERS].reshape(-1, 2)
        keys = np.sort(edges, axis=1)
        _, inverse, counts = np.unique(keys, axis=0, return_inverse=True, return_counts=True)
        inverse = inverse.reshape(-1)
        self._edge_counts = counts

        sums = np.zeros((len(counts), 3))
        np.add.at(sums, inverse, np.repeat(self._face_normals, 3, axis=0))
        norms = np.linalg.norm(sums, axis=1, keepdims=True)
        sums = np.divide(sums, norms, out=np.zeros_like(sums), where=norms > 0)
        # (m, 3) edge pseudonormal per face and local edge slot.
        self._edge_normals = sums[inverse].reshape(-1, 3, 3)

        self._bvh = None
        if not self.brute_force:
            self._bvh = TriangleBVH(self._triangles, leaf_size or geometry_settings.bvh_leaf_size)
            logger.debug(f"BVH over {mesh.face_count} faces: {self._bvh.node_count} nodes")

    @property
    def is_closed(self) -> bool:
        """Every undirected edge is shared by exactly two faces."""
        return bool((self._edge_counts == 2).all())

    def _pseudonormal(self, face: int, barycentric: np.ndarray) -> np.ndarray:
        nonzero = np.flatnonzero(barycentric > 0)
        if len(nonzero) == 1:
            return self._vertex_normals[self.mesh.faces[face, nonzero[0]]]
        if len(nonzero) == 2:
            pair = tuple(int(i) for i in nonzero)
            for slot, (i, j) in enumerate(_EDGE_CORNERS):
                if {i, j} == set(pair):
                    return self._edge_normals[face, slot]
        return self._face_normals[face]

    def closest(self, p) -> SurfaceHit:
        p = np.asarray(p, dtype=np.float64).reshape(3)
        if self._bvh is not None:
            point, face, distance, bary = self._bvh.closest(p)
        else:
            point, face, distance, bary = brute_force_closest(p, self._triangles)
        return SurfaceHit(point, face, distance, bary, self._pseudonormal(face, bary))

    def is_inside(self, p, hit: Optional[SurfaceHit] = None) -> bool:
        """Strictly inside when p - closest points against the feature pseudonormal."""
        hit = hit or self.closest(p)
        return bool(np.dot(np.asarray(p, dtype=np.float64) - hit.point, hit.normal) < 0)


def closest_point_on_surface(v, mesh: SurfaceMesh) -> Tuple[np.ndarray, int, float]:
    """
    Closest point on the surface to v.

    Returns:
        (point, face index, distance)
    """
    hit = SurfaceQuery(mesh).closest(v)
    return hit.point, hit.face, hit.distance
