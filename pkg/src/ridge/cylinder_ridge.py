"""
Cylinder ridge: raised target positions for the head vertices inside a cylinder.

Each selected vertex is dropped onto the plane through the cylinder's axis
midpoint, whose normal points away from the head's mean, and then lifted
along that normal by kappa * len, where kappa is the distance to the nearer
cylinder endpoint relative to half the cylinder length.
"""

from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np
from loguru import logger

from src.config.schemas import PlaneModel, RidgeEntryModel, RidgeResultModel
from src.errors import DegenerateGeometryError, RejectedCylinderError
from src.geom.primitives import Cylinder, Plane, points_in_cylinder, project_point_plane
from src.mesh.types import SurfaceMesh, mesh_mean

DEFAULT_L_MIN = 0.025
NORMAL_TOLERANCE = 1e-9
LENGTH_REJECTION = "length < l_min"


@dataclass(frozen=True)
class RidgeTargets:
    entries: List[Tuple[int, np.ndarray]] = field(default_factory=list)
    plane: Plane = None
    kappa_values: List[float] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def indices(self) -> np.ndarray:
        return np.array([i for i, _ in self.entries], dtype=np.int64)

    @property
    def targets(self) -> np.ndarray:
        return np.array([t for _, t in self.entries], dtype=np.float64).reshape(-1, 3)

    def to_model(self, cylinder: int = 0) -> RidgeResultModel:
        return RidgeResultModel(
            cylinder=cylinder,
            plane=PlaneModel(point=tuple(self.plane.point.tolist()), normal=tuple(self.plane.normal.tolist())),
            entries=[
                RidgeEntryModel(index=int(i), target=tuple(t.tolist()), kappa=float(k))
                for (i, t), k in zip(self.entries, self.kappa_values)
            ],
        )


def cylinder_plane(cylinder: Cylinder, head: SurfaceMesh) -> Plane:
    """Plane through the axis midpoint, normal pointing from the head mean toward it."""
    midpoint = cylinder.axis_midpoint
    offset = midpoint - mesh_mean(head)
    distance = np.linalg.norm(offset)
    if distance <= NORMAL_TOLERANCE:
        raise DegenerateGeometryError("cylinder axis midpoint coincides with the head mean; plane normal undefined")
    return Plane(midpoint, offset / distance)


def select_cylinder_vertices(head: SurfaceMesh, cylinder: Cylinder) -> np.ndarray:
    """Ascending indices of head vertices inside the (closed) cylinder."""
    if head.vertex_count == 0:
        return np.zeros(0, dtype=np.int64)
    return np.flatnonzero(points_in_cylinder(head.vertices, cylinder)).astype(np.int64)


def ridge(indices: Sequence[int], head: SurfaceMesh, cylinder: Cylinder, l_min: float = DEFAULT_L_MIN) -> RidgeTargets:
    """
    Ridge targets for the given head vertices, one entry per index in input order.

    Raises:
        RejectedCylinderError: cylinder shorter than l_min
        DegenerateGeometryError: axis midpoint coincides with the head mean
        IndexError: index outside the head's vertex range
    """
    length = cylinder.length
    if length < l_min:
        raise RejectedCylinderError(LENGTH_REJECTION)

    plane = cylinder_plane(cylinder, head)
    indices = [int(i) for i in indices]
    bad = [i for i in indices if i < 0 or i >= head.vertex_count]
    if bad:
        raise IndexError(f"vertex index {bad[0]} out of range for head with {head.vertex_count} vertices")

    entries, kappas = [], []
    half = length / 2
    for i in indices:
        projected = project_point_plane(head.vertices[i], plane)
        kappa = min(np.linalg.norm(cylinder.start - projected), np.linalg.norm(cylinder.end - projected)) / half
        target = projected + kappa * length * plane.normal
        entries.append((i, target))
        kappas.append(float(kappa))

    logger.debug(f"Ridge: {len(entries)} targets, kappa max {max(kappas, default=0.0):.4f}")
    return RidgeTargets(entries=entries, plane=plane, kappa_values=kappas)


def cylinder_ridge(head: SurfaceMesh, cylinder: Cylinder, l_min: float = DEFAULT_L_MIN) -> RidgeTargets:
    """Select the vertices inside the cylinder and build their ridge targets."""
    return ridge(select_cylinder_vertices(head, cylinder), head, cylinder, l_min)
