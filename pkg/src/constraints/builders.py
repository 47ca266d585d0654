"""
Constructors turning meshes, ridge targets, landmarks and closest points into constraint lists.
"""

from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
from loguru import logger

from src.config.schemas import ConstraintModel, PullTarget, TetComponent, Weights
from src.constraints.types import Constraint, ConstraintKind
from src.errors import DegenerateGeometryError, OpenSurfaceError
from src.geom.surface import SurfaceQuery
from src.mesh.types import SurfaceMesh, TetMesh


def _map_index(index: int, vertex_map: Optional[np.ndarray], what: str) -> int:
    if vertex_map is None:
        return int(index)
    if not 0 <= index < len(vertex_map):
        raise IndexError(f"{what} index {index} out of range for {len(vertex_map)} boundary vertices")
    return int(vertex_map[index])


def tet_strain_constraints(
    mesh: TetMesh,
    component: TetComponent | str,
    weights: Weights,
    alpha: float,
    offset: int = 0,
) -> List[Constraint]:
    """One TetStrain per tet; `offset` shifts tet vertex indices into the solver's vertex space."""
    component = TetComponent(component)
    if mesh.tet_count == 0:
        return []
    volumes = mesh.signed_volumes()
    flat = np.flatnonzero(volumes <= 0)
    if len(flat):
        raise DegenerateGeometryError(
            f"tet-{component.value}: {len(flat)} rest tet(s) with non-positive volume, first tet {int(flat[0])}"
        )
    rest_inv = np.linalg.inv(mesh.edge_matrices())
    weight = weights.for_component(component)
    return [
        Constraint(
            kind=ConstraintKind.TET_STRAIN,
            indices=tuple(tet + offset),
            weight=weight,
            rest_inv=rest_inv[t],
            alpha=alpha,
            volume=float(volumes[t]),
            component=component.value,
        )
        for t, tet in enumerate(mesh.tets)
    ]


def ridge_target_constraints(ridge_targets, vertex_map: Optional[np.ndarray], weights: Weights) -> List[Constraint]:
    """Ridge entries index the boundary surface; vertex_map carries them into the solver's vertex space."""
    return [
        Constraint(ConstraintKind.TARGET, (_map_index(i, vertex_map, "ridge"),), weights.w_tar, target=t)
        for i, t in ridge_targets.entries
    ]


def pull_constraints(
    pulls: Iterable[PullTarget | Tuple[int, Sequence[float]]],
    vertex_map: Optional[np.ndarray],
    weights: Weights,
) -> List[Constraint]:
    out = []
    for pull in pulls:
        index, target = (pull.index, pull.target) if isinstance(pull, PullTarget) else pull
        out.append(Constraint(ConstraintKind.PULL, (_map_index(index, vertex_map, "pull"),), weights.w_pull, target=target))
    return out


def push_constraints(
    indices: Iterable[int],
    forbidden: SurfaceQuery,
    margin: float,
    weights: Weights,
) -> List[Constraint]:
    """
    Raises:
        OpenSurfaceError: forbidden surface has an edge not shared by exactly two faces
    """
    if not forbidden.is_closed:
        raise OpenSurfaceError("forbidden surface must be closed for push constraints")
    return [
        Constraint(ConstraintKind.PUSH, (int(i),), weights.w_push, surface=forbidden, margin=margin)
        for i in indices
    ]


def build_correspondences(
    points: np.ndarray,
    normals: np.ndarray,
    target: SurfaceQuery | SurfaceMesh,
    max_dist: float,
    max_angle: float,
    weight: float = Weights().w_corr,
    vertex_map: Optional[np.ndarray] = None,
) -> List[Constraint]:
    """
    Pair each source vertex with its closest point on the target.

    A pair survives when it is no farther than max_dist and the source normal
    is within max_angle degrees of the target pseudonormal there.

    Args:
        points: (n, 3) source positions
        normals: (n, 3) unit source normals
        target: surface to attract to
        max_dist: distance gate (m)
        max_angle: normal gate (degrees)
        weight: w_corr
        vertex_map: source vertex -> solver vertex; identity when None
    """
    query = target if isinstance(target, SurfaceQuery) else SurfaceQuery(target)
    points = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    normals = np.asarray(normals, dtype=np.float64).reshape(-1, 3)
    min_cos = np.cos(np.radians(max_angle))

    out = []
    for i, (p, n) in enumerate(zip(points, normals)):
        hit = query.closest(p)
        if hit.distance > max_dist:
            continue
        lengths = np.linalg.norm(n) * np.linalg.norm(hit.normal)
        cos = float(n @ hit.normal / lengths) if lengths > 0 else 0.0
        if cos < min_cos - 1e-12:
            continue
        index = int(vertex_map[i]) if vertex_map is not None else i
        out.append(Constraint(ConstraintKind.CORRESPONDENCE, (index,), weight, target=hit.point))

    logger.debug(f"Correspondences: {len(out)}/{len(points)} pairs within {max_dist:.4g} m and {max_angle:g} deg")
    return out


def constraint_to_dict(constraint: Constraint) -> dict:
    """Debug form {kind, indices, weight, payload} of one constraint."""
    if constraint.kind is ConstraintKind.TET_STRAIN:
        payload = {
            "rest_inv": constraint.rest_inv.tolist(),
            "alpha": constraint.alpha,
            "volume": constraint.volume,
            "component": constraint.component,
        }
    elif constraint.kind is ConstraintKind.PUSH:
        payload = {"margin": constraint.margin, "surface_faces": constraint.surface.mesh.face_count}
    else:
        payload = {"target": constraint.target.tolist()}
    return ConstraintModel(
        kind=constraint.kind.value,
        indices=list(constraint.indices),
        weight=constraint.weight,
        payload=payload,
    ).model_dump(mode="json")
