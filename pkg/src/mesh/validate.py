from typing import Dict, List, NamedTuple, Optional

import numpy as np
from loguru import logger

from src.config.schemas import ExpectationReport, MeshReport
from src.mesh.types import SurfaceMesh, TetMesh

OUT_OF_RANGE = "out-of-range index"
DUPLICATED_VERTEX = "duplicated vertex"
NON_FINITE = "non-finite coordinate"
INVERTED_TET = "inverted tet"
DEGENERATE_TET = "degenerate tet"


class TemplateDimensions(NamedTuple):
    component: str
    vertices: int
    elements: int
    volumetric: bool


# Vertex and face/tet counts of the published head template.
TEMPLATE_DIMENSIONS: Dict[str, TemplateDimensions] = {
    "h": TemplateDimensions("H", 6688, 13372, False),
    "j": TemplateDimensions("J", 886, 1768, False),
    "c": TemplateDimensions("C", 4220, 8444, False),
    "ts": TemplateDimensions("tet-S", 11001, 31456, True),
    "tj": TemplateDimensions("tet-J", 899, 4190, True),
    "tc": TemplateDimensions("tet-C", 3354, 15634, True),
}


def _index_defects(elements: np.ndarray, vertex_count: int, name: str) -> List[str]:
    defects = []
    bad_rows = np.flatnonzero(((elements < 0) | (elements >= vertex_count)).any(axis=1))
    if len(bad_rows):
        row = int(bad_rows[0])
        defects.append(f"{OUT_OF_RANGE}: {len(bad_rows)} {name}(s), first {name} {row} = {elements[row].tolist()} with {vertex_count} vertices")

    ordered = np.sort(elements, axis=1)
    repeated = np.flatnonzero((ordered[:, 1:] == ordered[:, :-1]).any(axis=1))
    if len(repeated):
        row = int(repeated[0])
        defects.append(f"{DUPLICATED_VERTEX}: {len(repeated)} {name}(s), first {name} {row} = {elements[row].tolist()}")
    return defects


def _coordinate_defects(vertices: np.ndarray) -> List[str]:
    bad = np.flatnonzero(~np.isfinite(vertices).all(axis=1))
    if len(bad):
        return [f"{NON_FINITE}: {len(bad)} vertex(es), first vertex {int(bad[0])}"]
    return []


def _finite_bbox_diag(vertices: np.ndarray) -> float:
    finite = vertices[np.isfinite(vertices).all(axis=1)]
    if len(finite) == 0:
        return 0.0
    return float(np.linalg.norm(finite.max(axis=0) - finite.min(axis=0)))


def validate_surface(mesh: SurfaceMesh) -> MeshReport:
    """Check SurfaceMesh invariants; zero-area faces are logged, not reported."""
    defects = _coordinate_defects(mesh.vertices)
    defects += _index_defects(mesh.faces, mesh.vertex_count, "face")

    min_area = 0.0
    if not defects and mesh.face_count:
        areas = mesh.face_areas()
        min_area = float(areas.min())
        zero = int(np.count_nonzero(areas == 0.0))
        if zero:
            logger.warning(f"{zero} zero-area face(s) in surface")

    return MeshReport(
        vertex_count=mesh.vertex_count,
        face_or_tet_count=mesh.face_count,
        bbox_diag=_finite_bbox_diag(mesh.vertices),
        min_element_measure=min_area,
        defects=defects,
    )


def validate_tet(mesh: TetMesh, tolerance: float = 1e-12) -> MeshReport:
    """Check TetMesh invariants: valid indices and strictly positive tet volumes."""
    defects = _coordinate_defects(mesh.vertices)
    defects += _index_defects(mesh.tets, mesh.vertex_count, "tet")

    min_volume = 0.0
    if not defects and mesh.tet_count:
        volumes = mesh.signed_volumes()
        min_volume = float(volumes.min())
        scale = mesh.bbox_diag ** 3
        flat = np.abs(volumes) <= tolerance * scale
        inverted = (volumes < 0) & ~flat
        if inverted.any():
            defects.append(f"{INVERTED_TET}: {int(inverted.sum())} tet(s), first tet {int(np.flatnonzero(inverted)[0])}")
        if flat.any():
            defects.append(f"{DEGENERATE_TET}: {int(flat.sum())} tet(s), first tet {int(np.flatnonzero(flat)[0])}")

    return MeshReport(
        vertex_count=mesh.vertex_count,
        face_or_tet_count=mesh.tet_count,
        bbox_diag=_finite_bbox_diag(mesh.vertices),
        min_element_measure=min_volume,
        defects=defects,
    )


def compare_expected(report: MeshReport, key: str, boundary_face_count: Optional[int] = None) -> ExpectationReport:
    """
    Compare mesh counts against the template-dimension table.

    For tet components the table's element row is ambiguous, so both the tet
    count and the boundary face count are tried.
    """
    expected = TEMPLATE_DIMENSIONS[key.lower()]
    interpretation = None
    if report.vertex_count == expected.vertices:
        if expected.volumetric:
            if report.face_or_tet_count == expected.elements:
                interpretation = "tets"
            elif boundary_face_count == expected.elements:
                interpretation = "faces"
        elif report.face_or_tet_count == expected.elements:
            interpretation = "faces"

    result = ExpectationReport(
        key=key.lower(),
        component=expected.component,
        expected_vertices=expected.vertices,
        expected_elements=expected.elements,
        matched=interpretation is not None,
        interpretation=interpretation,
    )
    logger.info(
        f"Expectation {expected.component}: {expected.vertices} vertices / {expected.elements} elements, "
        f"got {report.vertex_count} / {report.face_or_tet_count} -> {'match (' + interpretation + ')' if interpretation else 'mismatch'}"
    )
    return result
