"""
Outer fitting loop: rebuild correspondences, reassemble when the constraint
topology changes, run a projective dynamics solve, repeat until the relative
change of the constraint energy drops below delta_eps.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

import numpy as np
from loguru import logger
from scipy.spatial import cKDTree

from src.config.schemas import FitIterationReport, FitReport, PullTarget, SolverParams, TetComponent, Weights
from src.constraints.builders import (
    build_correspondences,
    pull_constraints,
    push_constraints,
    ridge_target_constraints,
    tet_strain_constraints,
)
from src.constraints.types import Constraint
from src.errors import MeshParseError, MisalignmentError
from src.geom.surface import SurfaceQuery
from src.mesh.io import read_obj, read_tetgen, tetgen_paths
from src.mesh.types import SurfaceMesh, TetMesh, tet_boundary, vertex_normals
from src.ridge.cylinder_ridge import RidgeTargets
from src.solver.pd import FitState, local_step, pd_solve
from src.solver.system import System, assemble, topology_key
from src.utils.metrics import PhaseTimer, SolveMetrics, get_metrics_collector

MISALIGNMENT_LIMIT = 3
BOUNDARY_MATCH_TOLERANCE = 1e-9


@dataclass(frozen=True, eq=False)
class Template:
    """
    Tet components in solver order (S, then J, then C when present) and the
    boundary surface that gets fitted, with boundary_to_tet mapping each
    boundary vertex to its solver vertex.
    """
    components: Dict[TetComponent, TetMesh]
    boundary: SurfaceMesh
    boundary_to_tet: np.ndarray

    @property
    def tet_meshes(self) -> List[TetMesh]:
        return list(self.components.values())

    @property
    def offsets(self) -> Dict[TetComponent, int]:
        out, offset = {}, 0
        for component, mesh in self.components.items():
            out[component] = offset
            offset += mesh.vertex_count
        return out

    @property
    def vertices(self) -> np.ndarray:
        return np.concatenate([m.vertices for m in self.components.values()])

    def split(self, q: np.ndarray) -> Dict[TetComponent, TetMesh]:
        """Component meshes at solver positions q."""
        return {
            component: mesh.with_vertices(q[offset:offset + mesh.vertex_count])
            for (component, mesh), offset in zip(self.components.items(), self.offsets.values())
        }


def template_from_tet(mesh: TetMesh, extra: Optional[Dict[TetComponent, TetMesh]] = None) -> Template:
    """Template whose boundary is the outer surface of the tet-S mesh."""
    components = {TetComponent.S: mesh}
    for component in (TetComponent.J, TetComponent.C):
        if extra and component in extra:
            components[component] = extra[component]
    boundary, vertex_map = tet_boundary(mesh)
    return Template(components, boundary, vertex_map)


def _match_boundary(boundary: SurfaceMesh, mesh: TetMesh, source: Path) -> np.ndarray:
    tree = cKDTree(mesh.vertices)
    distance, index = tree.query(boundary.vertices)
    tolerance = BOUNDARY_MATCH_TOLERANCE * max(mesh.bbox_diag, 1.0)
    unmatched = np.flatnonzero(distance > tolerance)
    if len(unmatched):
        raise MeshParseError(
            f"{source}: {len(unmatched)} boundary vertex(es) coincide with no tet-S node, first vertex {int(unmatched[0])}"
        )
    return index.astype(np.int64)


def load_template(directory: Union[str, Path]) -> Template:
    """
    Read tet_S.node/.ele (required), tet_J.* and tet_C.* (optional) and boundary.obj (optional).

    Raises:
        FileNotFoundError: tet_S missing
        MeshParseError: unreadable mesh, or boundary.obj vertices not on tet-S nodes
    """
    directory = Path(directory)
    node_path, _ = tetgen_paths(directory / "tet_S")
    if not node_path.is_file():
        raise FileNotFoundError(f"template directory {directory} has no tet_S.node")

    mesh = read_tetgen(directory / "tet_S")
    extra = {}
    for component in (TetComponent.J, TetComponent.C):
        node, ele = tetgen_paths(directory / f"tet_{component.value}")
        if node.is_file() and ele.is_file():
            extra[component] = read_tetgen(node)

    template = template_from_tet(mesh, extra)
    boundary_path = directory / "boundary.obj"
    if boundary_path.is_file():
        boundary = read_obj(boundary_path)
        template = Template(template.components, boundary, _match_boundary(boundary, mesh, boundary_path))

    logger.info(
        f"Loaded template {directory}: components {[c.value for c in template.components]}, "
        f"{template.boundary.vertex_count} boundary vertices"
    )
    return template


def mean_surface_distance(points: np.ndarray, target: SurfaceQuery) -> float:
    points = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    if len(points) == 0:
        return 0.0
    return float(np.mean([target.closest(p).distance for p in points]))


@dataclass(frozen=True, eq=False)
class FitResult:
    state: FitState
    report: FitReport
    template: Template

    @property
    def converged(self) -> bool:
        return self.report.converged

    def surface(self) -> SurfaceMesh:
        return self.template.boundary.with_vertices(self.state.q[self.template.boundary_to_tet])

    def tet_meshes(self) -> Dict[TetComponent, TetMesh]:
        return self.template.split(self.state.q)


def _relative_change(energy: float, previous: float) -> float:
    return abs(energy - previous) / max(previous, np.finfo(np.float64).eps)


def fit(
    template: Template,
    target: SurfaceMesh,
    ridge_targets=None,
    weights: Optional[Weights] = None,
    params: Optional[SolverParams] = None,
    pulls: Sequence[PullTarget] = (),
    forbidden: Optional[SurfaceMesh] = None,
    metrics: Optional[SolveMetrics] = None,
) -> FitResult:
    """
    Deform the template until its boundary settles onto the target surface.

    Args:
        template: tet components and fitted boundary
        target: surface to fit to
        ridge_targets: RidgeTargets or a list of them, indexed by boundary vertex (Target constraints)
        weights: constraint weights, defaults from the weight table
        params: solver parameters, defaults from the parameter table
        pulls: landmark targets indexed by boundary vertex (Pull constraints)
        forbidden: closed surface the boundary is pushed out of (Push constraints)
        metrics: collector for timings and counters, the global one when None

    Returns:
        FitResult with the final state and the per-outer-iteration report

    Raises:
        MisalignmentError: no correspondence survived the gates for 3 outer iterations in a row
        DivergenceError, FactorizationError: propagated from the solver
    """
    weights = weights or Weights()
    params = params or SolverParams()
    metrics = metrics or get_metrics_collector()
    query = SurfaceQuery(target)
    boundary_map = template.boundary_to_tet

    static: List[Constraint] = []
    for (component, mesh), offset in zip(template.components.items(), template.offsets.values()):
        static += tet_strain_constraints(mesh, component, weights, params.alpha, offset)
    if isinstance(ridge_targets, RidgeTargets):
        ridge_targets = [ridge_targets]
    for targets in ridge_targets or ():
        static += ridge_target_constraints(targets, boundary_map, weights)
    static += pull_constraints(pulls, boundary_map, weights)
    if forbidden is not None:
        static += push_constraints(boundary_map, SurfaceQuery(forbidden), params.contact_margin, weights)

    q = template.vertices
    initial_distance = mean_surface_distance(q[boundary_map], query)
    logger.info(
        f"Fitting {len(q)} vertices ({len(static)} fixed constraints) to target with {target.face_count} faces; "
        f"initial mean surface distance {initial_distance:.6g} m"
    )

    system: Optional[System] = None
    state = FitState.at_rest(q)
    previous_energy: Optional[float] = None
    iterations: List[FitIterationReport] = []
    factorizations = 0
    empty_streak = 0
    converged = False

    for outer in range(1, params.max_outer_iterations + 1):
        with PhaseTimer("correspondences", metrics):
            boundary = template.boundary.with_vertices(state.q[boundary_map])
            correspondences = build_correspondences(
                boundary.vertices,
                vertex_normals(boundary),
                query,
                params.correspondence_distance,
                params.max_correspondence_angle,
                weights.w_corr,
                boundary_map,
            )
        if not correspondences:
            empty_streak += 1
            logger.warning(f"Outer iteration {outer}: no correspondences ({empty_streak} in a row)")
            if empty_streak >= MISALIGNMENT_LIMIT:
                raise MisalignmentError(
                    f"no correspondences within {params.correspondence_distance:.4g} m for {empty_streak} consecutive outer iterations"
                )
        else:
            empty_streak = 0

        constraints = static + correspondences
        if system is None or system.key != topology_key(constraints):
            with PhaseTimer("assemble", metrics):
                system = assemble(template.tet_meshes, constraints, params)
            factorizations += 1
            metrics.record_factorization()

        if previous_energy is None:
            previous_energy = system.constraint_energy(state.q, local_step(state.q, system, constraints))

        with PhaseTimer("pd_solve", metrics):
            state = pd_solve(FitState.at_rest(state.q), system, constraints, params)
        metrics.record_pd_iterations(params.pd_iterations)
        metrics.record_outer_iteration(len(correspondences))

        energy = system.constraint_energy(state.q, local_step(state.q, system, constraints))
        distance = mean_surface_distance(state.q[boundary_map], query)
        iterations.append(FitIterationReport(
            outer_iter=outer,
            energy=energy,
            n_correspondences=len(correspondences),
            mean_surface_dist=distance,
        ))
        change = _relative_change(energy, previous_energy)
        logger.debug(
            f"Outer iteration {outer}: energy {energy:.6g} (relative change {change:.3g}), "
            f"{len(correspondences)} correspondences, mean surface distance {distance:.6g} m"
        )
        # An iteration without correspondences carries no fitting signal.
        if correspondences and change < params.delta_eps:
            converged = True
            break
        previous_energy = energy

    report = FitReport(
        converged=converged,
        initial_mean_surface_dist=initial_distance,
        iterations=iterations,
        factorizations=factorizations,
    )
    if converged:
        logger.info(f"Fit converged after {len(iterations)} outer iteration(s); mean surface distance {iterations[-1].mean_surface_dist:.6g} m")
    else:
        logger.warning(f"Fit stopped at max_outer_iterations={params.max_outer_iterations} without converging")
    return FitResult(state=state, report=report, template=template)
