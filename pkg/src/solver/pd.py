"""
Local/global projective dynamics iterations.
"""

from dataclasses import dataclass, field, replace
from typing import Optional, Sequence, Tuple

import numpy as np
from loguru import logger

from src.config.schemas import SolverParams
from src.constraints.projections import clamp_deformation, project_push
from src.constraints.types import Constraint, ConstraintKind
from src.errors import DivergenceError
from src.solver.system import Projections, System


@dataclass(frozen=True, eq=False)
class FitState:
    """Positions q, the positions q_prev before the last step and the constraint energy after each step."""
    q: np.ndarray
    q_prev: np.ndarray
    energy_history: Tuple[float, ...] = ()
    projections: Optional[Projections] = field(default=None, repr=False)

    def __post_init__(self):
        q = np.array(self.q, dtype=np.float64).reshape(-1, 3)
        q_prev = np.array(self.q_prev, dtype=np.float64).reshape(-1, 3)
        if q.shape != q_prev.shape:
            raise ValueError(f"q and q_prev differ in shape: {q.shape} vs {q_prev.shape}")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "q_prev", q_prev)
        object.__setattr__(self, "energy_history", tuple(self.energy_history))

    @classmethod
    def at_rest(cls, q) -> "FitState":
        return cls(q, np.array(q, dtype=np.float64, copy=True))


def local_step(q: np.ndarray, system: System, constraints: Sequence[Constraint]) -> Projections:
    """
    Project every constraint from the current positions.

    Positional targets are read from `constraints`, which must share the
    system's topology; inactive push constraints project onto q itself.
    """
    strain = clamp_deformation(system.deformation_gradients(q), system.tet_alpha) if len(system.tet_indices) else np.zeros((0, 3, 3))

    positional = [c for c in constraints if c.kind is not ConstraintKind.TET_STRAIN]
    if len(positional) != len(system.point_indices):
        raise ValueError(f"constraint set has {len(positional)} positional constraints, system was assembled with {len(system.point_indices)}")
    points = np.empty((len(positional), 3))
    for k, c in enumerate(positional):
        if c.kind is ConstraintKind.PUSH:
            pushed = project_push(q[c.indices[0]], c.surface, c.margin)
            points[k] = q[c.indices[0]] if pushed is None else pushed
        else:
            points[k] = c.target
    return Projections(strain=strain, positional=points)


def pd_iterate(state: FitState, system: System, constraints: Sequence[Constraint]) -> FitState:
    """
    One quasi-static local/global step.

    The inertial target is the current q with the velocity dropped, so the
    global step solves L q' = M/s^2 q + sum w A^T p and the state advances
    with q_prev <- q. The recorded energy is the constraint energy at q' with
    fresh projections; it never increases from one step to the next.

    Raises:
        DivergenceError: solve produced non-finite positions
    """
    projections = state.projections
    if projections is None:
        projections = local_step(state.q, system, constraints)
    q = system.solve(system.rhs(state.q, projections))
    if not np.isfinite(q).all():
        bad = np.flatnonzero(~np.isfinite(q).all(axis=1))
        raise DivergenceError(f"non-finite positions after global solve at {len(bad)} vertex(es), first vertex {int(bad[0])}")

    fresh = local_step(q, system, constraints)
    energy = system.constraint_energy(q, fresh)
    return FitState(q, state.q, state.energy_history + (energy,), fresh)


def pd_solve(state: FitState, system: System, constraints: Sequence[Constraint], params: Optional[SolverParams] = None) -> FitState:
    """Apply exactly params.pd_iterations local/global steps."""
    params = params or SolverParams()
    state = replace(state, projections=None)
    for _ in range(params.pd_iterations):
        state = pd_iterate(state, system, constraints)
    if state.energy_history:
        logger.debug(f"pd_solve: {params.pd_iterations} iterations, energy {state.energy_history[-1]:.6g}")
    return state
