from src.constraints.types import Constraint, ConstraintKind
from src.constraints.projections import (
    clamp_deformation,
    deformation_gradient,
    positional_energy,
    project_push,
    project_target,
    project_tet_strain,
    tet_strain_energy,
)
from src.constraints.builders import (
    build_correspondences,
    constraint_to_dict,
    pull_constraints,
    push_constraints,
    ridge_target_constraints,
    tet_strain_constraints,
)

__all__ = [
    "Constraint",
    "ConstraintKind",
    "clamp_deformation",
    "deformation_gradient",
    "positional_energy",
    "project_push",
    "project_target",
    "project_tet_strain",
    "tet_strain_energy",
    "build_correspondences",
    "constraint_to_dict",
    "pull_constraints",
    "push_constraints",
    "ridge_target_constraints",
    "tet_strain_constraints",
]
