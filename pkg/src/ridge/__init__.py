from src.ridge.cylinder_ridge import (
    RidgeTargets,
    cylinder_plane,
    cylinder_ridge,
    ridge,
    select_cylinder_vertices,
    LENGTH_REJECTION,
)

__all__ = [
    "RidgeTargets",
    "cylinder_plane",
    "cylinder_ridge",
    "ridge",
    "select_cylinder_vertices",
    "LENGTH_REJECTION",
]
