from src.geom.primitives import (
    Plane,
    Cylinder,
    project_point_plane,
    point_in_cylinder,
    points_in_cylinder,
    best_fit_rotation,
    random_rotation,
)
from src.geom.bvh import TriangleBVH, closest_points_on_triangles, brute_force_closest
from src.geom.surface import SurfaceHit, SurfaceQuery, closest_point_on_surface

__all__ = [
    "Plane",
    "Cylinder",
    "project_point_plane",
    "point_in_cylinder",
    "points_in_cylinder",
    "best_fit_rotation",
    "random_rotation",
    "TriangleBVH",
    "closest_points_on_triangles",
    "brute_force_closest",
    "SurfaceHit",
    "SurfaceQuery",
    "closest_point_on_surface",
]
