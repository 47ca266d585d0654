from pathlib import Path
from typing import Optional

import numpy as np

from src.config.settings import asset_settings
from src.geom.primitives import Cylinder
from src.mesh.types import SurfaceMesh, TetMesh

UNIT_TET_NODES = "4 3 0 0\n1 0 0 0\n2 1 0 0\n3 0 1 0\n4 0 0 1\n"
UNIT_TET_ELE = "1 4 0\n1 1 2 3 4\n"


def unit_tet() -> TetMesh:
    return TetMesh([[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]], [[0, 1, 2, 3]])


def ridge_head() -> SurfaceMesh:
    """Head whose vertex mean is (0, 0, -1), with the worked-example vertices at 5, 7 and 9."""
    vertices = [
        [0, 1, -2], [0, -1, -2], [1, 0, -2], [-1, 0, -2],
        [0.5, 0, -1],
        [0, 0, 0.3],
        [0, 0, -1],
        [-1, 0, 0.5],
        [0, 0, -1],
        [0.5, 0, 0.2],
    ]
    return SurfaceMesh(vertices, [[0, 2, 1], [1, 3, 0], [4, 5, 6], [7, 8, 9]])


def ridge_cylinder(radius: float = 0.6) -> Cylinder:
    return Cylinder([-1, 0, 0], [1, 0, 0], radius)


def random_rest_tet(rng: np.random.Generator) -> np.ndarray:
    """(4, 3) corners of a random tet with comfortably positive volume."""
    while True:
        corners = rng.normal(size=(4, 3))
        volume = np.linalg.det((corners[1:] - corners[0]).T) / 6.0
        if volume > 0.05:
            return corners


def asset_dir() -> Optional[Path]:
    path = asset_settings.asset_dir
    return Path(path) if path and Path(path).is_dir() else None
