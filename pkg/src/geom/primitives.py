from dataclasses import dataclass

import numpy as np

from src.errors import DegenerateGeometryError

UNIT_TOLERANCE = 1e-9


def _point(value, name: str) -> np.ndarray:
    out = np.array(value, dtype=np.float64, copy=True).reshape(3)
    if not np.isfinite(out).all():
        raise DegenerateGeometryError(f"{name} must be finite, got {out.tolist()}")
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class Plane:
    """Plane in normal form through `point` with unit `normal`."""
    point: np.ndarray
    normal: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "point", _point(self.point, "plane point"))
        object.__setattr__(self, "normal", _point(self.normal, "plane normal"))
        if abs(np.linalg.norm(self.normal) - 1.0) > UNIT_TOLERANCE:
            raise DegenerateGeometryError(f"plane normal must be unit length, got |n| = {np.linalg.norm(self.normal)}")


@dataclass(frozen=True, eq=False)
class Cylinder:
    """Capped cylinder around the segment start-end, meters."""
    start: np.ndarray
    end: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "start", _point(self.start, "cylinder start"))
        object.__setattr__(self, "end", _point(self.end, "cylinder end"))
        object.__setattr__(self, "radius", float(self.radius))
        if not self.length > 0:
            raise DegenerateGeometryError("cylinder start and end coincide")
        if not self.radius > 0:
            raise DegenerateGeometryError(f"cylinder radius must be > 0, got {self.radius}")

    @property
    def length(self) -> float:
        return float(np.linalg.norm(self.end - self.start))

    @property
    def axis(self) -> np.ndarray:
        return (self.end - self.start) / self.length

    @property
    def axis_midpoint(self) -> np.ndarray:
        return (self.start + self.end) / 2

    def transformed(self, rotation, translation=(0.0, 0.0, 0.0)) -> "Cylinder":
        rotation = np.asarray(rotation)
        translation = np.asarray(translation)
        return Cylinder(rotation @ self.start + translation, rotation @ self.end + translation, self.radius)


def project_point_plane(v, plane: Plane) -> np.ndarray:
    """Orthogonal projection of v onto the plane: v - ((v - r) . n) n."""
    v = np.asarray(v, dtype=np.float64)
    return v - np.dot(v - plane.point, plane.normal) * plane.normal


def points_in_cylinder(points, cylinder: Cylinder) -> np.ndarray:
    """Vectorized closed-interval membership test for (n, 3) points."""
    points = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    rel = points - cylinder.start
    axial = rel @ cylinder.axis
    radial = np.linalg.norm(rel - axial[:, None] * cylinder.axis, axis=1)
    return (axial >= 0.0) & (axial <= cylinder.length) & (radial <= cylinder.radius)


def point_in_cylinder(v, cylinder: Cylinder) -> bool:
    return bool(points_in_cylinder(v, cylinder)[0])


def best_fit_rotation(m) -> np.ndarray:
    """
    Closest proper rotation to a 3x3 matrix: R = U V^T from the SVD of m, with
    the axis of the smallest singular value flipped when det(U V^T) < 0.

    Raises:
        DegenerateGeometryError: every singular value below 1e-12
    """
    m = np.asarray(m, dtype=np.float64).reshape(3, 3)
    if not np.isfinite(m).all():
        raise DegenerateGeometryError("matrix must be finite")
    u, s, vt = np.linalg.svd(m)
    if s.max() < 1e-12:
        raise DegenerateGeometryError("matrix is numerically zero; rotation undefined")
    if np.linalg.det(u @ vt) < 0:
        u[:, -1] *= -1
    return u @ vt


def random_rotation(rng: np.random.Generator) -> np.ndarray:
    """Uniformly distributed proper rotation."""
    q, r = np.linalg.qr(rng.normal(size=(3, 3)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] *= -1
    return q
