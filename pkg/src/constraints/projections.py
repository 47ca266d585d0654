"""
Local projections of the constraint families.

Each projection returns the closest admissible configuration for one
constraint; the solver's local step calls the batched forms directly.
"""

from typing import Optional

import numpy as np

from src.geom.surface import SurfaceQuery

ZERO_SINGULAR = 1e-12


def project_target(q_v, target) -> np.ndarray:
    return np.array(target, dtype=np.float64).reshape(3)


def positional_energy(weight: float, q_v, projection) -> float:
    d = np.asarray(q_v, dtype=np.float64) - np.asarray(projection, dtype=np.float64)
    return 0.5 * weight * float(d @ d)


def clamp_deformation(F, alpha: float) -> np.ndarray:
    """
    Closest matrix to each F whose singular values lie in [1/(1+alpha), 1+alpha].

    Inverted gradients (det < 0) are unflipped through the axis of the
    smallest singular value. Numerically zero gradients map to the identity.

    Args:
        F: (..., 3, 3) deformation gradients
        alpha: strain band half-width, scalar or one per matrix
    """
    F = np.asarray(F, dtype=np.float64)
    batch = F.reshape(-1, 3, 3)
    alpha = np.asarray(alpha, dtype=np.float64)
    if alpha.ndim:
        alpha = alpha.reshape(-1, 1)
    u, s, vt = np.linalg.svd(batch)
    flip = np.linalg.det(u @ vt) < 0
    u[flip, :, -1] *= -1
    s[flip, -1] *= -1
    zero = np.abs(s).max(axis=1) < ZERO_SINGULAR

    s = np.clip(s, 1.0 / (1.0 + alpha), 1.0 + alpha)
    P = u @ (s[:, :, None] * vt)

    P[zero] = np.eye(3)
    return P.reshape(F.shape)


def deformation_gradient(rest_inv, tet_positions) -> np.ndarray:
    x = np.asarray(tet_positions, dtype=np.float64).reshape(4, 3)
    return (x[1:] - x[0]).T @ np.asarray(rest_inv, dtype=np.float64)


def project_tet_strain(rest_inv, tet_positions, alpha: float) -> np.ndarray:
    """
    Strain-limited positions of one tet.

    The clamped gradient is applied to the rest edges and the result is
    placed so its centroid matches the current tet's centroid.

    Returns:
        (4, 3) projected corner positions
    """
    x = np.asarray(tet_positions, dtype=np.float64).reshape(4, 3)
    rest_inv = np.asarray(rest_inv, dtype=np.float64)
    P = clamp_deformation(deformation_gradient(rest_inv, x), alpha)
    edges = (P @ np.linalg.inv(rest_inv)).T
    corners = np.vstack([np.zeros(3), edges])
    return corners - corners.mean(axis=0) + x.mean(axis=0)


def tet_strain_energy(rest_inv, tet_positions, alpha: float, weight: float = 1.0, volume: float = 1.0) -> float:
    """w * V / 2 * |F - P|_F^2 with P the clamped gradient."""
    F = deformation_gradient(rest_inv, tet_positions)
    P = clamp_deformation(F, alpha)
    return 0.5 * weight * volume * float(((F - P) ** 2).sum())


def project_push(q_v, forbidden, margin: float) -> Optional[np.ndarray]:
    """
    Push a point out of (or away from) a closed surface.

    Returns the closest surface point offset by `margin` along the feature
    pseudonormal when q_v is inside or nearer than `margin`, otherwise None.
    """
    query = forbidden if isinstance(forbidden, SurfaceQuery) else SurfaceQuery(forbidden)
    q_v = np.asarray(q_v, dtype=np.float64).reshape(3)
    hit = query.closest(q_v)
    if hit.distance >= margin and not query.is_inside(q_v, hit):
        return None
    normal = hit.normal
    length = np.linalg.norm(normal)
    if length == 0:
        return hit.point.copy()
    return hit.point + margin * normal / length
