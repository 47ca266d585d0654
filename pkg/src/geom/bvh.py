"""
Exact point-to-triangle closest points and an AABB hierarchy over triangles.
"""

from typing import List, Tuple

import numpy as np


def closest_points_on_triangles(p, a: np.ndarray, b: np.ndarray, c: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Closest point on each triangle (a[i], b[i], c[i]) to the query point p.

    Region tests follow Ericson's ClosestPtPointTriangle, evaluated for all
    triangles at once. Vertex and edge regions yield barycentrics with exact
    zeros, which callers use to identify the closest feature.

    Returns:
        (points (k, 3), barycentrics (k, 3))
    """
    p = np.asarray(p, dtype=np.float64)
    ab = b - a
    ac = c - a
    ap = p - a
    bp = p - b
    cp = p - c

    d1 = np.einsum("ij,ij->i", ab, ap)
    d2 = np.einsum("ij,ij->i", ac, ap)
    d3 = np.einsum("ij,ij->i", ab, bp)
    d4 = np.einsum("ij,ij->i", ac, bp)
    d5 = np.einsum("ij,ij->i", ab, cp)
    d6 = np.einsum("ij,ij->i", ac, cp)
    va = d3 * d6 - d5 * d4
    vb = d5 * d2 - d1 * d6
    vc = d1 * d4 - d3 * d2

    k = len(a)
    bary = np.zeros((k, 3))
    done = np.zeros(k, dtype=bool)

    def take(mask, u, v, w):
        mask = mask & ~done
        bary[mask, 0] = u[mask] if isinstance(u, np.ndarray) else u
        bary[mask, 1] = v[mask] if isinstance(v, np.ndarray) else v
        bary[mask, 2] = w[mask] if isinstance(w, np.ndarray) else w
        done[mask] = True

    with np.errstate(divide="ignore", invalid="ignore"):
        take((d1 <= 0) & (d2 <= 0), 1.0, 0.0, 0.0)
        take((d3 >= 0) & (d4 <= d3), 0.0, 1.0, 0.0)

        t = d1 / (d1 - d3)
        take((vc <= 0) & (d1 >= 0) & (d3 <= 0), 1.0 - t, t, np.zeros(k))

        take((d6 >= 0) & (d5 <= d6), 0.0, 0.0, 1.0)

        t = d2 / (d2 - d6)
        take((vb <= 0) & (d2 >= 0) & (d6 <= 0), 1.0 - t, np.zeros(k), t)

        t = (d4 - d3) / ((d4 - d3) + (d5 - d6))
        take((va <= 0) & ((d4 - d3) >= 0) & ((d5 - d6) >= 0), np.zeros(k), 1.0 - t, t)

        denom = 1.0 / (va + vb + vc)
        v = vb * denom
        w = vc * denom
        take(np.ones(k, dtype=bool), 1.0 - v - w, v, w)

    points = bary[:, :1] * a + bary[:, 1:2] * b + bary[:, 2:] * c

    # Zero-area triangles can slip through every region test; fall back to their nearest corner.
    broken = ~np.isfinite(points).all(axis=1)
    if broken.any():
        corners = np.stack([a[broken], b[broken], c[broken]], axis=1)
        nearest = np.argmin(((corners - p) ** 2).sum(axis=2), axis=1)
        bary[broken] = np.eye(3)[nearest]
        points[broken] = corners[np.arange(len(nearest)), nearest]
    return points, bary


class TriangleBVH:
    """
    Axis-aligned bounding volume hierarchy over the triangles of a surface.

    Built once by median splits along the longest axis of the triangle
    centroids; immutable afterwards and safe for concurrent queries.
    """

    def __init__(self, triangles: np.ndarray, leaf_size: int = 4):
        self.triangles = np.asarray(triangles, dtype=np.float64).reshape(-1, 3, 3)
        self.leaf_size = max(1, int(leaf_size))
        self.order = np.arange(len(self.triangles))

        self.lo: List[np.ndarray] = []
        self.hi: List[np.ndarray] = []
        self.children: List[Tuple[int, int]] = []
        self.ranges: List[Tuple[int, int]] = []

        if len(self.triangles):
            self._tri_lo = self.triangles.min(axis=1)
            self._tri_hi = self.triangles.max(axis=1)
            self._centroids = self.triangles.mean(axis=1)
            self._build(0, len(self.triangles))
        self.lo = np.array(self.lo).reshape(-1, 3)
        self.hi = np.array(self.hi).reshape(-1, 3)

    def _build(self, start: int, end: int) -> int:
        index = len(self.ranges)
        members = self.order[start:end]
        self.lo.append(self._tri_lo[members].min(axis=0))
        self.hi.append(self._tri_hi[members].max(axis=0))
        self.ranges.append((start, end))
        self.children.append((-1, -1))

        if end - start > self.leaf_size:
            centroids = self._centroids[members]
            axis = int(np.argmax(centroids.max(axis=0) - centroids.min(axis=0)))
            mid = (end - start) // 2
            split = np.argpartition(centroids[:, axis], mid, kind="introselect")
            self.order[start:end] = members[split]
            left = self._build(start, start + mid)
            right = self._build(start + mid, end)
            self.children[index] = (left, right)
        return index

    @property
    def node_count(self) -> int:
        return len(self.ranges)

    def _box_distance2(self, node: int, p: np.ndarray) -> float:
        gap = np.maximum(np.maximum(self.lo[node] - p, 0.0), p - self.hi[node])
        return float(gap @ gap)

    def closest(self, p) -> Tuple[np.ndarray, int, float, np.ndarray]:
        """
        Exact closest point on any triangle.

        Returns:
            (point, triangle index, distance, barycentrics)
        """
        p = np.asarray(p, dtype=np.float64)
        if not len(self.triangles):
            raise ValueError("closest point query on an empty triangle set")

        best = (None, -1, np.inf, None)
        stack = [0]
        while stack:
            node = stack.pop()
            if self._box_distance2(node, p) > best[2]:
                continue
            left, right = self.children[node]
            if left < 0:
                start, end = self.ranges[node]
                members = self.order[start:end]
                tris = self.triangles[members]
                points, bary = closest_points_on_triangles(p, tris[:, 0], tris[:, 1], tris[:, 2])
                d2 = ((points - p) ** 2).sum(axis=1)
                k = int(np.argmin(d2))
                if d2[k] < best[2]:
                    best = (points[k], int(members[k]), float(d2[k]), bary[k])
                continue
            near, far = left, right
            if self._box_distance2(right, p) < self._box_distance2(left, p):
                near, far = right, left
            stack.append(far)
            stack.append(near)

        point, face, d2, bary = best
        return point, face, float(np.sqrt(d2)), bary


def brute_force_closest(p, triangles: np.ndarray) -> Tuple[np.ndarray, int, float, np.ndarray]:
    """Closest point by scanning every triangle; the oracle for TriangleBVH."""
    p = np.asarray(p, dtype=np.float64)
    triangles = np.asarray(triangles, dtype=np.float64).reshape(-1, 3, 3)
    if not len(triangles):
        raise ValueError("closest point query on an empty triangle set")
    points, bary = closest_points_on_triangles(p, triangles[:, 0], triangles[:, 1], triangles[:, 2])
    d2 = ((points - p) ** 2).sum(axis=1)
    k = int(np.argmin(d2))
    return points[k], k, float(np.sqrt(d2[k])), bary[k]
