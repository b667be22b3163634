"""Convex polygon primitives used by the scenario and oracle modules.

All polygons are given as (k, 2) arrays of vertices; orientation is
normalized to counterclockwise on input.
"""
from __future__ import annotations

import numpy as np
from scipy.optimize import linprog

from .errors import ScenarioError


def as_polygon(vertices) -> np.ndarray:
    """Validate and normalize a convex polygon to CCW orientation."""
    verts = np.asarray(vertices, dtype=float)
    if verts.ndim != 2 or verts.shape[1] != 2 or len(verts) < 3:
        raise ScenarioError("polygon needs at least 3 planar vertices")
    area2 = _signed_area2(verts)
    if abs(area2) < 1e-12:
        raise ScenarioError("degenerate polygon")
    if area2 < 0:
        verts = verts[::-1].copy()
    # Convexity: every cross product of consecutive edges nonnegative.
    e = np.roll(verts, -1, axis=0) - verts
    cross = e[:, 0] * np.roll(e, -1, axis=0)[:, 1] - e[:, 1] * np.roll(e, -1, axis=0)[:, 0]
    if np.any(cross < -1e-12):
        raise ScenarioError("polygon is not convex")
    return verts


def _signed_area2(verts: np.ndarray) -> float:
    x, y = verts[:, 0], verts[:, 1]
    return float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def contains(verts: np.ndarray, points) -> np.ndarray:
    """Boundary-inclusive membership test for a CCW convex polygon.

    Returns a boolean array over the input points.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    a = verts
    b = np.roll(verts, -1, axis=0)
    e = b - a  # (k, 2)
    # cross(e_i, p - a_i) >= 0 for all edges <=> inside (CCW).
    d = pts[:, None, :] - a[None, :, :]  # (n, k, 2)
    cross = e[None, :, 0] * d[:, :, 1] - e[None, :, 1] * d[:, :, 0]
    return np.all(cross >= -1e-12, axis=1)


def boundary_distance(verts: np.ndarray, points) -> np.ndarray:
    """Exact Euclidean distance from each point to the polygon boundary.

    Computed as the minimum over edge segments; valid inside and outside.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    a = verts
    b = np.roll(verts, -1, axis=0)
    e = b - a
    ee = np.einsum("ij,ij->i", e, e)  # (k,)
    d = pts[:, None, :] - a[None, :, :]  # (n, k, 2)
    t = np.einsum("nkj,kj->nk", d, e) / ee[None, :]
    t = np.clip(t, 0.0, 1.0)
    proj = a[None, :, :] + t[:, :, None] * e[None, :, :]
    dist = np.linalg.norm(pts[:, None, :] - proj, axis=2)
    return dist.min(axis=1)


def inradius(verts: np.ndarray) -> float:
    """Radius of the largest inscribed circle of a convex polygon.

    Solved exactly as a small linear program: maximize r subject to the
    center lying at depth >= r behind every edge line.
    """
    a = verts
    b = np.roll(verts, -1, axis=0)
    e = b - a
    lengths = np.linalg.norm(e, axis=1)
    # Inward unit normal of a CCW edge.
    n = np.stack([-e[:, 1], e[:, 0]], axis=1) / lengths[:, None]
    # n.x + r <= n.a  becomes  -n.x + ... ; linprog minimizes, so flip r.
    a_ub = np.hstack([-n, np.ones((len(n), 1))])
    b_ub = -np.einsum("ij,ij->i", n, a)
    res = linprog(c=[0.0, 0.0, -1.0], A_ub=a_ub, b_ub=b_ub,
                  bounds=[(None, None)] * 3, method="highs")
    if not res.success:
        raise ScenarioError(f"inradius LP failed: {res.message}")
    return float(res.x[2])
