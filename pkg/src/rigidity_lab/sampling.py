"""Seeded generators of random test instances (cones, interior directions, rotations)."""

from __future__ import annotations

import numpy as np

from rigidity_lab.cone import PolyhedralCone, cone_from_normals, spherical_triangle_inequalities
from rigidity_lab.errors import DegenerateCone


def random_rotation(rng: np.random.Generator) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((3, 3)))
    q *= np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] *= -1
    return q


def random_convex_normals(rng: np.random.Generator, k: int) -> np.ndarray:
    """Vertices of a random convex spherical k-gon inside an open hemisphere.

    Points on a planar ellipse at sorted angles are in convex position; central projection onto
    the sphere maps lines to great circles, so convexity survives.
    """
    while True:
        angles = np.sort(rng.uniform(0.0, 2 * np.pi, k))
        gaps = np.diff(np.concatenate([angles, [angles[0] + 2 * np.pi]]))
        if gaps.min() < 0.25 / k or gaps.max() > np.pi * 0.95:
            continue
        ax, ay = rng.uniform(0.3, 1.5, 2)
        cx, cy = rng.uniform(-0.3, 0.3, 2)
        pts = np.stack([cx + ax * np.cos(angles), cy + ay * np.sin(angles), -np.ones(k)], axis=1)
        n = pts / np.linalg.norm(pts, axis=1, keepdims=True)
        return n @ random_rotation(rng).T


def random_cone(rng: np.random.Generator, k: int) -> PolyhedralCone:
    while True:
        try:
            return cone_from_normals(random_convex_normals(rng, k))
        except DegenerateCone:
            continue


def random_dual_interior(rng: np.random.Generator, cone: PolyhedralCone, min_weight: float = 0.05) -> np.ndarray:
    """Unit vector ``sum w_j n_j`` with Dirichlet weights bounded away from zero."""
    w = rng.dirichlet(np.ones(cone.k)) + min_weight
    xi = w @ cone.normals
    return xi / np.linalg.norm(xi)


def random_admissible_beta(rng: np.random.Generator, low: float = 0.05, high: float = np.pi - 0.05) -> np.ndarray:
    while True:
        beta = rng.uniform(low, high, 3)
        if spherical_triangle_inequalities(beta):
            return beta
