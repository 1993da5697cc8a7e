"""Euclidean polyhedra in the upper half-space cut out by Z-plane half-spaces ``a·x <= s``."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from rigidity_lab.errors import InvalidInput
from rigidity_lab.hyperbolic.geometry import ZSurface, distance_to_origin

VERTEX_TOL = 1e-9


@dataclass(frozen=True)
class Face:
    plane: ZSurface          # outward covector plane.a
    polygon: np.ndarray      # vertices in counter-clockwise order about plane.a


@dataclass(frozen=True)
class Edge:
    faces: tuple[int, int]
    endpoints: np.ndarray    # 2 x 3


@dataclass(frozen=True)
class Polyhedron:
    planes: tuple[ZSurface, ...]
    faces: tuple[Face, ...]
    edges: tuple[Edge, ...]
    vertices: np.ndarray

    def radii(self) -> tuple[float, float]:
        """Distances from ``o`` to the nearest boundary point (lower bound) and farthest vertex."""
        inner = min(_distance_to_face(f) for f in self.faces)
        return inner, float(np.max(distance_to_origin(self.vertices)))


def _distance_to_face(face: Face, n: int = 40) -> float:
    """Smallest distance to ``o`` over a barycentric sample of the face (a sampled lower radius)."""
    P = face.polygon
    c = P.mean(axis=0)
    u, w = np.meshgrid(np.linspace(0, 1, n + 1), np.linspace(0, 1, n + 1))
    keep = u + w <= 1
    u, w = u[keep], w[keep]
    pts = [c + u[:, None] * (P[i] - c) + w[:, None] * (P[(i + 1) % len(P)] - c) for i in range(len(P))]
    return float(np.min(distance_to_origin(np.concatenate(pts))))


def half_space(a, s) -> ZSurface:
    a = np.asarray(a, dtype=float)
    n = np.linalg.norm(a)
    return ZSurface(a / n, float(s) / n)


def polyhedron_from_half_spaces(planes) -> Polyhedron:
    planes = tuple(planes)
    A = np.stack([p.a for p in planes])
    s = np.array([p.s for p in planes])
    verts = []
    for i, j, k in combinations(range(len(planes)), 3):
        M = A[[i, j, k]]
        if abs(np.linalg.det(M)) < 1e-12:
            continue
        x = np.linalg.solve(M, s[[i, j, k]])
        if np.all(A @ x <= s + VERTEX_TOL * max(1.0, np.abs(x).max())) and x[0] > 0:
            if not any(np.linalg.norm(x - v) < 1e-9 * max(1.0, np.abs(x).max()) for v in verts):
                verts.append(x)
    if len(verts) < 4:
        raise InvalidInput("half-spaces do not bound a solid polyhedron")
    V = np.array(verts)
    on = np.abs(V @ A.T - s[None, :]) <= VERTEX_TOL * np.maximum(1.0, np.abs(V).max(axis=1))[:, None]
    faces = []
    for f, plane in enumerate(planes):
        idx = np.flatnonzero(on[:, f])
        if len(idx) < 3:
            raise InvalidInput(f"half-space {f} does not contribute a face")
        P = V[idx]
        c = P.mean(axis=0)
        t1, t2 = plane.tangent_frame()
        ang = np.arctan2((P - c) @ t2, (P - c) @ t1)
        P = P[np.argsort(ang)]
        if np.cross(P[1] - P[0], P[2] - P[0]) @ plane.a < 0:
            P = P[::-1]
        faces.append(Face(plane, P))
    edges = []
    for f, g in combinations(range(len(planes)), 2):
        idx = np.flatnonzero(on[:, f] & on[:, g])
        if len(idx) == 2:
            edges.append(Edge((f, g), V[idx]))
    return Polyhedron(planes, tuple(faces), tuple(edges), V)


def expanding_box(q: float, tilt: float = 0.25, width: float | None = None) -> Polyhedron:
    """``Delta_q``: horospheres ``x^1 = 1/q`` and ``x^1 = q`` with four equidistant sides.

    The sides ``±x^2, ±x^3 = L + tilt (x^1 - 1)`` lean outward by ``atan(tilt)``; ``L = q/2`` unless
    given, so the box contains the geodesic ball of radius about ``log q`` around ``o``.
    """
    if q <= 1.0:
        raise InvalidInput("q must exceed 1")
    L = q / 2.0 if width is None else width
    if L - tilt * (1.0 - 1.0 / q) <= 0:
        raise InvalidInput("sides cross below the bottom face")
    planes = [half_space([-1, 0, 0], -1.0 / q), half_space([1, 0, 0], q)]
    for axis in (1, 2):
        for sign in (1.0, -1.0):
            a = np.zeros(3)
            a[0] = -tilt
            a[axis] = sign
            planes.append(half_space(a, L - tilt))
    return polyhedron_from_half_spaces(planes)
