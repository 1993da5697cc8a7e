"""Convex polyhedral cones in R^3, their polars, and the Gram-matrix view of 3-faced cones.

A k-faced cone is stored by its outward unit face normals ``n_j`` ordered so that
``det(n_j, n_{j+1}, n_{j+2}) < 0``.  Edge generators ``u_j`` span ``F_j ∩ F_{j+1}`` and
the dihedral angle along that edge is ``theta_j = pi - arc(n_j, n_{j+1})``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product

import numpy as np

from rigidity_lab.errors import (
    DegenerateCone,
    DegenerateSide,
    NonUnitNormal,
    NotPositiveDefinite,
    OutOfRangeAngle,
    ParallelNormals,
)

UNIT_TOL = 1e-9
PD_TOL = 1e-10


def arc(u, v):
    """Great-circle distance between unit vectors (vectorized over leading axes)."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    cross = np.linalg.norm(np.cross(u, v), axis=-1)
    dot = np.sum(u * v, axis=-1)
    return np.arctan2(cross, dot)


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


# ---------------------------------------------------------------- spherical trigonometry


def spherical_law_of_cosines(a: float, b: float, C: float) -> float:
    """Side opposite the angle ``C`` of a spherical triangle with sides ``a``, ``b`` around it."""
    for name, val in (("a", a), ("b", b), ("C", C)):
        if not 0.0 < val < np.pi:
            raise DegenerateSide(f"{name}={val!r} must lie in (0, pi)")
    c = np.cos(a) * np.cos(b) + np.sin(a) * np.sin(b) * np.cos(C)
    return float(np.arccos(np.clip(c, -1.0, 1.0)))


def spherical_triangle_inequalities(beta) -> bool:
    beta = np.asarray(beta, dtype=float)
    if beta.shape != (3,):
        raise OutOfRangeAngle("beta must have three entries")
    if np.any(beta < 0.0) or np.any(beta > np.pi):
        raise OutOfRangeAngle(f"angles {beta.tolist()} outside [0, pi]")
    b1, b2, b3 = beta
    return bool(b1 + b2 > b3 and b2 + b3 > b1 and b3 + b1 > b2 and beta.sum() < 2 * np.pi)


def triangle_inequality_margin(beta) -> float:
    """Signed distance (in the sup sense) from ``beta`` to the boundary of the admissible set."""
    b1, b2, b3 = np.asarray(beta, dtype=float)
    return float(min(b1 + b2 - b3, b2 + b3 - b1, b3 + b1 - b2, 2 * np.pi - (b1 + b2 + b3)))


# ---------------------------------------------------------------- Gram matrices


def gram_matrix(b) -> np.ndarray:
    b1, b2, b3 = np.asarray(b, dtype=float)
    return np.array([[1.0, b3, b2], [b3, 1.0, b1], [b2, b1, 1.0]])


def b_from_gram(G) -> np.ndarray:
    G = np.asarray(G, dtype=float)
    return np.array([G[1, 2], G[0, 2], G[0, 1]])


@dataclass(frozen=True)
class GramSpec:
    """Off-diagonal data ``b`` of a unit-diagonal 3x3 Gram matrix; ``b_i = n_{i+1}·n_{i+2}``."""

    b: np.ndarray
    G: np.ndarray = field(init=False)
    beta: np.ndarray = field(init=False)

    def __post_init__(self):
        b = np.asarray(self.b, dtype=float)
        if b.shape != (3,):
            raise OutOfRangeAngle("b must have three entries")
        if np.any(np.abs(b) > 1.0):
            raise OutOfRangeAngle(f"b entries {b.tolist()} outside [-1, 1]")
        object.__setattr__(self, "b", _frozen(b))
        object.__setattr__(self, "G", _frozen(gram_matrix(b)))
        object.__setattr__(self, "beta", _frozen(np.arccos(b)))

    @classmethod
    def from_beta(cls, beta) -> "GramSpec":
        return cls(np.cos(np.asarray(beta, dtype=float)))


def gram_positive_definite(spec: GramSpec, tol: float = PD_TOL) -> bool:
    return bool(np.linalg.eigvalsh(spec.G)[0] > tol)


# ---------------------------------------------------------------- cones


@dataclass(frozen=True)
class SphericalPolygon:
    vertices: np.ndarray
    side_arcs: np.ndarray

    @classmethod
    def from_vertices(cls, vertices) -> "SphericalPolygon":
        v = np.asarray(vertices, dtype=float)
        return cls(_frozen(v), _frozen(arc(v, np.roll(v, -1, axis=0))))

    def diagonal_arcs(self) -> np.ndarray:
        """Arcs between all non-adjacent vertex pairs, sorted."""
        v = self.vertices
        k = len(v)
        out = [arc(v[i], v[j]) for i in range(k) for j in range(i + 2, k) if not (i == 0 and j == k - 1)]
        return np.sort(np.array(out))


@dataclass(frozen=True)
class PolyhedralCone:
    normals: np.ndarray
    edges: np.ndarray
    dihedral_angles: np.ndarray
    label: str | None = None

    @property
    def k(self) -> int:
        return len(self.normals)

    def cross_section(self) -> SphericalPolygon:
        """``C ∩ S^2``; its vertices are the edge generators."""
        return SphericalPolygon.from_vertices(self.edges)

    def dual_cross_section(self) -> SphericalPolygon:
        """``C* ∩ S^2``; its vertices are the face normals and its sides have length ``pi - theta_j``."""
        return SphericalPolygon.from_vertices(self.normals)

    def contains(self, x, tol: float = 0.0) -> np.ndarray:
        return np.all(np.asarray(x) @ self.normals.T <= tol, axis=-1)

    def dual_contains(self, y, tol: float = 0.0) -> np.ndarray:
        return np.all(np.asarray(y) @ self.edges.T <= tol, axis=-1)

    def dual_interior(self, y, margin: float = 1e-12) -> np.ndarray:
        return np.all(np.asarray(y) @ self.edges.T < -margin, axis=-1)

    def gram(self) -> GramSpec:
        """Gram data of a 3-faced cone, ``b_i = n_{i+1}·n_{i+2}``."""
        if self.k != 3:
            raise ValueError("Gram data is defined for 3-faced cones only")
        n = self.normals
        return GramSpec(np.array([n[1] @ n[2], n[2] @ n[0], n[0] @ n[1]]))

    def rotated(self, R) -> "PolyhedralCone":
        return cone_from_normals(self.normals @ np.asarray(R).T, label=self.label)


def _triple_dets(v: np.ndarray) -> np.ndarray:
    return np.linalg.det(np.stack([v, np.roll(v, -1, axis=0), np.roll(v, -2, axis=0)], axis=1))


def _angular_order(n: np.ndarray) -> np.ndarray:
    m = n.sum(axis=0)
    if np.linalg.norm(m) < 1e-12:
        raise DegenerateCone("normals do not lie in an open hemisphere")
    m /= np.linalg.norm(m)
    e1 = np.cross(m, [1.0, 0.0, 0.0])
    if np.linalg.norm(e1) < 0.5:
        e1 = np.cross(m, [0.0, 1.0, 0.0])
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(m, e1)
    return np.argsort(np.arctan2(n @ e2, n @ e1))


def cone_from_normals(normals, label: str | None = None, tol: float = UNIT_TOL) -> PolyhedralCone:
    n = np.array(normals, dtype=float)
    if n.ndim != 2 or n.shape[1] != 3 or n.shape[0] < 3:
        raise DegenerateCone("need at least three 3-vectors")
    norms = np.linalg.norm(n, axis=1)
    if np.any(np.abs(norms - 1.0) > tol):
        raise NonUnitNormal(f"normal lengths {norms.tolist()}")
    k = len(n)
    for i in range(k):
        for j in range(i + 1, k):
            if np.linalg.norm(np.cross(n[i], n[j])) < tol:
                raise ParallelNormals(f"normals {i} and {j} are parallel")

    dets = _triple_dets(n)
    if np.all(dets > 0):
        n = n[::-1].copy()
    elif not np.all(dets < 0):
        n = n[_angular_order(n)]
        dets = _triple_dets(n)
        if np.all(dets > 0):
            n = n[::-1].copy()
        elif not np.all(dets < 0):
            raise DegenerateCone("normals do not bound a convex cone in any cyclic order")

    u = np.cross(n, np.roll(n, -1, axis=0))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    # every edge generator must lie strictly inside the half-spaces of the non-adjacent faces
    s = u @ n.T
    for j in range(k):
        others = [i for i in range(k) if i not in (j, (j + 1) % k)]
        if others and np.any(s[j, others] >= -1e-12):
            raise DegenerateCone(f"edge {j} is not an edge of the cone")
    if np.any(u.sum(axis=0) @ n.T >= 0) or np.any(n.sum(axis=0) @ u.T >= 0):
        raise DegenerateCone("cone or polar has empty interior")
    if np.any(_triple_dets(u) <= 0):
        raise DegenerateCone("edge generators are not positively oriented")

    theta = np.pi - arc(n, np.roll(n, -1, axis=0))
    return PolyhedralCone(_frozen(n), _frozen(u), _frozen(theta), label)


def polar_cone(cone: PolyhedralCone) -> PolyhedralCone:
    """``C* = span(n_j) = face(u_j)``: the edge generators become the face normals."""
    label = None if cone.label is None else f"{cone.label}*"
    return cone_from_normals(cone.edges, label=label)


def cone_from_gram(spec: GramSpec) -> PolyhedralCone:
    """Canonical 3-faced cone with ``n_i·n_j = G_ij``.

    Rows of the lower Cholesky factor give ``n_1 = (1,0,0)`` and ``n_2`` in the xy-plane; the
    z-axis is then reflected so the orientation convention holds without relabelling faces.
    """
    if not gram_positive_definite(spec):
        raise NotPositiveDefinite(f"G_b with b={spec.b.tolist()} is not positive definite")
    L = np.linalg.cholesky(spec.G)
    L[:, 2] *= -1.0
    L /= np.linalg.norm(L, axis=1, keepdims=True)
    return cone_from_normals(L)


def cone_from_beta(beta) -> PolyhedralCone:
    return cone_from_gram(GramSpec.from_beta(beta))


def dihedral_relabelings(k: int):
    """All cyclic shifts and reflections of range(k)."""
    base = np.arange(k)
    for shift, flip in product(range(k), (False, True)):
        p = np.roll(base, -shift)
        yield p[::-1] if flip else p


def is_isometric(c1: PolyhedralCone, c2: PolyhedralCone, tol: float = 1e-9) -> bool:
    """Congruence of the dual polygons up to cyclic/reflective relabelling.

    Point sets on the sphere are congruent iff their Gram matrices agree, so this compares the
    full normal Gram matrices under every admissible relabelling.
    """
    if c1.k != c2.k:
        return False
    G1 = c1.normals @ c1.normals.T
    G2 = c2.normals @ c2.normals.T
    return any(np.max(np.abs(G1 - G2[np.ix_(p, p)])) <= tol for p in dihedral_relabelings(c1.k))


def same_dihedral_angles(c1: PolyhedralCone, c2: PolyhedralCone, tol: float = 1e-12) -> bool:
    return c1.k == c2.k and bool(np.max(np.abs(c1.dihedral_angles - c2.dihedral_angles)) <= tol)


def orthant() -> PolyhedralCone:
    """``{x >= 0}`` with ``n_j = -e_j``."""
    return cone_from_normals(-np.eye(3), label="orthant")
