"""Cylinder-trapping certificates for the base face of a flat reference polyhedron.

Edge ``j`` runs from ``p_j`` to ``p_{j+1}``; ``gamma_ref[j]`` is the dihedral angle between the
base and the side face through that edge.  An axis ``v`` traps the base when the cylinder face
over every edge leans at least as far inward as the polyhedron's side face.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from rigidity_lab.errors import (
    ApexInPlane,
    AxisBelowBase,
    AxisParallelToEdge,
    DegenerateTriangle,
    InvalidInput,
    LengthMismatch,
    ZeroAngle,
)
from rigidity_lab.cone import arc

COPLANAR_TOL = 1e-10
STRICT_SLACK = 1e-10
ROUNDING_SLACK = 1e-12


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class BaseFace:
    vertices: np.ndarray
    W: np.ndarray
    gamma_ref: np.ndarray
    edge_lengths: np.ndarray = field(init=False)

    def __post_init__(self):
        p = np.asarray(self.vertices, dtype=float)
        W = np.asarray(self.W, dtype=float)
        g = np.asarray(self.gamma_ref, dtype=float)
        if p.ndim != 2 or p.shape[1] != 3 or len(p) < 3:
            raise InvalidInput("a base face needs at least three 3-vectors")
        if g.shape != (len(p),):
            raise LengthMismatch(f"{len(p)} vertices but {g.shape} reference angles")
        if abs(np.linalg.norm(W) - 1.0) > 1e-9:
            raise InvalidInput("W must be a unit vector")
        heights = (p - p[0]) @ W
        if np.max(np.abs(heights)) > COPLANAR_TOL * max(1.0, np.max(np.abs(p))):
            raise InvalidInput("vertices are not coplanar with normal W")
        if self.signed_area_of(p, W) <= 0:
            raise InvalidInput("vertices must run counter-clockwise about W")
        object.__setattr__(self, "vertices", _frozen(p))
        object.__setattr__(self, "W", _frozen(W))
        object.__setattr__(self, "gamma_ref", _frozen(g))
        object.__setattr__(self, "edge_lengths", _frozen(np.linalg.norm(self.edges, axis=1)))

    @staticmethod
    def signed_area_of(p: np.ndarray, W: np.ndarray) -> float:
        return 0.5 * float(np.sum(np.cross(p, np.roll(p, -1, axis=0)) @ W))

    @property
    def edges(self) -> np.ndarray:
        return np.roll(self.vertices, -1, axis=0) - self.vertices

    @property
    def area(self) -> float:
        return self.signed_area_of(self.vertices, self.W)

    def with_gamma(self, gamma) -> "BaseFace":
        return BaseFace(self.vertices, self.W, gamma)


@dataclass(frozen=True)
class CylinderCertificate:
    v: np.ndarray
    cos_cylinder: np.ndarray   # N_j·W
    cos_reference: np.ndarray
    slack: np.ndarray          # cos(gamma_bar_j) - N_j·W
    trapped: bool
    cot_sum: float

    @property
    def per_edge(self) -> list[tuple[float, float, float]]:
        return [(float(a), float(b), float(c)) for a, b, c in zip(self.cos_cylinder, self.cos_reference, self.slack)]

    @property
    def cylinder_angles(self) -> np.ndarray:
        return np.arccos(np.clip(self.cos_cylinder, -1.0, 1.0))


def _trapped(slack: np.ndarray) -> np.ndarray:
    return np.all(slack >= -ROUNDING_SLACK, axis=-1) & np.any(slack > STRICT_SLACK, axis=-1)


def cylinder_normals(base: BaseFace, v: np.ndarray) -> np.ndarray:
    c = np.cross(base.edges, v)
    return c / np.linalg.norm(c, axis=1, keepdims=True)


def is_trapped(base: BaseFace, v) -> CylinderCertificate:
    v = np.asarray(v, dtype=float)
    v = v / np.linalg.norm(v)
    if v @ base.W <= 0:
        raise AxisBelowBase("the axis must point to the upper side of the base")
    c = np.cross(base.edges, v)
    if np.min(np.linalg.norm(c, axis=1) / base.edge_lengths) < 1e-12:
        raise AxisParallelToEdge("the axis is parallel to a base edge")
    N = c / np.linalg.norm(c, axis=1, keepdims=True)
    cos_hat = N @ base.W
    cos_ref = np.cos(base.gamma_ref)
    slack = cos_ref - cos_hat
    return CylinderCertificate(_frozen(v), _frozen(cos_hat), _frozen(cos_ref), _frozen(slack),
                               bool(_trapped(slack)), cot_sum(base))


def _cot(g: np.ndarray) -> np.ndarray:
    g = np.asarray(g, dtype=float)
    if np.any(g <= 0.0) or np.any(g >= np.pi):
        raise ZeroAngle("angles must lie strictly between 0 and pi")
    return np.cos(g) / np.sin(g)


def cot_sum(base: BaseFace) -> float:
    """``sum_j cot(gamma_bar_j) l_j``."""
    return float(_cot(base.gamma_ref) @ base.edge_lengths)


def cylinder_cot_sum(base: BaseFace, v) -> float:
    """``sum_j cot(gamma_hat_j) l_j`` for the cylinder angles of axis ``v``; zero by telescoping."""
    cert = is_trapped(base, v)
    return float(_cot(cert.cylinder_angles) @ base.edge_lengths)


# ---------------------------------------------------------------- tetrahedra


@dataclass(frozen=True)
class TetraIdentity:
    lhs: float            # from the actual dihedral angles along the base edges
    lhs_signed: float     # from signed distances of the foot to the edge lines
    rhs: float            # 2 Area / height
    height: float
    area: float
    foot: np.ndarray

    @property
    def relative_error(self) -> float:
        return abs(self.lhs - self.rhs) / abs(self.rhs)


def tetra_base_angles(apex, base_vertices, W) -> np.ndarray:
    """Interior dihedral angles between the base and the side faces ``(p_j, p_{j+1}, apex)``."""
    p = np.asarray(base_vertices, dtype=float)
    apex = np.asarray(apex, dtype=float)
    q = np.roll(p, -1, axis=0)
    m = np.cross(q - p, apex - p)
    m /= np.linalg.norm(m, axis=1, keepdims=True)
    # outward side normals point away from the base interior; the base's outward normal is -W
    centroid = p.mean(axis=0)
    m *= np.where(np.sum(m * (centroid - p), axis=1) > 0, -1.0, 1.0)[:, None]
    return np.pi - arc(m, -np.asarray(W, dtype=float)[None, :])


def tetra_cot_identity(apex, base: BaseFace) -> TetraIdentity:
    p = base.vertices
    if len(p) != 3:
        raise InvalidInput("the tetrahedron identity needs a triangular base")
    area = base.area
    scale = max(base.edge_lengths)
    if area <= 1e-14 * scale * scale:
        raise DegenerateTriangle("base triangle has no area")
    apex = np.asarray(apex, dtype=float)
    h = float((apex - p[0]) @ base.W)
    if abs(h) <= 1e-12 * scale:
        raise ApexInPlane("apex lies in the base plane")
    if h < 0:
        raise InvalidInput("apex must lie on the W side of the base")
    foot = apex - h * base.W
    gamma = tetra_base_angles(apex, p, base.W)
    lhs = float(_cot(gamma) @ base.edge_lengths)
    # signed distance from the foot to each edge line, positive on the interior side
    inward = np.cross(base.W, base.edges)
    inward /= np.linalg.norm(inward, axis=1, keepdims=True)
    d = np.sum((foot - p) * inward, axis=1)
    lhs_signed = float(d @ base.edge_lengths / h)
    return TetraIdentity(lhs, lhs_signed, 2.0 * area / h, h, area, _frozen(foot))


def tetra_base_face(apex, base_vertices, W=None) -> BaseFace:
    """Base face with its reference angles read off the tetrahedron ``conv(base, apex)``."""
    p = np.asarray(base_vertices, dtype=float)
    if W is None:
        W = np.cross(p[1] - p[0], p[2] - p[0])
        W /= np.linalg.norm(W)
        if (np.asarray(apex) - p[0]) @ W < 0:
            W, p = -W, p[::-1].copy()
    return BaseFace(p, W, tetra_base_angles(apex, p, W))


# ---------------------------------------------------------------- axis search


@dataclass(frozen=True)
class TrappingSearch:
    witness: np.ndarray | None
    best_v: np.ndarray
    best_min_slack: float


def hemisphere_grid(W, resolution: int) -> np.ndarray:
    """Directions with polar angle ``i*pi/(2n)`` (i < n) and ``4 i`` azimuths on ring ``i``."""
    W = np.asarray(W, dtype=float)
    e1 = np.cross(W, [1.0, 0.0, 0.0])
    if np.linalg.norm(e1) < 0.5:
        e1 = np.cross(W, [0.0, 1.0, 0.0])
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(W, e1)
    pts = [W[None, :]]
    for i in range(1, resolution):
        phi = i * np.pi / (2 * resolution)
        psi = 2 * np.pi * np.arange(4 * i) / (4 * i)
        ring = np.sin(phi) * (np.cos(psi)[:, None] * e1 + np.sin(psi)[:, None] * e2) + np.cos(phi) * W
        pts.append(ring)
    return np.concatenate(pts)


def find_trapping_direction(base: BaseFace, grid: int = 64) -> TrappingSearch:
    V = hemisphere_grid(base.W, grid)
    c = np.cross(base.edges[None, :, :], V[:, None, :])
    norms = np.linalg.norm(c, axis=2)
    ok = np.all(norms / base.edge_lengths[None, :] > 1e-12, axis=1)
    N = c / np.where(norms > 0, norms, 1.0)[:, :, None]
    slack = np.cos(base.gamma_ref)[None, :] - N @ base.W
    trapped = _trapped(slack) & ok
    score = np.where(ok, slack.min(axis=1), -np.inf)
    key = np.where(trapped, score, -np.inf)
    order = np.lexsort((V[:, 2], V[:, 1], V[:, 0], -(key if trapped.any() else score)))
    i = int(order[0])
    return TrappingSearch(_frozen(V[i]) if trapped.any() else None, _frozen(V[i]), float(score[i]))
