"""Pyramids cut from a cone by the plane ``x·xi = -1`` and their comparison energy.

Indexing: ``A_j`` lies on the edge ``u_j = F_j ∩ F_{j+1}``, so the side face ``F_j ∩ P`` is the
triangle ``O A_{j-1} A_j``.  The lateral edge ``OA_j`` carries the dihedral angle ``theta_j`` and
the base edge ``A_{j-1}A_j = F_j ∩ B`` carries the base angle ``gamma_j``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from rigidity_lab.cone import PolyhedralCone, arc, cone_from_normals
from rigidity_lab.errors import (
    DegenerateCone,
    InvalidInput,
    LengthMismatch,
    StencilInvalid,
    XiOutsideDualInterior,
)

DUAL_MARGIN = 1e-12


@dataclass(frozen=True)
class Pyramid:
    cone: PolyhedralCone
    xi: np.ndarray
    base_vertices: np.ndarray
    side_face_areas: np.ndarray
    base_area: float
    gamma: np.ndarray
    lateral_edge_lengths: np.ndarray
    base_edge_lengths: np.ndarray

    @property
    def k(self) -> int:
        return self.cone.k

    def base_identity_residual(self) -> float:
        """``|B| - sum cos(gamma_j) |F_j ∩ P|``; zero up to rounding for every pyramid."""
        return float(self.base_area - np.cos(self.gamma) @ self.side_face_areas)


@dataclass(frozen=True)
class EnergyReport:
    value_direct: float
    value_angle_form: float
    gamma_reference: np.ndarray

    @property
    def difference(self) -> float:
        return self.value_direct - self.value_angle_form

    @property
    def value(self) -> float:
        return self.value_angle_form


def _signed_base_area(A: np.ndarray, xi: np.ndarray) -> float:
    # sum of signed triangles (O', A_{j-1}, A_j) around the foot O' = -xi of the apex
    foot = -xi
    P = A - foot
    return 0.5 * float(np.sum(np.cross(np.roll(P, 1, axis=0), P) @ xi))


def build_pyramid(cone: PolyhedralCone, xi) -> Pyramid:
    xi = np.asarray(xi, dtype=float)
    if abs(np.linalg.norm(xi) - 1.0) > 1e-9:
        raise InvalidInput(f"xi must be a unit vector, |xi| = {np.linalg.norm(xi)!r}")
    s = cone.edges @ xi
    if np.any(s >= -DUAL_MARGIN):
        raise XiOutsideDualInterior(f"u_j·xi = {s.tolist()} must all be negative")
    A = -cone.edges / s[:, None]
    A_prev = np.roll(A, 1, axis=0)
    areas = 0.5 * np.linalg.norm(np.cross(A_prev, A), axis=1)
    base = abs(_signed_base_area(A, xi))
    gamma = arc(cone.normals, xi)
    return Pyramid(
        cone=cone,
        xi=xi,
        base_vertices=A,
        side_face_areas=areas,
        base_area=base,
        gamma=gamma,
        lateral_edge_lengths=np.linalg.norm(A, axis=1),
        base_edge_lengths=np.linalg.norm(A - A_prev, axis=1),
    )


def energy(pyramid: Pyramid, gamma_ref) -> EnergyReport:
    gamma_ref = np.asarray(gamma_ref, dtype=float)
    if gamma_ref.shape != (pyramid.k,):
        raise LengthMismatch(f"expected {pyramid.k} reference angles, got {gamma_ref.shape}")
    cref = np.cos(gamma_ref)
    F = pyramid.side_face_areas
    direct = pyramid.base_area - cref @ F
    # cos(gamma_j) = n_j·xi exactly; avoids the round trip through arccos
    angle_form = F @ (pyramid.cone.normals @ pyramid.xi - cref)
    return EnergyReport(float(direct), float(angle_form), gamma_ref)


def energy_batch(cone: PolyhedralCone, xis: np.ndarray, gamma_ref) -> np.ndarray:
    """Angle-form energy for many unit ``xi`` at once; ``+inf`` outside the open dual cone."""
    xis = np.atleast_2d(np.asarray(xis, dtype=float))
    cref = np.cos(np.asarray(gamma_ref, dtype=float))
    s = xis @ cone.edges.T
    ok = np.all(s < -DUAL_MARGIN, axis=1)
    s = np.where(ok[:, None], s, -1.0)
    A = -cone.edges[None, :, :] / s[:, :, None]
    F = 0.5 * np.linalg.norm(np.cross(np.roll(A, 1, axis=1), A), axis=2)
    E = np.sum(F * (xis @ cone.normals.T - cref[None, :]), axis=1)
    return np.where(ok, E, np.inf)


def angle_condition(cone: PolyhedralCone, gamma_ref) -> list[bool]:
    """Entry j: ``|pi - (gref_j + gref_{j+1})| < theta_j``."""
    g = np.asarray(gamma_ref, dtype=float)
    if g.shape != (cone.k,):
        raise LengthMismatch(f"expected {cone.k} reference angles, got {g.shape}")
    lhs = np.abs(np.pi - (g + np.roll(g, -1)))
    return [bool(x) for x in lhs < cone.dihedral_angles]


def angle_condition_arc_form(cone: PolyhedralCone, ref_normals, ref_xi) -> list[bool]:
    """Equivalent arc form: ``|arc(n_j, n_{j+1})| < arc(xi_ref, nref_j) + arc(xi_ref, nref_{j+1})``."""
    ref_normals = np.asarray(ref_normals, dtype=float)
    side = arc(cone.normals, np.roll(cone.normals, -1, axis=0))
    d = arc(ref_normals, np.asarray(ref_xi, dtype=float))
    return [bool(x) for x in side < d + np.roll(d, -1)]


# ---------------------------------------------------------------- Schläfli derivative check

Family = Callable[[float], tuple]


@dataclass(frozen=True)
class SchlafliReport:
    energy_derivative: float
    predicted_derivative: float
    schlafli_residual: float
    theta_dot: np.ndarray
    gamma_dot: np.ndarray
    gamma_reference: np.ndarray
    step: float

    @property
    def derivative_residual(self) -> float:
        return self.energy_derivative - self.predicted_derivative


def _evaluate(family: Family, t: float) -> Pyramid:
    normals, xi = family(t)
    try:
        cone = normals if isinstance(normals, PolyhedralCone) else cone_from_normals(normals)
        return build_pyramid(cone, xi)
    except (DegenerateCone, XiOutsideDualInterior) as exc:
        raise StencilInvalid(f"family degenerates at t={t!r}: {exc}") from exc


def _central(family: Family, t0: float, h: float, gamma_ref: np.ndarray):
    plus, minus = _evaluate(family, t0 + h), _evaluate(family, t0 - h)
    if plus.k != minus.k:
        raise StencilInvalid("face count changes inside the stencil")
    dE = (energy(plus, gamma_ref).value_angle_form - energy(minus, gamma_ref).value_angle_form) / (2 * h)
    dtheta = (plus.cone.dihedral_angles - minus.cone.dihedral_angles) / (2 * h)
    dgamma = (plus.gamma - minus.gamma) / (2 * h)
    return dE, dtheta, dgamma


def schlafli_check(family: Family, t0: float = 0.0, h: float = 1e-5, tol: float = 1e-5) -> SchlafliReport:
    """Finite-difference audit of ``E'(t0) = ½ sum l_j theta_j'`` and the Schläfli identity.

    The reference angles are the family's own base angles at ``t0``.  If either residual exceeds
    ``tol`` the derivatives are Richardson-extrapolated with a second stencil at ``h/2``.
    """
    p0 = _evaluate(family, t0)
    gref = p0.gamma.copy()
    ell, lb = p0.lateral_edge_lengths, p0.base_edge_lengths

    def residuals(dE, dth, dg):
        return dE - 0.5 * ell @ dth, ell @ dth + lb @ dg

    dE, dth, dg = _central(family, t0, h, gref)
    r1, r2 = residuals(dE, dth, dg)
    step = h
    if max(abs(r1), abs(r2)) > tol:
        dE2, dth2, dg2 = _central(family, t0, h / 2, gref)
        dE, dth, dg = ((4 * b - a) / 3 for a, b in ((dE, dE2), (dth, dth2), (dg, dg2)))
        r1, r2 = residuals(dE, dth, dg)
        step = h / 2
    return SchlafliReport(
        energy_derivative=float(dE),
        predicted_derivative=float(0.5 * ell @ dth),
        schlafli_residual=float(r2),
        theta_dot=dth,
        gamma_dot=dg,
        gamma_reference=gref,
        step=step,
    )
