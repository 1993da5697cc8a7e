"""Upper half-space model ``b = delta / (x^1)^2`` and its planes ``Z(a, s) = {a·x = s, x^1 > 0}``.

Second fundamental forms use ``A(X, Y) = g(grad_X N, Y)`` for the unit normal ``N``; for coordinate
-constant tangent fields this is ``-N^m Gamma_{m ij} X^i Y^j`` with ``Gamma_{m ij}`` the Christoffel
symbols of the first kind.  Mean curvature is the trace ``H = tr_h A``.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from rigidity_lab.errors import InvalidInput, NoIntersection, StepTooLarge

KIND_TOL = 1e-12
ORIGIN = np.array([1.0, 0.0, 0.0])


class SurfaceKind(str, Enum):
    HOROSPHERE = "Horosphere"
    TOTALLY_GEODESIC = "TotallyGeodesic"
    EQUIDISTANT = "Equidistant"


def check_point(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != 3 or np.any(x[..., 0] <= 0.0):
        raise InvalidInput("points of the upper half-space need x^1 > 0")
    return x


def hyperbolic_distance(p, q) -> np.ndarray:
    """``cosh d = 1 + |p - q|^2 / (2 p^1 q^1)`` (vectorized)."""
    p, q = check_point(p), check_point(q)
    arg = 1.0 + np.sum((p - q) ** 2, axis=-1) / (2.0 * p[..., 0] * q[..., 0])
    return np.arccosh(np.maximum(arg, 1.0))


def distance_to_origin(x) -> np.ndarray:
    """``2 cosh r = ((x^1)^2 + (x^2)^2 + (x^3)^2 + 1) / x^1`` with ``o = (1, 0, 0)``."""
    x = check_point(x)
    return np.arccosh(np.maximum((np.sum(x * x, axis=-1) + 1.0) / (2.0 * x[..., 0]), 1.0))


def static_potential(x) -> np.ndarray:
    return 1.0 / np.asarray(x, dtype=float)[..., 0]


@dataclass(frozen=True)
class ZSurface:
    a: np.ndarray
    s: float

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float)
        if a.shape != (3,) or abs(np.linalg.norm(a) - 1.0) > 1e-12:
            raise InvalidInput("a must be a Euclidean unit 3-vector")
        if abs(a[0] - 1.0) <= KIND_TOL and self.s <= 0:
            raise InvalidInput("x^1 = s <= 0 misses the upper half-space")
        if abs(a[0] + 1.0) <= KIND_TOL and self.s >= 0:
            raise InvalidInput("x^1 = -s <= 0 misses the upper half-space")
        a = a.copy()
        a.setflags(write=False)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "s", float(self.s))

    @property
    def kind(self) -> SurfaceKind:
        a1 = abs(self.a[0])
        if abs(a1 - 1.0) <= KIND_TOL:
            return SurfaceKind.HOROSPHERE
        if a1 <= KIND_TOL:
            return SurfaceKind.TOTALLY_GEODESIC
        return SurfaceKind.EQUIDISTANT

    def tangent_frame(self) -> np.ndarray:
        """Two Euclidean-orthonormal vectors spanning the plane."""
        a = self.a
        e = np.eye(3)[int(np.argmin(np.abs(a)))]
        t1 = np.cross(a, e)
        t1 /= np.linalg.norm(t1)
        return np.stack([t1, np.cross(a, t1)])

    def contains(self, x, tol: float = 1e-10) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(x[0] > 0 and abs(self.a @ x - self.s) <= tol * max(1.0, np.abs(x).max()))

    def point(self, x1: float = 1.0) -> np.ndarray:
        """A point of the surface with the given height (or any point for horospheres)."""
        a = self.a
        if self.kind is SurfaceKind.HOROSPHERE:
            return np.array([self.s * a[0], 0.0, 0.0])
        rest = (self.s - a[0] * x1) / (a[1:] @ a[1:])
        return np.array([x1, rest * a[1], rest * a[2]])


# ---------------------------------------------------------------- metric algebra (vectorized)


def background_metric(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return np.eye(3) / x[..., 0, None, None] ** 2


def background_metric_derivative(x) -> np.ndarray:
    """``db[..., k, i, j] = d_k b_ij = -2 delta_k1 delta_ij / (x^1)^3``."""
    x = np.asarray(x, dtype=float)
    out = np.zeros(x.shape[:-1] + (3, 3, 3))
    out[..., 0, :, :] = -2.0 * np.eye(3) / x[..., 0, None, None] ** 3
    return out


def christoffel_first_kind(dg: np.ndarray) -> np.ndarray:
    """``Gamma[..., m, i, j] = (d_i g_mj + d_j g_mi - d_m g_ij) / 2`` from ``dg[..., k, i, j]``."""
    return 0.5 * (np.swapaxes(dg, -3, -2) + np.moveaxis(dg, -3, -1) - dg)


def unit_normal(g: np.ndarray, a: np.ndarray) -> np.ndarray:
    """``N^i = g^{ij} a_j / sqrt(g^{kl} a_k a_l)``: the unit normal of ``{a·x = s}`` towards increasing ``a·x``."""
    ginv = np.linalg.inv(g)
    v = ginv @ a
    return v / np.sqrt(v @ a)[..., None]


def second_fundamental_form(g: np.ndarray, dg: np.ndarray, a: np.ndarray, frame: np.ndarray):
    """``(A, h, H)`` of the plane with covector ``a`` in the tangent ``frame`` (2 x 3)."""
    N = unit_normal(g, a)
    Gam = christoffel_first_kind(dg)
    A = -np.einsum("...m,...mij,ai,bj->...ab", N, Gam, frame, frame)
    h = np.einsum("...ij,ai,bj->...ab", g, frame, frame)
    H = np.einsum("...ab,...ba->...", np.linalg.inv(h), A)
    return A, h, H


def dihedral_angle(g: np.ndarray, a_A: np.ndarray, a_B: np.ndarray) -> np.ndarray:
    """Interior angle between planes with outward covectors ``a_A``, ``a_B``: ``cos = -g(nu_A, nu_B)``."""
    ginv = np.linalg.inv(g)
    c = (a_A @ ginv @ a_B) if ginv.ndim == 2 else np.einsum("i,...ij,j->...", a_A, ginv, a_B)
    nA = np.sqrt(np.einsum("i,...ij,j->...", a_A, ginv, a_A))
    nB = np.sqrt(np.einsum("i,...ij,j->...", a_B, ginv, a_B))
    return np.arccos(np.clip(-c / (nA * nB), -1.0, 1.0))


# ---------------------------------------------------------------- surface geometry audits


@dataclass(frozen=True)
class CurvatureReport:
    second_fundamental_form: np.ndarray
    induced_metric: np.ndarray
    mean_curvature: float

    @property
    def shape_operator(self) -> np.ndarray:
        return np.linalg.solve(self.induced_metric, self.second_fundamental_form)

    def umbilicity_residual(self, a1: float) -> float:
        """Sup-norm of ``h^{-1} A + a^1 I``: the residual of ``A = -a^1 h`` in an ``h``-orthonormal frame.

        Unlike the chart components of ``A + a^1 h`` this does not depend on the height of the point.
        """
        return float(np.max(np.abs(self.shape_operator + a1 * np.eye(2))))


def fd_background_derivative(x: np.ndarray, h: float) -> np.ndarray:
    """Second-order central differences of ``b`` with step ``h x^1`` in every coordinate direction."""
    x = check_point(x)
    step = h * x[0]
    dg = np.empty((3, 3, 3))
    for k in range(3):
        d = np.zeros(3)
        d[k] = step
        dg[k] = (background_metric(x + d) - background_metric(x - d)) / (2 * step)
    return dg


def z_surface_curvature(z: ZSurface, p, h: float = 1e-4) -> CurvatureReport:
    p = check_point(p)
    if not z.contains(p):
        raise InvalidInput("point is not on the surface")
    if p[0] <= 2 * h * p[0] or h >= 0.5:
        raise StepTooLarge(f"relative step {h!r} too large at x^1 = {p[0]!r}")
    A, hh, H = second_fundamental_form(background_metric(p), fd_background_derivative(p, h), z.a,
                                       z.tangent_frame())
    return CurvatureReport(A, hh, float(H))


def umbilicity_order(z: ZSurface, p, steps=(4e-3, 2e-3, 1e-3, 5e-4)) -> tuple[np.ndarray, np.ndarray]:
    """Residuals of ``A + a^1 h`` at decreasing steps and the observed convergence orders."""
    res = np.array([z_surface_curvature(z, p, h).umbilicity_residual(z.a[0]) for h in steps])
    # exact surfaces (zero residual at every step) have undefined order and report nan
    with np.errstate(divide="ignore", invalid="ignore"):
        orders = np.log(res[:-1] / res[1:]) / np.log(np.asarray(steps[:-1]) / np.asarray(steps[1:]))
    return res, orders


def static_potential_normal_derivative(z: ZSurface, p) -> float:
    """``d_nu V`` for the unit normal ``x^1 a``; equals ``-a^1 V``."""
    p = check_point(p)
    return float(-z.a[0] / p[0])


def static_potential_normal_derivative_fd(z: ZSurface, p, h: float = 1e-5) -> float:
    p = check_point(p)
    N = p[0] * z.a
    t = h * p[0]
    return float((static_potential(p + t * N) - static_potential(p - t * N)) / (2 * t))


def conformal_angle_check(z1: ZSurface, z2: ZSurface, p) -> tuple[float, float]:
    """Interior angle between two Z-planes at ``p``: under ``b`` and under the Euclidean metric."""
    p = check_point(p)
    if abs(abs(z1.a @ z2.a) - 1.0) < 1e-12:
        raise NoIntersection("parallel planes do not meet transversally")
    if not (z1.contains(p) and z2.contains(p)):
        raise NoIntersection("point does not lie on both surfaces")
    ang_b = float(dihedral_angle(background_metric(p), z1.a, z2.a))
    ang_e = float(np.arccos(np.clip(-(z1.a @ z2.a), -1.0, 1.0)))
    return ang_b, ang_e


def intersection_line(z1: ZSurface, z2: ZSurface) -> tuple[np.ndarray, np.ndarray]:
    """Point and direction of the Euclidean line ``Z1 ∩ Z2``."""
    d = np.cross(z1.a, z2.a)
    if np.linalg.norm(d) < 1e-12:
        raise NoIntersection("parallel planes")
    M = np.stack([z1.a, z2.a, d])
    x0 = np.linalg.solve(M, np.array([z1.s, z2.s, 0.0]))
    return x0, d / np.linalg.norm(d)
