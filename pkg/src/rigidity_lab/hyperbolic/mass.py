"""Mass flux of ``g = b + e`` through a Z-plane polyhedron and the curvature/angle expression for it.

With ``V = 1/x^1`` the flux is ``∮ U(V)(nu_bar) dsigma_bar`` where
``U(V) = V div e - V d(tr e) + tr e dV - e(grad V, .)``.  The geometric side is
``-∫ 2V (H - H_bar) dsigma_bar + 2 ∫_edges V (alpha - alpha_bar) dlambda_bar``; the two agree up to
terms quadratic in ``e``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from rigidity_lab.errors import EdgeAngleDegenerate
from rigidity_lab.hyperbolic.geometry import (
    background_metric,
    background_metric_derivative,
    dihedral_angle,
    second_fundamental_form,
)
from rigidity_lab.hyperbolic.metric import PerturbedMetric, covariant_derivative
from rigidity_lab.hyperbolic.polyhedron import Polyhedron, expanding_box
from rigidity_lab.hyperbolic.quadrature import integrate_polygon, integrate_segment

SIN_ALPHA_MIN = 0.1


def mass_integrand(metric: PerturbedMetric, x: np.ndarray) -> np.ndarray:
    """Components ``U_j`` of the mass 1-form at the points ``x``."""
    x = np.atleast_2d(x)
    e = metric.components(x)
    de = metric.derivative(x)
    x1 = x[:, 0]
    nab = covariant_derivative(e, de, x)
    div = x1[:, None] ** 2 * np.einsum("niij->nj", nab)
    tr_flat = np.einsum("nii->n", e)
    tr = x1 ** 2 * tr_flat
    dtr = x1[:, None] ** 2 * np.einsum("njii->nj", de)
    dtr[:, 0] += 2.0 * x1 * tr_flat
    V = 1.0 / x1
    dV = np.zeros_like(x)
    dV[:, 0] = -1.0 / x1 ** 2
    # grad_b V = -d/dx^1, so -e(grad V, .) = +e_1j
    return V[:, None] * div - V[:, None] * dtr + tr[:, None] * dV + e[:, 0, :]


def _flux_density(metric: PerturbedMetric, a: np.ndarray):
    # U(nu_bar) dsigma_bar with nu_bar = x^1 a and dsigma_bar = dA / (x^1)^2
    def f(x):
        return (mass_integrand(metric, x) @ a / x[:, 0])[:, None]

    return f


def _mean_curvature_pair(metric: PerturbedMetric, x: np.ndarray, a: np.ndarray, frame: np.ndarray):
    """``(H_g, H_b)`` by the same routine, so identical inputs give identical outputs."""
    gb = background_metric(x)
    dgb = background_metric_derivative(x)
    _, _, Hb = second_fundamental_form(gb, dgb, a, frame)
    _, _, Hg = second_fundamental_form(gb + metric.components(x), dgb + metric.derivative(x), a, frame)
    return Hg, Hb


def _face_density(metric: PerturbedMetric, a: np.ndarray, frame: np.ndarray):
    def f(x):
        Hg, Hb = _mean_curvature_pair(metric, x, a, frame)
        return (-2.0 * (Hg - Hb) / x[:, 0] ** 3)[:, None]

    return f


def _edge_density(metric: PerturbedMetric, aA: np.ndarray, aB: np.ndarray):
    # 2 V (alpha - alpha_bar) dlambda_bar with dlambda_bar = |dx| / x^1
    def f(x):
        gb = background_metric(x)
        al = dihedral_angle(gb + metric.components(x), aA, aB)
        al_bar = dihedral_angle(gb, aA, aB)
        return (2.0 * (al - al_bar) / x[:, 0] ** 2)[:, None]

    return f


@dataclass(frozen=True)
class MassReport:
    flux: float
    face_term: float
    edge_term: float
    scale: float
    quadrature_error: float

    @property
    def residual(self) -> float:
        return self.flux - self.face_term - self.edge_term

    def to_dict(self) -> dict:
        return {"scale": self.scale, "flux": self.flux, "face_term": self.face_term,
                "edge_term": self.edge_term, "residual": self.residual,
                "quadrature_error": self.quadrature_error}


def _faces_integral(poly: Polyhedron, density, order, atol, rtol):
    vals, errs = [], 0.0
    for face in poly.faces:
        r = integrate_polygon(density(face), face.polygon, order=order, atol=atol, rtol=rtol)
        vals.append(float(r.value[0]))
        errs += float(r.error_estimate[0])
    return math.fsum(vals), errs


def mass_flux(metric: PerturbedMetric, poly: Polyhedron, quad_order: int = 8, atol: float = 1e-10,
              rtol: float = 1e-12) -> float:
    return mass_flux_with_error(metric, poly, quad_order, atol, rtol)[0]


def mass_flux_with_error(metric, poly, quad_order=8, atol=1e-10, rtol=1e-12):
    return _faces_integral(poly, lambda face: _flux_density(metric, face.plane.a), quad_order, atol, rtol)


def audit_edge_angles(poly: Polyhedron, c: float = SIN_ALPHA_MIN) -> float:
    """Smallest ``sin(alpha_bar)`` over the edges; raises when below ``c``."""
    worst = 1.0
    for edge in poly.edges:
        aA, aB = poly.planes[edge.faces[0]].a, poly.planes[edge.faces[1]].a
        worst = min(worst, float(np.sin(np.arccos(np.clip(-(aA @ aB), -1.0, 1.0)))))
    if worst < c:
        raise EdgeAngleDegenerate(f"sin(alpha_bar) = {worst:.3g} < {c:g}")
    return worst


def geometric_side(metric: PerturbedMetric, poly: Polyhedron, quad_order: int = 8, fd_step: float | None = None,
                   atol: float = 1e-10, rtol: float = 1e-12) -> tuple[float, float, float]:
    """``(face_term, edge_term, quadrature error estimate)``."""
    audit_edge_angles(poly)
    if fd_step is not None:
        metric = PerturbedMetric(metric.e, metric.tau, metric.name, fd_step)
    face, err_f = _faces_integral(
        poly, lambda face: _face_density(metric, face.plane.a, face.plane.tangent_frame()), quad_order, atol, rtol)
    vals, err_e = [], 0.0
    for edge in poly.edges:
        aA, aB = poly.planes[edge.faces[0]].a, poly.planes[edge.faces[1]].a
        r = integrate_segment(_edge_density(metric, aA, aB), *edge.endpoints, order=quad_order, atol=atol, rtol=rtol)
        vals.append(float(r.value[0]))
        err_e += float(r.error_estimate[0])
    return face, math.fsum(vals), err_f + err_e


def mass_report(metric: PerturbedMetric, poly: Polyhedron, scale: float, quad_order: int = 8,
                atol: float = 1e-10, rtol: float = 1e-12) -> MassReport:
    flux, err_flux = mass_flux_with_error(metric, poly, quad_order, atol, rtol)
    face, edge, err_geo = geometric_side(metric, poly, quad_order, atol=atol, rtol=rtol)
    return MassReport(flux, face, edge, scale, err_flux + err_geo)


def miao_piubello_check(metric: PerturbedMetric, scales=(2.0, 3.0, 4.0), quad_order: int = 8,
                        atol: float = 1e-10, rtol: float = 1e-12, family=expanding_box) -> list[MassReport]:
    """Reports on ``family(e^r)`` for each scale ``r``."""
    return [mass_report(metric, family(float(np.exp(r))), float(r), quad_order, atol, rtol) for r in scales]


@dataclass(frozen=True)
class DecayVerdict:
    strictly_decreasing: bool
    observed_ratios: np.ndarray
    predicted_ratios: np.ndarray

    @property
    def ratio_factors(self) -> np.ndarray:
        return self.observed_ratios / self.predicted_ratios

    @property
    def within_factor_two(self) -> bool:
        f = self.ratio_factors
        return bool(np.all((f >= 0.5) & (f <= 2.0)))


def decay_verdict(reports: list[MassReport], tau: float) -> DecayVerdict:
    res = np.abs([r.residual for r in reports])
    scales = np.array([r.scale for r in reports])
    obs = res[1:] / res[:-1]
    pred = (np.cosh(scales[1:]) / np.cosh(scales[:-1])) ** (1.0 - 2.0 * tau)
    return DecayVerdict(bool(np.all(np.diff(res) < 0)), obs, pred)

