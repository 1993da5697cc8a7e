import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rigidity_lab.errors import InvalidInput, NoIntersection, StepTooLarge
from rigidity_lab.hyperbolic.geometry import (
    ORIGIN,
    SurfaceKind,
    ZSurface,
    conformal_angle_check,
    distance_to_origin,
    hyperbolic_distance,
    intersection_line,
    static_potential_normal_derivative,
    static_potential_normal_derivative_fd,
    umbilicity_order,
    z_surface_curvature,
)

seeds = st.integers(0, 2**32 - 1)


def _points(r, n):
    x = r.uniform(-2, 2, (n, 3))
    x[:, 0] = np.exp(r.uniform(-2, 2, n))
    return x


def test_distance_examples():
    assert hyperbolic_distance(ORIGIN, ORIGIN) == 0.0
    assert hyperbolic_distance(ORIGIN, [np.e, 0, 0]) == pytest.approx(1.0, abs=1e-12)
    assert distance_to_origin([np.e, 0, 0]) == pytest.approx(1.0, abs=1e-12)


def test_distance_to_origin_matches_formula():
    x = _points(np.random.default_rng(0), 200)
    assert np.allclose(distance_to_origin(x), hyperbolic_distance(x, ORIGIN[None, :]), atol=1e-10)
    assert np.allclose(2 * np.cosh(distance_to_origin(x)), (np.sum(x * x, axis=1) + 1) / x[:, 0], rtol=1e-12)


def test_distance_properties():
    r = np.random.default_rng(1)
    p, q, s = _points(r, 1000), _points(r, 1000), _points(r, 1000)
    dpq = hyperbolic_distance(p, q)
    assert np.allclose(dpq, hyperbolic_distance(q, p))
    assert np.all(dpq >= 0)
    assert np.min(hyperbolic_distance(p, s) + hyperbolic_distance(s, q) - dpq) >= -1e-12


def test_points_need_positive_height():
    with pytest.raises(InvalidInput):
        hyperbolic_distance([0.0, 1, 1], ORIGIN)


def test_surface_validation_and_kinds():
    assert ZSurface([1, 0, 0], 1.0).kind is SurfaceKind.HOROSPHERE
    assert ZSurface([0, 1, 0], 0.3).kind is SurfaceKind.TOTALLY_GEODESIC
    assert ZSurface([0.6, 0.8, 0], 0.5).kind is SurfaceKind.EQUIDISTANT
    with pytest.raises(InvalidInput):
        ZSurface([1, 1, 0], 1.0)
    with pytest.raises(InvalidInput):
        ZSurface([1, 0, 0], -1.0)


@pytest.mark.parametrize("x1", [0.5, 1.3, 3.0])
def test_horosphere_curvature(x1):
    z = ZSurface([1, 0, 0], x1)
    rep = z_surface_curvature(z, z.point(), h=1e-4)
    assert rep.mean_curvature == pytest.approx(-2.0, abs=1e-6)
    assert rep.umbilicity_residual(1.0) <= 1e-6


@pytest.mark.parametrize("x1", [0.5, 1.3, 3.0])
def test_geodesic_plane_curvature(x1):
    z = ZSurface([0, 0.6, 0.8], 0.2)
    rep = z_surface_curvature(z, z.point(x1))
    assert np.max(np.abs(rep.second_fundamental_form)) <= 1e-6
    assert abs(rep.mean_curvature) <= 1e-6


@pytest.mark.parametrize("x1", [0.5, 1.3, 3.0])
def test_equidistant_curvature(x1):
    z = ZSurface([0.6, 0.8, 0.0], 0.4)
    rep = z_surface_curvature(z, z.point(x1), h=1e-4)
    assert rep.mean_curvature == pytest.approx(-1.2, abs=1e-6)
    assert rep.umbilicity_residual(0.6) <= 1e-6


def test_umbilicity_converges_at_second_order():
    z = ZSurface([0.6, 0.8, 0.0], 0.4)
    res, orders = umbilicity_order(z, z.point(1.3))
    assert np.all(np.abs(orders - 2.0) <= 0.1)
    assert res[-1] <= 1e-6


def test_step_too_large():
    z = ZSurface([1, 0, 0], 1.0)
    with pytest.raises(StepTooLarge):
        z_surface_curvature(z, z.point(), h=0.5)


@pytest.mark.parametrize("a, p, expected", [
    ([0.0, 1.0, 0.0], [1.0, 0.0, 0.0], 0.0),
    ([1.0, 0.0, 0.0], [1.0, 0.0, 0.0], -1.0),
    ([0.6, 0.8, 0.0], [2.0, -1.0, 0.0], -0.3),
])
def test_potential_normal_derivative(a, p, expected):
    z = ZSurface(a, float(np.dot(a, p)))
    assert static_potential_normal_derivative(z, p) == pytest.approx(expected, abs=1e-15)
    assert static_potential_normal_derivative_fd(z, p) == pytest.approx(expected, abs=1e-8)


def test_conformal_angles():
    z1, z2 = ZSurface([0, 1, 0], 0.0), ZSurface([0, 0, 1], 0.0)
    ab, ae = conformal_angle_check(z1, z2, [2.0, 0.0, 0.0])
    assert ab == pytest.approx(np.pi / 2, abs=1e-15) and ae == pytest.approx(np.pi / 2, abs=1e-15)
    a2 = np.array([0.5, np.sqrt(3) / 2, 0.0])
    z3 = ZSurface(a2, float(a2 @ [1.0, 0.0, 0.0]))
    ab, ae = conformal_angle_check(ZSurface([1, 0, 0], 1.0), z3, [1.0, 0.0, 0.0])
    # cos(angle) = -a1·a2 = -1/2
    assert ae == pytest.approx(2 * np.pi / 3, abs=1e-15)
    assert abs(ab - ae) <= 1e-12


@given(seeds)
def test_conformal_angles_random(seed):
    r = np.random.default_rng(seed)
    a1, a2 = (v / np.linalg.norm(v) for v in r.standard_normal((2, 3)))
    p = np.array([np.exp(r.uniform(-1, 1)), *r.uniform(-1, 1, 2)])
    ab, ae = conformal_angle_check(ZSurface(a1, a1 @ p), ZSurface(a2, a2 @ p), p)
    assert abs(ab - ae) <= 1e-12


def test_conformal_errors():
    z = ZSurface([0, 1, 0], 0.0)
    with pytest.raises(NoIntersection):
        conformal_angle_check(z, ZSurface([0, 1, 0], 1.0), [1.0, 0.0, 0.0])
    with pytest.raises(NoIntersection):
        conformal_angle_check(z, ZSurface([0, 0, 1], 0.0), [1.0, 0.0, 1.0])


def test_intersection_line():
    z1, z2 = ZSurface([0, 1, 0], 0.5), ZSurface([0.6, 0.0, 0.8], 1.0)
    x0, d = intersection_line(z1, z2)
    for t in (0.0, 1.0, -2.0):
        x = x0 + t * d
        assert abs(z1.a @ x - z1.s) <= 1e-12 and abs(z2.a @ x - z2.s) <= 1e-12
