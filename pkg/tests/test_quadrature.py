import math

import numpy as np
import pytest

from rigidity_lab.errors import QuadratureUnderResolved
from rigidity_lab.hyperbolic.quadrature import integrate_polygon, integrate_segment, triangle_rule

TRI = np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])


def test_triangle_rule_weights():
    bary, w = triangle_rule(6)
    assert w.sum() == pytest.approx(0.5, abs=1e-15)
    assert np.allclose(bary.sum(axis=1), 1.0) and np.all(bary >= 0)


@pytest.mark.parametrize("p, q", [(0, 0), (1, 0), (2, 3), (4, 4), (7, 0)])
def test_monomials_on_unit_triangle(p, q):
    exact = math.factorial(p) * math.factorial(q) / math.factorial(p + q + 2)
    r = integrate_polygon(lambda x: (x[:, 0] ** p * x[:, 1] ** q)[:, None], TRI, order=8)
    assert r.value[0] == pytest.approx(exact, abs=1e-14)


def test_polygon_area_and_smooth_integrand():
    sq = np.array([[0, 0, 1], [2, 0, 1], [2, 2, 1], [0, 2, 1]], dtype=float)
    r = integrate_polygon(lambda x: np.stack([np.ones(len(x)), np.exp(x[:, 0]) * np.cos(x[:, 1])], axis=1), sq)
    assert r.value[0] == pytest.approx(4.0, abs=1e-13)
    assert r.value[1] == pytest.approx((np.e ** 2 - 1) * np.sin(2.0), abs=1e-10)


def test_segment():
    r = integrate_segment(lambda x: np.exp(-x[:, 0:1] ** 2), [-3, 0, 0], [3, 0, 0])
    assert r.value[0] == pytest.approx(math.sqrt(math.pi) * math.erf(3.0), abs=1e-10)
    # arc-length measure: a tilted segment of length 5
    r = integrate_segment(lambda x: np.ones((len(x), 1)), [0, 0, 0], [3, 4, 0])
    assert r.value[0] == pytest.approx(5.0, abs=1e-14)


def test_adaptive_refines_near_singularity():
    r = integrate_polygon(lambda x: (1.0 / np.sqrt(x[:, 0] + x[:, 1] + 1e-3))[:, None], TRI,
                          atol=1e-9, rtol=1e-12)
    # integral of u^{-1/2} over the simplex slices: int_0^1 t (t + eps)^{-1/2} dt
    eps = 1e-3
    exact = (2 / 3) * ((1 + eps) ** 1.5 - eps ** 1.5) - 2 * eps * ((1 + eps) ** 0.5 - eps ** 0.5)
    assert r.value[0] == pytest.approx(exact, abs=1e-8)
    assert r.cells > 3


def test_under_resolved():
    with pytest.raises(QuadratureUnderResolved):
        integrate_polygon(lambda x: (1.0 / np.abs(x[:, 0] - 0.3137))[:, None], TRI, order=2,
                          atol=1e-14, rtol=1e-15, max_levels=2)


def test_batching_does_not_change_result(monkeypatch):
    f = lambda x: np.sin(3 * x[:, :1]) * np.cos(x[:, 1:2])  # noqa: E731
    a = integrate_polygon(f, TRI, initial_splits=3)
    import rigidity_lab.hyperbolic.quadrature as q
    monkeypatch.setattr(q, "BATCH", 7)
    b = integrate_polygon(f, TRI, initial_splits=3)
    assert a.value[0] == b.value[0]
