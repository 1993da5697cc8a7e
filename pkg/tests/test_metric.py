import numpy as np
import pytest

from rigidity_lab.errors import InvalidInput
from rigidity_lab.hyperbolic.geometry import background_metric, background_metric_derivative, distance_to_origin
from rigidity_lab.hyperbolic.metric import (
    PerturbedMetric,
    b_norm,
    bump_field,
    covariant_derivative,
    decay_audit,
    decaying_field,
    fd_derivative,
    smooth_step,
    zero_field,
)


def _points(n=50, seed=0):
    r = np.random.default_rng(seed)
    x = r.uniform(-1, 1, (n, 3))
    x[:, 0] = np.exp(r.uniform(-1, 1, n))
    return x


def test_tau_must_exceed_three_halves():
    with pytest.raises(InvalidInput):
        PerturbedMetric(lambda x: np.zeros((len(x), 3, 3)), tau=1.5)


def test_background_metric_is_parallel():
    x = _points()
    nab = covariant_derivative(background_metric(x), background_metric_derivative(x), x)
    assert np.max(np.abs(nab)) <= 1e-12


def test_fd_derivative_is_exact_on_cubics():
    def field(x):
        return (x[:, 0] ** 3 + 2 * x[:, 1] ** 2 * x[:, 2])[:, None]

    x = _points()
    d = fd_derivative(field, x)[:, :, 0]
    exact = np.stack([3 * x[:, 0] ** 2, 4 * x[:, 1] * x[:, 2], 2 * x[:, 1] ** 2], axis=1)
    assert np.allclose(d, exact, rtol=1e-9, atol=1e-9)


def test_fd_matches_background_derivative():
    x = _points()
    assert np.allclose(fd_derivative(background_metric, x), background_metric_derivative(x), rtol=1e-9)


def test_b_norm_of_background_metric():
    x = _points()
    assert np.allclose(b_norm(background_metric(x), x), np.sqrt(3.0))


def test_smooth_step_limits():
    t = np.array([-1.0, 0.0, 0.5, 1.0, 2.0])
    assert np.array_equal(smooth_step(t)[[0, 1, 3, 4]], [0.0, 0.0, 1.0, 1.0])
    assert smooth_step(t)[2] == pytest.approx(0.5)


def test_decaying_field_cutoff_and_symmetry():
    m = decaying_field(0.1, 2.0)
    x = _points(200)
    e = m.components(x)
    assert np.allclose(e, np.swapaxes(e, 1, 2))
    near = distance_to_origin(x) < 0.5
    assert np.all(e[near] == 0.0)
    with pytest.raises(InvalidInput):
        decaying_field(S=np.arange(9.0).reshape(3, 3))


def test_bump_field_support():
    m = bump_field(0.1, radius=1.0)
    x = _points(200)
    outside = distance_to_origin(x) >= 1.0
    assert np.all(m.components(x)[outside] == 0.0)


def test_scaled_and_sum_are_linear():
    a, b = decaying_field(0.1), bump_field(0.2)
    x = _points()
    assert np.allclose(a.scaled(3.0).components(x), 3.0 * a.components(x))
    assert np.allclose((a + b).components(x), a.components(x) + b.components(x))
    assert (a + b).tau == min(a.tau, b.tau)


def test_decay_audit_ray_is_at_distance_r():
    audit = decay_audit(decaying_field(0.1, 2.0))
    v = np.array([0.3, 0.5, 0.8]) / np.linalg.norm([0.3, 0.5, 0.8])
    den = np.cosh(audit.radii) - v[0] * np.sinh(audit.radii)
    x = np.stack([1 / den, v[1] * np.sinh(audit.radii) / den, v[2] * np.sinh(audit.radii) / den], axis=1)
    assert np.allclose(distance_to_origin(x), audit.radii, atol=1e-10)
    assert audit.bounded


def test_zero_field_metric_is_background():
    x = _points()
    assert np.array_equal(zero_field().metric(x), background_metric(x))
    assert np.all(zero_field().covariant(x) == 0.0)
