import numpy as np
import pytest

from rigidity_lab.sampling import random_cone, random_dual_interior
from rigidity_lab.sphere_grid import (
    argbest,
    evaluate_chunked,
    fan_grid,
    iter_fan_chunks,
    local_grid,
    resolve_threads,
    uniform_spacing,
)


def _cone(seed=0, k=4):
    return random_cone(np.random.default_rng(seed), k)


def test_grid_nodes_are_inside_the_polygon():
    c = _cone()
    g = fan_grid(c.normals, 32, boundary_decades=5)
    assert np.allclose(np.linalg.norm(g.points, axis=1), 1.0)
    assert np.all(c.dual_interior(g.points))
    assert len(g) == 1 + c.k * (31 + 5) * 32


def test_streamed_grid_matches_materialized():
    c = _cone(1, 5)
    g = fan_grid(c.normals, 24)
    streamed = np.concatenate([b[3] for b in iter_fan_chunks(c.normals, 24, max_points=100)])
    assert np.array_equal(np.sort(streamed, axis=0), np.sort(g.points, axis=0))


@pytest.mark.parametrize("seed", range(4))
def test_spacing_covers_the_polygon(seed):
    r = np.random.default_rng(seed)
    c = random_cone(r, 3 + seed)
    res = 16
    slack = uniform_spacing(c.normals, res)
    nodes = fan_grid(c.normals, res).points
    x = np.array([random_dual_interior(r, c, min_weight=0.0) for _ in range(300)])
    nearest = np.min(np.arccos(np.clip(x @ nodes.T, -1, 1)), axis=1)
    assert np.all(nearest <= slack)


def test_spacing_shrinks_with_resolution():
    c = _cone()
    s = [uniform_spacing(c.normals, n) for n in (8, 16, 32)]
    assert s[0] > s[1] > s[2]
    assert s[1] / s[2] == pytest.approx(2.0, rel=0.1)


def test_local_grid_is_centered():
    c = _cone()
    g = fan_grid(c.normals, 16)
    i = len(g) // 2
    loc = local_grid(g, i, 1 / 16, 1 / 16)
    assert np.min(np.linalg.norm(loc.points - g.points[i], axis=1)) <= 1e-12


def test_argbest_total_order():
    pts = np.array([[0.0, 1, 0], [0.0, 0, 1], [1.0, 0, 0]])
    vals = np.array([1.0, 1.0, 2.0])
    assert argbest(vals, pts) == 1
    assert argbest(vals, pts, maximize=True) == 2


def test_evaluate_chunked_is_thread_independent():
    pts = np.random.default_rng(0).standard_normal((200_000, 3))
    f = lambda p: np.sin(p @ [1.0, 2.0, 3.0])  # noqa: E731
    a = evaluate_chunked(f, pts, threads=1)
    b = evaluate_chunked(f, pts, threads=4)
    assert np.array_equal(a, b)


def test_resolve_threads(monkeypatch):
    assert resolve_threads(3) == 3
    monkeypatch.setenv("RIGIDITY_LAB_THREADS", "2")
    assert resolve_threads("auto") == 2
    monkeypatch.delenv("RIGIDITY_LAB_THREADS")
    assert resolve_threads(None) >= 1
