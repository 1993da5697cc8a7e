"""Deterministic grids over the interior of a convex spherical polygon.

The polygon is fanned from its centre ``c`` into triangles ``(c, v_j, v_{j+1})``.  A node is
``normalize(lam*c + (1-lam)*((1-s) v_j + s v_{j+1}))`` with ``lam`` the radial weight (``lam -> 0``
approaches the outer side) and ``s`` the position along that side.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

CHUNK = 65536


@dataclass(frozen=True)
class FanGrid:
    center: np.ndarray
    vertices: np.ndarray
    tri: np.ndarray      # fan triangle index per node
    lam: np.ndarray      # radial weight in (0, 1]
    s: np.ndarray        # position along the outer side, [0, 1)
    points: np.ndarray   # unit vectors

    def __len__(self) -> int:
        return len(self.points)


def polygon_center(vertices: np.ndarray) -> np.ndarray:
    c = np.asarray(vertices, dtype=float).sum(axis=0)
    return c / np.linalg.norm(c)


def fan_points(center, vertices, tri, lam, s) -> np.ndarray:
    v = np.asarray(vertices, dtype=float)
    k = len(v)
    tri = np.asarray(tri)
    lam = np.asarray(lam, dtype=float)[:, None]
    s = np.asarray(s, dtype=float)[:, None]
    side = (1.0 - s) * v[tri % k] + s * v[(tri + 1) % k]
    p = lam * center[None, :] + (1.0 - lam) * side
    return p / np.linalg.norm(p, axis=1, keepdims=True)


def _tensor(k: int, lam_levels: np.ndarray, s_levels: np.ndarray):
    tri, lam, s = np.meshgrid(np.arange(k), lam_levels, s_levels, indexing="ij")
    return tri.ravel(), lam.ravel(), s.ravel()


def fan_grid(vertices, resolution: int, boundary_decades: int = 0) -> FanGrid:
    """Uniform fan grid with ``resolution`` radial and angular levels per triangle.

    ``boundary_decades > 0`` adds radial levels ``10^-m/resolution`` (m = 1..decades) so the
    grid reaches exponentially close to the polygon boundary.
    """
    v = np.asarray(vertices, dtype=float)
    c = polygon_center(v)
    lam_levels = np.arange(1, resolution) / resolution
    if boundary_decades:
        extra = 10.0 ** -np.arange(1, boundary_decades + 1) / resolution
        lam_levels = np.concatenate([extra[::-1], lam_levels])
    s_levels = np.arange(resolution) / resolution
    tri, lam, s = _tensor(len(v), lam_levels, s_levels)
    tri = np.concatenate([[0], tri])
    lam = np.concatenate([[1.0], lam])
    s = np.concatenate([[0.0], s])
    return FanGrid(c, v, tri, lam, s, fan_points(c, v, tri, lam, s))


def local_grid(grid: FanGrid, index: int, dlam: float, ds: float, n: int = 10, log_lam: bool = False) -> FanGrid:
    """Nodes in a window around node ``index``; the window spans ±``dlam``/±``ds`` with 2n+1 levels."""
    t0, l0, s0 = int(grid.tri[index]), float(grid.lam[index]), float(grid.s[index])
    if log_lam:
        lam_levels = l0 * 10.0 ** (np.linspace(-dlam, dlam, 2 * n + 1))
    else:
        lam_levels = l0 + np.linspace(-dlam, dlam, 2 * n + 1)
    lam_levels = lam_levels[(lam_levels > 0.0) & (lam_levels <= 1.0)]
    s_levels = s0 + np.linspace(-ds, ds, 2 * n + 1)
    k = len(grid.vertices)
    tri, lam, s = [], [], []
    for sv in s_levels:
        # s outside [0, 1) continues into the neighbouring fan triangle
        tt = (t0 + int(np.floor(sv))) % k
        ss = sv - np.floor(sv)
        tri.append(np.full(len(lam_levels), tt))
        lam.append(lam_levels)
        s.append(np.full(len(lam_levels), ss))
    tri, lam, s = (np.concatenate(a) for a in (tri, lam, s))
    return FanGrid(grid.center, grid.vertices, tri, lam, s, fan_points(grid.center, grid.vertices, tri, lam, s))


def resolve_threads(threads=None) -> int:
    if threads in (None, "auto"):
        env = os.environ.get("RIGIDITY_LAB_THREADS")
        if env and env != "auto":
            return max(1, int(env))
        return os.cpu_count() or 1
    return max(1, int(threads))


def evaluate_chunked(fn: Callable[[np.ndarray], np.ndarray], points: np.ndarray, threads=1) -> np.ndarray:
    """Apply ``fn`` to fixed-size chunks; results are concatenated in chunk order."""
    chunks = [points[i:i + CHUNK] for i in range(0, len(points), CHUNK)]
    n = resolve_threads(threads)
    if n == 1 or len(chunks) == 1:
        return np.concatenate([fn(c) for c in chunks])
    with ThreadPoolExecutor(max_workers=n) as pool:
        return np.concatenate(list(pool.map(fn, chunks)))


def argbest(values: np.ndarray, points: np.ndarray, maximize: bool = False) -> int:
    """Index of the optimum under the total order (value, x, y, z)."""
    key = -values if maximize else values
    order = np.lexsort((points[:, 2], points[:, 1], points[:, 0], key))
    return int(order[0])


def iter_fan_chunks(vertices, resolution: int, max_points: int = CHUNK * 4):
    """Stream a uniform fan grid as ``(tri, lam, s, points)`` blocks without materializing it.

    The centre node is emitted first; blocks follow in (triangle, radial level) order.
    """
    v = np.asarray(vertices, dtype=float)
    c = polygon_center(v)
    yield np.zeros(1, int), np.ones(1), np.zeros(1), c[None, :].copy()
    lam_levels = np.arange(1, resolution) / resolution
    s_levels = np.arange(resolution) / resolution
    rows = max(1, max_points // resolution)
    for t in range(len(v)):
        for i in range(0, len(lam_levels), rows):
            L, S = np.meshgrid(lam_levels[i:i + rows], s_levels, indexing="ij")
            tri = np.full(L.size, t)
            yield tri, L.ravel(), S.ravel(), fan_points(c, v, tri, L.ravel(), S.ravel())


def uniform_spacing(vertices, resolution: int) -> float:
    """Largest neighbour or cell-diagonal arc of the uniform fan grid, computed row by row."""
    v = np.asarray(vertices, dtype=float)
    c = polygon_center(v)
    lam_all = np.arange(0, resolution + 1) / resolution
    s_all = np.arange(0, resolution + 1) / resolution
    worst = 0.0

    def arcs(a, b):
        return np.arctan2(np.linalg.norm(np.cross(a, b), axis=-1), np.sum(a * b, axis=-1))

    for t in range(len(v)):
        tri = np.full(len(s_all), t)
        prev = fan_points(c, v, tri, np.full(len(s_all), lam_all[0]), s_all)
        worst = max(worst, arcs(prev[1:], prev[:-1]).max())
        for lam in lam_all[1:]:
            row = fan_points(c, v, tri, np.full(len(s_all), lam), s_all)
            worst = max(worst, arcs(row[1:], row[:-1]).max(), arcs(row, prev).max(),
                        arcs(row[1:], prev[:-1]).max(), arcs(row[:-1], prev[1:]).max())
            prev = row
    return float(worst)
