"""Adaptive Gauss–Legendre quadrature on planar triangles and segments in R^3.

Integrands map an ``(n, 3)`` array of points to an ``(n, m)`` array of values.  A cell is accepted
when one refinement (four sub-triangles, or two sub-segments) changes its integral by less than
its share of the tolerance; the estimate kept is the refined one.  Cells are processed level by
level in a fixed order and summed with ``math.fsum``, so results do not depend on batching.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from rigidity_lab.errors import QuadratureUnderResolved

Integrand = Callable[[np.ndarray], np.ndarray]
MAX_LEVELS = 14
BATCH = 4096


def _gl(order: int):
    x, w = np.polynomial.legendre.leggauss(order)
    return 0.5 * (x + 1.0), 0.5 * w


def triangle_rule(order: int):
    """Collapsed (Duffy) tensor Gauss rule on the unit triangle: barycentric nodes and weights."""
    x, w = _gl(order)
    U, Vv = np.meshgrid(x, x, indexing="ij")
    W = np.outer(w, w) * (1.0 - U)
    u, v = U.ravel(), (Vv * (1.0 - U)).ravel()
    return np.stack([1.0 - u - v, u, v], axis=1), W.ravel()


@dataclass(frozen=True)
class QuadResult:
    value: np.ndarray
    error_estimate: np.ndarray
    cells: int
    evaluations: int


def _eval_triangles(f: Integrand, T: np.ndarray, bary: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Integrals over triangles ``T[t] = (p0, p1, p2)``; returns ``(t, m)``."""
    out = []
    for i in range(0, len(T), BATCH):
        Tb = T[i:i + BATCH]
        pts = np.einsum("qk,tkd->tqd", bary, Tb)
        area = 0.5 * np.linalg.norm(np.cross(Tb[:, 1] - Tb[:, 0], Tb[:, 2] - Tb[:, 0]), axis=1)
        vals = np.asarray(f(pts.reshape(-1, 3)), dtype=float)
        vals = vals.reshape(len(Tb), len(w), -1)
        out.append(2.0 * area[:, None] * np.einsum("q,tqm->tm", w, vals))
    return np.concatenate(out)


def _split_triangles(T: np.ndarray) -> np.ndarray:
    a, b, c = T[:, 0], T[:, 1], T[:, 2]
    ab, bc, ca = (a + b) / 2, (b + c) / 2, (c + a) / 2
    kids = np.stack([np.stack(t, axis=1) for t in ((a, ab, ca), (ab, b, bc), (ca, bc, c), (ab, bc, ca))], axis=1)
    return kids.reshape(-1, 3, 3)


def _adaptive(f, cells, measure, evaluate, split, atol, rtol, max_levels):
    total = float(np.sum(measure(cells)))
    coarse = evaluate(f, cells)
    ncomp = coarse.shape[1]
    accepted = [[] for _ in range(ncomp)]
    errors = np.zeros(ncomp)
    n_eval = len(cells)
    n_cells = 0
    scale = np.abs(coarse).sum(axis=0)
    for _ in range(max_levels):
        kids = split(cells)
        fine = evaluate(f, kids)
        n_eval += len(kids)
        k = len(kids) // len(cells)
        fine_sum = fine.reshape(len(cells), k, ncomp).sum(axis=1)
        err = np.abs(fine_sum - coarse)
        share = measure(cells) / total
        tol = np.maximum(atol, rtol * scale)[None, :] * share[:, None]
        ok = np.all(err <= tol, axis=1)
        for m in range(ncomp):
            accepted[m].extend(fine_sum[ok, m].tolist())
        errors += err[ok].sum(axis=0)
        n_cells += int(ok.sum())
        if ok.all():
            return QuadResult(np.array([math.fsum(a) for a in accepted]), errors, n_cells, n_eval)
        bad = ~ok
        cells = kids.reshape(len(cells), k, *kids.shape[1:])[bad].reshape(-1, *kids.shape[1:])
        coarse = fine.reshape(len(ok), k, ncomp)[bad].reshape(-1, ncomp)
    raise QuadratureUnderResolved(f"{len(cells)} cells still unresolved after {max_levels} refinements")


def integrate_polygon(f: Integrand, polygon: np.ndarray, order: int = 8, atol: float = 1e-10, rtol: float = 1e-12,
                      max_levels: int = MAX_LEVELS, initial_splits: int = 0) -> QuadResult:
    """Integral over a convex planar polygon with respect to Euclidean area."""
    P = np.asarray(polygon, dtype=float)
    c = P.mean(axis=0)
    T = np.stack([np.stack([c, P[i], P[(i + 1) % len(P)]]) for i in range(len(P))])
    for _ in range(initial_splits):
        T = _split_triangles(T)
    bary, w = triangle_rule(order)

    def measure(T):
        return 0.5 * np.linalg.norm(np.cross(T[:, 1] - T[:, 0], T[:, 2] - T[:, 0]), axis=1)

    return _adaptive(f, T, measure, lambda f, T: _eval_triangles(f, T, bary, w), _split_triangles,
                     atol, rtol, max_levels)


def integrate_segment(f: Integrand, p: np.ndarray, q: np.ndarray, order: int = 8, atol: float = 1e-10,
                      rtol: float = 1e-12, max_levels: int = 30) -> QuadResult:
    """Integral along the segment ``pq`` with respect to Euclidean length."""
    x, w = _gl(order)
    S = np.stack([np.asarray(p, float), np.asarray(q, float)])[None]

    def measure(S):
        return np.linalg.norm(S[:, 1] - S[:, 0], axis=1)

    def evaluate(f, S):
        pts = S[:, None, 0] + x[None, :, None] * (S[:, None, 1] - S[:, None, 0])
        vals = np.asarray(f(pts.reshape(-1, 3)), dtype=float).reshape(len(S), len(x), -1)
        return measure(S)[:, None] * np.einsum("q,sqm->sm", w, vals)

    def split(S):
        mid = (S[:, 0] + S[:, 1]) / 2
        return np.stack([np.stack([S[:, 0], mid], axis=1), np.stack([mid, S[:, 1]], axis=1)], axis=1).reshape(-1, 2, 3)

    return _adaptive(f, S, measure, evaluate, split, atol, rtol, max_levels)
