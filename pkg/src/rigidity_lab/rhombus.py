"""The four-faced rhombus family: equal dihedral angles without isometry, and no dominating xi."""

from __future__ import annotations

import csv
import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from rigidity_lab.cone import PolyhedralCone, arc, cone_from_normals
from rigidity_lab.errors import EmptyInterior, LengthMismatch, OutOfRangeAngle
from rigidity_lab import sphere_grid

ANGLE_TOL = 1e-12


@dataclass(frozen=True)
class RhombusCone:
    beta1: float
    beta2: float
    cone: PolyhedralCone

    @property
    def product(self) -> float:
        return float(np.cos(self.beta1) * np.cos(self.beta2))

    def diagonals(self) -> np.ndarray:
        n = self.cone.normals
        return np.sort([arc(n[0], n[2]), arc(n[1], n[3])])


def family_normals(beta1: float, beta2: float) -> np.ndarray:
    s1, c1, s2, c2 = np.sin(beta1), np.cos(beta1), np.sin(beta2), np.cos(beta2)
    return np.array([[s1, 0.0, -c1], [0.0, s2, -c2], [-s1, 0.0, -c1], [0.0, -s2, -c2]])


def family_cone(beta1: float, beta2: float) -> RhombusCone:
    for name, b in (("beta1", beta1), ("beta2", beta2)):
        if not 0.0 < b < np.pi / 2:
            raise OutOfRangeAngle(f"{name}={b!r} must lie in (0, pi/2)")
    n = family_normals(beta1, beta2)
    cone = cone_from_normals(n, label=f"rhombus({beta1:.6g},{beta2:.6g})")
    if not np.array_equal(cone.normals, n):
        raise AssertionError("rhombus normals were reordered by the cone constructor")
    dots = np.sum(cone.normals * np.roll(cone.normals, -1, axis=0), axis=1)
    if np.max(np.abs(dots - np.cos(beta1) * np.cos(beta2))) > ANGLE_TOL:
        raise AssertionError("adjacent normal products differ from cos(beta1) cos(beta2)")
    return RhombusCone(float(beta1), float(beta2), cone)


def beta_for_product(product: float, beta1: float) -> float:
    """``beta2`` with ``cos(beta1) cos(beta2) = product``."""
    c = product / np.cos(beta1)
    if not 0.0 < c < 1.0:
        raise OutOfRangeAngle(f"no beta2 in (0, pi/2) gives product {product!r} with beta1={beta1!r}")
    return float(np.arccos(c))


@dataclass(frozen=True)
class PairReport:
    same_angles: bool
    max_angle_difference: float
    isometric: bool
    diagonals: tuple[np.ndarray, np.ndarray]

    @property
    def diagonal_gap(self) -> float:
        return float(np.max(np.abs(self.diagonals[0] - self.diagonals[1])))


def same_angles_not_isometric(pair: tuple[RhombusCone, RhombusCone], tol: float = ANGLE_TOL) -> PairReport:
    a, b = pair
    diff = float(np.max(np.abs(a.cone.dihedral_angles - b.cone.dihedral_angles)))
    da, db = a.diagonals(), b.diagonals()
    return PairReport(diff <= tol, diff, bool(np.max(np.abs(da - db)) <= 1e-9), (da, db))


# ---------------------------------------------------------------- dominating direction search


@dataclass(frozen=True)
class SearchReport:
    witness: np.ndarray | None
    best_point: np.ndarray
    worst_deficit: float      # max over the grid of min_j [arc(xi, n_j) - gamma_bar_j]
    slack: float              # covering bound of the grid
    resolution: int
    evaluations: int

    @property
    def margin_in_slacks(self) -> float:
        return -self.worst_deficit / self.slack


def deficits(cone: PolyhedralCone, gamma_ref: np.ndarray, points: np.ndarray) -> np.ndarray:
    return np.min(arc(points[:, None, :], cone.normals[None, :, :]) - gamma_ref[None, :], axis=1)


def dominating_xi_search(cone: PolyhedralCone, ref: tuple[PolyhedralCone, np.ndarray], resolution: int = 2048,
                         threads=1) -> SearchReport:
    """Grid search of the open dual cross-section for ``xi`` dominating the reference arcs.

    Deficits are 1-Lipschitz on the sphere, so a true witness forces some node to have deficit
    at least ``-slack``, and a grid maximum below ``-slack`` certifies that none exists.
    """
    ref_cone, ref_xi = ref
    if ref_cone.k != cone.k:
        raise LengthMismatch("cone and reference must have the same number of faces")
    ref_xi = np.asarray(ref_xi, dtype=float)
    if not ref_cone.dual_interior(ref_xi):
        raise EmptyInterior("reference xi is not interior to the reference dual cone")
    gamma_ref = arc(ref_cone.normals, ref_xi)
    slack = sphere_grid.uniform_spacing(cone.normals, resolution)

    def evaluate(block):
        _, _, _, pts = block
        inside = cone.dual_interior(pts)
        d = np.where(inside, deficits(cone, gamma_ref, pts), -np.inf)
        i = sphere_grid.argbest(d, pts, maximize=True)
        return d[i], pts[i], len(pts)

    blocks = sphere_grid.iter_fan_chunks(cone.normals, resolution)
    n = sphere_grid.resolve_threads(threads)
    if n == 1:
        results = map(evaluate, blocks)
    else:
        pool = ThreadPoolExecutor(max_workers=n)
        results = pool.map(evaluate, blocks)
    best_d, best_p, count = -np.inf, None, 0
    for d, p, m in results:
        count += m
        if best_p is None or d > best_d or (d == best_d and tuple(p) < tuple(best_p)):
            best_d, best_p = d, p
    if n != 1:
        pool.shutdown()
    if not np.isfinite(best_d):
        raise EmptyInterior("no grid node lies inside the dual cone")
    witness = best_p if best_d >= -slack else None
    return SearchReport(witness, best_p, float(best_d), slack, resolution, count)


# ---------------------------------------------------------------- the audited instance

AUDIT_REFERENCE_BETA = 0.3
AUDIT_BETA2 = 0.05


@dataclass(frozen=True)
class AuditedInstance:
    reference: RhombusCone
    candidate: RhombusCone
    reference_xi: np.ndarray


def audited_instance() -> AuditedInstance:
    """Square reference ``beta1 = beta2 = 0.3`` with axis ``-e3``; elongated candidate at equal product."""
    ref = family_cone(AUDIT_REFERENCE_BETA, AUDIT_REFERENCE_BETA)
    b1 = beta_for_product(ref.product, AUDIT_BETA2)
    cand = family_cone(b1, AUDIT_BETA2)
    return AuditedInstance(ref, cand, np.array([0.0, 0.0, -1.0]))


def gamma_grid_csv(cone: PolyhedralCone, gamma_ref, resolution: int = 64) -> str:
    """``x,y,z,gamma_1..gamma_k,deficit`` rows over a coarse fan grid of the dual cross-section."""
    grid = sphere_grid.fan_grid(cone.normals, resolution)
    g = arc(grid.points[:, None, :], cone.normals[None, :, :])
    d = np.min(g - np.asarray(gamma_ref)[None, :], axis=1)
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["x", "y", "z"] + [f"gamma_{j + 1}" for j in range(cone.k)] + ["deficit"])
    for p, gj, dj in zip(grid.points, g, d):
        w.writerow([f"{x:.12g}" for x in (*p, *gj, dj)])
    return out.getvalue()
