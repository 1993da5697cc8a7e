"""Base normals with non-positive comparison energy for 3-faced cones.

Two independent constructions are provided: a closed-form one working in Gram coordinates
(``xi = sum xi^i n_i``) and an incremental spherical one that changes one side of the dual
triangle at a time.  ``grid_oracle`` is a brute-force check of both.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import permutations

import numpy as np

from rigidity_lab.cone import (
    GramSpec,
    PolyhedralCone,
    arc,
    cone_from_gram,
    cone_from_normals,
    gram_positive_definite,
    spherical_triangle_inequalities,
)
from rigidity_lab.errors import (
    AngleConditionViolated,
    EmptyInterior,
    HypothesisViolated,
    InvalidInput,
    LengthMismatch,
    NotPositiveDefinite,
    RigidityLabError,
    XiOutsideDualInterior,
)
from rigidity_lab.pyramid import angle_condition, build_pyramid, energy, energy_batch
from rigidity_lab import sphere_grid

NORM_TOL = 1e-12
NUDGE_EPS = 1e-7
NUDGE_HALVINGS = 20
ANGLE_EPS = 1e-12


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class MatrixProblem:
    """Candidate Gram data ``b``, reference ``b_bar`` and reference coordinates ``xi_bar``."""

    b: np.ndarray
    b_bar: np.ndarray
    xi_bar: np.ndarray
    G: np.ndarray = field(init=False)
    G_bar: np.ndarray = field(init=False)
    h: np.ndarray = field(init=False)
    H: np.ndarray = field(init=False)

    def __post_init__(self):
        spec, ref = GramSpec(self.b), GramSpec(self.b_bar)
        if not gram_positive_definite(spec):
            raise NotPositiveDefinite(f"G for b={spec.b.tolist()} is not positive definite")
        if not gram_positive_definite(ref):
            raise NotPositiveDefinite(f"G for b_bar={ref.b.tolist()} is not positive definite")
        xi_bar = np.asarray(self.xi_bar, dtype=float)
        if xi_bar.shape != (3,):
            raise LengthMismatch("xi_bar must have three coordinates")
        if np.any(xi_bar <= 0.0):
            raise XiOutsideDualInterior(f"xi_bar coordinates {xi_bar.tolist()} must be positive")
        norm = xi_bar @ ref.G @ xi_bar
        if abs(norm - 1.0) > NORM_TOL:
            raise InvalidInput(f"xi_bar G_bar xi_bar^t = {norm!r}, expected 1")
        h = ref.b - spec.b
        object.__setattr__(self, "b", spec.b)
        object.__setattr__(self, "b_bar", ref.b)
        object.__setattr__(self, "xi_bar", _frozen(xi_bar))
        object.__setattr__(self, "G", spec.G)
        object.__setattr__(self, "G_bar", ref.G)
        object.__setattr__(self, "h", _frozen(h))
        object.__setattr__(self, "H", _frozen(ref.G - spec.G))

    @classmethod
    def normalized(cls, b, b_bar, xi_bar) -> "MatrixProblem":
        """Rescale ``xi_bar`` so that ``xi_bar G_bar xi_bar^t = 1``."""
        Gb = GramSpec(b_bar).G
        x = np.asarray(xi_bar, dtype=float)
        q = x @ Gb @ x
        if q <= 0:
            raise NotPositiveDefinite("xi_bar has non-positive G_bar-norm")
        return cls(b, b_bar, x / np.sqrt(q))

    @property
    def rigid(self) -> bool:
        return bool(np.all(self.h == 0.0))

    def reference_gamma(self) -> np.ndarray:
        """``cos(gamma_bar_i) = n_bar_i · xi_bar = (G_bar xi_bar)_i``."""
        return np.arccos(np.clip(self.G_bar @ self.xi_bar, -1.0, 1.0))

    def closed_form_energy(self, xi) -> float:
        """``(xi G xi^t - xi G_bar xi_bar^t) / (2 sqrt(det G) xi^1 xi^2 xi^3)``."""
        xi = np.asarray(xi, dtype=float)
        num = xi @ self.G @ xi - xi @ self.G_bar @ self.xi_bar
        return float(num / (2.0 * np.sqrt(np.linalg.det(self.G)) * np.prod(xi)))

    def certificate(self, xi) -> float:
        return float(np.asarray(xi) @ self.G_bar @ self.xi_bar - 1.0)


@dataclass(frozen=True)
class MinimizerResult:
    xi_coords: np.ndarray
    xi_vector: np.ndarray
    case_taken: str
    zeroed_index: int | None
    certificate: float
    energy: float
    energy_closed_form: float
    omega: np.ndarray
    omega_bar: np.ndarray | None
    claim_value: float | None
    boundary_coords: np.ndarray
    nudge: float
    rigid: bool

    def to_dict(self) -> dict:
        def arr(a):
            return None if a is None else [float(x) for x in a]

        return {
            "xi_coords": arr(self.xi_coords),
            "xi_vector": arr(self.xi_vector),
            "case_taken": self.case_taken,
            "zeroed_index": self.zeroed_index,
            "certificate": self.certificate,
            "energy": self.energy,
            "energy_closed_form": self.energy_closed_form,
            "omega": arr(self.omega),
            "omega_bar": arr(self.omega_bar),
            "claim_value": self.claim_value,
            "boundary_coords": arr(self.boundary_coords),
            "nudge": self.nudge,
            "rigid": self.rigid,
        }


def _unit_in(G: np.ndarray, x: np.ndarray) -> np.ndarray:
    return x / np.sqrt(x @ G @ x)


def claim_value(G_perm: np.ndarray, h_perm: np.ndarray) -> float:
    """``det(G) + zeta q^t`` in a frame where the zeroed index is last.

    ``zeta = (A_2, A_1)`` with ``A_i = b_{i+1} b_{i+2} - b_i`` and ``q = (h_2, h_1)``.
    """
    b1, b2, b3 = G_perm[1, 2], G_perm[0, 2], G_perm[0, 1]
    A1 = b2 * b3 - b1
    A2 = b3 * b1 - b2
    return float(np.linalg.det(G_perm) + A2 * h_perm[1] + A1 * h_perm[0])


def _nudge(problem: MatrixProblem, xi0: np.ndarray) -> tuple[np.ndarray, float]:
    """Move a boundary solution into the open positive octant, keeping the certificate positive."""
    if np.all(xi0 > 0.0):
        return xi0, 0.0
    toward = _unit_in(problem.G, np.ones(3))
    need_cert = not problem.rigid
    eps = NUDGE_EPS
    for _ in range(NUDGE_HALVINGS + 1):
        xi = _unit_in(problem.G, xi0 + eps * toward)
        if np.all(xi > 0.0) and (not need_cert or problem.certificate(xi) > 0.0):
            return xi, eps
        eps /= 2.0
    raise RigidityLabError("boundary nudge could not preserve a positive certificate")


def solve_matrix_case(problem: MatrixProblem) -> MinimizerResult:
    if np.any(problem.h < 0.0):
        raise HypothesisViolated(f"b_bar - b = {problem.h.tolist()} has a negative entry")
    G, Gb, xb = problem.G, problem.G_bar, problem.xi_bar
    omega = xb @ Gb @ np.linalg.inv(G)
    omega_bar = None
    claim = None
    zeroed = None
    if np.all(omega >= 0.0):
        case = "FirstCase"
        xi0 = _unit_in(G, omega)
    else:
        case = "SecondCase"
        m = int(np.argmin(omega))
        S = [i for i in range(3) if i != m]
        perm = S + [m]
        Gp = G[np.ix_(perm, perm)]
        hp = problem.h[perm]
        claim = claim_value(Gp, hp)
        omega_bar = xb @ Gb[:, S] @ np.linalg.inv(G[np.ix_(S, S)])
        xi0 = np.zeros(3)
        xi0[S] = omega_bar
        xi0 = _unit_in(G, xi0)
        zeroed = m
    xi0 = np.where(np.abs(xi0) < 1e-300, 0.0, xi0)
    xi, eps = _nudge(problem, xi0)

    cone = cone_from_gram(GramSpec(problem.b))
    xi_vec = xi @ cone.normals
    xi_vec = xi_vec / np.linalg.norm(xi_vec)
    gamma_ref = problem.reference_gamma()
    E = float(energy(build_pyramid(cone, xi_vec), gamma_ref).value_angle_form)
    return MinimizerResult(
        xi_coords=_frozen(xi),
        xi_vector=_frozen(xi_vec),
        case_taken=case,
        zeroed_index=zeroed,
        certificate=problem.certificate(xi),
        energy=E,
        energy_closed_form=problem.closed_form_energy(xi),
        omega=_frozen(omega),
        omega_bar=None if omega_bar is None else _frozen(omega_bar),
        claim_value=claim,
        boundary_coords=_frozen(xi0),
        nudge=eps,
        rigid=problem.rigid,
    )


def problem_cones(problem: MatrixProblem) -> tuple[PolyhedralCone, PolyhedralCone, np.ndarray]:
    """Canonical realizations ``(C, C_bar, xi_bar vector)`` of a matrix problem."""
    cone = cone_from_gram(GramSpec(problem.b))
    ref = cone_from_gram(GramSpec(problem.b_bar))
    xv = problem.xi_bar @ ref.normals
    return cone, ref, xv / np.linalg.norm(xv)


# ---------------------------------------------------------------- incremental construction


def _side_arcs(normals: np.ndarray) -> np.ndarray:
    """``s_j = arc(n_j, n_{j+1})``."""
    return arc(normals, np.roll(normals, -1, axis=0))


def _triangle_from_sides(s: np.ndarray) -> np.ndarray:
    """Normals of a 3-faced cone whose dual triangle has side arcs ``s_j = arc(n_j, n_{j+1})``."""
    b = np.cos([s[1], s[2], s[0]])
    return cone_from_gram(GramSpec(b)).normals


def _place(P: np.ndarray, Q: np.ndarray, dP: float, dQ: float, side_of: np.ndarray) -> np.ndarray:
    """Unit vector at arcs ``dP`` from P and ``dQ`` from Q, on the same side of PQ as ``side_of``."""
    p = P @ Q
    cP, cQ = np.cos(dP), np.cos(dQ)
    det = 1.0 - p * p
    alpha = (cP - p * cQ) / det
    beta = (cQ - p * cP) / det
    base = alpha * P + beta * Q
    cross = np.cross(P, Q)
    rem = 1.0 - base @ base
    if rem < -1e-12:
        raise RigidityLabError("congruent placement impossible: arcs violate the triangle inequality")
    gamma = np.sqrt(max(rem, 0.0)) / np.linalg.norm(cross)
    sign = np.sign(side_of @ cross) or 1.0
    x = base + sign * gamma * cross
    return x / np.linalg.norm(x)


def _interior_margin(normals: np.ndarray, xi: np.ndarray) -> float:
    u = np.cross(normals, np.roll(normals, -1, axis=0))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    return float(np.min(-(u @ xi)))


def _strict_nudge(normals: np.ndarray, xi: np.ndarray, a: int, c: int, target: np.ndarray) -> np.ndarray:
    """Push ``xi`` away from ``n_a`` and ``n_c`` so all arcs strictly exceed ``target``."""
    bvert = 3 - a - c
    margin_b = arc(xi, normals[bvert]) - target[bvert]
    inner = _interior_margin(normals, xi)
    step = 0.25 * min(margin_b, inner)
    if step <= 0:
        raise AngleConditionViolated("no room for a strict interior nudge")
    tangents = []
    for j in (a, c):
        t = xi * (xi @ normals[j]) - normals[j]
        tangents.append(t / np.linalg.norm(t))
    d = tangents[0] + tangents[1]
    d /= np.linalg.norm(d)
    for _ in range(60):
        x = np.cos(step) * xi + np.sin(step) * d
        if np.all(arc(normals, x) > target) and _interior_margin(normals, x) > 0:
            return x
        step /= 2.0
    raise AngleConditionViolated("strict nudge failed to make every inequality strict")


def _chain_orders(s_ref: np.ndarray, s_new: np.ndarray):
    changed = [j for j in range(3) if s_new[j] != s_ref[j]]
    for order in permutations(changed):
        sides = s_ref.copy()
        ok = True
        for j in order:
            sides[j] = s_new[j]
            if not spherical_triangle_inequalities(sides):
                ok = False
                break
        if ok:
            yield list(order)


def solve_incremental(cone: PolyhedralCone, ref_cone: PolyhedralCone, xi_bar) -> np.ndarray:
    """Interior ``xi`` of ``cone``'s dual with ``gamma_j(xi) >= gamma_bar_j`` (strict unless isometric)."""
    if cone.k != 3 or ref_cone.k != 3:
        raise HypothesisViolated("both cones must have three faces")
    xi_bar = np.asarray(xi_bar, dtype=float)
    if not ref_cone.dual_interior(xi_bar):
        raise XiOutsideDualInterior("xi_bar is not interior to the reference dual cone")
    change = ref_cone.dihedral_angles - cone.dihedral_angles
    if np.any(change < -ANGLE_EPS):
        raise HypothesisViolated("every dihedral angle must be at most the reference angle")
    gamma_ref = arc(ref_cone.normals, xi_bar)
    # differences at rounding level are equal angles; a zero-length step would leave no strict room
    dec = change > ANGLE_EPS
    cond = angle_condition(cone, gamma_ref)
    bad = [j for j in range(3) if dec[j] and not cond[j]]
    if bad:
        raise AngleConditionViolated(f"strict angle condition fails at edges {bad}")

    s_ref = _side_arcs(ref_cone.normals)
    s_new = _side_arcs(cone.normals)
    s_new = np.where(dec, s_new, s_ref)
    order = next(_chain_orders(s_ref, s_new), None)
    if order is None:
        raise HypothesisViolated("no one-side-at-a-time chain keeps the intermediate triangles valid")

    normals = ref_cone.normals
    xi = xi_bar
    target = gamma_ref
    sides = s_ref.copy()
    for step, j in enumerate(order):
        sides[j] = s_new[j]
        new = cone.normals if step == len(order) - 1 else _triangle_from_sides(sides)
        a, bvert, c = j, (j + 1) % 3, (j + 2) % 3
        d = arc(normals, xi)
        if not arc(new[a], new[bvert]) < d[a] + d[bvert]:
            raise AngleConditionViolated(f"intermediate step {step} violates the arc condition")
        xi = _place(new[a], new[c], d[a], d[c], new[bvert])
        normals = new
        if _interior_margin(normals, xi) <= 0:
            raise AngleConditionViolated(f"intermediate step {step} left the dual cone")
        xi = _strict_nudge(normals, xi, a, c, target)
    if not order:
        xi = _map_congruent(ref_cone.normals, cone.normals, xi_bar)
    return xi


def _map_congruent(src: np.ndarray, dst: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Orthogonal map sending the vertices ``src`` to ``dst`` (same Gram matrix), applied to ``x``."""
    R = np.linalg.solve(src, dst).T
    y = R @ x
    return y / np.linalg.norm(y)


# ---------------------------------------------------------------- brute-force oracle


@dataclass(frozen=True)
class OracleResult:
    xi: np.ndarray
    energy: float
    evaluations: int


def grid_oracle(cone: PolyhedralCone, gamma_ref, resolution: int = 512, threads=1,
                boundary_decades: int = 9, rounds: int = 3) -> OracleResult:
    """Grid minimum of the comparison energy over the open dual cross-section.

    The energy is unbounded below near the boundary whenever a boundary direction has a
    positive certificate, so the coarse grid adds radial levels down to ``10^-decades/resolution``.
    """
    gamma_ref = np.asarray(gamma_ref, dtype=float)
    if gamma_ref.shape != (cone.k,):
        raise LengthMismatch(f"expected {cone.k} reference angles")
    grid = sphere_grid.fan_grid(cone.normals, resolution, boundary_decades)
    if not np.any(cone.dual_interior(grid.points)):
        raise EmptyInterior("no grid node lies inside the dual cone")

    def fn(pts):
        return energy_batch(cone, pts, gamma_ref)

    E = sphere_grid.evaluate_chunked(fn, grid.points, threads)
    count = len(E)
    i = sphere_grid.argbest(E, grid.points)
    best_pts, best_E = grid.points[i], E[i]
    dlam, ds = 1.0 / resolution, 1.0 / resolution
    log_lam = grid.lam[i] < 1.0 / resolution
    dlog = 1.0
    current, idx = grid, i
    for _ in range(rounds):
        if log_lam:
            local = sphere_grid.local_grid(current, idx, dlog, ds, log_lam=True)
        else:
            local = sphere_grid.local_grid(current, idx, dlam, ds)
        El = fn(local.points)
        count += len(El)
        j = sphere_grid.argbest(El, local.points)
        if El[j] < best_E or (El[j] == best_E and tuple(local.points[j]) < tuple(best_pts)):
            best_pts, best_E = local.points[j], El[j]
        current, idx = local, j
        dlam, ds, dlog = dlam / 10, ds / 10, dlog / 10
    return OracleResult(_frozen(best_pts), float(best_E), count)
