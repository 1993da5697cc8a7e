"""Seeded acceptance suite: nine criteria, each a set of named checks with a runtime budget.

Every criterion draws from its own generator ``default_rng([seed, number])`` so criteria can be run
alone or in any order with identical results.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from rigidity_lab import cone as cone_mod
from rigidity_lab import minimizer, pyramid, rhombus, sampling, trapping
from rigidity_lab.errors import InvalidInput, RigidityLabError
from rigidity_lab.hyperbolic import geometry as hg
from rigidity_lab.hyperbolic import mass as hm
from rigidity_lab.hyperbolic import metric as hmet
from rigidity_lab.hyperbolic.polyhedron import expanding_box

TOLERANCES = {
    "pd_band": 1e-6,
    "energy_rel": 1e-9,
    "norm": 1e-10,
    "coord": 1e-12,
    "oracle": 1e-6,
    "angle": 1e-12,
    "diagonal_gap": 0.1,
    "slack_factor": 10.0,
    "schlafli": 1e-5,
    "zero_sum": 1e-9,
    "tetra_rel": 1e-9,
    "umbilic": 1e-6,
    "umbilic_order": 0.1,
    "mean_curvature": 1e-6,
    "potential": 1e-8,
    "conformal": 1e-12,
    "distance": 1e-10,
    "mass_zero": 1e-8,
    "linearity": 1e-9,
    "decay_factor": 2.0,
}


@dataclass
class Check:
    name: str
    passed: bool
    value: float | None = None
    threshold: float | None = None
    detail: str = ""

    def to_dict(self) -> dict:
        def num(x):
            return None if x is None or not math.isfinite(x) else float(x)

        return {"name": self.name, "passed": bool(self.passed), "value": num(self.value),
                "threshold": num(self.threshold), "detail": self.detail}


@dataclass
class CriterionResult:
    number: int
    name: str
    module: str
    checks: list[Check]
    instances: int
    runtime_seconds: float
    budget_seconds: float

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self) -> dict:
        return {"number": self.number, "name": self.name, "module": self.module, "passed": self.passed,
                "checks": [c.to_dict() for c in self.checks], "instances": self.instances,
                "runtime_seconds": round(self.runtime_seconds, 3), "budget_seconds": self.budget_seconds}

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        failed = [c.name for c in self.checks if not c.passed]
        tail = f"  failed: {', '.join(failed)}" if failed else ""
        return (f"[{status}] criterion {self.number} {self.name} ({self.module}): "
                f"{self.instances} instances, {self.runtime_seconds:.1f}s / {self.budget_seconds:.0f}s{tail}")


@dataclass
class SuiteConfig:
    seed: int = 42
    tolerances: dict = field(default_factory=dict)
    resolution: int | None = None
    threads: int | str | None = 1

    def tol(self, name: str) -> float:
        return float(self.tolerances.get(name, TOLERANCES[name]))

    def rng(self, number: int) -> np.random.Generator:
        return np.random.default_rng([self.seed, number])


def _count_check(name: str, bad: int, total: int, detail: str = "") -> Check:
    text = f"{total - bad}/{total} hold" + (f"; {detail}" if detail else "")
    return Check(name, bad == 0, float(bad), 0.0, text)


def _max_check(name: str, values, threshold: float, detail: str = "") -> Check:
    worst = float(np.max(values)) if len(values) else 0.0
    return Check(name, bool(worst <= threshold), worst, threshold, detail or f"worst {worst:.3e}")


# ---------------------------------------------------------------- 1: Gram positivity


def criterion_1(cfg: SuiteConfig, n: int = 100_000):
    rng = cfg.rng(1)
    band = cfg.tol("pd_band")
    beta = rng.uniform(band, np.pi - band, (2 * n, 3))
    s = beta.sum(axis=1, keepdims=True)
    margin = np.min(np.concatenate([s - 2 * beta, 2 * np.pi - s], axis=1), axis=1)
    beta = beta[np.abs(margin) > band][:n]
    agree, n_pd = 0, 0
    for row in beta:
        pd = cone_mod.gram_positive_definite(cone_mod.GramSpec.from_beta(row))
        agree += pd == cone_mod.spherical_triangle_inequalities(row)
        n_pd += pd
    checks = [
        _count_check("pd_iff_triangle_inequalities", len(beta) - agree, len(beta), f"{n_pd} positive definite"),
        Check("sample_size", len(beta) == n, float(len(beta)), float(n), "instances outside the boundary band"),
    ]
    return checks, len(beta)


# ---------------------------------------------------------------- 2: energy identities


def criterion_2(cfg: SuiteConfig, n: int = 10_000):
    rng = cfg.rng(2)
    tol = cfg.tol("energy_rel")
    base_err, route_err = [], []
    for i in range(n):
        k = 3 + i % 6
        c = sampling.random_cone(rng, k)
        xi = sampling.random_dual_interior(rng, c)
        p = pyramid.build_pyramid(c, xi)
        g_ref = rng.uniform(0.05, np.pi - 0.05, k)
        rep = pyramid.energy(p, g_ref)
        base_err.append(abs(p.base_identity_residual()) / p.base_area)
        scale = p.base_area + np.abs(np.cos(g_ref)) @ p.side_face_areas
        route_err.append(abs(rep.difference) / scale)
    checks = [
        _max_check("base_identity_relative", base_err, tol),
        _max_check("energy_routes_relative", route_err, tol,
                   f"worst {max(route_err):.3e} relative to |B| + sum |cos gbar_j| |F_j|"),
    ]
    return checks, n


# ---------------------------------------------------------------- 3: matrix minimizer


def random_matrix_problem(rng: np.random.Generator) -> minimizer.MatrixProblem:
    """``b <= b_bar`` componentwise with one strict entry, both Gram matrices PD, random ``xi_bar``."""
    while True:
        b1 = np.cos(sampling.random_admissible_beta(rng))
        b2 = np.cos(sampling.random_admissible_beta(rng))
        lo, hi = np.minimum(b1, b2), np.maximum(b1, b2)
        if not np.any(hi > lo):
            continue
        try:
            return minimizer.MatrixProblem.normalized(lo, hi, rng.uniform(0.05, 1.0, 3))
        except InvalidInput:
            continue


def _third_step_subcase(problem: minimizer.MatrixProblem, result: minimizer.MinimizerResult) -> bool:
    m = result.zeroed_index
    perm = [i for i in range(3) if i != m] + [m]
    G = problem.G[np.ix_(perm, perm)]
    Gb = problem.G_bar[np.ix_(perm, perm)]
    b3, bb1, bb2 = G[0, 1], Gb[1, 2], Gb[0, 2]
    return bool(bb2 - bb1 * b3 < 0 or bb1 - bb2 * b3 < 0)


def criterion_3(cfg: SuiteConfig, n: int = 10_000, n_oracle: int = 100):
    rng = cfg.rng(3)
    norm_tol, coord_tol, oracle_tol = cfg.tol("norm"), cfg.tol("coord"), cfg.tol("oracle")
    resolution = cfg.resolution or 512
    bad = dict(norm=0, coords=0, certificate=0, energy=0, omega_bar=0, claim=0, oracle=0)
    n_second = n_sub = sub_claim_bad = 0
    oracle_gap = -np.inf
    for i in range(n):
        P = random_matrix_problem(rng)
        r = minimizer.solve_matrix_case(P)
        x = r.xi_coords
        bad["norm"] += not abs(x @ P.G @ x - 1.0) <= norm_tol
        bad["coords"] += not np.all(x >= -coord_tol)
        bad["certificate"] += not r.certificate > 0
        bad["energy"] += not r.energy < 0
        if r.case_taken == "SecondCase":
            n_second += 1
            bad["omega_bar"] += not np.all(r.omega_bar >= -coord_tol)
            bad["claim"] += not r.claim_value > 0
            if _third_step_subcase(P, r):
                n_sub += 1
                sub_claim_bad += not r.claim_value > 0
        if i < n_oracle:
            C, _, _ = minimizer.problem_cones(P)
            o = minimizer.grid_oracle(C, P.reference_gamma(), resolution=resolution, threads=cfg.threads)
            oracle_gap = max(oracle_gap, o.energy - r.energy)
            bad["oracle"] += not o.energy <= r.energy + oracle_tol
    checks = [
        _count_check("xi_G_xi_equals_one", bad["norm"], n),
        _count_check("xi_coordinates_nonnegative", bad["coords"], n),
        _count_check("certificate_positive", bad["certificate"], n),
        _count_check("energy_negative", bad["energy"], n),
        _count_check("second_case_omega_bar_nonnegative", bad["omega_bar"], n_second),
        _count_check("second_case_claim_positive", bad["claim"], n_second,
                     f"inside the sub-case b2-b1 b3 < 0 or b1-b2 b3 < 0: {n_sub - sub_claim_bad}/{n_sub} hold"),
        Check("oracle_dominance", bad["oracle"] == 0, float(oracle_gap), oracle_tol,
              f"{n_oracle - bad['oracle']}/{n_oracle} hold at resolution {resolution}; "
              f"max(oracle - closed form) = {oracle_gap:.3e}"),
    ]
    return checks, n


# ---------------------------------------------------------------- 4: incremental construction


def random_incremental_instance(rng: np.random.Generator):
    """Reference cone, reference axis and a cone with some dihedral angles decreased.

    Returned only when the strict angle condition holds on every decreased edge.
    """
    while True:
        ref = sampling.random_cone(rng, 3)
        xb = sampling.random_dual_interior(rng, ref)
        s = np.pi - ref.dihedral_angles
        mask = rng.uniform(size=3) < 0.7
        if not mask.any():
            continue
        s2 = s + rng.uniform(0.0, 0.3, 3) * mask
        if not cone_mod.spherical_triangle_inequalities(s2):
            continue
        try:
            normals = minimizer._triangle_from_sides(s2) @ sampling.random_rotation(rng).T
            c = cone_mod.cone_from_normals(normals)
        except InvalidInput:
            continue
        change = ref.dihedral_angles - c.dihedral_angles
        if np.any(change < -minimizer.ANGLE_EPS):
            continue
        dec = change > minimizer.ANGLE_EPS
        cond = pyramid.angle_condition(c, cone_mod.arc(ref.normals, xb))
        if all(cond[j] for j in range(3) if dec[j]):
            return c, ref, xb


def criterion_4(cfg: SuiteConfig, n: int = 1000):
    rng = cfg.rng(4)
    errors, not_larger, not_negative = {}, 0, 0
    min_margin = np.inf
    for _ in range(n):
        c, ref, xb = random_incremental_instance(rng)
        try:
            xi = minimizer.solve_incremental(c, ref, xb)
        except RigidityLabError as exc:
            errors[type(exc).__name__] = errors.get(type(exc).__name__, 0) + 1
            continue
        g_ref = cone_mod.arc(ref.normals, xb)
        margin = float(np.min(cone_mod.arc(c.normals, xi) - g_ref))
        min_margin = min(min_margin, margin)
        not_larger += not margin > 0
        not_negative += not pyramid.energy(pyramid.build_pyramid(c, xi), g_ref).value < 0
    n_err = sum(errors.values())
    checks = [
        _count_check("construction_succeeds", n_err, n, ", ".join(f"{k}: {v}" for k, v in sorted(errors.items()))),
        Check("gamma_exceeds_reference", not_larger == 0 and n_err == 0, min_margin, 0.0,
              f"{n - n_err - not_larger}/{n - n_err} constructed; minimum margin {min_margin:.3e}"),
        _count_check("energy_negative", not_negative, n - n_err),
    ]
    return checks, n


# ---------------------------------------------------------------- 5: rhombus counterexample


def criterion_5(cfg: SuiteConfig):
    inst = rhombus.audited_instance()
    pair = rhombus.same_angles_not_isometric((inst.reference, inst.candidate), tol=cfg.tol("angle"))
    resolution = cfg.resolution or 2048
    rep = rhombus.dominating_xi_search(inst.candidate.cone, (inst.reference.cone, inst.reference_xi),
                                       resolution=resolution, threads=cfg.threads)
    factor = cfg.tol("slack_factor")
    checks = [
        Check("dihedral_angles_agree", pair.max_angle_difference <= cfg.tol("angle"),
              pair.max_angle_difference, cfg.tol("angle")),
        Check("diagonals_differ", pair.diagonal_gap > cfg.tol("diagonal_gap"), pair.diagonal_gap,
              cfg.tol("diagonal_gap"), f"diagonals {np.round(pair.diagonals, 6).tolist()}"),
        Check("no_dominating_xi", rep.witness is None, None, None,
              f"{rep.evaluations} grid points at resolution {resolution}"),
        Check("deficit_margin", rep.worst_deficit < -factor * rep.slack, rep.margin_in_slacks, factor,
              f"worst deficit {rep.worst_deficit:.4e}, grid slack {rep.slack:.3e}"),
    ]
    return checks, 1


# ---------------------------------------------------------------- 6: Schläfli


def random_family(rng: np.random.Generator, k: int):
    c = sampling.random_cone(rng, k)
    xi0 = sampling.random_dual_interior(rng, c, min_weight=0.2)
    d_n = rng.standard_normal((k, 3))
    d_xi = rng.standard_normal(3)
    freq = rng.uniform(0.5, 2.0)

    def family(t):
        n = c.normals + 0.3 * np.sin(freq * t) * d_n + 0.1 * t * t * d_n[::-1]
        xi = xi0 + 0.3 * np.sin(t) * d_xi
        return n / np.linalg.norm(n, axis=1, keepdims=True), xi / np.linalg.norm(xi)

    return family


def criterion_6(cfg: SuiteConfig, n: int = 100):
    rng = cfg.rng(6)
    tol = cfg.tol("schlafli")
    r1, r2, done = [], [], 0
    while done < n:
        family = random_family(rng, 3 + done % 4)
        try:
            rep = pyramid.schlafli_check(family, 0.0, h=1e-5, tol=tol)
        except RigidityLabError:
            continue  # the random perturbation left the cone family invalid at t = 0
        r1.append(abs(rep.derivative_residual))
        r2.append(abs(rep.schlafli_residual))
        done += 1
    checks = [
        _max_check("energy_derivative_residual", r1, tol),
        _max_check("schlafli_identity_residual", r2, tol),
    ]
    return checks, n


# ---------------------------------------------------------------- 7: trapping


def random_base(rng: np.random.Generator, k: int | None = None) -> trapping.BaseFace:
    """Random convex polygon with unit normal ``W`` and placeholder reference angles."""
    k = k or int(rng.integers(3, 9))
    R = sampling.random_rotation(rng)
    ang = np.sort(rng.uniform(0, 2 * np.pi, k))
    while np.min(np.diff(np.concatenate([ang, [ang[0] + 2 * np.pi]]))) < 0.1:
        ang = np.sort(rng.uniform(0, 2 * np.pi, k))
    ax, ay = rng.uniform(0.5, 2.0, 2)
    pts = np.stack([ax * np.cos(ang), ay * np.sin(ang), np.zeros(k)], axis=1) + rng.uniform(-1, 1, 3) * [1, 1, 0]
    W = R @ np.array([0.0, 0.0, 1.0])
    return trapping.BaseFace(pts @ R.T + R @ np.array([0, 0, rng.uniform(-1, 1)]), W, np.full(k, np.pi / 2))


def random_axis(rng: np.random.Generator, W: np.ndarray) -> np.ndarray:
    while True:
        v = rng.standard_normal(3)
        v /= np.linalg.norm(v)
        if v @ W > 0.2:
            return v


def random_tetrahedron(rng: np.random.Generator):
    while True:
        p = rng.standard_normal((4, 3))
        vol = np.linalg.det(p[1:] - p[0]) / 6
        edges = [np.linalg.norm(p[i] - p[j]) for i in range(4) for j in range(i)]
        if abs(vol) > 0.02 * max(edges) ** 3:
            return p[3], p[:3]


def criterion_7(cfg: SuiteConfig, n: int = 1000):
    rng = cfg.rng(7)
    zero, tetra_err, trapped_bad, not_trapped = [], [], 0, 0
    for _ in range(n):
        base = random_base(rng)
        zero.append(abs(trapping.cylinder_cot_sum(base, random_axis(rng, base.W))))
    for _ in range(n):
        apex, tri = random_tetrahedron(rng)
        t = trapping.tetra_cot_identity(apex, trapping.tetra_base_face(apex, tri))
        tetra_err.append(t.relative_error)
        trapped_bad += not t.lhs > 0
    for _ in range(n):
        base = random_base(rng)
        v = random_axis(rng, base.W)
        hat = trapping.is_trapped(base, v).cylinder_angles
        delta = rng.uniform(0.0, 0.2, len(hat)) * (rng.uniform(size=len(hat)) < 0.6)
        delta[rng.integers(len(hat))] = rng.uniform(0.01, 0.2)
        ref = base.with_gamma(np.clip(hat - delta, 1e-3, np.pi))
        cert = trapping.is_trapped(ref, v)
        not_trapped += not cert.trapped
        trapped_bad += not trapping.cot_sum(ref) > 0
    checks = [
        _max_check("zero_sum_identity", zero, cfg.tol("zero_sum")),
        _max_check("tetrahedron_identity_relative", tetra_err, cfg.tol("tetra_rel")),
        _count_check("trapped_instances_certified", not_trapped, n),
        _count_check("trapped_implies_positive_cot_sum", trapped_bad, 2 * n, "tetrahedra and trapped polygons"),
    ]
    return checks, 3 * n


# ---------------------------------------------------------------- 8: local hyperbolic geometry


def criterion_8(cfg: SuiteConfig):
    tol_u, tol_h = cfg.tol("umbilic"), cfg.tol("mean_curvature")
    checks = []
    cases = [("horosphere", [1.0, 0.0, 0.0], 1.3, -2.0),
             ("geodesic", [0.0, 0.6, 0.8], 0.4, 0.0),
             ("equidistant", [0.6, 0.8, 0.0], 1.0, None)]
    order_bad, final, h_err = [], [], []
    for name, a, s, H_expected in cases:
        z = hg.ZSurface(np.array(a), s)
        for x1 in (0.5, 1.3, 3.0):
            p = z.point(x1)
            res, orders = hg.umbilicity_order(z, p)
            final.append(res[-1])
            if res[-1] > 1e-14:
                order_bad.append(float(np.max(np.abs(orders - 2.0))))
            H = hg.z_surface_curvature(z, p).mean_curvature
            h_err.append(abs(H - (-2.0 * z.a[0] if H_expected is None else H_expected)))
    checks.append(_max_check("umbilicity_order_deviation", order_bad, cfg.tol("umbilic_order"),
                             f"max |order - 2| = {max(order_bad):.3f}"))
    checks.append(_max_check("umbilicity_final_residual", final, tol_u))
    checks.append(_max_check("mean_curvature", h_err, tol_h))
    pot = []
    for a, s, x1 in (([0.6, 0.8, 0.0], 1.0, 2.0), ([1.0, 0.0, 0.0], 0.7, 0.7), ([0.0, 1.0, 0.0], 0.2, 1.5),
                     ([-0.48, 0.6, 0.64], 0.3, 0.9)):
        z = hg.ZSurface(np.array(a), s)
        p = z.point(x1)
        pot.append(abs(hg.static_potential_normal_derivative_fd(z, p) + z.a[0] * hg.static_potential(p)))
    checks.append(_max_check("static_potential_normal_derivative", pot, cfg.tol("potential")))
    conf = []
    z1 = hg.ZSurface(np.array([0.0, 1.0, 0.0]), 0.0)
    for a2, s2 in (([0.0, 0.5, math.sqrt(3) / 2], 0.2), ([0.6, 0.0, 0.8], 0.9), ([0.36, 0.48, 0.8], 0.5)):
        z2 = hg.ZSurface(np.array(a2), s2)
        x0, d = hg.intersection_line(z1, z2)
        for t in (-0.5, 0.0, 0.7):
            p = x0 + t * d
            if p[0] <= 0.05:
                p = x0 + (0.6 - x0[0]) / d[0] * d if abs(d[0]) > 1e-12 else x0 + np.array([1.0 - x0[0], 0, 0])
            ang_b, ang_e = hg.conformal_angle_check(z1, z2, p)
            conf.append(abs(ang_b - ang_e))
    checks.append(_max_check("conformal_angle_equality", conf, cfg.tol("conformal")))
    dist = float(hg.hyperbolic_distance(hg.ORIGIN, np.array([math.e, 0.0, 0.0])))
    checks.append(Check("distance_example", abs(dist - 1.0) <= cfg.tol("distance"), abs(dist - 1.0),
                        cfg.tol("distance"), f"r((1,0,0),(e,0,0)) = {dist!r}"))
    return checks, len(cases) * 3


# ---------------------------------------------------------------- 9: mass identity


def criterion_9(cfg: SuiteConfig, scales=(2.0, 3.0, 4.0)):
    zero = hm.miao_piubello_check(hmet.zero_field(), scales)
    worst_zero = max(max(abs(r.flux), abs(r.face_term), abs(r.edge_term), abs(r.residual)) for r in zero)
    field_ = hmet.decaying_field(0.1, 2.0)
    reports = hm.miao_piubello_check(field_, scales, atol=1e-7, rtol=1e-10)
    verdict = hm.decay_verdict(reports, field_.tau)
    box = expanding_box(math.exp(scales[0]))
    e1, e2 = hmet.decaying_field(0.1, 2.0), hmet.decaying_field(0.1, 2.0, S=hmet.ALT_S)
    f1, f2 = hm.mass_flux(e1, box, atol=1e-9), hm.mass_flux(e2, box, atol=1e-9)
    f12 = hm.mass_flux(e1.scaled(2.0) + e2.scaled(-0.5), box, atol=1e-9)
    lin = abs(f12 - (2.0 * f1 - 0.5 * f2))
    res = [r.residual for r in reports]
    checks = [
        Check("zero_perturbation_residuals", worst_zero <= cfg.tol("mass_zero"), worst_zero, cfg.tol("mass_zero")),
        Check("residual_strictly_decreasing", verdict.strictly_decreasing, None, None,
              "residuals " + ", ".join(f"{x:.4e}" for x in res)),
        Check("decay_ratio_within_factor", _within(verdict, cfg.tol("decay_factor")),
              float(np.max(np.abs(np.log(verdict.ratio_factors)))), math.log(cfg.tol("decay_factor")),
              "observed ratios " + ", ".join(f"{x:.4f}" for x in verdict.observed_ratios)
              + "; cosh ratios " + ", ".join(f"{x:.4f}" for x in verdict.predicted_ratios)),
        Check("flux_linear_in_e", lin <= cfg.tol("linearity"), lin, cfg.tol("linearity")),
    ]
    return checks, 2 * len(scales) + 3


def _within(verdict: hm.DecayVerdict, factor: float) -> bool:
    f = verdict.ratio_factors
    return bool(np.all((f >= 1.0 / factor) & (f <= factor)))


# ---------------------------------------------------------------- suite


@dataclass(frozen=True)
class Criterion:
    number: int
    name: str
    module: str
    budget_seconds: float
    run: Callable[[SuiteConfig], tuple[list[Check], int]]


CRITERIA = (
    Criterion(1, "gram_positivity_equivalence", "cone_core", 10, criterion_1),
    Criterion(2, "energy_identities", "pyramid_energy", 30, criterion_2),
    Criterion(3, "matrix_minimizer", "tetra_minimizer", 180, criterion_3),
    Criterion(4, "incremental_construction", "tetra_minimizer", 60, criterion_4),
    Criterion(5, "rhombus_counterexample", "quad_counterexample", 120, criterion_5),
    Criterion(6, "schlafli", "pyramid_energy", 30, criterion_6),
    Criterion(7, "trapping", "trapping", 30, criterion_7),
    Criterion(8, "hyperbolic_local_geometry", "hyperbolic_model", 60, criterion_8),
    Criterion(9, "mass_identity", "hyperbolic_model", 300, criterion_9),
)


def run_criterion(number: int, cfg: SuiteConfig | None = None) -> CriterionResult:
    cfg = cfg or SuiteConfig()
    crit = CRITERIA[number - 1]
    t0 = time.perf_counter()
    checks, instances = crit.run(cfg)
    dt = time.perf_counter() - t0
    checks.append(Check("runtime", dt < crit.budget_seconds, dt, crit.budget_seconds, f"{dt:.2f}s"))
    return CriterionResult(crit.number, crit.name, crit.module, checks, instances, dt, crit.budget_seconds)


def run_suite(cfg: SuiteConfig | None = None, numbers=None, echo: Callable[[str], None] | None = None):
    cfg = cfg or SuiteConfig()
    results = []
    for n in numbers or range(1, len(CRITERIA) + 1):
        r = run_criterion(n, cfg)
        if echo:
            echo(r.line())
        results.append(r)
    return results
