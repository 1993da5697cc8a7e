import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rigidity_lab.cone import GramSpec, arc, cone_from_gram, orthant
from rigidity_lab.errors import (
    AngleConditionViolated,
    HypothesisViolated,
    InvalidInput,
    NotPositiveDefinite,
    XiOutsideDualInterior,
)
from rigidity_lab.minimizer import (
    MatrixProblem,
    claim_value,
    grid_oracle,
    problem_cones,
    solve_incremental,
    solve_matrix_case,
)
from rigidity_lab.pyramid import build_pyramid, energy
from rigidity_lab.sampling import random_cone, random_dual_interior
from rigidity_lab.verify import random_incremental_instance, random_matrix_problem

seeds = st.integers(0, 2**32 - 1)
XI_SYM = -np.ones(3) / np.sqrt(3)


def _second_case_problem(seed=0):
    r = np.random.default_rng(seed)
    while True:
        P = random_matrix_problem(r)
        res = solve_matrix_case(P)
        if res.case_taken == "SecondCase" and res.claim_value > 0:
            return P, res


def test_identical_gram_is_rigid():
    P = MatrixProblem.normalized([0.1, -0.2, 0.3], [0.1, -0.2, 0.3], [0.2, 0.5, 0.7])
    r = solve_matrix_case(P)
    assert r.rigid and r.case_taken == "FirstCase"
    assert np.allclose(r.omega, P.xi_bar, atol=1e-14)
    assert np.allclose(r.xi_coords, P.xi_bar, atol=1e-14)
    assert r.certificate == pytest.approx(0.0, abs=1e-14)
    assert r.energy == pytest.approx(0.0, abs=1e-14)


def test_symmetric_first_case():
    P = MatrixProblem.normalized([-0.3] * 3, [-0.2] * 3, [1.0, 1.0, 1.0])
    r = solve_matrix_case(P)
    assert r.case_taken == "FirstCase"
    assert np.allclose(r.omega, r.omega[0]) and r.omega[0] > 0
    assert r.certificate == pytest.approx(r.xi_coords @ P.G_bar @ P.xi_bar - 1.0, abs=1e-15)
    assert r.certificate > 0
    C, _, _ = problem_cones(P)
    direct = energy(build_pyramid(C, r.xi_vector), P.reference_gamma()).value_angle_form
    assert r.energy == pytest.approx(direct, abs=1e-14)
    assert r.energy < 0


def test_seeded_second_case():
    P, r = _second_case_problem()
    assert np.min(r.omega) < 0
    assert np.all(r.omega_bar >= 0)
    assert r.certificate > 0 and r.energy < 0
    assert r.xi_coords[r.zeroed_index] >= 0
    assert abs(r.xi_coords @ P.G @ r.xi_coords - 1.0) <= 1e-10


def test_second_case_claim_can_fail():
    # outside the sub-case handled by the proof the claimed inequality is not automatic
    r = np.random.default_rng(0)
    for _ in range(2000):
        res = solve_matrix_case(random_matrix_problem(r))
        if res.case_taken == "SecondCase" and res.claim_value <= 0:
            assert res.certificate > 0 and res.energy < 0
            return
    pytest.fail("no SecondCase instance with a non-positive claim value in 2000 samples")


@given(seeds)
def test_matrix_sweep_postconditions(seed):
    P = random_matrix_problem(np.random.default_rng(seed))
    r = solve_matrix_case(P)
    x = r.xi_coords
    assert abs(x @ P.G @ x - 1.0) <= 1e-10
    assert np.all(x >= -1e-12)
    assert r.certificate > 0
    assert r.energy < 0


@given(seeds)
def test_closed_form_matches_pyramid_energy(seed):
    r = np.random.default_rng(seed)
    P = random_matrix_problem(r)
    C, _, _ = problem_cones(P)
    x = r.uniform(0.1, 1.0, 3)
    x /= np.sqrt(x @ P.G @ x)
    v = x @ C.normals
    E = energy(build_pyramid(C, v / np.linalg.norm(v)), P.reference_gamma()).value_angle_form
    assert P.closed_form_energy(x) == pytest.approx(E, rel=1e-9, abs=1e-12)


def test_reference_gamma_matches_cones():
    P = random_matrix_problem(np.random.default_rng(5))
    _, ref, xv = problem_cones(P)
    assert np.allclose(P.reference_gamma(), arc(ref.normals, xv), atol=1e-12)


@given(seeds)
def test_averaged_determinant_expansion(seed):
    # det((G_bar' + G)/2), with the zeroed entry of h removed, expands to
    # det G + zeta q^t - (h1^2 + h2^2 - 2 b3 h1 h2) / 4
    r = np.random.default_rng(seed)
    G = GramSpec(np.cos(r.uniform(0.8, 2.3, 3))).G
    h = np.array([r.uniform(0, 0.2), r.uniform(0, 0.2), 0.0])
    H = np.array([[0, h[2], h[1]], [h[2], 0, h[0]], [h[1], h[0], 0]])
    lhs = np.linalg.det(G + H / 2)
    b3 = G[0, 1]
    rhs = claim_value(G, h) - (h[0] ** 2 + h[1] ** 2 - 2 * b3 * h[0] * h[1]) / 4
    assert lhs == pytest.approx(rhs, abs=1e-13)


def test_negative_h_rejected():
    P = MatrixProblem.normalized([0.0, 0.0, 0.1], [0.0, 0.0, 0.0], [1, 1, 1])
    with pytest.raises(HypothesisViolated):
        solve_matrix_case(P)


def test_problem_validation():
    with pytest.raises(NotPositiveDefinite):
        MatrixProblem.normalized(np.cos([0.1, 0.1, 3.0]), [0, 0, 0], [1, 1, 1])
    with pytest.raises(XiOutsideDualInterior):
        MatrixProblem([0, 0, 0], [0, 0, 0], [1.0, 0.0, 0.0])
    with pytest.raises(InvalidInput):
        MatrixProblem([0, 0, 0], [0, 0, 0], [1.0, 1.0, 1.0])


def test_boundary_solution_is_nudged_inside():
    for seed in range(50):
        P, r = _second_case_problem(seed)
        if r.boundary_coords[r.zeroed_index] == 0.0:
            assert r.nudge > 0 and np.all(r.xi_coords > 0)
            return
    pytest.fail("no boundary solution found")


# ---------------------------------------------------------------- incremental


def test_incremental_self_is_congruence():
    ref = random_cone(np.random.default_rng(7), 3)
    xb = random_dual_interior(np.random.default_rng(8), ref)
    xi = solve_incremental(ref, ref, xb)
    assert np.allclose(arc(ref.normals, xi), arc(ref.normals, xb), atol=1e-12)


def test_incremental_one_angle_on_orthant():
    cand = cone_from_gram(GramSpec([0.0, 0.0, -np.sin(0.1)]))
    ref = orthant()
    assert np.allclose(cand.dihedral_angles, [np.pi / 2 - 0.1, np.pi / 2, np.pi / 2], atol=1e-12)
    xi = solve_incremental(cand, ref, XI_SYM)
    assert cand.dual_interior(xi)
    assert np.all(arc(cand.normals, xi) - arc(ref.normals, XI_SYM) > 1e-10)


def test_incremental_all_three_angles():
    s = 0.05
    b = -np.cos(np.pi / 2 - s)
    cand = cone_from_gram(GramSpec([b, b, b]))
    assert np.allclose(cand.dihedral_angles, np.pi / 2 - s, atol=1e-12)
    gref = arc(orthant().normals, XI_SYM)
    xi = solve_incremental(cand, orthant(), XI_SYM)
    assert np.all(arc(cand.normals, xi) > gref)
    assert energy(build_pyramid(cand, xi), gref).value_angle_form < 0


@pytest.mark.parametrize("seed", range(40))
def test_incremental_random(seed):
    c, ref, xb = random_incremental_instance(np.random.default_rng(seed))
    xi = solve_incremental(c, ref, xb)
    assert c.dual_interior(xi)
    assert np.all(arc(c.normals, xi) > arc(ref.normals, xb))


def test_incremental_rejects_increased_angle():
    cand = cone_from_gram(GramSpec([0.0, 0.0, np.sin(0.1)]))
    with pytest.raises(HypothesisViolated):
        solve_incremental(cand, orthant(), XI_SYM)


def test_incremental_angle_condition_violation():
    # xi_bar close to n_1 and n_2 leaves no room once their arc grows by a large amount
    xb = -np.array([1.0, 1.0, 0.05])
    xb /= np.linalg.norm(xb)
    s = 0.6
    cand = cone_from_gram(GramSpec([0.0, 0.0, -np.sin(s)]))
    with pytest.raises(AngleConditionViolated):
        solve_incremental(cand, orthant(), xb)


# ---------------------------------------------------------------- oracle


def test_oracle_self_reference():
    c = random_cone(np.random.default_rng(11), 3)
    xb = random_dual_interior(np.random.default_rng(12), c)
    g = arc(c.normals, xb)
    o = grid_oracle(c, g, resolution=128)
    assert o.energy <= 1e-9
    assert abs(energy(build_pyramid(c, xb), g).value) <= 1e-12


def test_oracle_orthant_right_angles():
    o = grid_oracle(orthant(), [np.pi / 2] * 3, resolution=64)
    assert o.energy > 0
    assert np.allclose(o.xi, XI_SYM, atol=1e-3)
    assert o.energy == pytest.approx(3 * np.sqrt(3) / 2, abs=1e-5)


@pytest.mark.parametrize("seed", range(5))
def test_oracle_dominance(seed):
    P = random_matrix_problem(np.random.default_rng(100 + seed))
    r = solve_matrix_case(P)
    C, _, _ = problem_cones(P)
    o = grid_oracle(C, P.reference_gamma(), resolution=128)
    assert o.energy <= r.energy + 1e-6


def test_oracle_deterministic_across_threads():
    c = random_cone(np.random.default_rng(13), 4)
    g = np.full(4, 1.2)
    a = grid_oracle(c, g, resolution=96, threads=1)
    b = grid_oracle(c, g, resolution=96, threads=3)
    assert np.array_equal(a.xi, b.xi) and a.energy == b.energy
