import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rigidity_lab.cone import arc, cone_from_normals, orthant
from rigidity_lab.errors import LengthMismatch, StencilInvalid, XiOutsideDualInterior
from rigidity_lab.pyramid import (
    angle_condition,
    angle_condition_arc_form,
    build_pyramid,
    energy,
    energy_batch,
    schlafli_check,
)
from rigidity_lab.rhombus import family_normals
from rigidity_lab.sampling import random_cone, random_dual_interior, random_rotation
from rigidity_lab.verify import random_family

seeds = st.integers(0, 2**32 - 1)
XI_SYM = -np.ones(3) / np.sqrt(3)


def test_orthant_pyramid_geometry():
    p = build_pyramid(orthant(), XI_SYM)
    e = np.eye(3)
    for j in range(3):
        assert np.allclose(p.base_vertices[j], np.sqrt(3) * e[(j + 2) % 3], atol=1e-14)
    assert np.allclose(p.side_face_areas, 1.5, atol=1e-14)
    assert p.base_area == pytest.approx(3 * np.sqrt(3) / 2, abs=1e-14)
    assert np.allclose(np.cos(p.gamma), 1 / np.sqrt(3), atol=1e-14)
    assert abs(p.base_identity_residual()) <= 1e-14


def test_boundary_xi_rejected():
    with pytest.raises(XiOutsideDualInterior):
        build_pyramid(orthant(), [-1.0, 0.0, 0.0])


def test_rhombus_pyramid_is_symmetric():
    c = cone_from_normals(family_normals(np.pi / 4, np.pi / 4))
    p = build_pyramid(c, [0.0, 0.0, -1.0])
    assert np.allclose(p.gamma, p.gamma[0], atol=1e-12)
    assert np.allclose(np.cos(p.gamma), c.normals @ np.array([0.0, 0.0, -1.0]), atol=1e-15)
    assert abs(p.base_identity_residual()) <= 1e-12


@given(seeds, st.integers(3, 8))
def test_base_identity(seed, k):
    r = np.random.default_rng(seed)
    c = random_cone(r, k)
    p = build_pyramid(c, random_dual_interior(r, c))
    scale = p.base_area + p.side_face_areas.sum()
    assert abs(p.base_identity_residual()) <= 1e-12 * scale
    assert np.allclose(p.base_vertices @ p.xi, -1.0, atol=1e-12)


def test_self_comparison_is_zero():
    p = build_pyramid(orthant(), XI_SYM)
    rep = energy(p, p.gamma)
    assert abs(rep.value_direct) <= 1e-14
    assert abs(rep.value_angle_form) <= 1e-14


def test_orthant_right_reference_gives_base_area():
    rep = energy(build_pyramid(orthant(), XI_SYM), [np.pi / 2] * 3)
    assert rep.value_direct == pytest.approx(3 * np.sqrt(3) / 2, abs=1e-14)
    assert rep.value_angle_form == pytest.approx(3 * np.sqrt(3) / 2, abs=1e-14)


def test_smaller_reference_angles_give_negative_energy():
    p = build_pyramid(orthant(), XI_SYM)
    rep = energy(p, p.gamma - 0.1)
    assert rep.value_direct < 0 and rep.value_angle_form < 0
    assert abs(rep.difference) <= 1e-14


def test_energy_length_mismatch():
    with pytest.raises(LengthMismatch):
        energy(build_pyramid(orthant(), XI_SYM), [1.0, 1.0])


@given(seeds, st.integers(3, 8))
def test_energy_routes_agree(seed, k):
    r = np.random.default_rng(seed)
    c = random_cone(r, k)
    p = build_pyramid(c, random_dual_interior(r, c))
    g = r.uniform(0.05, np.pi - 0.05, k)
    rep = energy(p, g)
    scale = p.base_area + np.abs(np.cos(g)) @ p.side_face_areas
    assert abs(rep.difference) <= 1e-12 * scale


@given(seeds)
def test_energy_rotation_invariant(seed):
    r = np.random.default_rng(seed)
    c = random_cone(r, 5)
    xi = random_dual_interior(r, c)
    g = r.uniform(0.2, 2.9, 5)
    R = random_rotation(r)
    E0 = energy(build_pyramid(c, xi), g).value
    E1 = energy(build_pyramid(c.rotated(R), R @ xi), g).value
    assert E1 == pytest.approx(E0, abs=1e-12 * (1 + abs(E0)))


@given(seeds)
def test_energy_increases_with_reference_angles(seed):
    r = np.random.default_rng(seed)
    c = random_cone(r, 4)
    p = build_pyramid(c, random_dual_interior(r, c))
    g = r.uniform(0.2, 2.5, 4)
    bump = np.zeros(4)
    bump[r.integers(4)] = 0.1
    assert energy(p, g + bump).value > energy(p, g).value


def test_energy_batch_matches_single(rng):
    c = random_cone(rng, 6)
    xis = np.array([random_dual_interior(rng, c) for _ in range(20)])
    g = rng.uniform(0.3, 2.8, 6)
    batch = energy_batch(c, xis, g)
    single = [energy(build_pyramid(c, x), g).value for x in xis]
    assert np.allclose(batch, single, rtol=1e-12, atol=1e-12)
    assert energy_batch(c, -xis[:1], g)[0] == np.inf


def test_angle_condition_examples():
    assert angle_condition(orthant(), [np.pi / 2] * 3) == [True] * 3
    assert angle_condition(orthant(), [0.1] * 3) == [False] * 3


@given(seeds)
def test_angle_condition_forms_agree(seed):
    r = np.random.default_rng(seed)
    ref = random_cone(r, 3)
    xi = random_dual_interior(r, ref)
    cand = random_cone(r, 3)
    g = arc(ref.normals, xi)
    lhs = np.abs(np.pi - (g + np.roll(g, -1)))
    side = arc(cand.normals, np.roll(cand.normals, -1, 0))
    d = g + np.roll(g, -1)
    # away from ties the two forms coincide
    safe = (np.abs(lhs - cand.dihedral_angles) > 1e-9) & (np.abs(side - d) > 1e-9)
    a = np.array(angle_condition(cand, g))
    b = np.array(angle_condition_arc_form(cand, ref.normals, xi))
    if np.all(d < np.pi):
        assert np.array_equal(a[safe], b[safe])


def test_schlafli_constant_family():
    c = random_cone(np.random.default_rng(1), 4)
    xi = random_dual_interior(np.random.default_rng(2), c)
    rep = schlafli_check(lambda t: (c.normals, xi))
    assert rep.energy_derivative == 0.0
    assert np.all(rep.theta_dot == 0.0) and np.all(rep.gamma_dot == 0.0)


def test_schlafli_scaling_family():
    # moving xi only: theta is constant, E' = 0 and sum lbar_j gamma_j' = 0
    c = random_cone(np.random.default_rng(3), 5)
    xi0 = random_dual_interior(np.random.default_rng(4), c)
    d = np.cross(xi0, [0.0, 0.0, 1.0])

    def fam(t):
        x = xi0 + t * d
        return c.normals, x / np.linalg.norm(x)

    rep = schlafli_check(fam)
    assert abs(rep.energy_derivative) <= 1e-8
    assert abs(rep.schlafli_residual) <= 1e-5


def test_schlafli_rhombus_rotation():
    def fam(t):
        return family_normals(np.pi / 4 + t, np.pi / 4), np.array([0.0, 0.0, -1.0])

    rep = schlafli_check(fam)
    assert abs(rep.derivative_residual) <= 1e-5
    assert abs(rep.schlafli_residual) <= 1e-5


@pytest.mark.parametrize("seed", range(10))
def test_schlafli_random_families(seed):
    r = np.random.default_rng(seed)
    fam = random_family(r, 3 + seed % 4)
    try:
        rep = schlafli_check(fam)
    except StencilInvalid:
        pytest.skip("family degenerates inside the stencil")
    assert abs(rep.derivative_residual) <= 1e-5
    assert abs(rep.schlafli_residual) <= 1e-5


def test_schlafli_rejects_degenerate_stencil():
    def fam(t):
        return orthant().normals, np.array([-1.0, -t, -1.0]) / np.sqrt(2 + t * t)

    with pytest.raises(StencilInvalid):
        schlafli_check(fam, t0=0.0, h=1e-3)
