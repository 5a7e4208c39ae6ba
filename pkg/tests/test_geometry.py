import numpy as np
import pytest
from numpy.testing import assert_allclose

from gauged_reduce._numerics import jacobian
from gauged_reduce.errors import OffManifold, OffTangent, SectionDegenerate
from gauged_reduce.scenarios import get_scenario

SO3R3 = get_scenario("so3_r3").manifold


def test_so3_fundamental_field_and_isotropy():
    q = np.array([0.0, 0.0, 1.0])
    assert_allclose(SO3R3.fundamental_field([1, 0, 0], q), [0, -1, 0], atol=1e-15)
    k = SO3R3.isotropy_algebra(q)
    assert k.dim == 1
    assert_allclose(SO3R3.fundamental_field(k.basis[:, 0], q), 0, atol=1e-15)


def test_so5_pair_isotropy_dim(rng):
    sc = get_scenario("so5_pairs")
    for _ in range(5):
        assert sc.manifold.isotropy_algebra(sc.sample_orbit_point(rng)).dim == 3


def test_hopf_action_is_free(rng):
    sc = get_scenario("hopf")
    for _ in range(5):
        assert sc.manifold.isotropy_algebra(sc.sample_orbit_point(rng)).dim == 0


def test_vertical_horizontal_split_examples():
    q = np.array([0.0, 0.0, 1.0])
    v = SO3R3.fundamental_field([0.3, -0.2, 0.0], q)
    ver, hor = SO3R3.vertical_horizontal_split(q, v)
    assert_allclose(ver, v, atol=1e-15)
    assert_allclose(hor, 0, atol=1e-15)
    radial = np.array([0.0, 0.0, 0.25])
    ver, hor = SO3R3.vertical_horizontal_split(q, radial)
    assert_allclose(ver, 0, atol=1e-15)
    assert_allclose(hor, radial)


def test_split_rejects_non_tangent_vectors():
    M = get_scenario("hopf").manifold
    q = M.section(np.array([0.1, 0.2]))
    with pytest.raises(OffTangent):
        M.vertical_horizontal_split(q, q)


def test_check_point_rejects_off_manifold():
    M = get_scenario("hopf").manifold
    with pytest.raises(OffManifold):
        M.check_point(np.array([1.0, 1.0, 0.0, 0.0]))
    with pytest.raises(OffManifold):
        SO3R3.check_point(np.zeros(3))


def test_split_properties(scenario, rng):
    M = scenario.manifold
    for _ in range(10):
        q = scenario.sample_orbit_point(rng)
        v = M.tangent_projector(q) @ rng.standard_normal(M.N)
        ver, hor = M.vertical_horizontal_split(q, v)
        assert abs(ver @ hor) <= 1e-10 * (1 + v @ v)
        assert_allclose(ver + hor, v, atol=1e-10)
        Z = M.action.zeta_matrix(q)
        assert np.abs(Z.T @ hor).max() <= 1e-10 * (1 + np.abs(v).max())


def test_rank_nullity(scenario, rng):
    M = scenario.manifold
    for _ in range(5):
        q = scenario.sample_orbit_point(rng)
        rank = np.linalg.matrix_rank(M.action.zeta_matrix(q))
        assert M.isotropy_algebra(q).dim + rank == M.algebra.dim


def test_so3_inertia_tensor():
    r = 1.7
    I = SO3R3.inertia_tensor(np.array([0.0, 0.0, r]))
    assert I[0, 0] == pytest.approx(r ** 2)
    assert I[0, 1] == pytest.approx(0.0, abs=1e-15)


def test_inertia_properties(scenario, rng):
    M = scenario.manifold
    alg = M.algebra
    q = scenario.sample_orbit_point(rng)
    I = M.inertia_tensor(q)
    assert np.linalg.eigvalsh(I).min() >= -1e-12
    kq = M.isotropy_algebra(q)
    for j in range(kq.dim):
        X = kq.basis[:, j]
        assert X @ I @ X <= 1e-12
    perp, Iperp = M.inertia_on_complement(q)
    assert np.linalg.eigvalsh(Iperp).min() > 1e-6
    k = alg.exp(rng.standard_normal(alg.dim))
    X, Y = rng.standard_normal((2, alg.dim))
    kq_point = M.action.act(k, q)
    lhs = alg.Ad(k, X) @ M.inertia_tensor(kq_point) @ alg.Ad(k, Y)
    assert lhs == pytest.approx(X @ I @ Y, rel=1e-10, abs=1e-10)


def test_so3_momentum_map_is_cross_product(rng):
    q, p = rng.standard_normal((2, 3))
    assert_allclose(SO3R3.momentum_map(q, p), np.cross(q, p), atol=1e-14)


def test_momentum_map_properties(scenario, rng):
    M = scenario.manifold
    alg = M.algebra
    for _ in range(5):
        q = scenario.sample_orbit_point(rng)
        p = M.tangent_projector(q) @ rng.standard_normal(M.N)
        mu = M.momentum_map(q, p)
        kq = M.isotropy_algebra(q)
        if kq.dim:
            assert np.abs(mu @ kq.basis).max() <= 1e-10
        _, hor = M.vertical_horizontal_split(q, p)
        assert_allclose(M.momentum_map(q, hor), 0, atol=1e-12)
        k = alg.exp(rng.standard_normal(alg.dim))
        G = M.action.group_rep(k)
        assert_allclose(M.momentum_map(G @ q, G @ p), alg.Ad_star(k, mu), atol=1e-10)


def test_momentum_map_bijective_on_vertical(scenario, rng):
    M = scenario.manifold
    q = scenario.sample_orbit_point(rng)
    Z = M.action.zeta_matrix(q)
    # image of vertical covectors under mu has dimension dim Ann k_q
    assert np.linalg.matrix_rank(M.momentum_map(q, Z)) == M.algebra.dim - M.isotropy_algebra(q).dim


def test_invariant_coordinates(scenario, rng):
    M = scenario.manifold
    alg = M.algebra
    for _ in range(5):
        x = scenario.sample_x(rng)
        q = M.section(x)
        assert_allclose(M.invariants(q), x, atol=1e-12)
        k = alg.exp(rng.standard_normal(alg.dim))
        assert_allclose(M.invariants(M.action.act(k, q)), x, atol=1e-8)
        dpsi = M.invariants_jacobian(q)
        assert np.abs(dpsi @ M.action.zeta_matrix(q)).max() <= 1e-8
        assert M.isotropy_algebra(q).dim == M.h_sub.dim


def test_so3_base_metric_is_one():
    assert_allclose(SO3R3.base_metric(np.array([2.3])), [[1.0]], atol=1e-14)
    assert_allclose(SO3R3.horizontal_lift_matrix(np.array([2.3]))[:, 0], [0, 0, 1], atol=1e-14)


def test_base_metric_against_section_pullback(scenario, rng):
    """Oracle: |ds w|^2 minus its vertical part, with ds by finite differences."""
    M = scenario.manifold
    for _ in range(3):
        x = scenario.sample_x(rng)
        q = M.section(x)
        J = jacobian(M.section, x, 1e-4)
        Z = M.action.zeta_matrix(q)
        P = np.eye(M.N) - Z @ np.linalg.pinv(Z)
        g = J.T @ P @ J
        G = M.base_metric(x)
        assert_allclose(G, G.T, atol=1e-14)
        assert np.linalg.eigvalsh(G).min() > 0
        assert_allclose(G, g, rtol=1e-8, atol=1e-10)


def test_hopf_base_metric_is_round_sphere():
    M = get_scenario("hopf").manifold
    x = np.array([0.3, -0.4])
    r2 = x @ x
    # sphere of radius 1/2 in the projected coordinates x of the upper hemisphere
    expected = 0.25 * (np.eye(2) + np.outer(x, x) / (1 - r2))
    assert_allclose(M.base_metric(x), expected, atol=1e-12)


def test_section_outside_domain():
    M = get_scenario("so5_pairs").manifold
    with pytest.raises(SectionDegenerate):
        M.section(np.array([0.6, 0.0]))
