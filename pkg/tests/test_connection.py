import numpy as np
import pytest
from numpy.testing import assert_allclose

from gauged_reduce import connection as con
from gauged_reduce.checks import SO5_CURVATURE_PAIRING, SO5_CURVATURE_POINT
from gauged_reduce.scenarios import SO5_REFERENCE_LAMBDA, get_scenario

SO3R3 = get_scenario("so3_r3").manifold
HOPF = get_scenario("hopf").manifold
SO5 = get_scenario("so5_pairs").manifold


def _ann(M, q, rng):
    kq = M.isotropy_algebra(q)
    return M.algebra.annihilator_coords(kq).basis @ rng.standard_normal(M.algebra.dim - kq.dim)


def test_so3_connection_by_hand():
    a, b, x = 0.4, -0.7, 1.5
    # inertia on span(L_x, L_y) at (0,0,x) is x^2 I; <v, zeta_Lx> = -b x, <v, zeta_Ly> = a x
    assert_allclose(con.connection(SO3R3, [0, 0, x], [a, b, 0]), [-b / x, a / x, 0], atol=1e-14)


def test_connection_identities(scenario, rng):
    M = scenario.manifold
    alg = M.algebra
    for _ in range(10):
        q = scenario.sample_orbit_point(rng)
        perp = M.isotropy_algebra(q).orthocomplement()
        X = perp.basis @ rng.standard_normal(perp.dim)
        assert_allclose(con.connection(M, q, M.fundamental_field(X, q)), X, atol=1e-9)
        H = M.horizontal_basis(q)
        assert_allclose(con.connection(M, q, H @ rng.standard_normal(H.shape[1])), 0, atol=1e-12)
        v = M.tangent_projector(q) @ rng.standard_normal(M.N)
        A = con.connection(M, q, v)
        assert perp.residual(A) <= 1e-10 * (1 + alg.norm(A))


def test_connection_dual(scenario, rng):
    M = scenario.manifold
    q = scenario.sample_orbit_point(rng)
    assert_allclose(con.connection_dual(M, q, np.zeros(M.algebra.dim)), 0)
    lam = _ann(M, q, rng)
    p = con.connection_dual(M, q, lam)
    assert_allclose(M.momentum_map(q, p), lam, atol=1e-9)
    H = M.horizontal_basis(q)
    assert_allclose(H.T @ p, 0, atol=1e-12)
    # vertical covector is recovered from its momentum
    Z = M.action.zeta_matrix(q)
    pv = Z @ rng.standard_normal(M.algebra.dim)
    assert_allclose(con.connection_dual(M, q, M.momentum_map(q, pv)), pv, atol=1e-9)


def test_connection_equivariance(scenario, rng):
    M = scenario.manifold
    alg = M.algebra
    for _ in range(5):
        q = scenario.sample_orbit_point(rng)
        v = M.tangent_projector(q) @ rng.standard_normal(M.N)
        k = alg.exp(rng.standard_normal(alg.dim))
        G = M.action.group_rep(k)
        assert_allclose(con.connection(M, G @ q, G @ v), alg.Ad(k, con.connection(M, q, v)), atol=1e-8)


def test_horizontal_lift(scenario, rng):
    M = scenario.manifold
    x = scenario.sample_x(rng)
    assert_allclose(con.horizontal_lift(M, x, np.zeros(M.base_dim)), 0)
    w = rng.standard_normal(M.base_dim)
    v = con.horizontal_lift(M, x, w)
    q = M.section(x)
    assert_allclose(M.invariants_jacobian(q) @ v, w, atol=1e-10)
    assert_allclose(M.action.zeta_matrix(q).T @ v, 0, atol=1e-10)


def test_so3_horizontal_lift_is_radial():
    assert_allclose(con.horizontal_lift(SO3R3, [1.2], [1.0]), [0, 0, 1], atol=1e-14)


def test_curvature_antisymmetry(scenario, rng):
    M = scenario.manifold
    q = scenario.sample_orbit_point(rng)
    v1, v2 = (M.tangent_projector(q) @ rng.standard_normal((M.N, 2))).T
    assert_allclose(con.curvature(M, q, v1, v1), 0, atol=1e-12)
    assert_allclose(con.curvature(M, q, v1, v2), -con.curvature(M, q, v2, v1), atol=1e-12)


def test_curvature_value_subspaces(scenario, rng):
    M = scenario.manifold
    alg = M.algebra
    for _ in range(5):
        q = scenario.sample_orbit_point(rng)
        kq = M.isotropy_algebra(q)
        perp = kq.orthocomplement()
        Y1, Y2 = rng.standard_normal((2, alg.dim))
        z1, z2 = M.fundamental_field(Y1, q), M.fundamental_field(Y2, q)
        vv = con.curvature(M, q, z1, z2)
        assert (kq.residual(vv) if kq.dim else alg.norm(vv)) <= 1e-7
        H = M.horizontal_basis(q)
        h1 = H @ rng.standard_normal(H.shape[1])
        # mixed pairs vanish
        assert alg.norm(con.curvature(M, q, h1, z1)) <= 1e-7
        if H.shape[1] > 1:
            h2 = H @ rng.standard_normal(H.shape[1])
            hh = con.curvature(M, q, h1, h2)
            if kq.dim:
                assert perp.residual(hh) <= 1e-7
                # fixed by the isotropy group
                k = alg.exp(kq.basis @ rng.standard_normal(kq.dim))
                assert_allclose(alg.Ad(k, hh), hh, atol=1e-7)


def test_curvature_equivariance(scenario, rng):
    M = scenario.manifold
    alg = M.algebra
    q = scenario.sample_orbit_point(rng)
    v1, v2 = (M.tangent_projector(q) @ rng.standard_normal((M.N, 2))).T
    k = alg.exp(rng.standard_normal(alg.dim))
    G = M.action.group_rep(k)
    c = con.curvature(M, q, v1, v2)
    assert_allclose(con.curvature(M, G @ q, G @ v1, G @ v2), alg.Ad(k, c), atol=1e-7)


def test_so3_horizontal_curvature_vanishes(rng):
    for _ in range(5):
        x = np.array([0.5 + 2 * rng.random()])
        lam = np.array([rng.standard_normal(), rng.standard_normal(), 0.0])
        assert abs(con.reduced_curvature_pairing(SO3R3, x, [1.0], [1.0], lam)) <= 1e-10
        C = SO3R3.horizontal_lift_matrix(x)
        assert SO3R3.algebra.norm(con.curvature(SO3R3, SO3R3.section(x), C[:, 0], 2 * C[:, 0])) <= 1e-10


def test_hopf_curvature_stable_under_step_halving():
    x = np.array([0.2, -0.1])
    q = HOPF.section(x)
    C = HOPF.horizontal_lift_matrix(x)
    c1 = con.curvature(HOPF, q, C[:, 0], C[:, 1], h=1e-4)
    c2 = con.curvature(HOPF, q, C[:, 0], C[:, 1], h=5e-5)
    assert abs(c1[0]) > 0.1
    assert_allclose(c1, c2, atol=1e-6)


def test_hopf_curvature_against_contact_form():
    """Oracle: dA on horizontal vectors equals -2 sum_k da_k ^ db_k for z_k = a_k + i b_k."""
    x = np.array([0.3, -0.2])
    q = HOPF.section(x)
    C = HOPF.horizontal_lift_matrix(x)
    u, v = C[:, 0], C[:, 1]
    # the u(1) generator acts as multiplication by i on (a1, b1, a2, b2)
    Jm = HOPF.action.rep_of(np.array([1.0]))
    two_form = 2 * (u @ Jm @ v)
    val = con.reduced_curvature_pairing(HOPF, x, [1, 0], [0, 1], [1.0])
    assert val == pytest.approx(-1.0 / (2 * np.sqrt(1 - x @ x)), rel=1e-7)
    assert abs(val) == pytest.approx(abs(two_form) / HOPF.algebra.inner([1.0], [1.0]), rel=1e-7)


def test_reduced_curvature_pairing_properties(rng):
    sc = get_scenario("so5_pairs")
    M = sc.manifold
    alg = M.algebra
    x = sc.sample_x(rng)
    lam = SO5_REFERENCE_LAMBDA
    w1, w2 = rng.standard_normal((2, 2))
    assert con.reduced_curvature_pairing(M, x, w1, w2, np.zeros(10)) == 0.0
    a = con.reduced_curvature_pairing(M, x, w1, w2, lam)
    assert con.reduced_curvature_pairing(M, x, w2, w1, lam) == pytest.approx(-a, abs=1e-12)
    # moving to another orbit representative with Ad*(k) lam leaves it unchanged
    q = M.section(x)
    C = M.horizontal_lift_matrix(x)
    k = alg.exp(rng.standard_normal(alg.dim))
    G = M.action.group_rep(k)
    moved = alg.Ad_star(k, lam) @ con.curvature(M, G @ q, G @ C @ w1, G @ C @ w2)
    assert moved == pytest.approx(a, abs=1e-7)


def test_so5_curvature_regression():
    val = con.reduced_curvature_pairing(SO5, SO5_CURVATURE_POINT, [1, 0], [0, 1], SO5_REFERENCE_LAMBDA)
    assert abs(val) > 1e-3
    assert val == pytest.approx(SO5_CURVATURE_PAIRING, abs=1e-7)


def test_b_form_kills_horizontal(scenario, rng):
    M = scenario.manifold
    q = scenario.sample_orbit_point(rng)
    H = M.horizontal_basis(q)
    assert con.b_form(M, q, _ann(M, q, rng), H @ rng.standard_normal(H.shape[1])) == pytest.approx(0, abs=1e-12)


def test_db_example_so3():
    q = np.array([0.0, 0.0, 1.0])
    lam = np.array([1.0, 0.0, 0.0])
    xi1 = (SO3R3.fundamental_field([0, 1, 0], q), np.zeros(3))
    xi2 = (np.zeros(3), np.array([0.0, 1.0, 0.0]))
    assert con.db_form(SO3R3, q, lam, xi1, xi2) == pytest.approx(-1.0, abs=1e-12)
    # the same pair through the commuting chart of the Ann-bundle
    chart = con.AnnBundleChart(SO3R3, q, lam)
    d1 = np.concatenate([SO3R3.fundamental_field([0, 1, 0], q), np.zeros(chart.B.shape[1])])
    d2 = np.concatenate([np.zeros(3), chart.B.T @ np.array([0.0, 1.0, 0.0])])
    assert chart.db_fd(d1, d2) == pytest.approx(-1.0, abs=1e-8)


def test_db_antisymmetric(scenario, rng):
    M = scenario.manifold
    q = scenario.sample_orbit_point(rng)
    lam = _ann(M, q, rng)
    chart = con.AnnBundleChart(M, q, lam)
    xi = chart.tangent(rng.standard_normal(chart.dim))
    assert con.db_form(M, q, lam, xi, xi) == pytest.approx(0, abs=1e-10)


def test_db_matches_exterior_derivative(scenario, rng):
    M = scenario.manifold
    for _ in range(10):
        q = scenario.sample_orbit_point(rng)
        lam = _ann(M, q, rng)
        chart = con.AnnBundleChart(M, q, lam)
        d1, d2 = rng.standard_normal((2, chart.dim))
        fd = chart.db_fd(d1, d2)
        ex = con.db_form(M, q, lam, chart.tangent(d1), chart.tangent(d2))
        assert abs(fd - ex) <= 1e-6 * max(1.0, abs(fd))


def test_db_two_layouts_agree(scenario, rng):
    M = scenario.manifold
    alg = M.algebra
    q = scenario.sample_orbit_point(rng)
    lam = _ann(M, q, rng)
    v1, v2 = (M.tangent_projector(q) @ rng.standard_normal((M.N, 2))).T
    X1, X2 = rng.standard_normal((2, alg.dim))
    a = con.db_form(M, q, lam, (v1, alg.ad_star(X1, lam)), (v2, alg.ad_star(X2, lam)))
    b = con.db_form_orbit(M, q, lam, v1, X1, v2, X2)
    assert a == pytest.approx(b, abs=1e-12)
