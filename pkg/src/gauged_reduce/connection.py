"""Mechanical connection, its curvature, and the one-form B on Ann-bundle.

All functions take an :class:`~gauged_reduce.geometry.EquivariantManifold`
as first argument.  Connection values are algebra coefficient vectors lying
in k_q^perp.
"""
import numpy as np

from ._numerics import RANK_RTOL, directional, fd_step, null_space
from .errors import Degenerate


def connection_matrix(M, q):
    """m x N matrix of v -> A_q(v) = I_q^{-1} mu_q(v^flat) on k_q^perp.

    The inertia system is solved on the gram-orthonormal complement of its
    kernel, which is k_q; the kernel dimension must match the orbit type.
    """
    alg = M.algebra
    Z = M.action.zeta_matrix(q)
    L = alg.gram_cholesky
    # whitened inertia  L^{-1} (Z^T Z) L^{-T}
    ZL = np.linalg.solve(L, Z.T).T
    w, V = np.linalg.eigh(ZL.T @ ZL)
    keep = w > RANK_RTOL * max(w.max(), 0.0)
    if int(keep.sum()) != M.orbit_dim:
        raise Degenerate(f"inertia rank {int(keep.sum())} != orbit dimension {M.orbit_dim}")
    Vk = V[:, keep]
    pinv = Vk @ np.diag(1.0 / w[keep]) @ Vk.T
    return np.linalg.solve(L.T, pinv @ ZL.T)


def connection(M, q, v):
    return connection_matrix(M, q) @ np.asarray(v, dtype=float)


def perp_projector(M, q):
    """Gram-orthogonal projector of k onto k_q^perp, X -> A_q(zeta_X(q))."""
    return connection_matrix(M, q) @ M.action.zeta_matrix(q)


def connection_dual(M, q, lam):
    """A_q^*(lam) as an ambient (vertical) vector: <A^*(lam), v> = <lam, A_q v>."""
    return connection_matrix(M, q).T @ np.asarray(lam, dtype=float)


def horizontal_lift(M, x, w):
    return M.horizontal_lift_matrix(x) @ np.asarray(w, dtype=float)


def section_gauge(M, x):
    """m x b matrix whose columns are A(ds/dx_j) at s(x).

    This is the pulled-back connection on the section; it vanishes exactly when
    the section is horizontal.
    """
    q = M.section(x)
    return connection_matrix(M, q) @ M.section_jacobian(x)


def curvature(M, q, v1, v2, h=None):
    """Curv^A_q(v1, v2) = dA(v1, v2) - [A v1, A v2].

    v1, v2 are extended as constant-coefficient fields in the chart centred at
    q, so their Lie bracket vanishes and dA(V1, V2) = V1(A V2) - V2(A V1).
    Derivatives are central differences with one Richardson level.
    """
    q = np.asarray(q, dtype=float)
    phi, jac = M.chart(q)
    T = jac(np.zeros(M.dim))
    c1 = T.T @ np.asarray(v1, dtype=float)
    c2 = T.T @ np.asarray(v2, dtype=float)
    if h is None:
        h = fd_step(np.zeros(1))

    def along(c):
        return lambda u: connection_matrix(M, phi(u)) @ (jac(u) @ c)

    u0 = np.zeros(M.dim)
    dA = directional(along(c2), u0, c1, h) - directional(along(c1), u0, c2, h)
    Amat = connection_matrix(M, q)
    return dA - M.algebra.bracket(Amat @ v1, Amat @ v2)


def curvature_pairing_matrix(M, x, lam):
    """b x b matrix F_ij = <lam, Curv^A(C e_i, C e_j)> at s(x)."""
    q = M.section(x)
    C = M.horizontal_lift_matrix(x)
    b = M.base_dim
    F = np.zeros((b, b))
    for i in range(b):
        for j in range(i + 1, b):
            F[i, j] = np.asarray(lam) @ curvature(M, q, C[:, i], C[:, j])
            F[j, i] = -F[i, j]
    return F


def reduced_curvature_pairing(M, x, w1, w2, lam):
    """<lam, Curv^A(C w1, C w2)> at s(x), the reduced curvature paired with lam."""
    q = M.section(x)
    C = M.horizontal_lift_matrix(x)
    return float(np.asarray(lam) @ curvature(M, q, C @ np.asarray(w1, float), C @ np.asarray(w2, float)))


def b_form(M, q, lam, v):
    """B_(q,lam)(v, lam_dot) = <lam, A_q(v)>; independent of lam_dot."""
    return float(np.asarray(lam) @ connection(M, q, v))


def db_form(M, q, lam, xi1, xi2):
    """Explicit dB on tangent vectors xi_i = (v_i, lam_dot_i) of the Ann-bundle.

    dB = <lam, Curv(v1, v2)> + <lam, [Z1, Z2]> - <lam_dot_2, Z1> + <lam_dot_1, Z2>
    with Z_i = A_q(v_i).
    """
    (v1, l1), (v2, l2) = xi1, xi2
    lam = np.asarray(lam, dtype=float)
    Amat = connection_matrix(M, q)
    Z1, Z2 = Amat @ v1, Amat @ v2
    return float(lam @ curvature(M, q, v1, v2) + lam @ M.algebra.bracket(Z1, Z2)
                 - np.asarray(l2) @ Z1 + np.asarray(l1) @ Z2)


def db_form_orbit(M, q, lam, v1, X1, v2, X2):
    """dB for orbit-tangent lam_dot_i = ad*(X_i) lam, in the X_i-written layout.

    <lam, Curv(v1, v2)> + <lam, [X2, Z1]> - <lam, [X1, Z2]> + <lam, [Z1, Z2]>.
    """
    lam = np.asarray(lam, dtype=float)
    alg = M.algebra
    Amat = connection_matrix(M, q)
    Z1, Z2 = Amat @ v1, Amat @ v2
    return float(lam @ curvature(M, q, v1, v2) + lam @ alg.bracket(X2, Z1)
                 - lam @ alg.bracket(X1, Z2) + lam @ alg.bracket(Z1, Z2))


class AnnBundleChart:
    """Chart (u, c) -> (q(u), lam(u, c)) of E = disjoint union of Ann k_q near (q0, lam0).

    ``lam(u, c)`` is the dual-metric projection of lam0 + B c onto Ann k_q(u),
    where B spans Ann k_q0.  Coordinate fields of this chart commute, which is
    what the finite-difference exterior derivative needs.
    """

    def __init__(self, M, q0, lam0):
        self.M = M
        self.q0 = np.asarray(q0, dtype=float)
        self.lam0 = np.asarray(lam0, dtype=float)
        self.phi, self.jac = M.chart(self.q0)
        alg = M.algebra
        k_q0 = M.isotropy_algebra(self.q0)
        # Ann k_q0 in dual coordinates: null space of lam -> lam @ k_q0
        self.B, _ = null_space(k_q0.basis.T) if k_q0.dim else (np.eye(alg.dim), None)
        self.dim = M.dim + self.B.shape[1]

    def split(self, p):
        return p[: self.M.dim], p[self.M.dim:]

    def point(self, p):
        u, c = self.split(np.asarray(p, dtype=float))
        q = self.phi(u)
        alg = self.M.algebra
        lam = alg.gram @ perp_projector(self.M, q) @ alg.sharp(self.lam0 + self.B @ c)
        return q, lam

    def tangent(self, delta, h=None):
        """Tangent vector (v, lam_dot) at p = 0 in direction ``delta``."""
        delta = np.asarray(delta, dtype=float)
        u, _ = self.split(delta)
        v = self.jac(np.zeros(self.M.dim)) @ u
        h = h or fd_step(np.zeros(1))
        lam_dot = directional(lambda p: self.point(p)[1], np.zeros(self.dim), delta, h)
        return v, lam_dot

    def b_along(self, delta):
        """p -> B_{Phi(p)}(dPhi(p) delta)."""
        u_dir, _ = self.split(np.asarray(delta, dtype=float))

        def beta(p):
            u, _ = self.split(p)
            q, lam = self.point(p)
            return lam @ connection_matrix(self.M, q) @ (self.jac(u) @ u_dir)

        return beta

    def db_fd(self, delta1, delta2, h=None):
        """dB(xi1, xi2) = xi1(B(xi2)) - xi2(B(xi1)) by central differences."""
        h = h or fd_step(np.zeros(1))
        p0 = np.zeros(self.dim)
        return float(directional(self.b_along(delta2), p0, delta1, h)
                     - directional(self.b_along(delta1), p0, delta2, h))
