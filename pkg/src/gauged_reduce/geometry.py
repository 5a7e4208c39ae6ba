"""Embedded Riemannian K-manifolds Q in R^N with linear orthogonal actions.

Q is either an open subset of R^N or the unit sphere S^{N-1}; the metric is
the one induced from R^N.  Covectors on Q are stored as ambient vectors
tangent to Q (their Riesz representatives).
"""
import numpy as np

from ._numerics import RANK_RTOL, fd_step, jacobian, null_space, range_space
from .errors import Degenerate, OffManifold, OffTangent, SectionDegenerate
from .lie import Subspace

MEMBERSHIP_TOL = 1e-8


class LinearAction:
    """Infinitesimal representation ``rep`` of an algebra on R^N.

    ``group_rep`` maps an n x n group matrix to the N x N matrix acting on
    R^N.  It defaults to ``expm`` of the represented logarithm, which is only
    correct for exponentials, so scenarios supply it explicitly.
    """

    def __init__(self, algebra, rep, group_rep, check=True):
        self.algebra = algebra
        self.rep = np.asarray(rep, dtype=float)
        self.group_rep = group_rep
        self.N = self.rep.shape[1]
        if check:
            self.validate()

    def validate(self, tol=1e-10):
        if np.abs(self.rep + self.rep.transpose(0, 2, 1)).max() > tol:
            raise ValueError("representation matrices must be antisymmetric")
        alg = self.algebra
        for i in range(alg.dim):
            for j in range(alg.dim):
                lhs = self.rep_of(alg.bracket(np.eye(alg.dim)[i], np.eye(alg.dim)[j]))
                rhs = self.rep[i] @ self.rep[j] - self.rep[j] @ self.rep[i]
                if np.abs(lhs - rhs).max() > tol * max(1.0, np.abs(rhs).max()):
                    raise ValueError("rep is not a Lie algebra homomorphism")

    def rep_of(self, X):
        return np.tensordot(np.asarray(X, dtype=float), self.rep, axes=1)

    def zeta(self, X, q):
        """Fundamental vector field zeta_X(q) = d/dt exp(tX).q at t = 0."""
        return self.rep_of(X) @ q

    def zeta_matrix(self, q):
        """N x m matrix whose columns are zeta_{E_i}(q)."""
        return np.einsum("iab,b->ai", self.rep, q)

    def act(self, k, q):
        return self.group_rep(k) @ np.asarray(q, dtype=float)


class EquivariantManifold:
    """Q with a linear isometric K-action, a section into Q_H and invariants.

    Parameters
    ----------
    action : LinearAction
    kind : {"open", "sphere"}
    section : callable x -> R^N, landing in the fixed-isotropy set
    invariants : callable q -> R^b, K-invariant with invariants(section(x)) = x
    canonicalize : callable q -> k (group matrix) with k.q = section(invariants(q))
    section_jacobian, invariants_jacobian : optional exact Jacobians
    in_domain : predicate on base coordinates
    on_open_set : predicate on points (e.g. linear independence)
    h_sub : isotropy algebra along the section; computed at ``x_ref`` if omitted
    """

    def __init__(self, name, action, kind, section, invariants, canonicalize, x_ref,
                 section_jacobian=None, invariants_jacobian=None, in_domain=None,
                 on_open_set=None, h_sub=None):
        if kind not in ("open", "sphere"):
            raise ValueError("kind must be 'open' or 'sphere'")
        self.name = name
        self.action = action
        self.algebra = action.algebra
        self.kind = kind
        self.N = action.N
        self.dim = self.N if kind == "open" else self.N - 1
        self._section = section
        self._invariants = invariants
        self._canonicalize = canonicalize
        self._section_jac = section_jacobian
        self._inv_jac = invariants_jacobian
        self._in_domain = in_domain or (lambda x: True)
        self._on_open_set = on_open_set or (lambda q: True)
        self.x_ref = np.asarray(x_ref, dtype=float)
        self.base_dim = self.x_ref.size
        self.h_sub = h_sub if h_sub is not None else self.isotropy_algebra(self.section(self.x_ref))
        self.orbit_dim = self.algebra.dim - self.h_sub.dim
        if self.dim - self.orbit_dim != self.base_dim:
            raise ValueError(
                f"dim Q ({self.dim}) - orbit dim ({self.orbit_dim}) != base dim ({self.base_dim})")

    # -- points, tangents, charts ---------------------------------------------

    def section(self, x):
        x = np.asarray(x, dtype=float)
        if not self._in_domain(x):
            raise SectionDegenerate(f"x = {x} outside the section domain")
        return np.asarray(self._section(x), dtype=float)

    def section_jacobian(self, x):
        x = np.asarray(x, dtype=float)
        if self._section_jac is not None:
            return np.asarray(self._section_jac(x), dtype=float).reshape(self.N, self.base_dim)
        return jacobian(self.section, x, fd_step(x), richardson=True)

    def invariants(self, q):
        return np.atleast_1d(np.asarray(self._invariants(np.asarray(q, dtype=float)), dtype=float))

    def invariants_jacobian(self, q):
        q = np.asarray(q, dtype=float)
        if self._inv_jac is not None:
            return np.asarray(self._inv_jac(q), dtype=float).reshape(self.base_dim, self.N)
        return jacobian(self.invariants, q, fd_step(q), richardson=True)

    def in_domain(self, x):
        return bool(self._in_domain(np.asarray(x, dtype=float)))

    def canonicalize(self, q):
        return np.asarray(self._canonicalize(np.asarray(q, dtype=float)), dtype=float)

    def check_point(self, q, tol=MEMBERSHIP_TOL):
        q = np.asarray(q, dtype=float)
        if q.shape != (self.N,):
            raise OffManifold(f"expected a point in R^{self.N}")
        if self.kind == "sphere" and abs(np.linalg.norm(q) - 1.0) > tol:
            raise OffManifold(f"|q| = {np.linalg.norm(q)} is not 1")
        if not self._on_open_set(q):
            raise OffManifold("point outside the open set Q")
        return q

    def tangent_basis(self, q):
        """Orthonormal basis (N x d) of T_qQ."""
        if self.kind == "open":
            return np.eye(self.N)
        basis, _ = null_space(np.asarray(q, dtype=float)[None, :])
        return basis

    def tangent_projector(self, q):
        if self.kind == "open":
            return np.eye(self.N)
        qh = np.asarray(q, dtype=float) / np.linalg.norm(q)
        return np.eye(self.N) - np.outer(qh, qh)

    def check_tangent(self, q, v, tol=MEMBERSHIP_TOL):
        v = np.asarray(v, dtype=float)
        off = v - self.tangent_projector(q) @ v
        if np.linalg.norm(off) > tol * max(1.0, np.linalg.norm(v)):
            raise OffTangent(f"vector is not tangent (off-tangent norm {np.linalg.norm(off):.2e})")
        return v

    def chart(self, q0):
        """Local chart u -> Q centred at q0 and its exact Jacobian.

        The chart is q0 + T u (open) or (q0 + T u)/|q0 + T u| (sphere) with T an
        orthonormal tangent basis at q0, so the Jacobian at u = 0 is T.
        """
        q0 = np.asarray(q0, dtype=float)
        T = self.tangent_basis(q0)
        if self.kind == "open":
            return (lambda u: q0 + T @ u), (lambda u: T)

        def phi(u):
            y = q0 + T @ u
            return y / np.linalg.norm(y)

        def jac(u):
            y = q0 + T @ u
            r = np.linalg.norm(y)
            yh = y / r
            return (T - np.outer(yh, yh @ T)) / r

        return phi, jac

    # -- action data ----------------------------------------------------------

    def fundamental_field(self, X, q):
        return self.action.zeta(X, q)

    def isotropy_algebra(self, q, rtol=RANK_RTOL):
        """k_q = kernel of X -> zeta_X(q)."""
        return Subspace.kernel(self.action.zeta_matrix(q), self.algebra.gram, rtol)

    def inertia_tensor(self, q):
        """I_q(E_i, E_j) = <zeta_{E_i}(q), zeta_{E_j}(q)> in the algebra basis."""
        Z = self.action.zeta_matrix(q)
        return Z.T @ Z

    def inertia_on_complement(self, q, tol=RANK_RTOL):
        """Inertia restricted to a gram-orthonormal basis of k_q^perp.

        Raises Degenerate if its smallest eigenvalue falls below ``tol`` times
        the largest, or if the orbit dimension differs from the reference one.
        """
        perp = self.isotropy_algebra(q).orthocomplement()
        if perp.dim != self.orbit_dim:
            raise Degenerate(f"orbit dimension {perp.dim} != {self.orbit_dim}: isotropy type changed")
        M = perp.basis.T @ self.inertia_tensor(q) @ perp.basis
        ev = np.linalg.eigvalsh(M) if M.size else np.zeros(0)
        if ev.size and ev.min() <= tol * ev.max():
            raise Degenerate("inertia tensor is singular on k_q^perp")
        return perp, M

    def momentum_map(self, q, p):
        """<mu(q,p), X> = <p, zeta_X(q)>, returned in dual-basis coordinates."""
        return self.action.zeta_matrix(q).T @ np.asarray(p, dtype=float)

    def vertical_horizontal_split(self, q, v):
        """Orthogonal split of v in T_qQ into Ver_q = span zeta(q) and Hor_q."""
        v = self.check_tangent(q, v)
        ver_basis, _ = range_space(self.action.zeta_matrix(q))
        ver = ver_basis @ (ver_basis.T @ v)
        return ver, v - ver

    def horizontal_basis(self, q):
        """Orthonormal basis (N x b) of Hor_q."""
        q = np.asarray(q, dtype=float)
        rows = self.action.zeta_matrix(q).T
        if self.kind == "sphere":
            rows = np.vstack([rows, q / np.linalg.norm(q)])
        hor, _ = null_space(rows)
        if hor.shape[1] != self.base_dim:
            raise SectionDegenerate(f"horizontal space has dimension {hor.shape[1]}")
        return hor

    def horizontal_lift_matrix(self, x):
        """N x b matrix C with C w the horizontal vector at s(x) over w."""
        q = self.section(x)
        H = self.horizontal_basis(q)
        M = self.invariants_jacobian(q) @ H
        s = np.linalg.svd(M, compute_uv=False)
        if s.min() <= RANK_RTOL * s.max():
            raise SectionDegenerate("invariants are degenerate on Hor")
        return H @ np.linalg.inv(M)

    def base_metric(self, x):
        """Metric on Q/K in the invariant coordinates: g(w1, w2) = <C w1, C w2>."""
        C = self.horizontal_lift_matrix(x)
        return C.T @ C

    def base_projection(self, q):
        """(x, dpsi(q)) for a point q."""
        return self.invariants(q), self.invariants_jacobian(q)
