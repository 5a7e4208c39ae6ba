"""Matrix Lie algebras, (co)adjoint actions and gram-orthonormal subspaces.

Algebra elements are coefficient vectors in the algebra's basis.  Covectors
are coefficient vectors in the dual basis, so the pairing <lam, X> is the plain
dot product ``lam @ X`` and the Riesz map is ``X = gram^{-1} lam``.
"""
import json
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from ._numerics import RANK_RTOL, RankInfo, null_space, range_space
from .errors import ClosureViolation

CLOSURE_TOL = 1e-9


@dataclass(frozen=True)
class Subspace:
    """Subspace of R^m given by a basis orthonormal for ``metric``.

    ``info`` keeps the rank split of the computation that produced the
    subspace, when there was one.
    """

    basis: np.ndarray
    metric: np.ndarray
    info: RankInfo = field(default=None, compare=False, repr=False)

    @property
    def dim(self):
        return self.basis.shape[1]

    @property
    def parent_dim(self):
        return self.basis.shape[0]

    @classmethod
    def span(cls, vectors, metric, rtol=RANK_RTOL):
        """Subspace spanned by the columns of ``vectors``."""
        metric = np.asarray(metric, dtype=float)
        L = np.linalg.cholesky(metric)
        vectors = np.asarray(vectors, dtype=float).reshape(metric.shape[0], -1)
        white, info = range_space(L.T @ vectors, rtol)
        return cls(np.linalg.solve(L.T, white), metric, info)

    @classmethod
    def full(cls, metric):
        return cls.span(np.eye(metric.shape[0]), metric)

    @classmethod
    def zero(cls, metric):
        return cls(np.zeros((metric.shape[0], 0)), np.asarray(metric, dtype=float))

    @classmethod
    def kernel(cls, M, metric, rtol=RANK_RTOL):
        """Kernel of the linear map ``M`` (acting on coefficient vectors)."""
        metric = np.asarray(metric, dtype=float)
        L = np.linalg.cholesky(metric)
        # M X = (M L^{-T}) (L^T X): SVD in whitened coordinates.
        Mw = np.linalg.solve(L, np.asarray(M, dtype=float).T).T
        white, info = null_space(Mw, rtol)
        return cls(np.linalg.solve(L.T, white), metric, info)

    def _whiten(self, v):
        return np.linalg.cholesky(self.metric).T @ v

    def projector(self):
        return self.basis @ self.basis.T @ self.metric

    def project(self, v):
        return self.basis @ (self.basis.T @ (self.metric @ np.asarray(v, dtype=float)))

    def residual(self, v):
        """Metric norm of the component of ``v`` off the subspace."""
        r = np.asarray(v, dtype=float) - self.project(v)
        return float(np.sqrt(max(r @ self.metric @ r, 0.0)))

    def contains(self, v, tol=1e-8):
        v = np.asarray(v, dtype=float)
        scale = max(1.0, float(np.sqrt(max(v @ self.metric @ v, 0.0))))
        return self.residual(v) <= tol * scale

    def orthocomplement(self):
        M = self.basis.T @ self.metric
        return Subspace.kernel(M, self.metric) if self.dim else Subspace.full(self.metric)

    def intersect(self, other, rtol=RANK_RTOL):
        if self.dim == 0 or other.dim == 0:
            return Subspace.zero(self.metric)
        L = np.linalg.cholesky(self.metric)
        off = (np.eye(self.parent_dim) - other.projector()) @ self.basis
        c, info = null_space(L.T @ off, rtol)
        return Subspace.span(self.basis @ c, self.metric)

    def __add__(self, other):
        return Subspace.span(np.hstack([self.basis, other.basis]), self.metric)

    def is_subspace_of(self, other, tol=1e-8):
        return all(other.contains(self.basis[:, j], tol) for j in range(self.dim))


def fixed_subspace(generators, W, rtol=RANK_RTOL):
    """Vectors of ``W`` annihilated by every matrix in ``generators``."""
    generators = list(generators)
    if not generators or W.dim == 0:
        return W
    stacked = np.vstack([np.asarray(g) @ W.basis for g in generators])
    c, info = null_space(stacked, rtol)
    return Subspace(W.basis @ c, W.metric, info)


class MatrixLieAlgebra:
    """Real matrix Lie algebra with an Ad-invariant inner product.

    Parameters
    ----------
    basis : array_like, shape (m, n, n)
    gram : array_like, shape (m, m), optional
        Inner product in this basis.  Defaults to ``-1/2 trace(XY)``, the
        invariant form that makes the standard so(n) generators unit-norm.
    """

    def __init__(self, basis, gram=None, name=None, check=True):
        basis = np.asarray(basis, dtype=float)
        if basis.ndim != 3 or basis.shape[1] != basis.shape[2]:
            raise ValueError("basis must have shape (m, n, n)")
        self.basis = basis
        self.dim = basis.shape[0]
        self.ambient_dim = basis.shape[1]
        self.name = name
        self._flat = basis.reshape(self.dim, -1).T
        if np.linalg.matrix_rank(self._flat) < self.dim:
            raise ValueError("basis matrices are linearly dependent")
        self._pinv = np.linalg.pinv(self._flat)
        if gram is None:
            gram = -0.5 * np.einsum("iab,jba->ij", basis, basis)
        self.gram = np.asarray(gram, dtype=float)
        self._gram_inv = np.linalg.inv(self.gram)
        self._gram_chol = None
        comm = np.einsum("iab,jbc->ijac", basis, basis)
        comm = comm - comm.transpose(1, 0, 2, 3)
        # structure constants c[k, i, j]: [E_i, E_j] = sum_k c[k,i,j] E_k
        self.structure = np.stack(
            [[self.coords(comm[i, j]) for j in range(self.dim)] for i in range(self.dim)]
        ).transpose(2, 0, 1)
        if check:
            self.validate()

    # -- construction helpers -------------------------------------------------

    @classmethod
    def so(cls, n):
        """so(n) with basis E_ij = e_i e_j^T - e_j e_i^T, i < j (row-major order)."""
        mats = []
        for i in range(n):
            for j in range(i + 1, n):
                E = np.zeros((n, n))
                E[i, j], E[j, i] = 1.0, -1.0
                mats.append(E)
        return cls(np.array(mats), name=f"so({n})")

    @classmethod
    def so3(cls):
        """so(3) with the rotation generators L_x, L_y, L_z; [L_x, L_y] = L_z."""
        L = np.zeros((3, 3, 3))
        for a in range(3):
            for b in range(3):
                for c in range(3):
                    L[a, b, c] = -_levi_civita(a, b, c)
        return cls(L, name="so(3)")

    @classmethod
    def from_json(cls, doc):
        """Build from ``{"ambient_dim", "basis": [row-major matrices], "gram"?}``."""
        if isinstance(doc, str):
            doc = json.loads(doc)
        n = int(doc["ambient_dim"])
        basis = np.array([np.asarray(b, dtype=float).reshape(n, n) for b in doc["basis"]])
        gram = doc.get("gram")
        return cls(basis, gram=None if gram is None else np.asarray(gram, dtype=float),
                   name=doc.get("name"))

    def to_json(self):
        return {
            "ambient_dim": self.ambient_dim,
            "basis": [b.ravel().tolist() for b in self.basis],
            "gram": self.gram.tolist(),
        }

    def validate(self, tol=1e-10):
        if not np.allclose(self.gram, self.gram.T, atol=tol):
            raise ValueError("gram is not symmetric")
        if np.linalg.eigvalsh(self.gram).min() <= 0:
            raise ValueError("gram is not positive definite")
        # <[Z,X],Y> + <X,[Z,Y]> = 0  <=>  ad(Z)^T G + G ad(Z) = 0
        for k in range(self.dim):
            adz = self.structure[:, k, :]
            defect = adz.T @ self.gram + self.gram @ adz
            if np.abs(defect).max() > tol * max(1.0, np.abs(self.gram).max()):
                raise ValueError("gram is not Ad-invariant")

    # -- elements -------------------------------------------------------------

    def matrix(self, X):
        return np.tensordot(np.asarray(X, dtype=float), self.basis, axes=1)

    def coords(self, M, tol=CLOSURE_TOL):
        """Coefficients of the matrix ``M`` in the basis."""
        v = np.asarray(M, dtype=float).ravel()
        c = self._pinv @ v
        resid = np.linalg.norm(self._flat @ c - v)
        if resid > tol * max(1.0, np.linalg.norm(v)):
            raise ClosureViolation(f"matrix leaves the algebra (residual {resid:.2e})")
        return c

    def inner(self, X, Y):
        return float(np.asarray(X) @ self.gram @ np.asarray(Y))

    def norm(self, X):
        return float(np.sqrt(self.inner(X, X)))

    def dual_inner(self, lam, mu):
        return float(np.asarray(lam) @ self._gram_inv @ np.asarray(mu))

    def dual_norm(self, lam):
        return float(np.sqrt(max(self.dual_inner(lam, lam), 0.0)))

    @staticmethod
    def pair(lam, X):
        return float(np.asarray(lam) @ np.asarray(X))

    def sharp(self, lam):
        """Riesz map k* -> k."""
        return self._gram_inv @ np.asarray(lam, dtype=float)

    def flat(self, X):
        return self.gram @ np.asarray(X, dtype=float)

    @property
    def dual_metric(self):
        return self._gram_inv

    @property
    def gram_cholesky(self):
        """Lower Cholesky factor L of the gram matrix, G = L L^T."""
        if self._gram_chol is None:
            self._gram_chol = np.linalg.cholesky(self.gram)
        return self._gram_chol

    # -- brackets and actions -------------------------------------------------

    def bracket(self, X, Y):
        return np.einsum("kij,i,j->k", self.structure, X, Y)

    def ad(self, X):
        """Matrix of Y -> [X, Y]."""
        return np.einsum("kij,i->kj", self.structure, np.asarray(X, dtype=float))

    def ad_star(self, X, lam):
        """ad*(X) lam = -lam o ad(X)."""
        return -self.ad(X).T @ np.asarray(lam, dtype=float)

    def ad_star_matrix(self, lam):
        """Matrix of X -> ad*(X) lam; column j is ad*(E_j) lam."""
        # (ad*(X) lam)_j = -sum_k lam_k c[k, i, j] X_i
        return -np.einsum("k,kij->ji", np.asarray(lam, dtype=float), self.structure)

    def exp(self, X):
        return expm(self.matrix(X))

    def Ad_matrix(self, k):
        kinv = np.linalg.inv(k)
        return np.column_stack([self.coords(k @ E @ kinv) for E in self.basis])

    def Ad(self, k, Y):
        k = np.asarray(k, dtype=float)
        return self.coords(k @ self.matrix(Y) @ np.linalg.inv(k))

    def Ad_star(self, k, lam):
        """Ad*(k) lam = lam o Ad(k^{-1})."""
        return self.Ad_matrix(np.linalg.inv(k)).T @ np.asarray(lam, dtype=float)

    # -- subspaces ------------------------------------------------------------

    def subspace(self, vectors):
        return Subspace.span(np.asarray(vectors, dtype=float).reshape(self.dim, -1), self.gram)

    def whole(self):
        return Subspace.full(self.gram)

    def isotropy_of_covector(self, lam, rtol=RANK_RTOL):
        """k_lam = {X : ad*(X) lam = 0}."""
        lam = np.asarray(lam, dtype=float)
        if not np.any(lam):
            return self.whole()
        return Subspace.kernel(self.ad_star_matrix(lam), self.gram, rtol)

    def annihilator_coords(self, sub):
        """Ann(sub) as a subspace of k* (dual metric), via the Riesz image of sub^perp."""
        perp = sub.orthocomplement()
        return Subspace.span(self.gram @ perp.basis, self._gram_inv)

    def orbit_tangent(self, lam):
        """T_lam O = {ad*(X) lam} as a subspace of k*."""
        return Subspace.span(self.ad_star_matrix(lam), self._gram_inv)

    def trivialized_momentum_maps(self, k, eta, h_sub):
        """Momentum maps of left and right H-multiplication on T*K = K x k*.

        Returns the restrictions to ``h_sub`` (one value per basis column):
        ``J_l = (Ad*(k) eta)|h`` and ``J_r = -eta|h``.
        """
        eta = np.asarray(eta, dtype=float)
        J_l = self.Ad_star(k, eta) @ h_sub.basis
        J_r = -eta @ h_sub.basis
        return J_l, J_r


def _levi_civita(a, b, c):
    return int((a - b) * (b - c) * (c - a) / 2)
