"""Coadjoint orbits, symplectic slices, leaf dimensions and the leaf symplectic form."""
from dataclasses import dataclass

import numpy as np

from ._numerics import RANK_RTOL, RankInfo
from .connection import db_form
from .errors import ReductionError, RepresentativeAmbiguity
from .lie import Subspace, fixed_subspace

REPRESENTATIVE_TOL = 1e-8
ANN_TOL = 1e-10

# Sign of the orbit form used for slices and leaf forms:
# Omega^O(ad*(X) lam, ad*(Y) lam) = KKS_SIGN * <lam, [X, Y]>.  Slice dimensions
# and the isotropy of h.lam do not depend on it; the leaf-form check against
# the reduced bracket does, and passes with +1.
KKS_SIGN = 1.0


def orbit_representative(alg, lam, xi, tol=REPRESENTATIVE_TOL):
    """Least-squares X with ad*(X) lam = xi; raises if xi is not orbit-tangent."""
    A = alg.ad_star_matrix(lam)
    X, *_ = np.linalg.lstsq(A, np.asarray(xi, dtype=float), rcond=None)
    resid = np.linalg.norm(A @ X - xi)
    if resid > tol * max(1.0, np.linalg.norm(xi)):
        raise RepresentativeAmbiguity(f"vector is not tangent to the orbit (residual {resid:.2e})")
    return X


def orbit_invariants(alg, lam):
    """Power traces tr(L^k), k = 1..n, of the matrix L of sharp(lam): constant on coadjoint orbits."""
    L = alg.matrix(alg.sharp(lam))
    out, P = [], np.eye(alg.ambient_dim)
    for _ in range(alg.ambient_dim):
        P = P @ L
        out.append(np.trace(P))
    return np.array(out)


def kks_form(alg, lam, xi1, xi2, sign=KKS_SIGN):
    """Omega^O(xi1, xi2) = <lam, [X1, X2]> with xi_i = ad*(X_i) lam."""
    X1 = orbit_representative(alg, lam, xi1)
    X2 = orbit_representative(alg, lam, xi2)
    return sign * float(np.asarray(lam) @ alg.bracket(X1, X2))


@dataclass
class OrbitPoint:
    lam: np.ndarray
    tangent: Subspace        # T_lam O in k* with the dual metric

    @classmethod
    def at(cls, alg, lam):
        return cls(np.asarray(lam, dtype=float), alg.orbit_tangent(lam))

    def kks_matrix(self, alg, sign=KKS_SIGN):
        """Form matrix on the orthonormal tangent basis."""
        B = self.tangent.basis
        n = B.shape[1]
        return np.array([[kks_form(alg, self.lam, B[:, i], B[:, j], sign) for j in range(n)]
                         for i in range(n)])


@dataclass
class SliceData:
    lam: np.ndarray
    orbit: Subspace                  # T_lam O
    h_orbit: Subspace                # h.lam
    symplectic_orthogonal: Subspace  # (h.lam)^Omega inside T_lam O
    V: Subspace                      # complement of h.lam in the symplectic orthogonal
    k_lambda: Subspace
    l0: Subspace                     # h cap k_lam
    V_fixed: Subspace
    kks_sign: float = KKS_SIGN

    def rank_infos(self):
        return {name: getattr(self, name).info for name in
                ("orbit", "h_orbit", "symplectic_orthogonal", "V", "k_lambda", "l0", "V_fixed")
                if getattr(self, name).info is not None}


def _ad_star_operator(alg, Y):
    return -alg.ad(Y).T


def symplectic_slice(alg, lam, h_sub):
    """Slice data of the H-action on the coadjoint orbit through lam (lam in Ann h)."""
    lam = np.asarray(lam, dtype=float)
    if h_sub.dim:
        off = np.abs(lam @ h_sub.basis).max()
        if off > ANN_TOL * max(1.0, np.abs(lam).max()):
            raise ReductionError(f"lambda is not in Ann h (pairing {off:.2e})")
    dual = alg.dual_metric
    adl = alg.ad_star_matrix(lam)
    orbit = Subspace.span(adl, dual)
    if h_sub.dim:
        h_orbit = Subspace.span(adl @ h_sub.basis, dual)
        # X with <lam, [X, Y]> = 0 for all Y in h: rows -lam^T ad(Y)
        rows = np.array([-(lam @ alg.ad(h_sub.basis[:, j])) for j in range(h_sub.dim)])
        S = Subspace.kernel(rows, alg.gram)
        symp = Subspace.span(adl @ S.basis, dual)
    else:
        h_orbit = Subspace.zero(dual)
        symp = orbit
    # gram-orthogonal complement of h.lam inside symp
    if h_orbit.dim:
        M = h_orbit.basis.T @ dual @ symp.basis
        from ._numerics import null_space
        c, info = null_space(M)
        V = Subspace(symp.basis @ c, dual, info)
    else:
        V = symp
    k_lam = alg.isotropy_of_covector(lam)
    l0 = h_sub.intersect(k_lam)
    gens = [_ad_star_operator(alg, l0.basis[:, j]) for j in range(l0.dim)]
    V_fixed = fixed_subspace(gens, V)
    return SliceData(lam, orbit, h_orbit, symp, V, k_lam, l0, V_fixed)


def leaf_dimension(M, lam):
    """2 b + dim V_fixed."""
    sl = symplectic_slice(M.algebra, lam, M.h_sub)
    return 2 * M.base_dim + sl.V_fixed.dim


def dimension_table(M, lam):
    """Integers (dim k_lam, dim k_lam^perp, dim h cap k_lam, dim h^perp cap k_lam^perp, dim V, leaf)
    with the smallest relative singular-value margin of the rank decisions involved."""
    alg = M.algebra
    sl = symplectic_slice(alg, lam, M.h_sub)
    k_perp = sl.k_lambda.orthocomplement()
    h_perp = M.h_sub.orthocomplement()
    mixed = h_perp.intersect(k_perp)
    infos = [sl.k_lambda.info, sl.V.info, sl.symplectic_orthogonal.info, sl.orbit.info,
             sl.h_orbit.info, mixed.info, sl.l0.info]
    infos = [i for i in infos if isinstance(i, RankInfo)]
    dims = {
        "k_lambda": sl.k_lambda.dim,
        "k_lambda_perp": k_perp.dim,
        "h_cap_k_lambda": sl.l0.dim,
        "h_perp_cap_k_lambda_perp": mixed.dim,
        "V": sl.V.dim,
        "V_fixed": sl.V_fixed.dim,
        "orbit": sl.orbit.dim,
        "leaf": 2 * M.base_dim + sl.V_fixed.dim,
    }
    margin = {"kept_min": min(i.kept_min for i in infos), "dropped_max": max(i.dropped_max for i in infos)}
    return dims, margin, sl


def leaf_report(M, lam):
    """JSON-ready leaf report."""
    dims, margin, sl = dimension_table(M, lam)
    magnetic = bool(np.any(lam)) and M.base_dim > 1
    return {
        "lambda": np.asarray(lam, dtype=float).tolist(),
        "dims": {"orbit": dims["orbit"], "k_lambda": dims["k_lambda"],
                 "h_cap_k_lambda": dims["h_cap_k_lambda"], "V": dims["V"],
                 "V_fixed": dims["V_fixed"], "leaf": dims["leaf"]},
        "magnetic_flag": magnetic,
        "kks_sign": KKS_SIGN,
        "isotropy_level": "algebra",
        "singular_value_margin": margin,
    }


def leaf_form(M, w, xi1, xi2):
    """sigma(xi1, xi2) = Omega^{Q/K} - [dB + Omega^O] on tangents xi_i = (xdot, etadot, lamdot).

    dB is evaluated on (ds xdot_i, lamdot_i), the tangent of the Ann-bundle
    along the section; lamdot_i must be tangent to the orbit through lam.
    """
    alg = M.algebra
    q = M.section(w.x)
    Js = M.section_jacobian(w.x)
    canonical = xi1.xdot @ xi2.etadot - xi2.xdot @ xi1.etadot
    if not np.any(w.lam):
        return float(canonical)
    dB = db_form(M, q, w.lam, (Js @ xi1.xdot, xi1.lamdot), (Js @ xi2.xdot, xi2.lamdot))
    orb = kks_form(alg, w.lam, xi1.lamdot, xi2.lamdot)
    return float(canonical - (dB + orb))


def magnetic_form(M, w, xi1, xi2):
    """Omega^{Q/K} - <lam, Curv0(C xdot1, C xdot2)>: the charge case of the leaf form."""
    from .connection import reduced_curvature_pairing
    canonical = xi1.xdot @ xi2.etadot - xi2.xdot @ xi1.etadot
    if M.base_dim < 2 or not np.any(w.lam):
        return float(canonical)
    return float(canonical - reduced_curvature_pairing(M, w.x, xi1.xdot, xi2.xdot, w.lam))
