"""The Weinstein space in section coordinates, its Poisson bracket and flows.

A point is (x, eta, lam): base coordinates, base momentum in the dx-frame,
and a covector lam in Ann h.  It corresponds to the cotangent vector

    p = C g^{-1} eta + A_q^*(lam)     at q = s(x),

where C is the horizontal lift and g = C^T C the base metric.

Sign convention: the symplectic form is dx ^ deta (du ^ dp_u upstairs), the
Hamiltonian field is defined by i_X Omega = df, and {f, g} = Omega(X_f, X_g),
so dg(X_f) = -{f, g} and {x_i, eta_j} = delta_ij.
"""
import csv
import io
import json
from dataclasses import dataclass

import numpy as np

from ._numerics import directional, fd_step
from .connection import (connection_dual, connection_matrix, curvature_pairing_matrix,
                         section_gauge)
from .errors import (CanonicalizationFailure, InvarianceViolation, OffManifold,
                     ReductionError, SectionDegenerate, StepOutOfDomain)
from .expr import Dual, evaluate, parse_observable

ANN_TOL = 1e-10
CANON_TOL = 1e-8
INVARIANCE_TOL = 1e-7
FD_STEP = 1e-3   # central differences with one Richardson level: O(h^4) + O(eps/h)

# Coefficients of the curvature and vertical terms of the reduced bracket.
# Pinned against the canonical bracket upstairs (see tests/test_weinstein.py).
CURVATURE_COEFF = 1.0
VERTICAL_COEFF = -1.0


@dataclass
class WeinsteinPoint:
    x: np.ndarray
    eta: np.ndarray
    lam: np.ndarray

    def __post_init__(self):
        self.x = np.atleast_1d(np.asarray(self.x, dtype=float))
        self.eta = np.atleast_1d(np.asarray(self.eta, dtype=float))
        self.lam = np.atleast_1d(np.asarray(self.lam, dtype=float))

    def as_vector(self):
        return np.concatenate([self.x, self.eta, self.lam])

    @classmethod
    def from_vector(cls, z, b):
        z = np.asarray(z, dtype=float)
        return cls(z[:b], z[b:2 * b], z[2 * b:])

    def to_json(self):
        return {"x": self.x.tolist(), "eta": self.eta.tolist(), "lambda": self.lam.tolist()}

    @classmethod
    def from_json(cls, doc):
        if isinstance(doc, str):
            doc = json.loads(doc)
        return cls(doc["x"], doc["eta"], doc["lambda"])


@dataclass
class WeinsteinTangent:
    xdot: np.ndarray
    etadot: np.ndarray
    lamdot: np.ndarray

    def __post_init__(self):
        self.xdot = np.atleast_1d(np.asarray(self.xdot, dtype=float))
        self.etadot = np.atleast_1d(np.asarray(self.etadot, dtype=float))
        self.lamdot = np.atleast_1d(np.asarray(self.lamdot, dtype=float))

    def as_vector(self):
        return np.concatenate([self.xdot, self.etadot, self.lamdot])


def check_point(M, w):
    """Validate shapes, the section domain and lam in Ann h."""
    b, m = M.base_dim, M.algebra.dim
    if w.x.size != b or w.eta.size != b or w.lam.size != m:
        raise ValueError(f"point must have x, eta of length {b} and lambda of length {m}")
    if not M.in_domain(w.x):
        raise SectionDegenerate(f"x = {w.x} outside the section domain")
    off = w.lam @ M.h_sub.basis
    if off.size and np.abs(off).max() > ANN_TOL * max(1.0, np.abs(w.lam).max()):
        raise ReductionError(f"lambda is not in Ann h (pairing {np.abs(off).max():.2e})")
    return w


def project_to_ann_h(M, lam):
    """Dual-metric orthogonal projection onto Ann h."""
    alg = M.algebra
    h = M.h_sub
    if h.dim == 0:
        return np.asarray(lam, dtype=float)
    return alg.flat(alg.sharp(lam) - h.project(alg.sharp(lam)))


# -- observables ------------------------------------------------------------------

class Observable:
    """Scalar function of a WeinsteinPoint with gradient access.

    ``grad`` (optional) returns the gradient in (x, eta, lam) as one vector;
    without it central differences with one Richardson level are used.
    """

    def __init__(self, func, grad=None, name=None, invariant=True):
        self.func = func
        self._grad = grad
        self.name = name or getattr(func, "__name__", "f")
        self.invariant = invariant

    def __call__(self, w):
        return float(self.func(w))

    def gradient(self, w):
        if self._grad is not None:
            return np.asarray(self._grad(w), dtype=float)
        z0 = w.as_vector()
        b = w.x.size
        g = np.empty(z0.size)
        for i in range(z0.size):
            e = np.zeros(z0.size)
            e[i] = 1.0
            g[i] = directional(lambda z: self.func(WeinsteinPoint.from_vector(z, b)), z0, e, FD_STEP)
        return g

    def value_and_gradient(self, w):
        return self(w), self.gradient(w)

    def __repr__(self):
        return f"Observable({self.name})"


class ExprObservable(Observable):
    """Observable given by an expression in the observable grammar."""

    def __init__(self, text, M):
        self.M = M
        self.expr = parse_observable(text, b=M.base_dim, m=M.algebra.dim)
        self._names = frozenset(self.expr.variables())
        super().__init__(lambda w: self.value_and_gradient(w)[0], None, name=text, invariant=True)

    def value_and_gradient(self, w):
        M = self.M
        b, m = M.base_dim, M.algebra.dim
        n = 2 * b + m
        eye = np.eye(n)
        env = {}
        for i in range(b):
            env[f"x{i + 1}"] = Dual(w.x[i], eye[i])
            env[f"e{i + 1}"] = Dual(w.eta[i], eye[b + i])
        for i in range(m):
            env[f"l{i + 1}"] = Dual(w.lam[i], eye[2 * b + i])
        names = self._names
        if "lam2" in names:
            s = M.algebra.sharp(w.lam)
            env["lam2"] = Dual(w.lam @ s, np.concatenate([np.zeros(2 * b), 2 * s]))
        if "kin" in names:
            env["kin"] = _kinetic_dual(M, w)
        d = evaluate(self.expr.tree, env, n)
        return d.val, d.grad

    def gradient(self, w):
        return self.value_and_gradient(w)[1]


def _kinetic_dual(M, w):
    """1/2 eta^T g(x)^{-1} eta with its gradient; dg/dx by central differences.

    The metric is computed to roundoff, so a single central difference at the
    cube-root-eps step is accurate to about 1e-10.
    """
    b = M.base_dim
    ginv = np.linalg.inv(M.base_metric(w.x))
    u = ginv @ w.eta
    gx = np.empty(b)
    h = fd_step(w.x)
    for j in range(b):
        dg = directional(M.base_metric, w.x, np.eye(b)[j], h, richardson=False)
        gx[j] = -0.5 * u @ dg @ u
    grad = np.concatenate([gx, u, np.zeros(M.algebra.dim)])
    return Dual(0.5 * w.eta @ u, grad)


def free_hamiltonian(M):
    """Observable 1/2 |p|^2 of the cotangent vector representing a point."""
    def f(w):
        _, p = to_cotangent(M, w)
        return 0.5 * p @ p
    return Observable(f, name="free")


def as_observable(f, M):
    if isinstance(f, Observable):
        return f
    if isinstance(f, str):
        return ExprObservable(f, M)
    return Observable(f)


def check_invariance(M, f, w, rng, samples=3, finite=(), tol=1e-8):
    """Raise InvarianceViolation if f changes under Ad*(h) on lam."""
    alg = M.algebra
    f = as_observable(f, M)
    f0 = f(w)
    groups = [alg.exp(M.h_sub.basis @ rng.standard_normal(M.h_sub.dim)) for _ in range(samples)] \
        if M.h_sub.dim else []
    groups += list(finite)
    for k in groups:
        f1 = f(WeinsteinPoint(w.x, w.eta, alg.Ad_star(k, w.lam)))
        if abs(f1 - f0) > tol * max(1.0, abs(f0)):
            raise InvarianceViolation(f"{f.name} is not H-invariant ({abs(f1 - f0):.2e})")
    return True


# -- the isomorphism psi / psi_0 ------------------------------------------------------

def to_cotangent(M, w):
    """(q, p) in T*Q, p as an ambient tangent vector, for a Weinstein point."""
    check_point(M, w)
    q = M.section(w.x)
    C = M.horizontal_lift_matrix(w.x)
    p_hor = C @ np.linalg.solve(C.T @ C, w.eta)
    return q, p_hor + connection_dual(M, q, w.lam)


def from_cotangent(M, q, p):
    """Weinstein point of (q, p): canonicalize q to the section and read off (x, eta, lam)."""
    q = M.check_point(q)
    p = np.asarray(p, dtype=float)
    x = M.invariants(q)
    try:
        s = M.section(x)
        k = M.canonicalize(q)
    except (SectionDegenerate, FloatingPointError, np.linalg.LinAlgError) as exc:
        raise CanonicalizationFailure(str(exc)) from exc
    G = M.action.group_rep(k)
    err = np.linalg.norm(G @ q - s)
    if not err <= CANON_TOL:
        raise CanonicalizationFailure(f"|k.q - s(x)| = {err:.2e}")
    p1 = G @ p
    C = M.horizontal_lift_matrix(x)
    eta = C.T @ p1
    lam = M.momentum_map(s, p1)
    return WeinsteinPoint(x, eta, lam)


# -- derivatives ----------------------------------------------------------------

def vertical_derivative(M, f, w, grad=None, check=True):
    """Riesz representative in h^perp of the derivative of f along Ann h.

    For an H-invariant f this D satisfies <lam, [D, Y]> = 0 for Y in h and
    [Y, D] = 0 for Y in h cap k_lam; either failing raises InvarianceViolation.
    """
    f = as_observable(f, M)
    if grad is None:
        grad = f.gradient(w)
    b = M.base_dim
    glam = grad[2 * b:]
    h = M.h_sub
    D = glam - h.project(glam) if h.dim else glam.copy()
    if check and h.dim:
        alg = M.algebra
        scale = max(1.0, alg.norm(D)) * max(1.0, alg.dual_norm(w.lam))
        pair = np.array([w.lam @ alg.bracket(D, h.basis[:, j]) for j in range(h.dim)])
        if np.abs(pair).max() > INVARIANCE_TOL * scale:
            raise InvarianceViolation(
                f"<lam, [D, h]> = {np.abs(pair).max():.2e}: observable is not H-invariant")
        l0 = h.intersect(alg.isotropy_of_covector(w.lam))
        for j in range(l0.dim):
            c = alg.bracket(l0.basis[:, j], D)
            if alg.norm(c) > INVARIANCE_TOL * scale:
                raise InvarianceViolation(f"[l0, D] = {alg.norm(c):.2e}: D is not fixed by h cap k_lam")
    return D


def covariant_derivative(M, f, w, grad=None, D=None, gauge=None):
    """(nabla_x f, d_eta f): derivatives along connection-horizontal directions.

    Moving x along the section while keeping the upstairs momentum value fixed
    rotates the section representative of lam by ad*(a_j) lam, a_j = A(ds/dx_j);
    the x-part therefore carries the correction <ad*(a_j) lam, D>, which
    vanishes for horizontal sections.
    """
    f = as_observable(f, M)
    if grad is None:
        grad = f.gradient(w)
    if D is None:
        D = vertical_derivative(M, f, w, grad=grad, check=False)
    b = M.base_dim
    a = section_gauge(M, w.x) if gauge is None else gauge
    alg = M.algebra
    corr = np.array([alg.ad_star(a[:, j], w.lam) @ D for j in range(b)])
    return grad[:b] + corr, grad[b:2 * b].copy()


class _Derivs:
    __slots__ = ("grad", "D", "nabla_x", "d_eta", "gauge")

    def __init__(self, M, f, w, check):
        self.grad = f.gradient(w)
        self.gauge = section_gauge(M, w.x)
        self.D = vertical_derivative(M, f, w, grad=self.grad, check=check)
        self.nabla_x, self.d_eta = covariant_derivative(M, f, w, grad=self.grad, D=self.D,
                                                        gauge=self.gauge)


def bracket_terms(M, f1, f2, w, check=True, curvature_matrix=None):
    """The three terms of the reduced bracket: canonical, curvature, vertical."""
    check_point(M, w)
    f1, f2 = as_observable(f1, M), as_observable(f2, M)
    d1, d2 = _Derivs(M, f1, w, check), _Derivs(M, f2, w, check)
    canonical = d1.nabla_x @ d2.d_eta - d1.d_eta @ d2.nabla_x
    if M.base_dim > 1 and np.any(w.lam):
        F = curvature_matrix if curvature_matrix is not None else curvature_pairing_matrix(M, w.x, w.lam)
        curv = CURVATURE_COEFF * (d1.d_eta @ F @ d2.d_eta)
    else:
        curv = 0.0
    vert = VERTICAL_COEFF * (w.lam @ M.algebra.bracket(d1.D, d2.D))
    return {"canonical": float(canonical), "curvature": float(curv), "vertical": float(vert)}


def reduced_bracket(M, f1, f2, w, check=True):
    """{f1, f2}^W = canonical term + curvature term + vertical term."""
    t = bracket_terms(M, f1, f2, w, check=check)
    return t["canonical"] + t["curvature"] + t["vertical"]


# -- the upstairs oracle --------------------------------------------------------------

class _Lift:
    """F(u, p_u) = f(from_cotangent(chart(u), p)) in chart cotangent coordinates at w."""

    def __init__(self, M, w):
        self.M = M
        q0, p0 = to_cotangent(M, w)
        self.phi, self.jac = M.chart(q0)
        self.d = M.dim
        T = self.jac(np.zeros(self.d))
        self.z0 = np.concatenate([np.zeros(self.d), T.T @ p0])

    def point(self, z):
        u, pu = z[: self.d], z[self.d:]
        J = self.jac(u)
        p = J @ np.linalg.solve(J.T @ J, pu)
        return from_cotangent(self.M, self.phi(u), p)

    def gradient(self, f, h):
        n = self.z0.size
        g = np.empty(n)
        for i in range(n):
            e = np.zeros(n)
            e[i] = 1.0
            g[i] = directional(lambda z: f(self.point(z)), self.z0, e, h)
        return g


def oracle_bracket(M, f1, f2, w, h=FD_STEP):
    """Canonical bracket upstairs of the pulled-back observables, at to_cotangent(w)."""
    f1, f2 = as_observable(f1, M), as_observable(f2, M)
    lift = _Lift(M, w)
    d = lift.d
    g1, g2 = lift.gradient(f1, h), lift.gradient(f2, h)
    return float(g1[:d] @ g2[d:] - g1[d:] @ g2[:d])


def oracle_field(M, f, w, h=FD_STEP):
    """Push-forward of the upstairs Hamiltonian field of f to (x, eta, lam) coordinates.

    The lam-part is a representative: it is only defined modulo ad*(h) lam.
    """
    f = as_observable(f, M)
    lift = _Lift(M, w)
    d = lift.d
    g = lift.gradient(f, h)
    zdot = np.concatenate([g[d:], -g[:d]])
    v = directional(lambda z: lift.point(z).as_vector(), lift.z0, zdot, h)
    b = M.base_dim
    return WeinsteinTangent(v[:b], v[b:2 * b], v[2 * b:])


# -- Hamiltonian fields and flows ---------------------------------------------------

def hamiltonian_field(M, f, w, check=True, curvature_matrix=None):
    """Field X_f with dg(X_f) = -{f, g} for every invariant g.

    xdot   = d_eta f
    etadot = -nabla_x f - CURVATURE_COEFF * F^T xdot       (F_ij = <lam, Curv(C e_i, C e_j)>)
    lamdot = P_Ann h [ad*(a xdot) lam + VERTICAL_COEFF * ad*(D) lam]
    """
    check_point(M, w)
    f = as_observable(f, M)
    d = _Derivs(M, f, w, check)
    alg = M.algebra
    xdot = d.d_eta
    etadot = -d.nabla_x
    if M.base_dim > 1 and np.any(w.lam):
        F = curvature_matrix if curvature_matrix is not None else curvature_pairing_matrix(M, w.x, w.lam)
        etadot = etadot - CURVATURE_COEFF * (F.T @ xdot)
    lamdot = alg.ad_star(d.gauge @ xdot, w.lam) + VERTICAL_COEFF * alg.ad_star(d.D, w.lam)
    return WeinsteinTangent(xdot, etadot, project_to_ann_h(M, lamdot))


def canonical_field(M, f, w):
    """The field with a purely canonical (x, eta) part and lamdot = ad*(D) lam.

    Kept for comparison with :func:`hamiltonian_field` and the oracle.
    """
    f = as_observable(f, M)
    d = _Derivs(M, f, w, check=False)
    return WeinsteinTangent(d.d_eta, -d.nabla_x, M.algebra.ad_star(d.D, w.lam))


@dataclass
class Trajectory:
    t: np.ndarray
    x: np.ndarray
    eta: np.ndarray
    lam: np.ndarray

    def point(self, i):
        return WeinsteinPoint(self.x[i], self.eta[i], self.lam[i])

    def __len__(self):
        return self.t.size

    def records(self):
        for i in range(len(self)):
            yield {"t": float(self.t[i]), "x": self.x[i].tolist(),
                   "eta": self.eta[i].tolist(), "lambda": self.lam[i].tolist()}

    def to_jsonl(self):
        return "".join(json.dumps(r) + "\n" for r in self.records())

    def to_csv(self):
        b, m = self.x.shape[1], self.lam.shape[1]
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["t"] + [f"x{i + 1}" for i in range(b)] + [f"eta{i + 1}" for i in range(b)]
                    + [f"lambda{i + 1}" for i in range(m)])
        for i in range(len(self)):
            wr.writerow([repr(float(self.t[i]))] + [repr(float(v)) for v in
                        np.concatenate([self.x[i], self.eta[i], self.lam[i]])])
        return buf.getvalue()


def integrate_flow(M, f, w0, T, dt, check=False, every=1):
    """Classical RK4 on :func:`hamiltonian_field`; records every ``every`` steps."""
    if not dt > 0 or T < 0:
        raise ValueError("need dt > 0 and T >= 0")
    f = as_observable(f, M)
    b = M.base_dim
    nsteps = int(round(T / dt))

    def rhs(z):
        w = WeinsteinPoint.from_vector(z, b)
        if not M.in_domain(w.x):
            raise StepOutOfDomain(f"x = {w.x} left the section chart")
        try:
            return hamiltonian_field(M, f, w, check=check).as_vector()
        except (SectionDegenerate, CanonicalizationFailure, OffManifold) as exc:
            raise StepOutOfDomain(str(exc)) from exc

    z = WeinsteinPoint(w0.x, w0.eta, w0.lam).as_vector()
    check_point(M, WeinsteinPoint.from_vector(z, b))
    ts, zs = [0.0], [z.copy()]
    for n in range(1, nsteps + 1):
        k1 = rhs(z)
        k2 = rhs(z + 0.5 * dt * k1)
        k3 = rhs(z + 0.5 * dt * k2)
        k4 = rhs(z + dt * k3)
        z = z + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        if not M.in_domain(z[:b]):
            raise StepOutOfDomain(f"x = {z[:b]} left the section chart at t = {n * dt}")
        if n % every == 0 or n == nsteps:
            ts.append(n * dt)
            zs.append(z.copy())
    zs = np.array(zs)
    return Trajectory(np.array(ts), zs[:, :b], zs[:, b:2 * b], zs[:, 2 * b:])
