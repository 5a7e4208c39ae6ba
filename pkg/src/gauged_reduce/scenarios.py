"""Built-in scenarios: algebra, manifold, section, canonicalization, references.

Every scenario runs a construction-time self check; a failure raises
:class:`ScenarioSelfCheckFailure` naming the invariant.
"""
from dataclasses import dataclass, field

import numpy as np

from .errors import ScenarioSelfCheckFailure
from .geometry import EquivariantManifold, LinearAction
from .lie import MatrixLieAlgebra

SELF_CHECK_TOL = 1e-8


@dataclass
class Scenario:
    name: str
    description: str
    manifold: EquivariantManifold
    sample_x: callable          # rng -> base point in the section domain
    lam_invariants: callable    # lam -> vector of H-invariant (and finite-isotropy invariant) functions
    default_hamiltonian: str
    observables: list           # expression strings in the observable grammar
    reference_lambda: np.ndarray = None
    lam_scale: float = 1.0
    reference_values: list = field(default_factory=list)
    finite_isotropy: list = field(default_factory=list)   # group matrices of a discrete H

    @property
    def algebra(self):
        return self.manifold.algebra

    @property
    def h_sub(self):
        return self.manifold.h_sub

    def sample_lambda(self, rng):
        """Random covector in Ann h."""
        alg = self.algebra
        ann = alg.annihilator_coords(self.h_sub)
        return self.lam_scale * ann.basis @ rng.standard_normal(ann.dim)

    def sample_point(self, rng, eta_scale=1.0):
        from .weinstein import WeinsteinPoint
        x = self.sample_x(rng)
        return WeinsteinPoint(x, eta_scale * rng.standard_normal(x.size), self.sample_lambda(rng))

    def reference_point(self):
        """Default point: reference base point, eta = 1/2, the reference covector."""
        from .weinstein import WeinsteinPoint
        x = self.manifold.x_ref
        return WeinsteinPoint(x, 0.5 * np.ones(x.size), self.reference_lambda)

    def sample_orbit_point(self, rng, radius=1.0):
        """Random point of Q (not necessarily on the section)."""
        M = self.manifold
        q = M.section(self.sample_x(rng))
        X = radius * rng.standard_normal(self.algebra.dim)
        return M.action.act(self.algebra.exp(X), q)

    def self_check(self, rng=None, samples=5):
        rng = rng if rng is not None else np.random.Generator(np.random.Philox(0))
        M = self.manifold
        alg = self.algebra
        for _ in range(samples):
            x = self.sample_x(rng)
            q = M.section(x)
            _require(self, "section lies on Q", _safe(M.check_point, q))
            _require(self, "psi(section(x)) = x",
                     np.linalg.norm(M.invariants(q) - x) <= SELF_CHECK_TOL)
            kq = M.isotropy_algebra(q)
            _require(self, "isotropy along section equals h",
                     kq.dim == M.h_sub.dim and M.h_sub.is_subspace_of(kq, 1e-7))
            dpsi = M.invariants_jacobian(q)
            Z = M.action.zeta_matrix(q)
            _require(self, "base coordinates are invariant",
                     np.abs(dpsi @ Z).max() <= SELF_CHECK_TOL * max(1.0, np.abs(Z).max()))
            q2 = self.sample_orbit_point(rng)
            k = M.canonicalize(q2)
            _require(self, "canonicalization round trip",
                     np.linalg.norm(M.action.act(k, q2) - M.section(M.invariants(q2))) <= SELF_CHECK_TOL)
            _require(self, "single isotropy type", M.isotropy_algebra(q2).dim == M.h_sub.dim)
            lam = self.sample_lambda(rng)
            _require(self, "lambda invariants are H-invariant", _lam_invariance(self, lam, rng))
        _require(self, "algebra closure and Ad-invariance", _safe(alg.validate))
        return True


def _safe(fn, *args):
    try:
        fn(*args)
        return True
    except Exception:
        return False


def _require(sc, name, ok):
    if not ok:
        raise ScenarioSelfCheckFailure(sc.name, name, "self check failed")


def _lam_invariance(sc, lam, rng):
    alg = sc.algebra
    base = sc.lam_invariants(lam)
    groups = [alg.exp(sc.h_sub.basis @ rng.standard_normal(sc.h_sub.dim))] if sc.h_sub.dim else []
    groups += list(sc.finite_isotropy)
    for k in groups:
        if np.abs(sc.lam_invariants(alg.Ad_star(k, lam)) - base).max() > 1e-8 * max(1.0, np.abs(base).max()):
            return False
    return True


# -- rotations -----------------------------------------------------------------

def rotation_to_e3(u):
    """Proper rotation R with R u = |u| e3, the minimal one when u is not near -e3."""
    u = np.asarray(u, dtype=float)
    a = u / np.linalg.norm(u)
    b = np.array([0.0, 0.0, 1.0])
    c = a @ b
    if c < -0.5:
        # go through e1 first: rotate a to e1's opposite hemisphere, then to e3
        R0 = np.array([[1.0, 0, 0], [0, -1.0, 0], [0, 0, -1.0]])
        return rotation_to_e3(R0 @ u) @ R0
    v = np.cross(a, b)
    V = np.array([[0, -v[2], v[1]], [v[2], 0, -v[0]], [-v[1], v[0], 0]])
    return np.eye(3) + V + V @ V / (1.0 + c)


# -- so3_r3 ----------------------------------------------------------------------

def so3_r3():
    alg = MatrixLieAlgebra.so3()
    action = LinearAction(alg, alg.basis, lambda k: np.asarray(k, dtype=float))
    M = EquivariantManifold(
        "so3_r3", action, "open",
        section=lambda x: np.array([0.0, 0.0, x[0]]),
        section_jacobian=lambda x: np.array([[0.0], [0.0], [1.0]]),
        invariants=lambda q: np.array([np.linalg.norm(q)]),
        invariants_jacobian=lambda q: (q / np.linalg.norm(q))[None, :],
        canonicalize=rotation_to_e3,
        in_domain=lambda x: x[0] > 0,
        on_open_set=lambda q: np.linalg.norm(q) > 0,
        x_ref=[1.0],
    )
    return Scenario(
        name="so3_r3",
        description="SO(3) on R^3 minus the origin; H = SO(2), base = (0, inf)",
        manifold=M,
        sample_x=lambda rng: np.array([rng.uniform(0.5, 2.0)]),
        lam_invariants=lambda lam: np.array([lam[0] ** 2 + lam[1] ** 2]),
        default_hamiltonian="0.5*e1^2 + lam2/(2*x1^2)",
        observables=["x1", "e1", "lam2", "x1*e1", "0.5*e1^2 + lam2/(2*x1^2)",
                     "sin(x1)*e1^2", "exp(-x1)*lam2", "x1^2*e1 + lam2*e1", "sqrt(1 + lam2)*x1"],
        reference_lambda=np.array([1.0, 0.0, 0.0]),
    )


# -- hopf ------------------------------------------------------------------------

def _hopf_section(x):
    rho2 = x[0] ** 2 + x[1] ** 2
    r1 = np.sqrt((1.0 + np.sqrt(1.0 - rho2)) / 2.0)
    return np.array([r1, 0.0, x[0] / (2 * r1), -x[1] / (2 * r1)])


def _hopf_section_jac(x):
    rho2 = x[0] ** 2 + x[1] ** 2
    S = np.sqrt(1.0 - rho2)
    r1 = np.sqrt((1.0 + S) / 2.0)
    dr = -np.asarray(x) / (4.0 * r1 * S)
    J = np.zeros((4, 2))
    J[0] = dr
    J[2] = -x[0] / (2 * r1 ** 2) * dr
    J[2, 0] += 1.0 / (2 * r1)
    J[3] = x[1] / (2 * r1 ** 2) * dr
    J[3, 1] -= 1.0 / (2 * r1)
    return J


def _hopf_invariants(q):
    a1, b1, a2, b2 = q
    return np.array([2 * (a1 * a2 + b1 * b2), 2 * (b1 * a2 - a1 * b2)])


def _hopf_invariants_jac(q):
    a1, b1, a2, b2 = q
    return 2.0 * np.array([[a2, b2, a1, b1], [-b2, a2, b1, -a1]])


def _rot2(theta):
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


def _hopf_canonicalize(q):
    return _rot2(-np.arctan2(q[1], q[0]))


def hopf():
    J = np.array([[0.0, -1.0], [1.0, 0.0]])
    alg = MatrixLieAlgebra(J[None], name="u(1)")
    rep = np.zeros((1, 4, 4))
    rep[0, :2, :2] = J
    rep[0, 2:, 2:] = J
    action = LinearAction(alg, rep, lambda k: np.kron(np.eye(2), k))
    M = EquivariantManifold(
        "hopf", action, "sphere",
        section=_hopf_section, section_jacobian=_hopf_section_jac,
        invariants=_hopf_invariants, invariants_jacobian=_hopf_invariants_jac,
        canonicalize=_hopf_canonicalize,
        in_domain=lambda x: x[0] ** 2 + x[1] ** 2 < 1.0,
        on_open_set=lambda q: q[0] ** 2 + q[1] ** 2 > q[2] ** 2 + q[3] ** 2,
        x_ref=[0.2, 0.1],
    )

    def sample_x(rng):
        r = 0.7 * np.sqrt(rng.uniform())
        t = rng.uniform(0, 2 * np.pi)
        return np.array([r * np.cos(t), r * np.sin(t)])

    return Scenario(
        name="hopf",
        description="circle acting on S^3 by the Hopf action; free, base = hemisphere of S^2(1/2)",
        manifold=M,
        sample_x=sample_x,
        lam_invariants=lambda lam: np.array([lam[0]]),
        default_hamiltonian="kin",
        observables=["x1", "x2", "e1", "e2", "kin", "x1*e2 - x2*e1", "l1*x1", "sin(x2)*e1^2",
                     "exp(x1)*e2 + l1^2", "x1^2 + e2^2*x2"],
        reference_lambda=np.array([1.0]),
    )


# -- calogero_so3 ----------------------------------------------------------------

def _sym_basis():
    s2, s6 = np.sqrt(2.0), np.sqrt(6.0)
    B = np.zeros((5, 3, 3))
    B[0] = np.diag([1.0, -1.0, 0.0]) / s2
    B[1] = np.diag([1.0, 1.0, -2.0]) / s6
    for n, (i, j) in enumerate([(0, 1), (0, 2), (1, 2)]):
        B[2 + n, i, j] = B[2 + n, j, i] = 1.0 / s2
    return B


SYM_BASIS = _sym_basis()


def sym_matrix(c):
    return np.tensordot(np.asarray(c, dtype=float), SYM_BASIS, axes=1)


def sym_coords(S):
    return np.einsum("aij,ij->a", SYM_BASIS, S)


def _eig_desc(q):
    w, R = np.linalg.eigh(sym_matrix(q))
    return w[::-1], R[:, ::-1]


def _calogero_invariants(q):
    e, _ = _eig_desc(q)
    return np.array([(e[0] - e[1]) / np.sqrt(2.0), (e[0] + e[1] - 2 * e[2]) / np.sqrt(6.0)])


def _calogero_invariants_jac(q):
    _, R = _eig_desc(q)
    de = np.array([np.einsum("i,aij,j->a", R[:, k], SYM_BASIS, R[:, k]) for k in range(3)])
    return np.array([(de[0] - de[1]) / np.sqrt(2.0), (de[0] + de[1] - 2 * de[2]) / np.sqrt(6.0)])


def _calogero_canonicalize(q):
    _, R = _eig_desc(q)
    R = R * np.where(np.diag(R) < 0, -1.0, 1.0)
    if np.linalg.det(R) < 0:
        R[:, 2] *= -1.0
    return R.T


def calogero_so3():
    alg = MatrixLieAlgebra.so3()
    # rep(X) S = [X, S] on traceless symmetric matrices (Frobenius-orthonormal basis)
    rep = np.array([[[np.sum(SYM_BASIS[a] * (L @ SYM_BASIS[b] - SYM_BASIS[b] @ L)) for b in range(5)]
                     for a in range(5)] for L in alg.basis])

    def group_rep(k):
        return np.array([[np.sum(SYM_BASIS[a] * (k @ SYM_BASIS[b] @ k.T)) for b in range(5)] for a in range(5)])

    action = LinearAction(alg, rep, group_rep)

    def in_domain(x):
        return x[0] > 0 and x[1] > x[0] / np.sqrt(3.0)

    def on_open_set(q):
        e, _ = _eig_desc(q)
        return np.min(np.diff(e[::-1])) > 1e-6 * max(1.0, np.abs(e).max())

    M = EquivariantManifold(
        "calogero_so3", action, "open",
        section=lambda x: np.array([x[0], x[1], 0.0, 0.0, 0.0]),
        section_jacobian=lambda x: np.eye(5)[:, :2],
        invariants=_calogero_invariants, invariants_jacobian=_calogero_invariants_jac,
        canonicalize=_calogero_canonicalize,
        in_domain=in_domain, on_open_set=on_open_set,
        x_ref=[1.0, 2.0],
    )

    def sample_x(rng):
        x1 = rng.uniform(0.6, 1.5)
        return np.array([x1, x1 / np.sqrt(3.0) + rng.uniform(0.6, 1.5)])

    signs = [np.diag(d) for d in ([1.0, -1, -1], [-1.0, 1, -1], [-1.0, -1, 1])]
    return Scenario(
        name="calogero_so3",
        description="SO(3) conjugation on traceless symmetric 3x3 matrices, regular stratum",
        manifold=M,
        sample_x=sample_x,
        lam_invariants=lambda lam: np.array([lam[0] ** 2, lam[1] ** 2, lam[2] ** 2, lam[0] * lam[1] * lam[2]]),
        default_hamiltonian=("kin + l1^2/(4*(sqrt(1.5)*x2 - x1/sqrt(2))^2)"
                             " + l2^2/(4*(sqrt(1.5)*x2 + x1/sqrt(2))^2) + l3^2/(8*x1^2)"),
        observables=["x1", "x2", "e1", "e2", "kin", "l1^2", "l2^2*x1", "l1*l2*l3", "e1*l3^2",
                     "x2*e1 - x1*e2 + l1^2*l2^2", "lam2*x1^2", "sin(x1)*cos(e2) + l2^2*e1"],
        reference_lambda=np.array([0.3, -0.4, 0.5]),
        finite_isotropy=signs,
    )


# -- so5_pairs -------------------------------------------------------------------

def _so5_section(x):
    a, d, c = (1.0 + x[1]) / 2.0, (1.0 - x[1]) / 2.0, x[0]
    q = np.zeros(10)
    q[0] = np.sqrt(a)
    q[5] = c / np.sqrt(a)
    q[6] = np.sqrt(d - c * c / a)
    return q


def _so5_section_jac(x):
    a, d, c = (1.0 + x[1]) / 2.0, (1.0 - x[1]) / 2.0, x[0]
    sa = np.sqrt(a)
    m = np.sqrt(d - c * c / a)
    J = np.zeros((10, 2))
    # da/dx2 = 1/2, dd/dx2 = -1/2, dc/dx1 = 1
    J[0, 1] = 0.25 / sa
    J[5, 0] = 1.0 / sa
    J[5, 1] = -c * 0.25 / (a * sa)
    J[6, 0] = -c / (a * m)
    J[6, 1] = (-0.5 + 0.5 * c * c / (a * a)) / (2 * m)
    return J


def _so5_canonicalize(q):
    """k = F^T for the frame F obtained by Gram-Schmidt on (v, w, e3, e4, e5).

    Completing with e3..e5 keeps F smooth near the section, whose points have
    v, w in span(e1, e2); the QR factor is made unique by a positive R diagonal.
    """
    v, w = q[:5], q[5:]
    A = np.column_stack([v, w, np.eye(5)[:, 2:]])
    if np.linalg.svd(A, compute_uv=False).min() < 1e-6:
        A = np.column_stack([v, w, np.eye(5)])
    F, R = np.linalg.qr(A)
    F = F[:, :5] * np.sign(np.diag(R)[:5])
    if np.linalg.det(F) < 0:
        F[:, 4] *= -1.0
    return F.T


def so5_split(lam):
    """Ann h -> R x R^3 x R^3, lam -> (t, v, w) from the matrix entries (x21, x_k1, x_k2)."""
    lam = np.asarray(lam, dtype=float)
    X = MatrixLieAlgebra.so(5).matrix(lam) if lam.ndim == 1 else lam
    return X[1, 0], X[2:, 0].copy(), X[2:, 1].copy()


def so5_join(t, v, w):
    """Inverse of :func:`so5_split` into so(5) coordinates."""
    X = np.zeros((5, 5))
    X[1, 0], X[2:, 0], X[2:, 1] = np.asarray(t, dtype=float).item(), v, w
    X = X - X.T
    return np.array([X[i, j] for i in range(5) for j in range(i + 1, 5)])


def _so5_lam_invariants(lam):
    t, v, w = -lam[0], -lam[1:4], -lam[4:7]
    return np.array([t, v @ v, w @ w, v @ w])


SO5_REFERENCE_LAMBDA = np.array([1.0, 1.0, 0.0, 0.0, -1.0, 1.0, 0.0, 0.0, 0.0, 0.0])


def so5_pairs():
    alg = MatrixLieAlgebra.so(5)
    rep = np.array([np.kron(np.eye(2), E) for E in alg.basis])
    action = LinearAction(alg, rep, lambda k: np.kron(np.eye(2), k))

    def on_open_set(q):
        v, w = q[:5], q[5:]
        g = np.array([[v @ v, v @ w], [v @ w, w @ w]])
        return np.linalg.det(g) > 1e-12

    M = EquivariantManifold(
        "so5_pairs", action, "sphere",
        section=_so5_section, section_jacobian=_so5_section_jac,
        invariants=lambda q: np.array([q[:5] @ q[5:], q[:5] @ q[:5] - q[5:] @ q[5:]]),
        invariants_jacobian=lambda q: np.array([np.concatenate([q[5:], q[:5]]),
                                                np.concatenate([2 * q[:5], -2 * q[5:]])]),
        canonicalize=_so5_canonicalize,
        in_domain=lambda x: 4 * x[0] ** 2 + x[1] ** 2 < 1.0,
        on_open_set=on_open_set,
        x_ref=[0.1, 0.2],
    )

    def sample_x(rng):
        r = 0.6 * np.sqrt(rng.uniform())
        t = rng.uniform(0, 2 * np.pi)
        return np.array([0.5 * r * np.cos(t), r * np.sin(t)])

    return Scenario(
        name="so5_pairs",
        description="SO(5) acting diagonally on linearly independent unit pairs in S^9; H = SO(3)",
        manifold=M,
        sample_x=sample_x,
        lam_invariants=_so5_lam_invariants,
        default_hamiltonian="kin + lam2*(1 + x1^2)",
        observables=["x1", "x2", "e1", "e2", "kin", "l1", "l1*x2", "l2^2 + l3^2 + l4^2",
                     "l2*l5 + l3*l6 + l4*l7", "e1*(l5^2 + l6^2 + l7^2)", "lam2*x1 + l1*e2"],
        reference_lambda=SO5_REFERENCE_LAMBDA,
    )


_BUILDERS = {"calogero_so3": calogero_so3, "hopf": hopf, "so3_r3": so3_r3, "so5_pairs": so5_pairs}
_CACHE = {}


def builtin_scenarios():
    """Names of the built-in scenarios, sorted."""
    return sorted(_BUILDERS)


def get_scenario(name, check=True):
    if name not in _BUILDERS:
        raise KeyError(f"unknown scenario {name!r}; choose from {builtin_scenarios()}")
    if name not in _CACHE:
        sc = _BUILDERS[name]()
        if check:
            sc.self_check()
        _CACHE[name] = sc
    return _CACHE[name]
