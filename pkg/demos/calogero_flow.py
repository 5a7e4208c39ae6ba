"""
Calogero-Moser from free motion on symmetric matrices
=====================================================

SO(3) acts on symmetric 3x3 matrices by conjugation.  Reducing the free
Hamiltonian at a nonzero momentum leaves the eigenvalues moving under an
inverse-square repulsion.  The base coordinates (x1, x2) are orthonormal
coordinates on the plane of traceless diagonal matrices, with x1 proportional
to the gap between the two largest eigenvalues.
"""
import numpy as np

from gauged_reduce import leaves
from gauged_reduce import weinstein as W
from gauged_reduce.scenarios import get_scenario

sc = get_scenario("calogero_so3")
M = sc.manifold
print("Hamiltonian:", sc.default_hamiltonian)

# reduced free energy equals half the squared upstairs momentum
w0 = sc.reference_point()
H = W.ExprObservable(sc.default_hamiltonian, M)
print("H =", H(w0), " 1/2 |p|^2 =", W.free_hamiltonian(M)(w0))

# the reduced field against the pushed-forward canonical field upstairs
X, O = W.hamiltonian_field(M, H, w0), W.oracle_field(M, H, w0)
print("reduced field:", X.as_vector().round(8))
print("upstairs     :", O.as_vector().round(8))

# integrate and watch the conserved quantities
traj = W.integrate_flow(M, H, w0, T=5.0, dt=1e-3, every=500)
E = np.array([H(traj.point(i)) for i in range(len(traj))])
inv = np.array([leaves.orbit_invariants(M.algebra, lam) for lam in traj.lam])
print("energy drift:", np.abs(E - E[0]).max())
print("|lam|^2 drift:", np.abs(inv[:, 1] - inv[0, 1]).max())
print("final point:", traj.point(len(traj) - 1).to_json())
