"""
A charged particle on the sphere: the Hopf fibration
====================================================

U(1) acts freely on S^3 in C^2 and the quotient is the 2-sphere of radius 1/2.
Fixing the charge lam, reduced motion on T*S^2 feels the curvature of the
mechanical connection as a magnetic field of a monopole.
"""
import numpy as np

from gauged_reduce import connection as con
from gauged_reduce import weinstein as W
from gauged_reduce.scenarios import get_scenario

sc = get_scenario("hopf")
M = sc.manifold

# the magnetic field strength against the closed form
for x in ([0.0, 0.0], [0.3, -0.2], [0.6, 0.1]):
    x = np.array(x)
    F = con.reduced_curvature_pairing(M, x, [1, 0], [0, 1], [1.0])
    print(f"x = {x}:  <lam, Curv(e1, e2)> = {F:+.10f}   closed form {-0.5 / np.sqrt(1 - x @ x):+.10f}")

# momenta no longer commute: {e1, e2} picks up the magnetic term
w = W.WeinsteinPoint([0.3, -0.2], [0.0, 0.0], [1.0])
print("{e1, e2} terms:", W.bracket_terms(M, "e1", "e2", w))
print("upstairs oracle:", W.oracle_bracket(M, "e1", "e2", w))

# a monopole orbit: the kinetic energy is conserved by RK4 to roundoff
H = W.ExprObservable("kin", M)
w0 = W.WeinsteinPoint([0.1, 0.0], [0.2, 0.1], [1.0])
traj = W.integrate_flow(M, H, w0, T=2.0, dt=1e-3, every=200)
for i in range(len(traj)):
    print(f"t = {traj.t[i]:4.1f}  x = {traj.x[i].round(5)}  H = {H(traj.point(i)):.14f}")
