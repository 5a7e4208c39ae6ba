"""
Symplectic leaves of SO(5) acting on orthonormal pairs
======================================================

SO(5) acts on pairs of orthonormal vectors in R^5.  The isotropy of a pair is
a copy of SO(3) acting on the remaining three coordinates, so the reduced
momentum lives in the annihilator of so(3).  This script computes the slice
data at a fixed covector and prints the dimension table.
"""
import numpy as np

from gauged_reduce import leaves
from gauged_reduce.scenarios import SO5_REFERENCE_LAMBDA, get_scenario, so5_split

sc = get_scenario("so5_pairs")
M = sc.manifold
alg = M.algebra
lam = SO5_REFERENCE_LAMBDA

# the covector as a 5x5 antisymmetric matrix and its (t, v, w) coordinates
print(alg.matrix(lam))
t, v, w = so5_split(lam)
print("t =", t, " v =", v, " w =", w)

# dimensions of the isotropy, slice and leaf, with the rank margin
dims, margin, sl = leaves.dimension_table(M, lam)
for key, val in dims.items():
    print(f"{key:>26s}  {val}")
print("smallest kept singular value:", round(margin["kept_min"], 4))

# V is spanned by the E12 + E23 and E13 - E24 directions modulo h.lam
t_dir = np.zeros(10)
t_dir[[0, 4]] = 1.0
a_dir = np.zeros(10)
a_dir[1], a_dir[5] = 1.0, -1.0
print("residuals from (h.lam)^Omega:",
      sl.symplectic_orthogonal.residual(t_dir), sl.symplectic_orthogonal.residual(a_dir))
