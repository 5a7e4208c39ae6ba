"""
The reduced bracket against the upstairs oracle
===============================================

Every invariant observable on the reduced space pulls back to T*Q.  The
reduced bracket of two observables must agree with the canonical bracket of
their pull-backs, which we compute by finite differences in a chart.
"""
import numpy as np

from gauged_reduce import weinstein as W
from gauged_reduce.checks import make_rng
from gauged_reduce.scenarios import builtin_scenarios, get_scenario

rng = make_rng(42)
for name in builtin_scenarios():
    sc = get_scenario(name)
    M = sc.manifold
    obs = [W.ExprObservable(s, M) for s in sc.observables]
    errs = []
    for _ in range(20):
        w = sc.sample_point(rng)
        f, g = rng.choice(len(obs), 2, replace=False)
        r = W.reduced_bracket(M, obs[f], obs[g], w)
        o = W.oracle_bracket(M, obs[f], obs[g], w)
        errs.append(abs(r - o) / (1 + abs(o)))
    print(f"{name:>13s}: max relative gap over 20 samples {max(errs):.2e}")

# the three contributions of one bracket on the so(5) example
sc = get_scenario("so5_pairs")
w = sc.reference_point()
print(W.bracket_terms(sc.manifold, "l1*x2", "e1*(l5^2 + l6^2 + l7^2)", w))
print(np.round(sc.algebra.matrix(w.lam), 3))
