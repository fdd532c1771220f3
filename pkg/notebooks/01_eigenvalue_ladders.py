"""
Eigenvalue ladders of an indefinite weight
==========================================

A weight that changes sign has two ladders of eigenvalues, one going to
+infinity and one to -infinity. The k-th eigenfunction of either ladder has
exactly k nodal domains.
"""

import math

import numpy as np

from plyap import PiecewiseWeight, ProblemSpec, eigenvalue, pi_p

# sanity check first: constant weight, the ladder is (k pi_p / L)^p
for p in (1.5, 2.0, 3.0):
    spec = ProblemSpec(p, 1.0)
    lam = [eigenvalue(spec, k).lam for k in (1, 2, 3)]
    exact = [(k * pi_p(p)) ** p for k in (1, 2, 3)]
    print(f"p={p}: ", np.round(lam, 6), " closed form ", np.round(exact, 6))

# a step weight, positive on the left and negative on the right
rho = PiecewiseWeight.step([1.0, -1.0], [0.5, 1.0])
spec = ProblemSpec(2.0, 1.0, rho=rho)
for sign in "+-":
    for k in (1, 2, 3):
        pair = eigenvalue(spec, k, sign)
        print(f"{sign} k={k}  lambda={pair.lam:12.6f}  zeros={np.round(pair.nodes, 4)}")

# the eigenfunction of the + ladder lives where rho > 0 and decays on the right
pair = eigenvalue(spec, 3, "+")
right = pair.x > 0.5
print("max |u| on the negative half:", float(np.abs(pair.u[right]).max()))

# sampled eigenfunction as CSV, ready for any plotting tool
np.savetxt("ladder_k3.csv", np.column_stack([pair.x, pair.u]), delimiter=",", header="x,u", comments="")
print("wrote ladder_k3.csv;", math.isclose(np.abs(pair.u).max(), 1.0))
