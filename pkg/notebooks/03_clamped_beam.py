"""
Clamped beam and the higher-order bound
=======================================

u'''' = lambda rho u with u = u' = 0 at both ends. For rho = 1 and L = 1 the
first eigenvalue is beta^4 with cos(beta) cosh(beta) = 1.
"""

import math

from scipy.optimize import brentq

from plyap import BeamProblem, PiecewiseWeight, assemble, smallest_positive_eigenvalue, verify_lyapi2

beta = brentq(lambda b: math.cos(b) * math.cosh(b) - 1.0, 4.0, 5.0)
print("beta^4 =", beta**4)

one = PiecewiseWeight.constant(1.0, 1.0)
for n in (100, 200, 400):
    lam, _ = smallest_positive_eigenvalue(assemble(BeamProblem(2, 1.0, one, n=n)))
    print(f"n={n:4d}  lambda_1={lam:.6f}  error={lam - beta**4:.3e}")

rep = verify_lyapi2(BeamProblem(2, 1.0, one))
print(rep.name, "lhs", rep.lhs, "rhs", round(rep.rhs, 3), "satisfied", rep.satisfied)

# sixth order: no closed form, the bound check still applies
rep = verify_lyapi2(BeamProblem(3, 1.0, one, n=200))
print(rep.name, "lhs", rep.lhs, "rhs", round(rep.rhs, 1))
