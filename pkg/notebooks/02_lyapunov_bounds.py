"""
Lyapunov-type inequalities on computed eigenvalues
==================================================

For the k-th eigenvalue the oscillation bound compares
(k^(p-1)/p) (int a^(-1/(p-1)))^(1-p) with lambda_k times the largest
|int_a^b rho|. When rho has a lot of cancellation this is usually sharper,
at least for small k, than the classical bound that only sees int rho^+.
"""

import numpy as np

from plyap import PiecewiseWeight, ProblemSpec, bound_classical, bound_lyapu, eigenvalue

rng = np.random.default_rng(0)

# many thin blocks of alternating sign: large positive mass, small oscillation
vals = np.ravel([[c, -c] for c in rng.uniform(1, 3, 30)])
ends = np.linspace(0, 1, vals.size + 1)[1:]
rho = PiecewiseWeight.step(vals, ends)
spec = ProblemSpec(2.0, 1.0, rho=rho)

for k in (1, 2, 3):
    lam = eigenvalue(spec, k).lam
    u = bound_lyapu(spec, k, lam)
    c = bound_classical(spec, k, lam)
    print(f"k={k} lambda={lam:10.2f}")
    print(f"   oscillation bound: lhs {u.lhs:.4f} rhs {u.rhs:10.4f} relative slack {u.relative_slack:.4f}")
    print(f"   classical bound:   lhs {c.lhs:.4f} rhs {c.rhs:10.4f} relative slack {c.relative_slack:.4f}")

# used the other way round, a failed inequality proves that 1 is not an eigenvalue
from plyap import bound_lyapi

rep = bound_lyapi(ProblemSpec(2.0, np.pi, rho=0.01))
print(rep.satisfied, rep.note)
