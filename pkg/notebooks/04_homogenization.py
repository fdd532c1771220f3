"""
Periodic homogenization
=======================

rho(x/eps) with rho = sin(2 pi x) + c. The sign of the mean c decides which
ladder converges to the limit problem and which one escapes to infinity.
"""

import math

from plyap import PiecewiseWeight, ProblemSpec, SweepConfig, sweep

for c in (0.5, 0.0, -0.5):
    rho = PiecewiseWeight.sinusoid(1.0, 2 * math.pi, 0.0, c, 1.0)
    res = sweep(SweepConfig(ProblemSpec(2.0, 1.0, rho=rho), sign="both"))
    print(f"\nmean {c:+.1f}")
    for (k, s), label in sorted(res.classification.items()):
        lam = [round(r.lam, 3) for r in res.ladder(k, s)]
        rate = res.rates[(k, s)]
        extra = f" limit {res.limits[(k, s)]:.4f} rate {rate:.2f}" if rate else ""
        print(f"  k={k}{s} {label:15s} {lam}{extra}")

print()
print(res.to_csv())
