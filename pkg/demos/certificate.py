"""
Certified localisation of the critical point next to an outlying root.

Ten thousand roots on the unit circle plus one root at 2. The certificate
checks sufficient conditions under which exactly one critical point lives in
a disk around the predicted centre, and the full solve confirms it.

    python3 demos/certificate.py
"""

import numpy

from rootpair import UnitCircle, certify, solve
from rootpair.critical import count_within

roots = UnitCircle().sample(10_000, seed=4).with_roots([2])
cert = certify(roots, roots.n - 1, UnitCircle())
print(f"conditions (i, ii, iii, n large enough): "
      f"{cert.cond_i}, {cert.cond_ii}, {cert.cond_iii}, {cert.n_threshold_ok}")
print(f"valid: {cert.valid}")
print(f"centre c_n = {cert.c_n:.10f}")
print(f"uniqueness radius {cert.radius_large:.2e}, location radius {cert.radius_small:.2e}")

cps = solve(roots).points
w = cps[numpy.argmin(numpy.abs(cps - cert.xi))]
print(f"critical points in the large disk: {count_within(cps, cert.xi, cert.radius_large)}")
print(f"|w - c_n| = {abs(w - cert.c_n):.2e}")

# at n = 1000 the same geometry fails only the size threshold
small = UnitCircle().sample(1000, seed=0).with_roots([2])
c = certify(small, small.n - 1)
print(f"n = 1000: conditions hold {c.cond_i and c.cond_ii and c.cond_iii}, "
      f"threshold {c.n_threshold_ok}")
