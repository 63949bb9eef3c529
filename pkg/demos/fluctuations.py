"""
Fluctuations of the critical point next to a deterministic root.

Inside the support the scaled residual has a logarithmic variance that
converges slowly and carries heavy tails; outside the support the
n^{3/2}-scaled residual settles quickly onto a Monte Carlo target.

    python3 demos/fluctuations.py
"""

import numpy

from rootpair import UniformDisk, UnitCircle
from rootpair.statistics import cov_target, covariance_check, fluct_sample, heavy_tail_variance

seeds = range(200)

inside = [fluct_sample(UniformDisk(), 0.5, 10 ** 5, s, "inside") for s in seeds]
rep = covariance_check(inside, cov_target(UniformDisk(), 0.5, "inside"))
print("inside, n = 1e5, target variances 0.5")
print(f"  sample   Var(Re) {rep.re_var:.3f}  Var(Im) {rep.im_var:.3f}  cross {rep.cross:+.3f}")
print(f"  IQR-based          {rep.robust_re_var:.3f}          {rep.robust_im_var:.3f}")

ht = heavy_tail_variance(UniformDisk(), 0.5, 1.0, 10 ** 5, seeds)
print(f"  the driving sum: raw ratio {ht.raw_ratio_re:.2f}, truncated ratio {ht.ratio_re:.2f}")

target = cov_target(UnitCircle(), 2.0, "outside")
outside = [fluct_sample(UnitCircle(), 2.0, 2000, s, "outside", method="local") for s in seeds]
rep = covariance_check(outside, target)
print("outside, unit circle, xi = 2, n = 2000")
print(f"  target   {target.re_var:.4f} {target.im_var:.4f} {target.cross:+.4f}")
print(f"  sample   {rep.re_var:.4f} {rep.im_var:.4f} {rep.cross:+.4f}")
print(f"  flagged  {numpy.mean([s.flagged for s in outside]):.3f}")
