"""
Roots of a random polynomial and the critical points they drag along.

Draws 150 roots uniformly from the unit disk, computes every critical point,
and compares each one with the first-order prediction attached to its root.
Pass an output path to write plot data (series,re,im) for any plotting tool.

    python3 demos/pairing_tour.py [plot.csv]
"""

import sys

import numpy

from rootpair import UniformDisk, predict, solve
from rootpair.cli import emit_plot_data

n = 150
measure = UniformDisk()
roots = measure.sample(n, seed=0)
cps = solve(roots)
print(f"{n} roots, {len(cps)} critical points, {cps.iterations} sweeps")

# every root away from the centre has a critical point right next to it
pred = numpy.array([predict(roots, i).w_hat for i in range(n)])
nearest = numpy.array([numpy.min(numpy.abs(cps.points - x)) for x in roots.points])
err = numpy.array([numpy.min(numpy.abs(cps.points - w)) for w in pred])
m_abs = numpy.abs(measure.stieltjes(roots.points))

print(f"typical root spacing         ~ {1 / numpy.sqrt(n):.3f}")
print(f"median |root - nearest cp|   = {numpy.median(nearest):.2e}")
print(f"median |prediction - cp|     = {numpy.median(err):.2e}")
for lo, hi in ((0.0, 0.2), (0.2, 0.5), (0.5, 1.0)):
    sel = (m_abs >= lo) & (m_abs < hi)
    print(f"  |m| in [{lo}, {hi}): {sel.sum():3d} roots, "
          f"median n|m| dist = {numpy.median(n * m_abs[sel] * nearest[sel]):.3f}")

# pairing is loosest on the inner roots, where m is small
worst = numpy.argmax(nearest * m_abs)
print(f"least paired root: {roots.points[worst]:.3f} with |m| = {m_abs[worst]:.2f}")

if len(sys.argv) > 1:
    emit_plot_data({"roots": roots, "cps": cps, "predicted": pred}, sys.argv[1])
    print(f"plot data written to {sys.argv[1]}")
