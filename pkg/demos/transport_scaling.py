"""
How fast the critical-point cloud approaches the root cloud.

Prints the optimal-transport distance W1 between roots and critical points
(plus one atom at the root mean) for growing n. The product n W1 / ln n
should stay bounded.

    python3 demos/transport_scaling.py
"""

from rootpair import UniformDisk
from rootpair.transport import scaling_record

sizes = [50, 100, 200, 400, 800]
rows, med = scaling_record(UniformDisk(), sizes, seeds=range(8))
print("    n   median W1   median n W1 / ln n")
for n in sizes:
    w1, _, norm = med[n]
    print(f"{n:5d}   {w1:.5f}     {norm:.3f}")
