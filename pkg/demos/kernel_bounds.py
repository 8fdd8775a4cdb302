"""Pointwise bounds on the Green-Neumann function of the disk.

|d^beta G(x, y)| |x - y|^|beta| should stay bounded over the whole disk,
including near the boundary where the image point approaches y.  The
estimate is empirical: a sup over random pairs that should not move when
the sample grows tenfold.
"""

from pressure_lab.kernel import RESIDUAL_TOLERANCES, check_difference_bound, check_pointwise_bound, defining_residuals

for name, value in defining_residuals().items():
    print(f"{name:18s} {value:.2e}  (tolerance {RESIDUAL_TOLERANCES[name]:.0e})")

print("\nbeta  sup@1e4  sup@1e5")
for beta in [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]:
    a = check_pointwise_bound(beta, 10_000).sup_ratio
    b = check_pointwise_bound(beta, 100_000).sup_ratio
    print(f"{beta[0]}{beta[1]}    {a:7.3f}  {b:7.3f}")
a, b = check_difference_bound(10_000).sup_ratio, check_difference_bound(100_000).sup_ratio
print(f"diff  {a:7.3f}  {b:7.3f}")
