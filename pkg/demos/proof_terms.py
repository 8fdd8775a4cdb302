"""The three terms of the Hölder estimate for the disk pressure.

p(x1) - p(x2) splits into a ball term A over B(xbar, lambda), an outer
term B1 where the kernel difference is smooth, and a boundary term B2 on
the sphere |y - xbar| = lambda.  Each should scale like lambda^theta.
"""

import numpy as np

from pressure_lab.disk import proof_split
from pressure_lab.fields import make_disk_field

theta = 0.4
spec = make_disk_field(theta, 6, seed=0)
x1 = np.array([0.3, -0.2])
e = np.array([np.cos(1.0), np.sin(1.0)])
rows = []
print("lambda        A          B1         B2      recon. error")
for k in range(3, 8):
    lam = 2.0**-k
    s = proof_split(spec, x1, x1 + lam * e)
    rows.append((lam, max(abs(s.A), abs(s.B1), abs(s.B2))))
    print(f"{lam:8.5f}  {s.A:+.3e}  {s.B1:+.3e}  {s.B2:+.3e}  {s.reconstruction_error():.1e}")
lam, big = np.array(rows).T
print(f"slope of log max|term| vs log lambda: {np.polyfit(np.log(lam), np.log(big), 1)[0]:.3f} (theta = {theta})")
