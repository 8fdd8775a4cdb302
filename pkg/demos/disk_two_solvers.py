"""Two independent pressure solvers on the unit disk.

The representation formula integrates the Hessian of the Green-Neumann
function against (u(y) - u(x)) u(y).  The finite-volume solver works on the
Neumann problem directly.  On the rigid rotation both must return
|x|^2 / 2 - 1/4; on a rough lacunary field they must agree with each other.
"""

import numpy as np

from pressure_lab.disk import pressure_fd, pressure_representation
from pressure_lab.fields import make_disk_field, rigid_rotation

rot = rigid_rotation()
x = np.array([[0.0, 0.0], [0.5, 0.1], [-0.2, 0.9]])
exact = 0.5 * np.sum(x**2, axis=1) - 0.25
print("rotation, representation:", pressure_representation(rot, x), "exact:", exact)

for n in (64, 128, 256):
    p = pressure_fd(rot, n, n)
    pts = p.geometry.points()
    err = np.max(np.abs(p.scalar - (0.5 * np.sum(pts**2, axis=-1) - 0.25)))
    print(f"rotation, finite volumes N={n:3d}: max error {err:.2e}")

spec = make_disk_field(0.4, 5, seed=0)
p = pressure_fd(spec, 256, 512)
sel = (slice(None, None, 51), slice(None, None, 97))
pts = p.geometry.points()[sel].reshape(-1, 2)
rep = pressure_representation(spec, pts)
ref = p.scalar[sel].ravel()
print(f"theta = 0.4 field, {len(pts)} targets: relative discrepancy {np.max(np.abs(rep - ref)) / np.max(np.abs(ref)):.2e}")
