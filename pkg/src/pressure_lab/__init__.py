"""Numerical laboratory for the regularity of the hydrodynamic pressure.

Modules: ``fields`` (synthetic velocities), ``holder`` (exponent
measurement), ``torus`` (spectral solves), ``kernel`` (disk Green-Neumann
function), ``disk`` (disk solvers) and ``experiments`` / ``acceptance`` /
``cli`` (the harness).
"""

__version__ = "0.1.0"
