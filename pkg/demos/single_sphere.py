"""
One small sound-soft sphere
===========================

The point-scatterer model replaces a sphere of radius rho by a monopole of
strength ``-C = -4 pi rho``. Its far field is ``-rho`` in every direction.
Here it is compared with the partial-wave series and with the boundary
element reference as the radius shrinks.
"""

import numpy as np

from scatterlax import Scene, gauss_legendre_directions, response_matrix
from scatterlax.bem import exact_sphere_far_field, oracle_response_matrix

kappa = 1.0
dirs = gauss_legendre_directions(3)
theta = dirs.directions

###############################################################################
# The series is the ground truth. Its monopole term alone is
# ``-sin(k rho) exp(-i k rho) / k``, which already differs from ``-rho`` by a
# phase of order ``k rho``.

print(f"{'rho':>6} {'|foldy-series|':>15} {'|bem-series|':>13} {'k a^2':>8}")
for rho in (0.2, 0.1, 0.05):
    scene = Scene.spheres([[0, 0, 0]], rho, kappa=kappa)
    series = np.array([exact_sphere_far_field(rho, kappa, theta, th) for th in theta]).T
    foldy = response_matrix(scene, dirs).F
    bem = oracle_response_matrix(scene, dirs, level=3).F
    print(f"{rho:6.3f} {np.abs(foldy - series).max():15.3e} {np.abs(bem - series).max():13.3e} "
          f"{kappa * (2 * rho) ** 2:8.3f}")

###############################################################################
# The Foldy error shrinks like ``a^2`` and stays below ``k a^2``. The mesh
# error of the reference is an order of magnitude smaller at level 3.
