"""
Capacitance of triangulated bodies
==================================

The capacitance solves a first-kind single-layer equation with unit
potential. A sphere of radius rho has ``C = 4 pi rho``; the unit cube has no
closed form, so successive refinements are extrapolated.
"""

import math

import numpy as np

from scatterlax import icosphere, mesh_capacitance
from scatterlax.mesh import cube
from scatterlax.capacitance import energy_integral

###############################################################################
# Unit sphere: second-order convergence in the mesh width.

for level in range(1, 5):
    res = mesh_capacitance(icosphere(level))
    print(f"level {level}: {res.density.size:5d} triangles, C/4pi - 1 = {res.capacitance / (4 * math.pi) - 1:+.2e}")

###############################################################################
# Unit cube, followed by Richardson extrapolation from the last three levels.

ns = (4, 8, 16)
vals = np.array([mesh_capacitance(cube(n)).capacitance / (4 * math.pi) for n in ns])
p = math.log((vals[1] - vals[0]) / (vals[2] - vals[1])) / math.log(2)
extrap = vals[2] + (vals[2] - vals[1]) / (2 ** p - 1)
for n, v in zip(ns, vals):
    print(f"cube n={n:2d}: C/4pi = {v:.5f}")
print(f"observed order {p:.2f}, extrapolated C/4pi = {extrap:.5f}")

###############################################################################
# The energy integral gives a lower bound ``4 pi |dB|^2 / J <= C``.

m = cube(8)
print(f"lower bound {4 * math.pi * m.total_area ** 2 / energy_integral(m):.4f} "
      f"<= C = {mesh_capacitance(m).capacitance:.4f}")
