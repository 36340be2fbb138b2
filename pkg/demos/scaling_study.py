"""
Many scatterers: the effective-medium scaling
=============================================

``M = a^-s`` spheres of diameter ``a`` on a cubic lattice with surface gap
``a^t``. With ``t = 1/3`` and ``s = 1`` the number of bodies grows as they
shrink, yet the point model keeps improving.
"""

from scatterlax.study import scaling_study

rows = scaling_study(t=1 / 3, s=1.0, a_list=[0.2, 0.1, 0.05], kappa=1.0, level=2)
print(f"{'a':>6} {'M':>3} {'d':>7} {'err':>10} {'budget':>10}")
for r in rows:
    print(f"{r.a:6.3f} {r.M:3d} {r.d:7.4f} {r.err:10.3e} {r.budget:10.3e}")
