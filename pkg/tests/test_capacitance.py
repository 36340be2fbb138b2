import math

import numpy as np
import pytest

from scatterlax.capacitance import (NonPositiveRadius, SingularSystem, energy_integral, factorize,
                                    mesh_capacitance, radius_from_capacitance, sphere_capacitance)
from scatterlax.mesh import OpenSurface, TriMesh, cube, icosphere

# Richardson extrapolation of this solver's unit-cube values at n = 4, 8, 16
# (0.65330, 0.65764, 0.65945 times 4 pi, observed order ~1.27). Frozen here
# after computing it once; it agrees with the published unit-cube value
# 0.66068 * 4 pi to about 1e-4 relative.
CUBE_RICHARDSON = 0.66073 * 4 * math.pi


def test_sphere_capacitance_values():
    assert sphere_capacitance(0.5) == pytest.approx(2 * math.pi, abs=1e-15)
    assert sphere_capacitance(1.0) == 4 * math.pi
    assert sphere_capacitance(2.0) == 8 * math.pi


def test_radius_from_capacitance_values():
    assert radius_from_capacitance(2 * math.pi) == 0.5
    assert radius_from_capacitance(4 * math.pi) == 1.0
    assert radius_from_capacitance(8 * math.pi) == 2.0


@pytest.mark.parametrize("r", [1e-3, 0.1, 0.5, 1.0, 7.25])
def test_radius_roundtrip_is_exact(r):
    assert radius_from_capacitance(sphere_capacitance(r)) == r


@pytest.mark.parametrize("bad", [0.0, -1.0, float("nan")])
def test_nonpositive_rejected(bad):
    with pytest.raises(NonPositiveRadius):
        sphere_capacitance(bad)
    with pytest.raises(NonPositiveRadius):
        radius_from_capacitance(bad)


def test_unit_sphere_1280_triangles():
    res = mesh_capacitance(icosphere(3))
    assert abs(res.capacitance / (4 * math.pi) - 1) < 0.01
    assert res.residual < 1e-10


def test_sphere_convergence_is_monotone():
    errs = [abs(mesh_capacitance(icosphere(l)).capacitance / (4 * math.pi) - 1) for l in (1, 2, 3)]
    assert errs[0] > errs[1] > errs[2]
    # second order in the mesh width
    assert errs[1] / errs[2] > 3.5


def test_sphere_density_is_uniform():
    res = mesh_capacitance(icosphere(3))
    s = res.density
    assert np.max(np.abs(s - s.mean())) / s.mean() <= 0.05


def test_cube_converges_to_extrapolated_value():
    errs = [abs(mesh_capacitance(cube(n)).capacitance - CUBE_RICHARDSON) for n in (2, 4, 8)]
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] / CUBE_RICHARDSON < 5e-3


@pytest.mark.parametrize("eps", [0.5, 2.0, 10.0])
def test_scaling_law(eps):
    m = icosphere(2)
    c1 = mesh_capacitance(m).capacitance
    c2 = mesh_capacitance(m.scaled(eps)).capacitance
    assert c2 == pytest.approx(eps * c1, rel=1e-10)


def test_translation_invariance():
    m = cube(3)
    c1 = mesh_capacitance(m).capacitance
    c2 = mesh_capacitance(m.translated([5.0, -2.0, 1.0])).capacitance
    assert c2 == pytest.approx(c1, rel=1e-10)


@pytest.mark.parametrize("mesh", [icosphere(2), icosphere(3, radius=0.3), cube(4), cube(3, side=2.0)],
                         ids=["sphere2", "sphere3", "cube4", "cube3"])
def test_energy_lower_bound(mesh):
    J = energy_integral(mesh)
    lower = 4 * math.pi * mesh.total_area ** 2 / J
    assert lower <= mesh_capacitance(mesh).capacitance * (1 + 1e-9)


def test_open_surface_rejected():
    m = icosphere(2)
    with pytest.raises(OpenSurface):
        mesh_capacitance(TriMesh(m.vertices, m.triangles[:-3]))


def test_too_few_triangles():
    with pytest.raises(ValueError):
        mesh_capacitance(icosphere(0))


def test_factorize_detects_singular_matrix():
    A = np.ones((4, 4))
    with pytest.raises(SingularSystem):
        factorize(A)
    with pytest.raises(SingularSystem):
        factorize(np.array([[1.0, np.nan], [0.0, 1.0]]))
