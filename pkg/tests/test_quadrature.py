import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from scatterlax.quadrature import potential_integral, subdivided_potential

coords = st.floats(-2.0, 2.0, allow_nan=False)
vec = st.tuples(coords, coords, coords)


def _polar_in_plane(point, tri, n=200_000):
    """int_T 1/|x-y| for x inside T and in its plane, as sum over the three
    sub-triangles of the angular integral of the distance to the edge."""
    total = 0.0
    normal = np.cross(tri[1] - tri[0], tri[2] - tri[0])
    normal /= np.linalg.norm(normal)
    e1 = tri[1] - tri[0]
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(normal, e1)
    for i in range(3):
        a, b = tri[i], tri[(i + 1) % 3]
        s = np.linspace(0.0, 1.0, n)
        v = a + np.outer(s, b - a) - point
        ang = np.unwrap(np.arctan2(v @ e2, v @ e1))
        total += np.trapezoid(np.linalg.norm(v, axis=1), ang) if hasattr(np, "trapezoid") \
            else np.trapz(np.linalg.norm(v, axis=1), ang)
    return abs(total)


def test_centroid_self_integral():
    tri = np.array([[0, 0, 0], [1, 0, 0], [0.3, 0.8, 0]], float)
    c = tri.mean(axis=0)
    assert potential_integral(c[None], tri[None])[0, 0] == pytest.approx(_polar_in_plane(c, tri), rel=1e-6)


def test_equilateral_centroid_closed_form():
    # For an equilateral triangle of side L the centroid integral is
    # sqrt(3) L * asinh(sqrt(3)) ... derived from three sub-triangles with
    # height L/(2 sqrt 3) and half-angle pi/3.
    L = 1.7
    tri = np.array([[0, 0, 0], [L, 0, 0], [L / 2, L * np.sqrt(3) / 2, 0]])
    h = L / (2 * np.sqrt(3))
    expected = 3 * h * 2 * np.arcsinh(np.tan(np.pi / 3))
    assert potential_integral(tri.mean(0)[None], tri[None])[0, 0] == pytest.approx(expected, rel=1e-13)


@settings(max_examples=40, deadline=None)
@given(vec, vec, vec, vec)
def test_matches_brute_force(p0, p1, p2, x):
    tri = np.array([p0, p1, p2], float)
    area = 0.5 * np.linalg.norm(np.cross(tri[1] - tri[0], tri[2] - tri[0]))
    edges = [np.linalg.norm(tri[i] - tri[(i + 1) % 3]) for i in range(3)]
    if area < 0.05 * max(edges) ** 2 or max(edges) < 0.1:
        return
    x = np.asarray(x, float)
    normal = np.cross(tri[1] - tri[0], tri[2] - tri[0]) / (2 * area)
    height = abs((x - tri[0]) @ normal)
    if height < 0.2 * max(edges):  # keep the brute-force rule accurate
        x = x + (0.2 * max(edges) - height + 0.1) * normal
    exact = potential_integral(x[None], tri[None])[0, 0]
    assert exact == pytest.approx(subdivided_potential(x, tri, depth=7), rel=2e-4)


def test_far_point_monopole():
    tri = np.array([[0, 0, 0], [0.01, 0, 0], [0, 0.01, 0]], float)
    x = np.array([[3.0, 4.0, 12.0]])
    area = 0.5e-4
    centroid = tri.mean(0)
    assert potential_integral(x, tri[None])[0, 0] == pytest.approx(area / np.linalg.norm(x[0] - centroid), rel=1e-9)


def test_point_on_edge_line_is_finite():
    tri = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0]], float)
    x = np.array([[2.0, 0.0, 0.0], [-1.0, 0.0, 0.0], [0.5, 0.0, 0.0]])
    vals = potential_integral(x, tri[None])[:, 0]
    assert np.all(np.isfinite(vals))
    assert vals[0] == pytest.approx(subdivided_potential(x[0], tri, depth=8), rel=1e-3)
