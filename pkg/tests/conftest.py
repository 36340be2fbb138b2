import math

import numpy as np
import pytest

from scatterlax.directions import gauss_legendre_directions
from scatterlax.scene import Scene

FIG2_CENTERS = np.array([
    [0.0, 0.0, 0.0],
    [1.5, 1.5, 1.5],
    [1.5, 1.5, -1.5],
    [-1.5, -1.5, 1.5],
    [-1.5, -1.5, -1.5],
])


@pytest.fixture(scope="session")
def fig2_scene():
    return Scene.spheres(FIG2_CENTERS, 0.5, kappa=1.0)


@pytest.fixture(scope="session")
def dirs5():
    return gauss_legendre_directions(5)


def random_admissible_scene(rng, max_m=10, min_m=1):
    """Random sphere scene with ``max C < 5 pi d / 3`` and
    ``min cos(k |z_m - z_j|) >= 0``."""
    while True:
        M = int(rng.integers(min_m, max_m + 1))
        z = rng.uniform(-1.0, 1.0, (M, 3)) * rng.uniform(0.3, 3.0)
        if M == 1:
            return Scene.spheres(z, rng.uniform(0.05, 0.5), kappa=rng.uniform(0.0, 2.0), kappa_max=2.0)
        r = np.linalg.norm(z[:, None] - z[None], axis=-1)
        off = ~np.eye(M, dtype=bool)
        rmin, rmax = r[off].min(), r[off].max()
        if rmin < 1e-2:
            continue
        rho = rng.uniform(0.1, 1.0, M) * 0.3 * rmin
        d = min(r[i, j] - rho[i] - rho[j] for i in range(M) for j in range(M) if i != j)
        if not 4 * math.pi * rho.max() < 5 * math.pi * d / 3:
            continue
        kappa = rng.uniform(0.0, 1.0) * math.pi / (2 * rmax)
        return Scene.spheres(z, rho, kappa=kappa, kappa_max=max(kappa, 1.0))


def pytest_terminal_summary(terminalreporter):
    lines = []
    for key in ("passed", "failed"):
        for rep in terminalreporter.stats.get(key, []):
            for name, value in getattr(rep, "user_properties", []):
                if name == "criterion":
                    lines.append((value, rep.outcome))
    if lines:
        terminalreporter.section("acceptance criteria")
        for value, outcome in sorted(lines):
            terminalreporter.write_line(f"[{'PASS' if outcome == 'passed' else 'FAIL'}] {value}")
