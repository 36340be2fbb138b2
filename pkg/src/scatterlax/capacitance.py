"""Electrostatic capacitance of small bodies.

Convention: the capacitance carries the factor 4*pi, i.e. it is the total
charge of the density sigma solving

    int_{dB} sigma(s) / (4 pi |t - s|) ds = 1,   t on dB,

so a sphere of radius rho has capacitance ``4*pi*rho``.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .mesh import OpenSurface, TriMesh
from .quadrature import potential_matrix

__all__ = [
    "CapacitanceResult",
    "NonPositiveRadius",
    "SingularSystem",
    "OpenSurface",
    "sphere_capacitance",
    "mesh_capacitance",
    "radius_from_capacitance",
    "single_layer_matrix",
    "energy_integral",
    "factorize",
]

logger = logging.getLogger(__name__)

FOUR_PI = 4.0 * np.pi
MIN_TRIANGLES = 32


class NonPositiveRadius(ValueError):
    pass


class SingularSystem(np.linalg.LinAlgError):
    """The collocation matrix is numerically singular (degenerate mesh)."""


@dataclass(frozen=True)
class CapacitanceResult:
    """Outcome of :func:`mesh_capacitance`.

    ``density`` holds one value per triangle; ``residual`` is the maximum
    collocation misfit ``|S0 sigma - 1|``.
    """

    capacitance: float
    density: np.ndarray
    residual: float


def sphere_capacitance(radius: float) -> float:
    if not radius > 0:
        raise NonPositiveRadius(f"radius must be positive, got {radius!r}")
    return FOUR_PI * radius


def radius_from_capacitance(capacitance: float) -> float:
    """Radius of the sphere with the given capacitance."""
    if not capacitance > 0:
        raise NonPositiveRadius(f"capacitance must be positive, got {capacitance!r}")
    return capacitance / FOUR_PI


def single_layer_matrix(mesh: TriMesh) -> np.ndarray:
    """Centroid-collocation matrix of the Laplace single layer operator.

    Entry ``(t, s)`` is ``(1/4pi) int_{T_s} ds / |c_t - s|``, integrated in
    closed form (so the singular diagonal needs no special treatment).
    """
    return potential_matrix(mesh.centroids, mesh.corners) / FOUR_PI


def mesh_capacitance(mesh: TriMesh, check: bool = True) -> CapacitanceResult:
    """Capacitance of the body bounded by ``mesh``.

    Piecewise-constant density, collocation at triangle centroids and a dense
    LU solve.
    """
    if check:
        mesh.check_closed()
    if mesh.n_triangles < MIN_TRIANGLES:
        raise ValueError(f"need at least {MIN_TRIANGLES} triangles, got {mesh.n_triangles}")
    A = single_layer_matrix(mesh)
    ones = np.ones(mesh.n_triangles)
    lu = factorize(A)
    sigma = scipy.linalg.lu_solve(lu, ones)
    residual = float(np.max(np.abs(A @ sigma - ones)))
    cap = float(sigma @ mesh.areas)
    logger.debug("mesh capacitance %.10g on %d triangles (residual %.2e)", cap, mesh.n_triangles, residual)
    return CapacitanceResult(cap, sigma, residual)


def factorize(A: np.ndarray):
    """LU factors of ``A``; raises SingularSystem when ill-conditioned."""
    if not np.all(np.isfinite(A)):
        raise SingularSystem("matrix has non-finite entries")
    with warnings.catch_warnings():
        # exact zero pivots are reported through rcond below
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(A, check_finite=False)
    gecon = scipy.linalg.get_lapack_funcs("gecon", (lu,))
    rcond, info = gecon(lu, np.linalg.norm(A, 1), norm="1")
    if info != 0 or rcond < 1e3 * np.finfo(float).eps:
        raise SingularSystem(f"matrix numerically singular (reciprocal condition {rcond:.2e})")
    return lu, piv


def energy_integral(mesh: TriMesh) -> float:
    """``J = int int 1/|s - t| ds dt`` by the same quadrature as the solver.

    Enters the lower capacitance bound ``C >= 4 pi |dB|^2 / J``.
    """
    A = single_layer_matrix(mesh) * FOUR_PI
    return float(mesh.areas @ A.sum(axis=1))
