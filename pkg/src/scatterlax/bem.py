"""Reference solver for sound-soft spheres.

Two independent ground truths for the Foldy-Lax model:

* a collocation boundary element solver for the coupled single-layer system

      sum_j int_{dD_j} Phi_k(s_m, s) sigma_j(s) ds = -U^i(s_m),  s_m on dD_m,

  on icosphere meshes, with piecewise-constant densities;
* the partial-wave series for one sound-soft sphere.

Kernel treatment inside one body: ``Phi_k = Phi_0 + (Phi_k - Phi_0)``. The
static part is integrated in closed form over each flat triangle, the smooth
remainder ``(exp(ikr) - 1)/(4 pi r)`` by the centroid rule (its value at
``r = 0`` is ``ik/4pi``). Between bodies the full kernel uses the centroid
rule.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.linalg
from scipy.special import eval_legendre, spherical_jn, spherical_yn

from .capacitance import SingularSystem, factorize
from .directions import DirectionSet
from .foldy import ResponseMatrix, response_matrix
from .mesh import TriMesh, icosphere
from .quadrature import potential_matrix
from .scene import Scene, SceneError, compute_a, error_budget

__all__ = [
    "BemSolution",
    "SlpOperator",
    "ApproximationError",
    "NonSphereScatterer",
    "SystemTooLarge",
    "ResonanceRisk",
    "SeriesNotConverged",
    "MAX_UNKNOWNS",
    "mesh_sphere",
    "solve_slp",
    "oracle_far_field",
    "oracle_response_matrix",
    "exact_sphere_far_field",
    "approximation_error",
]

logger = logging.getLogger(__name__)

FOUR_PI = 4.0 * math.pi
MAX_UNKNOWNS = 20_000
# first zero of J_{1/2} times (4 pi / 3)^{1/3}
RESONANCE_SIZE = (4.0 * math.pi / 3.0) ** (1.0 / 3.0) * math.pi


class NonSphereScatterer(SceneError):
    pass


class SystemTooLarge(SceneError):
    pass


class ResonanceRisk(SceneError):
    """Body too large for ``kappa_max``: an interior Dirichlet eigenvalue
    could be hit and the single-layer equation would lose uniqueness."""


class SeriesNotConverged(ArithmeticError):
    pass


def mesh_sphere(center, radius: float, level: int) -> TriMesh:
    return icosphere(level, center=center, radius=radius)


@lru_cache(maxsize=8)
def _unit_static_block(level: int) -> np.ndarray:
    m = icosphere(level)
    block = potential_matrix(m.centroids, m.corners)
    block.setflags(write=False)
    return block


@dataclass(frozen=True, eq=False)
class BemSolution:
    """Densities for one incident plane wave.

    ``densities[m]`` holds the per-triangle values on obstacle ``m``.
    """

    densities: list
    meshes: list
    kappa: float
    theta: np.ndarray
    level: int
    residual: float

    @property
    def size(self) -> int:
        return sum(len(s) for s in self.densities)

    def total_charges(self) -> np.ndarray:
        """``int sigma_m`` for every obstacle."""
        return np.array([s @ m.areas for s, m in zip(self.densities, self.meshes)])


class SlpOperator:
    """Assembled and factorized coupled single-layer system for a sphere scene."""

    def __init__(self, scene: Scene, level: int):
        if not scene.all_spheres():
            raise NonSphereScatterer("the reference solver handles spheres only")
        n_per = 20 * 4 ** level
        total = n_per * scene.M
        if total > MAX_UNKNOWNS:
            raise SystemTooLarge(f"{total} unknowns exceeds the limit of {MAX_UNKNOWNS}")
        a = compute_a(scene)
        if scene.kappa_max * a >= RESONANCE_SIZE:
            raise ResonanceRisk(
                f"a * kappa_max = {a * scene.kappa_max:.3f} >= {RESONANCE_SIZE:.3f}")
        self.scene = scene
        self.level = level
        self.kappa = scene.kappa
        self.meshes = [mesh_sphere(s.center, s.shape.radius, level) for s in scene.scatterers]
        self.centroids = np.concatenate([m.centroids for m in self.meshes])
        self.areas = np.concatenate([m.areas for m in self.meshes])
        self.offsets = np.arange(scene.M + 1) * n_per
        self.A = self._assemble()
        try:
            self.lu = factorize(self.A)
        except SingularSystem as exc:
            raise SingularSystem(f"boundary system singular: {exc}") from exc

    def _assemble(self) -> np.ndarray:
        k = self.kappa
        n = len(self.areas)
        A = np.empty((n, n), dtype=complex)
        static = _unit_static_block(self.level)
        off = self.offsets
        for m, sm in enumerate(self.scene.scatterers):
            rows = slice(off[m], off[m + 1])
            cm = self.centroids[rows]
            for j in range(self.scene.M):
                cols = slice(off[j], off[j + 1])
                r = np.linalg.norm(cm[:, None, :] - self.centroids[None, cols, :], axis=-1)
                w = self.areas[cols][None, :]
                if m == j:
                    with np.errstate(divide="ignore", invalid="ignore"):
                        smooth = np.where(r > 0, np.expm1(1j * k * r) / r, 1j * k)
                    A[rows, cols] = (sm.shape.radius * static + w * smooth) / FOUR_PI
                else:
                    A[rows, cols] = w * np.exp(1j * k * r) / (FOUR_PI * r)
        return A

    def solve(self, thetas: np.ndarray):
        """Densities (columns) for each incident direction (rows of ``thetas``)."""
        thetas = np.atleast_2d(thetas)
        rhs = -np.exp(1j * self.kappa * self.centroids @ thetas.T)
        sigma = scipy.linalg.lu_solve(self.lu, rhs)
        residual = float(np.max(np.abs(self.A @ sigma - rhs)) / np.max(np.abs(rhs)))
        return sigma, residual

    def far_field_operator(self, xhats: np.ndarray) -> np.ndarray:
        """Matrix mapping a stacked density vector to far-field values."""
        xhats = np.atleast_2d(xhats)
        return np.exp(-1j * self.kappa * xhats @ self.centroids.T) * self.areas[None, :] / FOUR_PI

    def split(self, sigma: np.ndarray) -> list:
        return [sigma[self.offsets[m]:self.offsets[m + 1]] for m in range(self.scene.M)]


def solve_slp(scene: Scene, theta, level: int) -> BemSolution:
    op = SlpOperator(scene, level)
    theta = np.asarray(theta, dtype=float)
    sigma, residual = op.solve(theta)
    return BemSolution(op.split(sigma[:, 0]), op.meshes, op.kappa, theta, level, residual)


def oracle_far_field(sol: BemSolution, xhat):
    """``(1/4pi) sum_m sum_t exp(-ik xhat . c_t) sigma_t |T_t|``."""
    xhat = np.asarray(xhat, dtype=float)
    x = np.atleast_2d(xhat)
    total = np.zeros(len(x), dtype=complex)
    for sigma, mesh in zip(sol.densities, sol.meshes):
        total += np.exp(-1j * sol.kappa * x @ mesh.centroids.T) @ (sigma * mesh.areas)
    total /= FOUR_PI
    return total[0] if xhat.ndim == 1 else total


def oracle_response_matrix(scene: Scene, dirs: DirectionSet, level: int) -> ResponseMatrix:
    """Reference response matrix: one factorization, ``N`` right-hand sides."""
    op = SlpOperator(scene, level)
    sigma, residual = op.solve(dirs.directions)
    logger.debug("oracle: %d unknowns, residual %.2e", len(op.areas), residual)
    F = op.far_field_operator(dirs.directions) @ sigma
    return ResponseMatrix(F, dirs, scene.kappa)


def _hankel_ratio(l: np.ndarray, x: float) -> np.ndarray:
    """``j_l(x) / h_l^(1)(x)``, computed as ``1 / (1 + i y_l/j_l)``."""
    j = spherical_jn(l, x)
    y = spherical_yn(l, x)
    with np.errstate(all="ignore"):
        q = y / j
        ratio = 1.0 / (1.0 + 1j * q)
    return np.where(np.isfinite(q) & (j != 0), ratio, 0.0)


def exact_sphere_far_field(radius: float, kappa: float, xhat, theta, lmax: int = 40):
    """Far-field pattern of a sound-soft sphere centred at the origin.

    ``U_inf = (i/k) sum_l (2l+1) j_l(k rho)/h_l(k rho) P_l(xhat . theta)``,
    normalised so that ``u_s ~ exp(ik|x|)/|x| U_inf``. Tends to ``-rho`` as
    ``k -> 0`` and returns exactly ``-rho`` at ``k = 0``.
    """
    if not radius > 0:
        raise ValueError("radius must be positive")
    if lmax > 60:
        raise ValueError("lmax must be <= 60")
    xhat = np.asarray(xhat, dtype=float)
    cos_angle = np.clip(np.atleast_2d(xhat) @ np.asarray(theta, dtype=float), -1.0, 1.0)
    if kappa == 0:
        out = np.full(cos_angle.shape, -radius, dtype=complex)
        return out[0] if xhat.ndim == 1 else out
    x = kappa * radius
    if x >= lmax / 2:
        raise SeriesNotConverged(f"k rho = {x:.3g} too large for lmax = {lmax}")
    l = np.arange(lmax + 1)
    coef = (2 * l + 1) * _hankel_ratio(l, x)
    terms = coef[:, None] * eval_legendre(l[:, None], cos_angle[None, :])
    total = (1j / kappa) * terms.sum(axis=0)
    last = np.abs(coef[-1]) / kappa
    if last > 1e-12 * np.max(np.abs(total)):
        raise SeriesNotConverged(f"last partial-wave term {last:.2e} not negligible")
    return total[0] if xhat.ndim == 1 else total


@dataclass(frozen=True)
class ApproximationError:
    max_abs_err: float
    rel_err: float
    budget: float
    n_unknowns: int


def approximation_error(scene: Scene, dirs: DirectionSet, level: int) -> ApproximationError:
    """Deviation of the Foldy-Lax response matrix from the boundary element
    reference, with the scene's error budget alongside."""
    ref = oracle_response_matrix(scene, dirs, level)
    approx = response_matrix(scene, dirs)
    diff = np.abs(approx.F - ref.F)
    err = float(diff.max())
    return ApproximationError(
        max_abs_err=err,
        rel_err=err / float(np.abs(ref.F).max()),
        budget=error_budget(scene),
        n_unknowns=20 * 4 ** level * scene.M,
    )
