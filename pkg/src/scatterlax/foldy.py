"""Foldy-Lax point-scatterer model for many small sound-soft bodies.

Each body is replaced by a point charge ``Q_m`` at its center ``z_m``.  The
charges solve ``B Q = U^I`` with

    B_mm = -1 / C_m,      B_mj = -Phi_k(z_m, z_j)  (m != j),
    U^I_m = exp(i k z_m . theta),

where ``C_m`` is the capacitance and ``Phi_k(x, y) = exp(ik|x-y|)/(4 pi |x-y|)``.
The far-field pattern is

    U_inf(xhat, theta) = (1/4 pi) sum_m exp(-i k xhat . z_m) Q_m.

The ``1/4pi`` factor is the far-field coefficient of ``Phi_k``; with it a single
small sphere of radius ``rho`` scatters ``U_inf -> -rho``, matching the exact
sound-soft sphere. Inversion (``music``) only ever sees this global scalar.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Union

import numpy as np
import scipy.linalg

from .capacitance import SingularSystem, factorize
from .directions import DirectionSet
from .scene import Scene, compute_d

__all__ = [
    "FoldySystem",
    "ChargeVector",
    "ResponseMatrix",
    "MazyaReport",
    "SingularMatrix",
    "CoincidentCenters",
    "NotConverged",
    "helmholtz_green",
    "assemble",
    "solve_charges",
    "far_field",
    "response_matrix",
    "born_far_field",
    "verify_mazya_bound",
    "diag_dominance_margin",
    "jacobi_solve",
    "factorized_response",
]

FOUR_PI = 4.0 * math.pi
RESIDUAL_TOL = 1e-10


class SingularMatrix(np.linalg.LinAlgError):
    """The Foldy matrix is numerically singular; the scene probably violates
    the invertibility conditions (see ``scene.validate``)."""


class CoincidentCenters(ValueError):
    pass


class NotConverged(RuntimeError):
    pass


def helmholtz_green(kappa: float, r):
    """``exp(i kappa r) / (4 pi r)``."""
    r = np.asarray(r, dtype=float)
    return np.exp(1j * kappa * r) / (FOUR_PI * r)


@dataclass(frozen=True, eq=False)
class FoldySystem:
    """Assembled Foldy matrix ``B`` with the data it was built from.

    ``d`` is the minimum surface gap (``inf`` for one body); it only enters
    :func:`verify_mazya_bound`.
    """

    B: np.ndarray
    capacitances: np.ndarray
    centers: np.ndarray
    kappa: float
    d: float = math.inf

    @property
    def M(self) -> int:
        return len(self.capacitances)

    @cached_property
    def lu(self):
        try:
            return factorize(self.B)
        except SingularSystem as exc:
            raise SingularMatrix(str(exc)) from exc

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        """Solve ``B X = rhs`` (one or many right-hand sides) with one step
        of iterative refinement."""
        rhs = np.asarray(rhs, dtype=complex)
        X = scipy.linalg.lu_solve(self.lu, rhs)
        X += scipy.linalg.lu_solve(self.lu, rhs - self.B @ X)
        scale = np.max(np.abs(rhs), axis=0)
        res = np.max(np.abs(self.B @ X - rhs), axis=0)
        if np.any(res > RESIDUAL_TOL * np.maximum(scale, np.finfo(float).tiny)):
            raise SingularMatrix(f"solve residual {np.max(res / scale):.2e} exceeds {RESIDUAL_TOL}")
        return X

    @cached_property
    def inverse(self) -> np.ndarray:
        """The scattering matrix ``B^{-1}``."""
        return self.solve(np.eye(self.M, dtype=complex))


@dataclass(frozen=True)
class ChargeVector:
    Q: np.ndarray
    incident_direction: np.ndarray
    residual: float


@dataclass(frozen=True, eq=False)
class ResponseMatrix:
    """Far-field samples ``F[j, l] = U_inf(theta_j, theta_l)``: row is the
    observation direction, column the incidence direction."""

    F: np.ndarray
    dirs: DirectionSet
    kappa: float
    snr_db: Optional[float] = None
    seed: Optional[int] = None

    @property
    def N(self) -> int:
        return self.F.shape[0]


def assemble(scene_or_centers: Union[Scene, np.ndarray], capacitances=None,
             kappa: Optional[float] = None, d: Optional[float] = None) -> FoldySystem:
    """Build the Foldy matrix from a :class:`Scene`, or from raw centers,
    capacitances and wavenumber."""
    if isinstance(scene_or_centers, Scene):
        scene = scene_or_centers
        z = scene.centers
        caps = scene.capacitances()
        kappa = scene.kappa
        d = compute_d(scene) if scene.M > 1 else math.inf
    else:
        z = np.atleast_2d(np.asarray(scene_or_centers, dtype=float))
        caps = np.asarray(capacitances, dtype=float).reshape(-1)
        if kappa is None:
            raise TypeError("kappa is required when assembling from arrays")
        if d is None:
            d = math.inf
    if len(caps) != len(z):
        raise ValueError("one capacitance per center required")
    if np.any(caps <= 0):
        raise ValueError("capacitances must be positive")
    r = np.linalg.norm(z[:, None, :] - z[None, :, :], axis=-1)
    off = ~np.eye(len(z), dtype=bool)
    if np.any(r[off] == 0.0):
        raise CoincidentCenters("two scatterers share a center")
    B = np.zeros((len(z), len(z)), dtype=complex)
    B[off] = -helmholtz_green(kappa, r[off])
    B[np.diag_indices(len(z))] = -1.0 / caps
    z.setflags(write=False)
    return FoldySystem(B, caps, z, float(kappa), float(d))


def incident(system: FoldySystem, theta) -> np.ndarray:
    """Plane-wave values ``exp(i k z_m . theta)``; columns follow ``theta`` rows."""
    theta = np.atleast_2d(theta)
    return np.exp(1j * system.kappa * system.centers @ theta.T)


def solve_charges(system: FoldySystem, theta) -> ChargeVector:
    theta = np.asarray(theta, dtype=float)
    u = incident(system, theta)[:, 0]
    Q = system.solve(u)
    res = float(np.max(np.abs(system.B @ Q - u)) / np.max(np.abs(u)))
    return ChargeVector(Q, theta, res)


def far_field(system: FoldySystem, Q, xhat):
    """Far-field pattern for charges ``Q`` at one or many observation
    directions."""
    q = Q.Q if isinstance(Q, ChargeVector) else np.asarray(Q)
    xhat = np.asarray(xhat, dtype=float)
    phase = np.exp(-1j * system.kappa * np.atleast_2d(xhat) @ system.centers.T)
    out = phase @ q / FOUR_PI
    return out[0] if xhat.ndim == 1 else out


def response_matrix(scene: Union[Scene, FoldySystem], dirs: DirectionSet) -> ResponseMatrix:
    """Foldy-Lax response matrix over ``dirs`` (single LU factorization)."""
    system = scene if isinstance(scene, FoldySystem) else assemble(scene)
    H = incident(system, dirs.directions)             # (M, N)
    Q = system.solve(H)                               # charges, one column per incidence
    F = H.conj().T @ Q / FOUR_PI
    return ResponseMatrix(F, dirs, system.kappa)


def factorized_response(system: FoldySystem, dirs: DirectionSet) -> np.ndarray:
    """``H^* B^{-1} H / 4pi`` built explicitly from the inverse matrix."""
    H = incident(system, dirs.directions)
    return H.conj().T @ system.inverse @ H / FOUR_PI


def born_far_field(scene: Union[Scene, FoldySystem], xhat, theta) -> complex:
    """Single-scattering far field ``-(1/4pi) sum_m C_m exp(ik(theta - xhat).z_m)``."""
    if isinstance(scene, Scene):
        z, caps, k = scene.centers, scene.capacitances(), scene.kappa
    else:
        z, caps, k = scene.centers, scene.capacitances, scene.kappa
    phase = np.exp(1j * k * z @ (np.asarray(theta, float) - np.asarray(xhat, float)))
    return complex(-np.sum(caps * phase) / FOUR_PI)


def diag_dominance_margin(system: FoldySystem) -> float:
    """``max_m sum_{j != m} C_m / |z_m - z_j|``; below ``4 pi`` the matrix is
    strictly diagonally dominant."""
    if system.M == 1:
        return 0.0
    z = system.centers
    r = np.linalg.norm(z[:, None, :] - z[None, :, :], axis=-1)
    np.fill_diagonal(r, np.inf)
    return float(np.max(system.capacitances * np.sum(1.0 / r, axis=1)))


@dataclass(frozen=True)
class MazyaReport:
    """``holds`` is ``None`` when the preconditions are not met."""

    holds: Optional[bool]
    lhs: float
    rhs_bound: float
    t: float

    @property
    def applicable(self) -> bool:
        return self.holds is not None


def _min_cos(system: FoldySystem) -> float:
    if system.M == 1:
        return 1.0
    z = system.centers
    r = np.linalg.norm(z[:, None, :] - z[None, :, :], axis=-1)
    off = ~np.eye(system.M, dtype=bool)
    return float(np.min(np.cos(system.kappa * r[off])))


def verify_mazya_bound(system: FoldySystem, rhs) -> MazyaReport:
    """Check the weighted energy bound on the solution of ``B Q = rhs``:

        sum |Q_m|^2 / C_m <= 4 (1 - 3 t max C / (5 pi d))^-2 sum |rhs_m|^2 C_m,

    with ``t = min_{j != m} cos(k |z_m - z_j|)``. Applicable when
    ``max C < 5 pi d / 3`` and ``t >= 0``.
    """
    rhs = np.asarray(rhs, dtype=complex).reshape(-1)
    caps = system.capacitances
    t = _min_cos(system)
    cmax = float(caps.max())
    nan = float("nan")
    if not (cmax < 5.0 * math.pi * system.d / 3.0 and t >= 0.0):
        return MazyaReport(None, nan, nan, t)
    Q = system.solve(rhs)
    lhs = float(np.sum(np.abs(Q) ** 2 / caps))
    factor = 1.0 - 3.0 * t * cmax / (5.0 * math.pi * system.d) if math.isfinite(system.d) else 1.0
    bound = float(4.0 * factor ** -2 * np.sum(np.abs(rhs) ** 2 * caps))
    return MazyaReport(bool(lhs <= bound), lhs, bound, t)


def jacobi_solve(system: FoldySystem, rhs, tol: float = 1e-12, maxiter: int = 200):
    """Jacobi iteration for ``B Q = rhs``. Returns ``(Q, iterations)``.

    Converges whenever :func:`diag_dominance_margin` is below ``4 pi``.
    """
    rhs = np.asarray(rhs, dtype=complex)
    diag = np.diag(system.B)
    off = system.B - np.diag(diag)
    Q = rhs / diag
    for it in range(1, maxiter + 1):
        new = (rhs - off @ Q) / diag
        step = np.max(np.abs(new - Q))
        Q = new
        if step <= tol * max(np.max(np.abs(Q)), np.finfo(float).tiny):
            return Q, it
    raise NotConverged(f"Jacobi did not converge in {maxiter} iterations")
