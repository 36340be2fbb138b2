"""MUSIC localization of small scatterers and capacitance recovery.

The noiseless response matrix factors as ``4 pi F = H^* Bcal H`` with
``H[m, l] = exp(i k theta_l . z_m)`` and ``Bcal = B^{-1}`` the Foldy
scattering matrix, so ``range(F) = span{phi_{z_m}}`` where
``phi_z = exp(-i k theta . z)`` is the steering vector. A sampling point is a
scatterer location exactly when its steering vector has no component in the
noise subspace.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np
from scipy.ndimage import maximum_filter

from .directions import DegreeTooSmall, DirectionSet, gauss_legendre_directions
from .foldy import ResponseMatrix, helmholtz_green

__all__ = [
    "DirectionSet",
    "DegreeTooSmall",
    "gauss_legendre_directions",
    "SubspaceSplit",
    "GridSpec",
    "ImagingGrid",
    "MusicResult",
    "RankDeficientAmbiguity",
    "EmptyGrid",
    "IllConditionedH",
    "NoPeaks",
    "steering_vector",
    "steering_matrix",
    "add_noise",
    "split_subspaces",
    "pseudospectrum",
    "find_peaks",
    "recover_capacitances",
    "music",
]

logger = logging.getLogger(__name__)

FOUR_PI = 4.0 * math.pi
AMBIGUITY_GAP = 2.0
MAX_H_CONDITION = 1e8


class RankDeficientAmbiguity(ValueError):
    """No singular-value gap larger than a factor of two; pass ``m_hint``."""

    def __init__(self, message, singular_values):
        super().__init__(message)
        self.singular_values = singular_values


class EmptyGrid(ValueError):
    pass


class IllConditionedH(np.linalg.LinAlgError):
    pass


class NoPeaks(ValueError):
    """The pseudospectrum has no strict local maximum on the grid."""


def _matrix(F) -> np.ndarray:
    return F.F if isinstance(F, ResponseMatrix) else np.asarray(F)


def steering_matrix(points: np.ndarray, dirs: DirectionSet, kappa: float) -> np.ndarray:
    """Steering vectors as rows: ``out[p, n] = exp(-i k theta_n . z_p)``."""
    return np.exp(-1j * kappa * np.atleast_2d(points) @ dirs.directions.T)


def steering_vector(z, dirs: DirectionSet, kappa: float) -> np.ndarray:
    return steering_matrix(np.asarray(z, dtype=float), dirs, kappa)[0]


def add_noise(F: ResponseMatrix, snr_db: Optional[float], seed: int) -> ResponseMatrix:
    """Add complex Gaussian noise with ``||E||_F / ||F||_F = 10**(-snr_db/20)``.

    ``snr_db=None`` or ``inf`` leaves the data untouched. So 20 dB is 10%
    noise and 30 dB about 3.2%.
    """
    if snr_db is None or math.isinf(snr_db):
        return ResponseMatrix(F.F.copy(), F.dirs, F.kappa, None, None)
    if math.isnan(snr_db):
        raise ValueError("snr_db must not be NaN")
    rng = np.random.default_rng(seed)
    E = rng.standard_normal(F.F.shape) + 1j * rng.standard_normal(F.F.shape)
    E *= 10.0 ** (-snr_db / 20.0) * np.linalg.norm(F.F) / np.linalg.norm(E)
    return ResponseMatrix(F.F + E, F.dirs, F.kappa, float(snr_db), int(seed))


@dataclass(frozen=True, eq=False)
class SubspaceSplit:
    singular_values: np.ndarray
    m: int
    noise_basis: np.ndarray
    signal_basis: np.ndarray
    mode: str  # "hint" or "gap"


def split_subspaces(F, m_hint: Optional[int] = None) -> SubspaceSplit:
    """SVD of ``F`` and its split into signal and noise subspaces.

    The signal dimension is ``m_hint`` when given, otherwise the index of the
    largest ratio ``s_k / s_{k+1}``.
    """
    A = _matrix(F)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"response matrix must be square, got {A.shape}")
    N = A.shape[0]
    U, s, _ = np.linalg.svd(A)
    if m_hint is not None:
        if not 1 <= m_hint <= N - 1:
            raise ValueError(f"m_hint must be in [1, {N - 1}], got {m_hint}")
        m, mode = int(m_hint), "hint"
    else:
        with np.errstate(divide="ignore", invalid="ignore"):
            gaps = s[:-1] / s[1:]
        gaps = np.where(np.isnan(gaps), 1.0, gaps)
        m = int(np.argmax(gaps)) + 1
        if not gaps[m - 1] > AMBIGUITY_GAP:
            raise RankDeficientAmbiguity(
                f"largest singular-value gap {gaps[m - 1]:.3g} is below {AMBIGUITY_GAP}; "
                "supply the number of scatterers", s)
        mode = "gap"
    return SubspaceSplit(s, m, U[:, m:], U[:, :m], mode)


@dataclass(frozen=True)
class GridSpec:
    """Axis-aligned sampling box; ``lo``/``hi`` are scalars or 3-vectors."""

    lo: Union[float, Sequence[float]]
    hi: Union[float, Sequence[float]]
    step: Union[float, Sequence[float]]

    def axes(self):
        lo = np.broadcast_to(np.asarray(self.lo, dtype=float), (3,))
        hi = np.broadcast_to(np.asarray(self.hi, dtype=float), (3,))
        h = np.broadcast_to(np.asarray(self.step, dtype=float), (3,))
        if np.any(h <= 0):
            raise EmptyGrid("grid step must be positive")
        if np.any(hi <= lo):
            raise EmptyGrid("grid box is degenerate")
        # node count rounded so that an exact multiple of the step includes hi
        return [lo[i] + h[i] * np.arange(int(math.floor((hi[i] - lo[i]) / h[i] + 1e-9)) + 1)
                for i in range(3)]


@dataclass(frozen=True, eq=False)
class ImagingGrid:
    axes: list
    values: np.ndarray          # shape (nx, ny, nz)
    peaks: np.ndarray           # shape (K, 3), strongest first
    peak_values: np.ndarray

    @property
    def points(self) -> np.ndarray:
        X, Y, Z = np.meshgrid(*self.axes, indexing="ij")
        return np.column_stack([X.ravel(), Y.ravel(), Z.ravel()])


def find_peaks(values: np.ndarray, count: int):
    """Indices of the ``count`` largest strict local maxima over the
    26-neighbourhood (out-of-grid neighbours ignored)."""
    footprint = np.ones((3, 3, 3), dtype=bool)
    footprint[1, 1, 1] = False
    neigh = maximum_filter(values, footprint=footprint, mode="constant", cval=-np.inf)
    idx = np.argwhere(values > neigh)
    order = np.argsort(-values[tuple(idx.T)], kind="stable")
    return idx[order[:count]]


def _refine(values: np.ndarray, idx: np.ndarray, axes) -> np.ndarray:
    """Per-axis parabolic interpolation of a peak position."""
    out = np.empty(3)
    for ax in range(3):
        i = idx[ax]
        h = axes[ax][1] - axes[ax][0] if len(axes[ax]) > 1 else 0.0
        out[ax] = axes[ax][i]
        if 0 < i < len(axes[ax]) - 1:
            lo, hi = idx.copy(), idx.copy()
            lo[ax] -= 1
            hi[ax] += 1
            f0, fm, fp = values[tuple(idx)], values[tuple(lo)], values[tuple(hi)]
            denom = fm - 2 * f0 + fp
            if denom < 0:
                out[ax] += 0.5 * h * (fm - fp) / denom
    return out


def pseudospectrum(split: SubspaceSplit, dirs: DirectionSet, kappa: float, grid: GridSpec,
                   n_peaks: Optional[int] = None, refine: bool = False,
                   chunk: int = 8192) -> ImagingGrid:
    """MUSIC pseudospectrum ``1 / (||W^* phi_z|| / sqrt(N))`` on a grid."""
    axes = grid.axes()
    shape = tuple(len(a) for a in axes)
    if 0 in shape:
        raise EmptyGrid("grid has no nodes")
    X, Y, Z = np.meshgrid(*axes, indexing="ij")
    pts = np.column_stack([X.ravel(), Y.ravel(), Z.ravel()])
    W = split.noise_basis
    N = W.shape[0]
    norms = np.empty(len(pts))
    for start in range(0, len(pts), chunk):
        phi = steering_matrix(pts[start:start + chunk], dirs, kappa)
        norms[start:start + chunk] = np.linalg.norm(phi @ W.conj(), axis=1)
    with np.errstate(divide="ignore"):
        values = (math.sqrt(N) / norms).reshape(shape)
    values = np.where(np.isfinite(values), values, np.finfo(float).max)
    count = split.m if n_peaks is None else n_peaks
    idx = find_peaks(values, count)
    if refine:
        peaks = np.array([_refine(values, i, axes) for i in idx]).reshape(-1, 3)
    else:
        peaks = np.array([[axes[k][i[k]] for k in range(3)] for i in idx]).reshape(-1, 3)
    return ImagingGrid(axes, values, peaks, values[tuple(idx.T)] if len(idx) else np.empty(0))


@dataclass(frozen=True, eq=False)
class MusicResult:
    """Recovered locations and capacitances.

    ``capacitances`` are complex; for data generated by the model they are
    real and positive up to noise. ``offdiag_misfit`` compares the recovered
    off-diagonal of ``B`` with ``-Phi_k`` at the recovered locations.
    """

    locations: np.ndarray
    capacitances: np.ndarray
    radii: np.ndarray
    scattering_matrix: np.ndarray
    h_condition: float
    offdiag_misfit: float
    singular_values: Optional[np.ndarray] = field(default=None)

    def to_dict(self) -> dict:
        out = {
            "locations": self.locations.tolist(),
            "capacitances": [{"re": float(c.real), "im": float(c.imag)} for c in self.capacitances],
            "radii": self.radii.tolist(),
            "h_condition": self.h_condition,
            "offdiag_misfit": self.offdiag_misfit,
        }
        if self.singular_values is not None:
            out["singular_values"] = np.asarray(self.singular_values).tolist()
        return out


def recover_capacitances(F, locations, dirs: DirectionSet, kappa: float) -> MusicResult:
    """Recover capacitances from ``F`` given scatterer locations.

    ``Bcal = I_H H (4 pi F) H^* I_H`` with ``I_H = (H H^*)^{-1}``; the
    capacitances are ``-1 / diag(Bcal^{-1})`` and the radii of the
    equivalent spheres ``Re(C) / 4 pi``.
    """
    A = FOUR_PI * _matrix(F)
    z = np.atleast_2d(np.asarray(locations, dtype=float))
    if len(z) > A.shape[0]:
        raise IllConditionedH("more locations than directions")
    H = np.exp(1j * kappa * z @ dirs.directions.T)             # (M, N)
    HH = H @ H.conj().T
    cond = float(np.linalg.cond(HH))
    if not cond <= MAX_H_CONDITION:
        raise IllConditionedH(f"cond(H H^*) = {cond:.3g} exceeds {MAX_H_CONDITION:g}")
    I_H = np.linalg.inv(HH)
    Bcal = I_H @ H @ A @ H.conj().T @ I_H
    B = np.linalg.inv(Bcal)
    caps = -1.0 / np.diag(B)
    M = len(z)
    misfit = 0.0
    if M > 1:
        r = np.linalg.norm(z[:, None] - z[None, :], axis=-1)
        off = ~np.eye(M, dtype=bool)
        model = -helmholtz_green(kappa, r[off])
        misfit = float(np.max(np.abs(B[off] - model)) / np.max(np.abs(model)))
    return MusicResult(z, caps, caps.real / FOUR_PI, Bcal, cond, misfit)


def music(F: ResponseMatrix, grid: GridSpec, m_hint: Optional[int] = None,
          refine: bool = False):
    """Full pipeline: subspace split, grid scan, capacitance recovery at the
    peaks. Returns ``(ImagingGrid, MusicResult)``."""
    split = split_subspaces(F, m_hint)
    img = pseudospectrum(split, F.dirs, F.kappa, grid, refine=refine)
    if len(img.peaks) == 0:
        raise NoPeaks("pseudospectrum has no strict local maximum on the grid")
    if len(img.peaks) < split.m:
        logger.warning("only %d of %d peaks found on the grid", len(img.peaks), split.m)
    res = recover_capacitances(F, img.peaks, F.dirs, F.kappa)
    res = MusicResult(res.locations, res.capacitances, res.radii, res.scattering_matrix,
                      res.h_condition, res.offdiag_misfit, split.singular_values)
    return img, res
