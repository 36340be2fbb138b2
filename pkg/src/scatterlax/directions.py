"""Incidence/observation direction sets on the unit sphere."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

__all__ = ["DirectionSet", "DegreeTooSmall", "gauss_legendre_directions"]


class DegreeTooSmall(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class DirectionSet:
    """``N`` unit vectors, one per row. ``d_gl`` records the Gauss-Legendre
    degree the set was generated from (``N = 2 d_gl**2``), if any."""

    directions: np.ndarray
    d_gl: Optional[int] = None

    def __post_init__(self):
        v = np.array(self.directions, dtype=float, ndmin=2)
        if v.shape[1] != 3:
            raise ValueError("directions must have shape (N, 3)")
        v.setflags(write=False)
        object.__setattr__(self, "directions", v)

    @property
    def N(self) -> int:
        return len(self.directions)

    def __len__(self) -> int:
        return self.N


def gauss_legendre_directions(d_gl: int) -> DirectionSet:
    """Tensor grid of ``2 d_gl**2`` directions.

    Polar angles are ``arccos`` of the degree-``d_gl`` Gauss-Legendre nodes
    and azimuths are ``j pi / d_gl`` for ``j = 0 .. 2 d_gl - 1``. Ordering is
    polar-major.
    """
    if d_gl < 2:
        raise DegreeTooSmall(f"d_gl must be >= 2, got {d_gl}")
    nodes, _ = np.polynomial.legendre.leggauss(d_gl)
    phi = np.arccos(nodes)
    theta = np.arange(2 * d_gl) * np.pi / d_gl
    P, T = np.meshgrid(phi, theta, indexing="ij")
    P, T = P.ravel(), T.ravel()
    dirs = np.column_stack([np.cos(T) * np.sin(P), np.sin(T) * np.sin(P), np.cos(P)])
    return DirectionSet(dirs, d_gl=d_gl)
