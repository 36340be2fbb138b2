"""Effective-medium scaling study: ``M = a^-s`` spheres of diameter ``a``
with surface gap ``d = a^t``, compared against the boundary element reference."""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass

import numpy as np

from .bem import approximation_error
from .directions import gauss_legendre_directions
from .scene import Scene, SceneError, compute_d

__all__ = ["MAX_STUDY_SCATTERERS", "TooManyScatterers", "ScalingRow", "lattice_scene", "scaling_study"]

logger = logging.getLogger(__name__)

MAX_STUDY_SCATTERERS = 30


class TooManyScatterers(SceneError):
    pass


def lattice_scene(a: float, t: float, s: float, kappa: float, kappa_max=None) -> Scene:
    """``round(a^-s)`` spheres of diameter ``a`` filling a cubic lattice in
    lexicographic order; neighbours are ``a + a^t`` apart centre to centre.
    The full lattice is centred at the origin."""
    M = max(1, int(round(a ** -s)))
    if M > MAX_STUDY_SCATTERERS:
        raise TooManyScatterers(f"a={a}, s={s} gives M={M} > {MAX_STUDY_SCATTERERS}")
    n = 1
    while n ** 3 < M:
        n += 1
    spacing = a + a ** t
    ijk = np.array([(i, j, k) for i in range(n) for j in range(n) for k in range(n)][:M], dtype=float)
    centers = (ijk - (n - 1) / 2.0) * spacing
    return Scene.spheres(centers, a / 2.0, kappa=kappa, kappa_max=kappa_max)


@dataclass(frozen=True)
class ScalingRow:
    a: float
    M: int
    d: float
    err: float
    budget: float


def scaling_study(t: float, s: float, a_list, kappa: float = 1.0, level: int = 2,
                  d_gl: int = 5) -> list:
    dirs = gauss_legendre_directions(d_gl)
    rows = []
    for a in a_list:
        scene = lattice_scene(a, t, s, kappa)
        d = compute_d(scene) if scene.M > 1 else math.inf
        res = approximation_error(scene, dirs, level)
        logger.info("a=%g M=%d err=%.4e budget=%.4e", a, scene.M, res.max_abs_err, res.budget)
        rows.append(ScalingRow(float(a), scene.M, d, res.max_abs_err, res.budget))
    return rows


def rows_as_dicts(rows) -> list:
    return [asdict(r) for r in rows]
