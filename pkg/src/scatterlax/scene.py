"""Scatterer configurations and their geometric validity conditions.

A :class:`Scene` is a set of small sound-soft bodies ``D_m = eps B_m + z_m``
probed at wavenumber ``kappa``.  ``a`` is the largest body diameter and ``d``
the smallest surface-to-surface gap; the Foldy-Lax approximation is
controlled by how small ``a`` and ``a/d`` are.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, replace
from itertools import combinations
from pathlib import Path
from typing import Optional, Union

import numpy as np
from scipy.spatial import cKDTree

from .capacitance import mesh_capacitance, sphere_capacitance
from .mesh import TriMesh, load_mesh

__all__ = [
    "Sphere",
    "MeshShape",
    "Scatterer",
    "Scene",
    "Thresholds",
    "ValidityReport",
    "SceneError",
    "SingleScatterer",
    "CapacitanceUnavailable",
    "compute_a",
    "compute_d",
    "validate",
    "error_budget",
    "scene_from_dict",
    "scene_to_dict",
    "load_scene",
    "save_scene",
]

FOUR_PI = 4.0 * math.pi
MAZYA_FACTOR = 5.0 * math.pi / 3.0


class SceneError(ValueError):
    pass


class SingleScatterer(SceneError):
    """``d`` is undefined for a one-body scene."""


class CapacitanceUnavailable(SceneError):
    pass


@dataclass(frozen=True)
class Sphere:
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise SceneError(f"sphere radius must be positive, got {self.radius!r}")

    @property
    def diameter(self) -> float:
        return 2.0 * self.radius


@dataclass(frozen=True, eq=False)
class MeshShape:
    """Reference body ``B`` (a closed mesh around the origin) scaled by ``scale``."""

    mesh: TriMesh
    scale: float
    path: Optional[str] = None

    def __post_init__(self):
        if not self.scale > 0:
            raise SceneError(f"mesh scale must be positive, got {self.scale!r}")

    @property
    def diameter(self) -> float:
        return self.scale * self.mesh.diameter


Shape = Union[Sphere, MeshShape]


@dataclass(frozen=True)
class Scatterer:
    center: tuple
    shape: Shape
    capacitance: Optional[float] = None

    def __post_init__(self):
        c = tuple(float(x) for x in self.center)
        if len(c) != 3:
            raise SceneError(f"center must have three coordinates, got {self.center!r}")
        object.__setattr__(self, "center", c)
        if self.capacitance is not None and not self.capacitance > 0:
            raise SceneError(f"capacitance override must be positive, got {self.capacitance!r}")

    def diameter(self) -> float:
        return self.shape.diameter

    def surface_points(self) -> np.ndarray:
        """Vertices of the placed mesh (mesh shapes only)."""
        return self.shape.mesh.vertices * self.shape.scale + np.asarray(self.center)

    def resolved_capacitance(self) -> float:
        if self.capacitance is not None:
            return float(self.capacitance)
        if isinstance(self.shape, Sphere):
            return sphere_capacitance(self.shape.radius)
        raise CapacitanceUnavailable(
            f"mesh scatterer at {self.center} has no capacitance; call Scene.with_capacitances()"
        )


@dataclass(frozen=True)
class Scene:
    scatterers: tuple
    kappa: float
    kappa_max: float
    d_max: float = math.inf

    def __post_init__(self):
        object.__setattr__(self, "scatterers", tuple(self.scatterers))
        if not self.scatterers:
            raise SceneError("a scene needs at least one scatterer")
        if not self.kappa >= 0:
            raise SceneError(f"kappa must be non-negative, got {self.kappa!r}")
        if not self.kappa_max > 0:
            raise SceneError("kappa_max must be positive")
        if self.kappa > self.kappa_max:
            raise SceneError(f"kappa={self.kappa} exceeds kappa_max={self.kappa_max}")
        if not self.d_max > 0:
            raise SceneError("d_max must be positive")
        if self.M >= 2:
            d = compute_d(self)
            if not d > 0:
                raise SceneError(f"scatterers overlap or touch (d = {d:.3g})")
            if d > self.d_max:
                raise SceneError(f"d = {d:.6g} exceeds d_max = {self.d_max}")

    @classmethod
    def spheres(cls, centers, radii, kappa: float, kappa_max: Optional[float] = None,
                d_max: float = math.inf) -> "Scene":
        centers = np.atleast_2d(np.asarray(centers, dtype=float))
        radii = np.broadcast_to(np.asarray(radii, dtype=float), (len(centers),))
        scs = tuple(Scatterer(tuple(c), Sphere(float(r))) for c, r in zip(centers, radii))
        if kappa_max is None:
            kappa_max = max(kappa, 1.0)
        return cls(scs, float(kappa), float(kappa_max), d_max)

    @property
    def M(self) -> int:
        return len(self.scatterers)

    @property
    def centers(self) -> np.ndarray:
        return np.array([s.center for s in self.scatterers])

    def capacitances(self) -> np.ndarray:
        return np.array([s.resolved_capacitance() for s in self.scatterers])

    def all_spheres(self) -> bool:
        return all(isinstance(s.shape, Sphere) for s in self.scatterers)

    def with_capacitances(self) -> "Scene":
        """Copy with every missing mesh capacitance computed numerically."""
        cache: dict = {}
        out = []
        for s in self.scatterers:
            if s.capacitance is None and isinstance(s.shape, MeshShape):
                key = id(s.shape.mesh)
                if key not in cache:
                    cache[key] = mesh_capacitance(s.shape.mesh).capacitance
                s = replace(s, capacitance=s.shape.scale * cache[key])
            out.append(s)
        return replace(self, scatterers=tuple(out))

    def translated(self, v) -> "Scene":
        v = np.asarray(v, dtype=float)
        return replace(self, scatterers=tuple(
            replace(s, center=tuple(np.asarray(s.center) + v)) for s in self.scatterers))

    def with_kappa(self, kappa: float) -> "Scene":
        return replace(self, kappa=float(kappa), kappa_max=max(self.kappa_max, float(kappa)))


def _pair_distance(s: Scatterer, t: Scatterer) -> float:
    if isinstance(s.shape, Sphere) and isinstance(t.shape, Sphere):
        gap = np.linalg.norm(np.subtract(s.center, t.center))
        return float(gap - s.shape.radius - t.shape.radius)
    if isinstance(s.shape, Sphere):
        s, t = t, s
    ps = s.surface_points()
    if isinstance(t.shape, Sphere):
        return float(np.min(np.linalg.norm(ps - np.asarray(t.center), axis=1)) - t.shape.radius)
    dist, _ = cKDTree(t.surface_points()).query(ps)
    return float(dist.min())


def compute_a(scene: Scene) -> float:
    return max(s.diameter() for s in scene.scatterers)


def compute_d(scene: Scene) -> float:
    """Minimum surface-to-surface distance between distinct bodies.

    Exact for spheres; for meshes it is the minimum over mesh vertices.
    """
    if scene.M < 2:
        raise SingleScatterer("d is undefined for a single scatterer")
    return min(_pair_distance(s, t) for s, t in combinations(scene.scatterers, 2))


@dataclass(frozen=True)
class Thresholds:
    """User-tunable constants of the validity conditions.

    ``a0`` defaults to ``1 / kappa_max`` when left as ``None``.
    """

    a0: Optional[float] = None
    c0: float = 0.1
    c2: float = 0.05
    c_slp: float = 0.05

    def resolve(self, scene: Scene) -> "Thresholds":
        if self.a0 is None:
            return replace(self, a0=1.0 / scene.kappa_max)
        return self


@dataclass(frozen=True)
class ValidityReport:
    a: float
    d: float
    M: int
    regime_sqrt: bool
    regime_linear: bool
    regime_slp: bool
    size_ok: bool
    cos_condition: float
    capacitance_gap: float
    diag_dominance: float
    mazya_ok: bool
    dominance_ok: bool
    a0: float
    c0: float
    c2: float
    c_slp: float

    def to_dict(self) -> dict:
        out = asdict(self)
        if math.isinf(self.d):
            out["d"] = "inf"
        return out


def _center_distances(scene: Scene) -> np.ndarray:
    z = scene.centers
    return np.linalg.norm(z[:, None, :] - z[None, :, :], axis=-1)


def validate(scene: Scene, thresholds: Optional[Thresholds] = None) -> ValidityReport:
    """Evaluate every validity and invertibility predicate for ``scene``."""
    th = (thresholds or Thresholds()).resolve(scene)
    caps = scene.capacitances()
    a = compute_a(scene)
    M = scene.M
    if M == 1:
        d = math.inf
        cos_t = 1.0
        dominance = 0.0
        regime_sqrt = regime_linear = regime_slp = True
    else:
        d = compute_d(scene)
        r = _center_distances(scene)
        off = ~np.eye(M, dtype=bool)
        cos_t = float(np.min(np.cos(scene.kappa * r[off])))
        inv_r = np.where(off, 1.0 / np.where(off, r, 1.0), 0.0)
        dominance = float(np.max(caps * inv_r.sum(axis=1)))
        regime_sqrt = math.sqrt(M - 1) * a / d <= th.c0
        regime_linear = (M - 1) * a / d <= th.c2
        regime_slp = (M - 1) * a / d ** 2 <= th.c_slp
    gap = float(caps.max() / (MAZYA_FACTOR * d)) if M > 1 else 0.0
    return ValidityReport(
        a=a,
        d=d,
        M=M,
        regime_sqrt=bool(regime_sqrt),
        regime_linear=bool(regime_linear),
        regime_slp=bool(regime_slp),
        size_ok=bool(a <= th.a0),
        cos_condition=cos_t,
        capacitance_gap=gap,
        diag_dominance=dominance,
        mazya_ok=bool(gap < 1.0 and cos_t >= 0.0),
        dominance_ok=bool(dominance < FOUR_PI),
        a0=th.a0,
        c0=th.c0,
        c2=th.c2,
        c_slp=th.c_slp,
    )


def error_budget(scene: Scene) -> float:
    """Size of the Foldy-Lax remainder with all constants set to one.

    ``M k a^2 + M(M-1)(k a^3/d + a^3/d^2) + M(M-1)^2 (a/d)(k a^3/d + a^3/d^2)``.
    A diagnostic for slope studies, not a rigorous bound.
    """
    M, k, a = scene.M, scene.kappa, compute_a(scene)
    budget = M * k * a ** 2
    if M > 1:
        d = compute_d(scene)
        pair = k * a ** 3 / d + a ** 3 / d ** 2
        budget += M * (M - 1) * pair + M * (M - 1) ** 2 * (a / d) * pair
    return budget


# ---------------------------------------------------------------------------
# JSON
# ---------------------------------------------------------------------------

def scene_from_dict(data: dict, base_dir: Union[str, Path, None] = None) -> Scene:
    base = Path(base_dir) if base_dir is not None else Path(".")
    meshes: dict = {}
    scs = []
    for i, entry in enumerate(data["scatterers"]):
        shape = entry["shape"]
        kind = shape.get("type")
        if kind == "sphere":
            sh: Shape = Sphere(float(shape["radius"]))
        elif kind == "mesh":
            path = shape["path"]
            full = Path(path) if Path(path).is_absolute() else base / path
            if full not in meshes:
                meshes[full] = load_mesh(full)
            sh = MeshShape(meshes[full], float(shape["scale"]), path=str(path))
        else:
            raise SceneError(f"scatterer {i}: unknown shape type {kind!r}")
        cap = entry.get("capacitance")
        scs.append(Scatterer(tuple(entry["center"]), sh, None if cap is None else float(cap)))
    kappa = float(data["kappa"])
    return Scene(
        tuple(scs),
        kappa=kappa,
        kappa_max=float(data.get("kappa_max", max(kappa, 1.0))),
        d_max=float(data.get("d_max", math.inf)),
    )


def scene_to_dict(scene: Scene) -> dict:
    out = []
    for s in scene.scatterers:
        if isinstance(s.shape, Sphere):
            shape = {"type": "sphere", "radius": s.shape.radius}
        else:
            shape = {"type": "mesh", "path": s.shape.path, "scale": s.shape.scale}
        entry = {"center": list(s.center), "shape": shape}
        if s.capacitance is not None:
            entry["capacitance"] = s.capacitance
        out.append(entry)
    return {
        "kappa": scene.kappa,
        "kappa_max": scene.kappa_max,
        "d_max": "inf" if math.isinf(scene.d_max) else scene.d_max,
        "scatterers": out,
    }


def load_scene(path) -> Scene:
    path = Path(path)
    data = json.loads(path.read_text(encoding="utf-8"))
    if data.get("d_max") == "inf":
        data["d_max"] = math.inf
    return scene_from_dict(data, base_dir=path.parent)


def save_scene(scene: Scene, path) -> None:
    Path(path).write_text(json.dumps(scene_to_dict(scene), indent=2) + "\n", encoding="utf-8")
