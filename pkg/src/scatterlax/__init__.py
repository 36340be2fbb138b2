"""Foldy-Lax multiple scattering by small sound-soft bodies, a boundary
element reference solver, and MUSIC-based inversion."""

__version__ = "0.1.0"

from .capacitance import mesh_capacitance, radius_from_capacitance, sphere_capacitance
from .directions import DirectionSet, gauss_legendre_directions
from .foldy import (FoldySystem, ResponseMatrix, assemble, born_far_field, far_field,
                    response_matrix, solve_charges)
from .mesh import TriMesh, icosphere
from .scene import Scatterer, Scene, Sphere, MeshShape, Thresholds, compute_a, compute_d, validate

__all__ = [
    "__version__",
    "DirectionSet",
    "FoldySystem",
    "MeshShape",
    "ResponseMatrix",
    "Scatterer",
    "Scene",
    "Sphere",
    "Thresholds",
    "TriMesh",
    "assemble",
    "born_far_field",
    "compute_a",
    "compute_d",
    "far_field",
    "gauss_legendre_directions",
    "icosphere",
    "mesh_capacitance",
    "radius_from_capacitance",
    "response_matrix",
    "solve_charges",
    "sphere_capacitance",
    "validate",
]
