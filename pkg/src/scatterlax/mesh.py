"""Triangulated closed surfaces: generation, I/O and topology checks.

Meshes are stored as flat (piecewise-planar) triangles with counter-clockwise
vertex order when viewed from outside, so that the right-hand normal points
out of the enclosed body.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np
from scipy.spatial import ConvexHull
from scipy.spatial.distance import pdist

__all__ = [
    "TriMesh",
    "OpenSurface",
    "LevelOutOfRange",
    "icosphere",
    "cube",
    "read_off",
    "write_off",
    "read_stl",
    "write_stl",
    "load_mesh",
]


class OpenSurface(ValueError):
    """Raised when a mesh is not a closed, consistently oriented surface."""


class LevelOutOfRange(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class TriMesh:
    """Flat-triangle surface mesh.

    Attributes
    ----------
    vertices : np.ndarray, shape (V, 3)
    triangles : np.ndarray of int, shape (F, 3)
    """

    vertices: np.ndarray
    triangles: np.ndarray

    def __post_init__(self):
        v = np.ascontiguousarray(self.vertices, dtype=float)
        t = np.ascontiguousarray(self.triangles, dtype=np.int64)
        if v.ndim != 2 or v.shape[1] != 3:
            raise ValueError(f"vertices must have shape (V, 3), got {v.shape}")
        if t.ndim != 2 or t.shape[1] != 3:
            raise ValueError(f"triangles must have shape (F, 3), got {t.shape}")
        if t.size and (t.min() < 0 or t.max() >= len(v)):
            raise ValueError("triangle index out of range")
        v.setflags(write=False)
        t.setflags(write=False)
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "triangles", t)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    @cached_property
    def corners(self) -> np.ndarray:
        """Triangle corner coordinates, shape (F, 3, 3)."""
        return self.vertices[self.triangles]

    @cached_property
    def centroids(self) -> np.ndarray:
        return self.corners.mean(axis=1)

    @cached_property
    def _cross(self) -> np.ndarray:
        c = self.corners
        return np.cross(c[:, 1] - c[:, 0], c[:, 2] - c[:, 0])

    @cached_property
    def areas(self) -> np.ndarray:
        return 0.5 * np.linalg.norm(self._cross, axis=1)

    @cached_property
    def normals(self) -> np.ndarray:
        return self._cross / (2.0 * self.areas[:, None])

    @property
    def total_area(self) -> float:
        return float(self.areas.sum())

    @cached_property
    def edge_lengths(self) -> np.ndarray:
        """Longest edge of each triangle."""
        c = self.corners
        e = np.stack([c[:, 1] - c[:, 0], c[:, 2] - c[:, 1], c[:, 0] - c[:, 2]], axis=1)
        return np.linalg.norm(e, axis=2).max(axis=1)

    @cached_property
    def diameter(self) -> float:
        pts = self.vertices
        if len(pts) > 64:
            try:
                pts = pts[ConvexHull(pts).vertices]
            except Exception:  # degenerate (flat) point sets
                pass
        return float(pdist(pts).max())

    @property
    def volume(self) -> float:
        c = self.corners
        return float(np.einsum("ij,ij->i", c[:, 0], np.cross(c[:, 1], c[:, 2])).sum() / 6.0)

    def euler_characteristic(self) -> int:
        return len(self.vertices) - len(self._edges()) + self.n_triangles

    def _edges(self) -> np.ndarray:
        t = self.triangles
        e = np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
        return np.unique(np.sort(e, axis=1), axis=0)

    def check_closed(self) -> None:
        """Raise OpenSurface unless every edge is shared by exactly two
        triangles that traverse it in opposite directions."""
        if self.n_triangles == 0:
            raise OpenSurface("mesh has no triangles")
        if np.any(self.areas <= 0.0):
            raise OpenSurface(f"{int(np.sum(self.areas <= 0))} degenerate triangle(s)")
        t = self.triangles
        directed = np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
        uniq, counts = np.unique(directed, axis=0, return_counts=True)
        if np.any(counts > 1):
            raise OpenSurface("inconsistent orientation: a directed edge appears twice")
        fwd = {tuple(e) for e in uniq}
        missing = sum((b, a) not in fwd for a, b in fwd)
        if missing:
            raise OpenSurface(f"{missing} boundary edge(s): surface is not closed")

    def scaled(self, factor: float) -> "TriMesh":
        return TriMesh(self.vertices * factor, self.triangles)

    def translated(self, offset) -> "TriMesh":
        return TriMesh(self.vertices + np.asarray(offset, dtype=float), self.triangles)

    def flipped(self) -> "TriMesh":
        return TriMesh(self.vertices, self.triangles[:, ::-1])


# ---------------------------------------------------------------------------
# Generators
# ---------------------------------------------------------------------------

def _icosahedron():
    p = (1.0 + 5.0 ** 0.5) / 2.0
    v = np.array([
        [-1, p, 0], [1, p, 0], [-1, -p, 0], [1, -p, 0],
        [0, -1, p], [0, 1, p], [0, -1, -p], [0, 1, -p],
        [p, 0, -1], [p, 0, 1], [-p, 0, -1], [-p, 0, 1],
    ], dtype=float)
    f = np.array([
        [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
        [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
        [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
        [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
    ])
    return v / np.linalg.norm(v, axis=1, keepdims=True), f


def icosphere(level: int, center=(0.0, 0.0, 0.0), radius: float = 1.0) -> TriMesh:
    """Icosahedron refined ``level`` times by 4-way splitting, with every
    vertex projected onto the exact sphere. Has ``20 * 4**level`` triangles."""
    if not 0 <= level <= 6:
        raise LevelOutOfRange(f"level must be in [0, 6], got {level}")
    if radius <= 0:
        raise ValueError("radius must be positive")
    verts, faces = _icosahedron()
    verts = list(verts)
    for _ in range(level):
        midpoint = {}

        def mid(i, j):
            key = (i, j) if i < j else (j, i)
            k = midpoint.get(key)
            if k is None:
                m = verts[i] + verts[j]
                verts.append(m / np.linalg.norm(m))
                k = midpoint[key] = len(verts) - 1
            return k

        new = []
        for a, b, c in faces:
            ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
            new += [[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]
        faces = np.array(new)
    v = np.asarray(verts) * radius + np.asarray(center, dtype=float)
    return TriMesh(v, faces)


def cube(n: int, side: float = 1.0, center=(0.0, 0.0, 0.0)) -> TriMesh:
    """Axis-aligned cube surface with each face split into ``n x n`` squares
    (two triangles each)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    g = np.linspace(-0.5, 0.5, n + 1)
    verts, faces, index = [], [], {}

    def vid(p):
        key = tuple(np.round(p, 12))
        if key not in index:
            index[key] = len(verts)
            verts.append(p)
        return index[key]

    for axis in range(3):
        for sign in (-1.0, 1.0):
            u, w = [k for k in range(3) if k != axis]
            for i in range(n):
                for j in range(n):
                    quad = []
                    for di, dj in ((0, 0), (1, 0), (1, 1), (0, 1)):
                        p = np.zeros(3)
                        p[axis] = 0.5 * sign
                        p[u], p[w] = g[i + di], g[j + dj]
                        quad.append(vid(p))
                    a, b, c, d = quad
                    tri = [[a, b, c], [a, c, d]]
                    # (u, w, axis) is right-handed iff the permutation is even
                    right_handed = (u, w, axis) in ((0, 1, 2), (1, 2, 0), (2, 0, 1))
                    if (sign > 0) != right_handed:
                        tri = [t[::-1] for t in tri]
                    faces += tri
    v = np.asarray(verts) * side + np.asarray(center, dtype=float)
    return TriMesh(v, np.asarray(faces))


# ---------------------------------------------------------------------------
# File formats
# ---------------------------------------------------------------------------

def read_off(path) -> TriMesh:
    """Read an ASCII OFF file. Polygons with more than three corners are
    fan-triangulated."""
    tokens = []
    for line in Path(path).read_text().splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            tokens.extend(line.split())
    if not tokens or not tokens[0].upper().endswith("OFF"):
        raise ValueError(f"{path}: missing OFF header")
    pos = 1
    nv, nf = int(tokens[pos]), int(tokens[pos + 1])
    pos += 3
    verts = np.array(tokens[pos:pos + 3 * nv], dtype=float).reshape(nv, 3)
    pos += 3 * nv
    faces = []
    for _ in range(nf):
        k = int(tokens[pos])
        idx = [int(x) for x in tokens[pos + 1:pos + 1 + k]]
        pos += 1 + k
        faces += [[idx[0], idx[i], idx[i + 1]] for i in range(1, k - 1)]
    return TriMesh(verts, np.asarray(faces, dtype=np.int64).reshape(-1, 3))


def write_off(mesh: TriMesh, path) -> None:
    lines = ["OFF", f"{len(mesh.vertices)} {mesh.n_triangles} 0"]
    lines += [" ".join(f"{x:.17g}" for x in v) for v in mesh.vertices]
    lines += ["3 " + " ".join(str(i) for i in t) for t in mesh.triangles]
    Path(path).write_text("\n".join(lines) + "\n")


def read_stl(path) -> TriMesh:
    """Read a binary STL file (little-endian), merging coincident vertices."""
    data = Path(path).read_bytes()
    if len(data) < 84:
        raise ValueError(f"{path}: too short for binary STL")
    (n,) = struct.unpack_from("<I", data, 80)
    if len(data) < 84 + 50 * n:
        raise ValueError(f"{path}: truncated STL, header declares {n} triangles")
    rec = np.dtype([("normal", "<f4", 3), ("v", "<f4", (3, 3)), ("attr", "<u2")])
    tris = np.frombuffer(data, dtype=rec, count=n, offset=84)["v"].astype(float)
    pts = tris.reshape(-1, 3)
    uniq, inverse = np.unique(pts, axis=0, return_inverse=True)
    return TriMesh(uniq, inverse.reshape(-1, 3))


def write_stl(mesh: TriMesh, path) -> None:
    rec = np.dtype([("normal", "<f4", 3), ("v", "<f4", (3, 3)), ("attr", "<u2")])
    out = np.zeros(mesh.n_triangles, dtype=rec)
    out["normal"] = mesh.normals
    out["v"] = mesh.corners
    header = b"scatterlax binary STL".ljust(80, b" ")
    Path(path).write_bytes(header + struct.pack("<I", mesh.n_triangles) + out.tobytes())


def load_mesh(path) -> TriMesh:
    suffix = Path(path).suffix.lower()
    if suffix == ".off":
        return read_off(path)
    if suffix == ".stl":
        return read_stl(path)
    raise ValueError(f"unsupported mesh format: {suffix!r} (expected .off or .stl)")
