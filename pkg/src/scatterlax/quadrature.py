"""Integrals of the Laplace kernel over flat triangles.

The closed form used here is the classical edge-sum expression for the
potential of a uniform unit density on a planar triangle (Wilton, Rao,
Glisson, Schaubert, Al-Bundak & Butler, IEEE TAP 1984). It is exact for any
observation point, including points on the triangle itself.
"""

from __future__ import annotations

import numpy as np

__all__ = ["potential_integral", "potential_matrix", "subdivided_potential"]

_TINY = 1e-300


def potential_integral(points: np.ndarray, corners: np.ndarray) -> np.ndarray:
    """Return ``I[p, t] = int_{T_t} 1/|x_p - y| dS(y)``.

    Parameters
    ----------
    points : array, shape (P, 3)
        Observation points.
    corners : array, shape (T, 3, 3)
        Triangle vertices.
    """
    x = np.asarray(points, dtype=float)[:, None, :]          # (P, 1, 3)
    c = np.asarray(corners, dtype=float)[None, :, :, :]      # (1, T, 3, 3)
    cross = np.cross(c[..., 1, :] - c[..., 0, :], c[..., 2, :] - c[..., 0, :])
    n = cross / np.linalg.norm(cross, axis=-1, keepdims=True)  # (1, T, 3)
    h = np.einsum("ptk,ptk->pt", x - c[..., 0, :], np.broadcast_to(n, x.shape[:1] + n.shape[1:]))
    absh = np.abs(h)
    rho = x - h[..., None] * n                                 # projection onto plane

    total = np.zeros(h.shape)
    for i in range(3):
        pm = c[..., i, :]
        pp = c[..., (i + 1) % 3, :]
        edge = pp - pm
        length = np.linalg.norm(edge, axis=-1, keepdims=True)
        lvec = edge / length
        u = np.cross(lvec, n)                                  # outward in-plane edge normal
        t0 = np.einsum("ptk,ptk->pt", pm - rho, np.broadcast_to(u, rho.shape))
        lp = np.einsum("ptk,ptk->pt", pp - rho, np.broadcast_to(lvec, rho.shape))
        lm = np.einsum("ptk,ptk->pt", pm - rho, np.broadcast_to(lvec, rho.shape))
        r0sq = t0 * t0 + h * h
        rp = np.sqrt(lp * lp + r0sq)
        rm = np.sqrt(lm * lm + r0sq)
        # R + l evaluated without cancellation when l < 0
        fp = np.where(lp >= 0, rp + lp, r0sq / np.maximum(rp - lp, _TINY))
        fm = np.where(lm >= 0, rm + lm, r0sq / np.maximum(rm - lm, _TINY))
        with np.errstate(divide="ignore", invalid="ignore"):
            log_term = np.where(np.abs(t0) > 0, t0 * np.log(fp / fm), 0.0)
            atan_term = np.where(
                absh > 0,
                absh * (np.arctan(t0 * lp / (r0sq + absh * rp)) - np.arctan(t0 * lm / (r0sq + absh * rm))),
                0.0,
            )
        total += np.nan_to_num(log_term) - atan_term
    return total


def potential_matrix(points: np.ndarray, corners: np.ndarray, chunk: int = 512) -> np.ndarray:
    """:func:`potential_integral` evaluated in row blocks to bound memory."""
    points = np.asarray(points, dtype=float)
    out = np.empty((len(points), len(corners)))
    for start in range(0, len(points), chunk):
        stop = min(start + chunk, len(points))
        out[start:stop] = potential_integral(points[start:stop], corners)
    return out


def subdivided_potential(point, tri, depth: int = 6) -> float:
    """Brute-force midpoint-rule value of ``int_T 1/|x - y| dS`` on a
    ``4**depth`` uniform subdivision.

    Independent of :func:`potential_integral`; only used to check it. The
    point must not lie on the triangle.
    """
    tri = np.asarray(tri, dtype=float)
    n = 2 ** depth
    a, b, c = tri
    e1, e2 = (b - a) / n, (c - a) / n
    i, j = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    keep = i + j < n
    i, j = i[keep], j[keep]
    up = a + (i[:, None] + 1 / 3) * e1 + (j[:, None] + 1 / 3) * e2
    keep_down = i + j < n - 1
    down = a + (i[keep_down, None] + 2 / 3) * e1 + (j[keep_down, None] + 2 / 3) * e2
    cents = np.concatenate([up, down])
    area = 0.5 * np.linalg.norm(np.cross(e1, e2))
    return float(np.sum(area / np.linalg.norm(cents - np.asarray(point, dtype=float), axis=1)))
