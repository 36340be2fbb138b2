"""File formats: response-matrix CSV with a JSON sidecar, imaging-grid CSV,
and atomic writes."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from pathlib import Path
from typing import Optional

import numpy as np

from .directions import gauss_legendre_directions
from .foldy import ResponseMatrix

__all__ = [
    "ResponseFileError",
    "fmt",
    "atomic_write_text",
    "write_json",
    "sidecar_path",
    "write_response_csv",
    "read_response_csv",
    "write_grid_csv",
]


class ResponseFileError(ValueError):
    pass


def fmt(x: float) -> str:
    """Scientific notation with 17 significant digits (round-trips doubles)."""
    return f"{x:.16e}"


def atomic_write_text(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _json_safe(obj):
    if isinstance(obj, float) and math.isinf(obj):
        return "inf" if obj > 0 else "-inf"
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, np.generic):
        return _json_safe(obj.item())
    return obj


def write_json(path, data) -> None:
    atomic_write_text(path, json.dumps(_json_safe(data), indent=2, sort_keys=True) + "\n")


def sidecar_path(csv_path) -> Path:
    p = Path(csv_path)
    return p.with_name(p.stem + ".meta.json")


def write_response_csv(path, F: ResponseMatrix) -> Path:
    """Write ``j,l,re,im`` rows (0-based, row-major) plus the sidecar JSON.
    Returns the sidecar path."""
    buf = io.StringIO()
    buf.write("j,l,re,im\n")
    N = F.N
    for j in range(N):
        row = F.F[j]
        for l in range(N):
            buf.write(f"{j},{l},{fmt(row[l].real)},{fmt(row[l].imag)}\n")
    atomic_write_text(path, buf.getvalue())
    meta = {"d_gl": F.dirs.d_gl, "kappa": F.kappa, "snr_db": F.snr_db, "seed": F.seed}
    side = sidecar_path(path)
    write_json(side, meta)
    return side


def read_response_csv(path, d_gl: Optional[int] = None, kappa: Optional[float] = None) -> ResponseMatrix:
    """Read a response matrix. ``d_gl`` and ``kappa`` default to the sidecar
    values; explicit values must agree with the sidecar when one exists."""
    path = Path(path)
    meta = {}
    side = sidecar_path(path)
    if side.exists():
        meta = json.loads(side.read_text(encoding="utf-8"))
    for name, given in (("d_gl", d_gl), ("kappa", kappa)):
        stored = meta.get(name)
        if given is not None and stored is not None and not math.isclose(float(given), float(stored)):
            raise ResponseFileError(f"{path}: {name}={given} disagrees with sidecar value {stored}")
    if d_gl is None:
        d_gl = meta.get("d_gl")
    if kappa is None:
        kappa = meta.get("kappa")
    if d_gl is None or kappa is None:
        raise ResponseFileError(f"{path}: d_gl and kappa are required (no sidecar found)")
    N = 2 * int(d_gl) ** 2
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["j", "l", "re", "im"]:
            raise ResponseFileError(f"{path}: expected header j,l,re,im, got {header}")
        rows = [r for r in reader if r]
    if len(rows) != N * N:
        raise ResponseFileError(
            f"{path}: found {len(rows)} data rows, expected {N * N} for d_gl={d_gl} (N={N})")
    F = np.full((N, N), np.nan, dtype=complex)
    try:
        for r in rows:
            j, l = int(r[0]), int(r[1])
            F[j, l] = complex(float(r[2]), float(r[3]))
    except (ValueError, IndexError) as exc:
        raise ResponseFileError(f"{path}: malformed row {r}: {exc}") from exc
    if np.any(np.isnan(F)):
        raise ResponseFileError(f"{path}: missing matrix entries")
    dirs = gauss_legendre_directions(int(d_gl))
    return ResponseMatrix(F, dirs, float(kappa), meta.get("snr_db"), meta.get("seed"))


def write_grid_csv(path, grid) -> None:
    buf = io.StringIO()
    buf.write("x,y,z,value\n")
    pts = grid.points
    vals = grid.values.ravel()
    for p, v in zip(pts, vals):
        buf.write(f"{fmt(p[0])},{fmt(p[1])},{fmt(p[2])},{fmt(v)}\n")
    atomic_write_text(path, buf.getvalue())
