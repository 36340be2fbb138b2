"""Command-line front end.

Exit codes: 0 success, 1 I/O or parse error, 2 scene refused by the validity
checks (override with ``--force``), 3 ambiguous signal dimension (pass ``--m``).
"""

from __future__ import annotations

import argparse
import contextlib
import json
import logging
import os
import sys
import time
from pathlib import Path

from . import __version__
from .bem import oracle_response_matrix
from .capacitance import SingularSystem, mesh_capacitance
from .directions import gauss_legendre_directions
from .foldy import response_matrix
from .io import (ResponseFileError, atomic_write_text, fmt, read_response_csv,
                 write_grid_csv, write_json, write_response_csv)
from .mesh import load_mesh
from .music import GridSpec, IllConditionedH, NoPeaks, RankDeficientAmbiguity, add_noise, music
from .scene import Scene, SceneError, Thresholds, load_scene, validate
from .study import scaling_study

logger = logging.getLogger("scatterlax")

EXIT_OK, EXIT_IO, EXIT_REFUSED, EXIT_AMBIGUOUS = 0, 1, 2, 3

# options whose values may legitimately start with '-'
_NEGATIVE_VALUE_OPTS = {"--grid", "--a"}


class CliError(Exception):
    def __init__(self, message, code=EXIT_IO):
        super().__init__(message)
        self.code = code


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_IO, f"{self.prog}: error: {message}\n")


def _floats(text: str) -> list:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _thresholds(args) -> Thresholds:
    return Thresholds(a0=args.a0, c0=args.c0, c2=args.c2, c_slp=args.c_slp)


def _load(path) -> Scene:
    try:
        return load_scene(path).with_capacitances()
    except (OSError, ValueError, KeyError, TypeError, json.JSONDecodeError) as exc:
        raise CliError(f"cannot load scene {path}: {exc}")


def _manifest(args, outputs, started, **extra) -> None:
    params = {k: v for k, v in vars(args).items() if k not in ("func", "command")}
    data = {
        "command": args.command,
        "scene": params.pop("scene", None),
        "parameters": params,
        "seed": params.get("seed"),
        "tool_version": __version__,
        "outputs": [str(p) for p in outputs],
        "wall_clock_s": round(time.time() - started, 3),
        **extra,
    }
    write_json(Path(outputs[0]).with_name(Path(outputs[0]).name + ".manifest.json"), data)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_validate(args) -> int:
    scene = _load(args.scene)
    report = validate(scene, _thresholds(args)).to_dict()
    text = json.dumps(report, indent=2, sort_keys=True)
    print(text)
    if args.out:
        atomic_write_text(args.out, text + "\n")
    return EXIT_OK


def cmd_forward(args) -> int:
    started = time.time()
    scene = _load(args.scene)
    report = validate(scene, _thresholds(args))
    print(json.dumps(report.to_dict(), sort_keys=True), file=sys.stderr)
    forced = False
    if not (report.mazya_ok or report.dominance_ok):
        if not args.force:
            print("refusing: neither the Mazya nor the diagonal-dominance condition holds "
                  "(use --force to run anyway)", file=sys.stderr)
            return EXIT_REFUSED
        forced = True
    F = response_matrix(scene, gauss_legendre_directions(args.dgl))
    if args.snr_db is not None:
        F = add_noise(F, args.snr_db, args.seed)
    side = write_response_csv(args.out, F)
    _manifest(args, [args.out, side], started, forced=forced)
    return EXIT_OK


def cmd_oracle(args) -> int:
    started = time.time()
    scene = _load(args.scene)
    F = oracle_response_matrix(scene, gauss_legendre_directions(args.dgl), args.level)
    side = write_response_csv(args.out, F)
    _manifest(args, [args.out, side], started)
    return EXIT_OK


def cmd_invert(args) -> int:
    started = time.time()
    outs = [p for p in args.out.split(",") if p]
    if len(outs) != 2:
        raise CliError("--out expects GRID.csv,RESULT.json")
    if len(args.grid) != 3:
        raise CliError("--grid expects LO,HI,STEP")
    try:
        F = read_response_csv(args.farfield, d_gl=args.dgl, kappa=args.kappa)
    except (OSError, ResponseFileError) as exc:
        raise CliError(str(exc))
    lo, hi, step = args.grid
    try:
        grid, result = music(F, GridSpec(lo, hi, step), m_hint=args.m, refine=args.refine)
    except RankDeficientAmbiguity as exc:
        print(f"ambiguous signal dimension: {exc}", file=sys.stderr)
        return EXIT_AMBIGUOUS
    except (NoPeaks, IllConditionedH) as exc:
        print(f"cannot localize scatterers: {exc}", file=sys.stderr)
        return EXIT_AMBIGUOUS
    write_grid_csv(outs[0], grid)
    payload = result.to_dict()
    payload["signal_dimension"] = len(result.locations)
    payload["selection_mode"] = "hint" if args.m is not None else "gap"
    payload["peak_values"] = grid.peak_values.tolist()
    write_json(outs[1], payload)
    _manifest(args, outs, started, selection_mode=payload["selection_mode"])
    return EXIT_OK


def cmd_capacitance(args) -> int:
    started = time.time()
    try:
        mesh = load_mesh(args.mesh)
    except (OSError, ValueError) as exc:
        raise CliError(f"cannot read mesh {args.mesh}: {exc}")
    if args.scale != 1.0:
        mesh = mesh.scaled(args.scale)
    try:
        res = mesh_capacitance(mesh)
    except (ValueError, SingularSystem) as exc:
        raise CliError(f"cannot compute capacitance of {args.mesh}: {exc}")
    payload = {
        "capacitance": res.capacitance,
        "equivalent_radius": res.capacitance / (4 * 3.141592653589793),
        "residual": res.residual,
        "n_triangles": mesh.n_triangles,
        "area": mesh.total_area,
        "density": res.density.tolist() if args.density else None,
    }
    write_json(args.out, payload)
    _manifest(args, [args.out], started)
    return EXIT_OK


def cmd_scaling_study(args) -> int:
    started = time.time()
    rows = scaling_study(args.t, args.s, args.a, kappa=args.kappa, level=args.level, d_gl=args.dgl)
    lines = ["a,M,d,err,budget"]
    lines += [f"{fmt(r.a)},{r.M},{fmt(r.d)},{fmt(r.err)},{fmt(r.budget)}" for r in rows]
    atomic_write_text(args.out, "\n".join(lines) + "\n")
    _manifest(args, [args.out], started)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _add_thresholds(p):
    g = p.add_argument_group("validity thresholds")
    g.add_argument("--a0", type=float, default=None, help="size threshold (default 1/kappa_max)")
    g.add_argument("--c0", type=float, default=0.1)
    g.add_argument("--c2", type=float, default=0.05)
    g.add_argument("--c-slp", dest="c_slp", type=float, default=0.05)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="scatterlax", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("validate", help="print the validity report of a scene")
    p.add_argument("--scene", required=True)
    p.add_argument("--out")
    _add_thresholds(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("forward", help="Foldy-Lax response matrix")
    p.add_argument("--scene", required=True)
    p.add_argument("--dgl", type=int, default=5)
    p.add_argument("--out", required=True)
    p.add_argument("--snr-db", dest="snr_db", type=float)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--force", action="store_true")
    _add_thresholds(p)
    p.set_defaults(func=cmd_forward)

    p = sub.add_parser("oracle", help="boundary element reference response matrix")
    p.add_argument("--scene", required=True)
    p.add_argument("--level", type=int, default=3)
    p.add_argument("--dgl", type=int, default=5)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("invert", help="MUSIC localization and capacitance recovery")
    p.add_argument("--farfield", required=True)
    p.add_argument("--dgl", type=int)
    p.add_argument("--kappa", type=float)
    p.add_argument("--grid", type=_floats, required=True, help="LO,HI,STEP")
    p.add_argument("--m", type=int)
    p.add_argument("--refine", action="store_true", help="parabolic sub-grid peak refinement")
    p.add_argument("--out", required=True, help="GRID.csv,RESULT.json")
    p.set_defaults(func=cmd_invert)

    p = sub.add_parser("capacitance", help="capacitance of a closed OFF/STL mesh")
    p.add_argument("--mesh", required=True)
    p.add_argument("--scale", type=float, default=1.0)
    p.add_argument("--density", action="store_true", help="include the per-triangle density")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_capacitance)

    p = sub.add_parser("scaling-study", help="Foldy-Lax error along d = a^t, M = a^-s")
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--s", type=float, required=True)
    p.add_argument("--a", type=_floats, required=True)
    p.add_argument("--kappa", type=float, default=1.0)
    p.add_argument("--level", type=int, default=2)
    p.add_argument("--dgl", type=int, default=5)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_scaling_study)
    return parser


def _join_negative_values(argv):
    out, it = [], iter(argv)
    for tok in it:
        if tok in _NEGATIVE_VALUE_OPTS:
            nxt = next(it, None)
            out.append(tok if nxt is None else f"{tok}={nxt}")
        else:
            out.append(tok)
    return out


def _thread_limit():
    n = os.environ.get("SCATTERLAX_THREADS")
    if not n:
        return contextlib.nullcontext()
    from threadpoolctl import threadpool_limits
    return threadpool_limits(limits=int(n))


def main(argv=None) -> int:
    argv = _join_negative_values(sys.argv[1:] if argv is None else list(argv))
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        with _thread_limit():
            return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except SceneError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
