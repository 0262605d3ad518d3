"""Command-line front end: ``measure-algebra VERB FILE [FILE] [options]``.

Exit status: 0 on success, 2 when the answer is a mathematical negative
(refuted invertibility, no roots of all orders), 1 on any other failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from typing import Optional, Sequence

import numpy as np

from . import interchange as io
from .ac_algebra import ACMeasure, invert_ac, is_invertible_ac
from .banach_gfs import BanachGFS, check_invertible_banach_gfs, invert_banach_gfs_dominant
from .charfn import DEFAULT_DZ, DEFAULT_Z, cfgrid_csv, distinguished_log, logpath_csv, sample_cf_line, winding_index_1d
from .errors import HasSigmaFactors, MeasureAlgebraError, NotInvertible, ParseError, ZeroOnGrid
from .factorization import DEFAULT_TOL, TaylorFactorization, conv_power, factorize, to_clk0
from .lattice_gfs import (
    LatticeGFS,
    certify_invertible_lattice,
    exp_lattice,
    invert_lattice,
    lattice_from_measure,
)
from .measure_core import ComplexMeasure, canonicalize, convolve, exp_measure, project_line

VERBS = ("charfn", "convolve", "exp", "invert", "log", "index", "certify", "factorize", "clk0", "power", "project")
NEGATIVE = (NotInvertible, ZeroOnGrid, HasSigmaFactors)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ParseError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="measure-algebra", description="Convolution algebra of complex measures.")
    p.add_argument("verb", choices=VERBS)
    p.add_argument("inputs", nargs="+", help="interchange JSON file(s)")
    p.add_argument("--Z", type=float, default=None, help="half-width of CF line grids (default 64; 32 for invert)")
    p.add_argument("--dz", type=float, default=DEFAULT_DZ, help="CF line grid step (default 2^-6)")
    p.add_argument("--tol", type=float, default=None, help="tolerance (verb-specific default)")
    p.add_argument("--trunc", type=int, default=40, help="lattice inverse half-width (default 40)")
    p.add_argument("--grid", type=int, default=256, help="torus grid points per axis (default 256)")
    p.add_argument("--t", type=float, default=None, help="convolution power exponent")
    p.add_argument("--dir", default=None, help="comma-separated direction, normalized to unit length")
    p.add_argument("--out", default=None, help="output path (default stdout)")
    return p


def _direction(text: Optional[str], n: int) -> np.ndarray:
    if text is None:
        return np.eye(n)[0]
    try:
        a = np.array([float(v) for v in text.split(",")], dtype=float)
    except ValueError as e:
        raise ParseError(f"bad direction {text!r}") from e
    if a.size != n or not np.all(np.isfinite(a)) or not np.any(a):
        raise ParseError(f"direction must be {n} finite numbers, not all zero")
    return a / np.linalg.norm(a)


def _measure(obj) -> ComplexMeasure:
    if isinstance(obj, ComplexMeasure):
        return obj
    if isinstance(obj, LatticeGFS):
        return obj.to_measure()
    if isinstance(obj, BanachGFS):
        return obj.to_measure()
    raise ParseError(f"expected a measure document, got {type(obj).__name__}")


def _class(mu: ComplexMeasure) -> str:
    m = canonicalize(mu)
    if not m.slabs:
        return "lattice"
    if all(s.q == m.n for s in m.slabs):
        return "ac"
    return "mixed"


def _doc_text(doc: dict) -> str:
    return json.dumps(doc, separators=(",", ":"), allow_nan=False) + "\n"


def _f(v) -> list:
    return [float(x) for x in np.asarray(v, dtype=float).reshape(-1)]


def _finite(x: float):
    return float(x) if math.isfinite(x) else str(x)


# ---------------------------------------------------------------- verbs

def _charfn(args, objs):
    mu = _measure(objs[0])
    return cfgrid_csv(sample_cf_line(mu, _direction(args.dir, mu.n), args.Z, args.dz)), 0


def _log(args, objs):
    mu = _measure(objs[0])
    grid = sample_cf_line(mu, _direction(args.dir, mu.n), args.Z, args.dz)
    return logpath_csv(distinguished_log(grid)), 0


def _index(args, objs):
    mu = _measure(objs[0])
    grid = sample_cf_line(mu, _direction(args.dir, mu.n), args.Z, args.dz)
    return f"m={winding_index_1d(distinguished_log(grid))}\n", 0


def _convolve(args, objs):
    if len(objs) != 2:
        raise ParseError("convolve takes two inputs")
    return io.dumps(convolve(_measure(objs[0]), _measure(objs[1]))), 0


def _exp(args, objs):
    tol = args.tol if args.tol is not None else 1e-12
    if isinstance(objs[0], LatticeGFS):
        return io.dumps(exp_lattice(objs[0], tol=tol)), 0
    return io.dumps(exp_measure(_measure(objs[0]), tol=tol)), 0


def _invert(args, objs):
    obj = objs[0]
    mu = _measure(obj)
    kind = _class(mu)
    if kind == "lattice":
        lat = obj if isinstance(obj, LatticeGFS) else lattice_from_measure(mu)
        tol = args.tol if args.tol is not None else 1e-10
        cert = certify_invertible_lattice(lat, args.grid) if lat.d <= 3 else None
        if cert is not None and cert.status == "refuted":
            raise NotInvertible(f"torus polynomial vanishes at {cert.witness}")
        return io.dumps(invert_lattice(lat, args.trunc, tol)), 0
    if kind == "ac":
        tol = args.tol if args.tol is not None else 1e-6
        inv = invert_ac(ACMeasure.from_measure(mu), Z=args.Z, tol=tol)
        return io.dumps(inv.to_measure()), 0
    tol = args.tol if args.tol is not None else 1e-10
    return io.dumps(invert_banach_gfs_dominant(BanachGFS.from_measure(mu), tol=tol).to_measure()), 0


def _certify(args, objs):
    obj = objs[0]
    mu = _measure(obj)
    kind = _class(mu)
    if kind == "lattice":
        lat = obj if isinstance(obj, LatticeGFS) else lattice_from_measure(mu)
        c = certify_invertible_lattice(lat, args.grid)
        doc = {"type": "certificate", "class": "lattice", "status": c.status, "grid_min": c.grid_min,
               "lipschitz": c.lipschitz, "mesh": c.mesh, "lower_bound": c.lower_bound,
               "witness": _f(c.witness)}
        status = c.status
    elif kind == "ac":
        d = is_invertible_ac(ACMeasure.from_measure(mu))
        status = d.status
        doc = {"type": "certificate", "class": "ac", "status": d.status, "min_abs": d.min_abs,
               "witness": _f(d.argmin), "tail_ok": d.tail_ok, "note": d.note}
    else:
        d = check_invertible_banach_gfs(BanachGFS.from_measure(mu), grid_per_axis=args.grid)
        status = d.status
        doc = {"type": "certificate", "class": "mixed", "status": d.status,
               "min_abs": float(d.minima.min()), "lower_bound": float(d.lower_bounds.min()),
               "witness": {"w": _finite(d.worst[0]), "theta": _f(d.worst[1])}}
    return _doc_text(doc), 2 if status == "refuted" else 0


def _factorize(args, objs):
    tol = args.tol if args.tol is not None else DEFAULT_TOL
    return io.dumps(factorize(_measure(objs[0]), tol=tol, Z=args.Z, dz=args.dz, grid=args.grid)), 0


def _as_factorization(args, obj) -> TaylorFactorization:
    if isinstance(obj, TaylorFactorization):
        return obj
    tol = args.tol if args.tol is not None else DEFAULT_TOL
    return factorize(_measure(obj), tol=tol, Z=args.Z, dz=args.dz, grid=args.grid)


def _clk0(args, objs):
    return io.dumps(to_clk0(_as_factorization(args, objs[0]))), 0


def _power(args, objs):
    if args.t is None:
        raise ParseError("power needs --t")
    return io.dumps(conv_power(_as_factorization(args, objs[0]), args.t)), 0


def _project(args, objs):
    mu = _measure(objs[0])
    if args.dir is None:
        raise ParseError("project needs --dir")
    return io.dumps(project_line(_direction(args.dir, mu.n), mu)), 0


_HANDLERS = {
    "charfn": _charfn, "convolve": _convolve, "exp": _exp, "invert": _invert, "log": _log,
    "index": _index, "certify": _certify, "factorize": _factorize, "clk0": _clk0, "power": _power,
    "project": _project,
}


def run(argv: Optional[Sequence[str]] = None, stdout=None, stderr=None) -> int:
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    try:
        args = build_parser().parse_args(argv)
        if args.Z is None:
            args.Z = 32.0 if args.verb == "invert" else DEFAULT_Z
        objs = [io.read(p) for p in args.inputs]
        text, code = _HANDLERS[args.verb](args, objs)
    except NEGATIVE as e:
        stderr.write(f"{e.code}: {e}\n")
        return 2
    except MeasureAlgebraError as e:
        stderr.write(f"{e.code}: {e}\n")
        return 1
    except (OSError, ValueError, TypeError) as e:
        stderr.write(f"error: {e}\n")
        return 1
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        try:
            stdout.write(text)
        except BrokenPipeError:
            pass
    return code


def main(argv: Optional[Sequence[str]] = None) -> int:
    return run(argv)
