"""JSON interchange for measures, series, factorizations and triplets.

Floats are written with ``repr`` precision, so ``read(write(x))`` is bitwise
the canonical form of ``x``.  Complex numbers are ``[re, im]`` pairs.
"""

from __future__ import annotations

import json
from typing import Any

import numpy as np

from .ac_algebra import ACMeasure
from .banach_gfs import BanachGFS
from .errors import ParseError
from .factorization import CLK0Triplet, TaylorFactorization
from .lattice_gfs import LatticeGFS
from .measure_core import ComplexMeasure, GridDensity, SlabComponent, canonicalize


def _c(z) -> list:
    z = complex(z)
    return [float(z.real), float(z.imag)]


def _f(v) -> list:
    return [float(x) for x in np.asarray(v, dtype=float).reshape(-1)]


def _cplx(p) -> complex:
    if not (isinstance(p, (list, tuple)) and len(p) == 2):
        raise ParseError(f"expected [re, im], got {p!r}")
    z = complex(float(p[0]), float(p[1]))
    if not np.isfinite(z):
        raise ParseError(f"non-finite number {p!r}")
    return z


def _flist(v, size=None) -> np.ndarray:
    if not isinstance(v, list):
        raise ParseError(f"expected a list of numbers, got {type(v).__name__}")
    a = np.array([float(x) for x in v], dtype=float)
    if not np.all(np.isfinite(a)):
        raise ParseError("non-finite number in list")
    if size is not None and a.size != size:
        raise ParseError(f"expected {size} numbers, got {a.size}")
    return a


# ---------------------------------------------------------------- documents

def density_doc(d: GridDensity) -> dict:
    s = d.samples.reshape(-1)
    return {"origin": _f(d.origin), "h": float(d.h), "shape": [int(k) for k in d.shape],
            "samples": [[float(v.real), float(v.imag)] for v in s]}


def density_from_doc(doc: dict) -> GridDensity:
    shape = tuple(int(k) for k in doc["shape"])
    vals = np.array([_cplx(p) for p in doc["samples"]], dtype=complex)
    if vals.size != int(np.prod(shape)):
        raise ParseError("sample count does not match shape")
    return GridDensity(_flist(doc["origin"], len(shape)), float(doc["h"]), vals.reshape(shape))


def measure_doc(mu: ComplexMeasure) -> dict:
    m = canonicalize(mu)
    atoms = [{"x": _f(x), "w": _c(w)} for x, w in zip(m.locs, m.weights)]
    slabs = []
    for s in m.slabs:
        doc = {"U": _f(s.U), "q": int(s.q), "y": _f(s.y)}
        doc.update(density_doc(s.density))
        slabs.append(doc)
    return {"type": "measure", "n": m.n, "atoms": atoms, "slabs": slabs}


def measure_from_doc(doc: dict) -> ComplexMeasure:
    n = int(doc["n"])
    atoms = doc.get("atoms", [])
    locs = np.array([_flist(a["x"], n) for a in atoms]).reshape(-1, n)
    ws = np.array([_cplx(a["w"]) for a in atoms], dtype=complex)
    slabs = []
    for s in doc.get("slabs", []):
        U = _flist(s["U"], n * n).reshape(n, n)
        q = int(s["q"])
        slabs.append(SlabComponent(U, q, _flist(s.get("y", []), n - q), density_from_doc(s)))
    return canonicalize(ComplexMeasure(n, locs, ws, slabs))


def lattice_doc(mu: LatticeGFS) -> dict:
    return {"type": "lattice", "B": [_f(r) for r in mu.B],
            "coeffs": [{"k": [int(v) for v in k], "w": _c(w)} for k, w in zip(mu.ks, mu.ws)]}


def lattice_from_doc(doc: dict) -> LatticeGFS:
    B = np.array([_flist(r) for r in doc["B"]], dtype=float)
    if B.ndim != 2:
        raise ParseError("B must be an n x d matrix")
    coeffs = doc["coeffs"]
    ks = np.array([[int(v) for v in c["k"]] for c in coeffs], dtype=np.int64).reshape(-1, B.shape[1])
    ws = np.array([_cplx(c["w"]) for c in coeffs], dtype=complex)
    return LatticeGFS(B, ks, ws)


def banach_doc(F: BanachGFS) -> dict:
    coeffs = []
    for k, a in zip(F.ks, F.coeffs):
        coeffs.append({"k": [int(v) for v in k], "y": _f(F.Y @ k), "alpha": _c(a.alpha),
                       "density": density_doc(a.density)})
    return {"type": "banach_gfs", "q": 1, "r": F.r, "U": _f(F.U), "Y": [_f(r) for r in F.Y],
            "coeffs": coeffs}


def banach_from_doc(doc: dict) -> BanachGFS:
    if int(doc.get("q", 1)) != 1:
        raise ParseError("only q = 1 coefficient algebras are supported")
    r = int(doc["r"])
    Y = np.array([_flist(row) for row in doc["Y"]], dtype=float).reshape(r, -1)
    U = _flist(doc["U"], (r + 1) ** 2).reshape(r + 1, r + 1)
    ks, coeffs = [], []
    for c in doc["coeffs"]:
        ks.append([int(v) for v in c["k"]])
        coeffs.append(ACMeasure(_cplx(c["alpha"]), density_from_doc(c["density"])))
    return BanachGFS(Y, np.array(ks, dtype=np.int64), coeffs, U)


def factorization_doc(fac: TaylorFactorization) -> dict:
    doc = {"type": "factorization", "route": fac.route, "c": _c(fac.c), "gamma": _f(fac.gamma),
           "factors": [{"U": _f(U), "m": int(m)} for U, m in fac.factors],
           "nu": measure_doc(fac.nu), "h": float(fac.h), "residual": float(fac.residual)}
    if fac.lattice is not None:
        doc["lattice"] = lattice_doc(fac.lattice)
    return doc


def factorization_from_doc(doc: dict) -> TaylorFactorization:
    nu = measure_from_doc(doc["nu"])
    n = nu.n
    factors = tuple((_flist(f["U"], n * n).reshape(n, n), int(f["m"])) for f in doc.get("factors", []))
    lat = lattice_from_doc(doc["lattice"]) if "lattice" in doc else None
    return TaylorFactorization(_flist(doc["gamma"], n), factors, nu, _cplx(doc["c"]),
                               str(doc.get("route", "")), float(doc.get("residual", 0.0)), lat,
                               float(doc["h"]))


def clk0_doc(t: CLK0Triplet) -> dict:
    return {"type": "clk0", "c": _c(t.c), "gamma": _f(t.gamma), "nu0": measure_doc(t.nu0),
            "lambda": [{"u": _f(u), "m": int(m)} for u, m in t.lambda_atoms]}


def clk0_from_doc(doc: dict) -> CLK0Triplet:
    nu0 = measure_from_doc(doc["nu0"])
    lam = tuple((_flist(a["u"], nu0.n), int(a["m"])) for a in doc.get("lambda", []))
    return CLK0Triplet(_cplx(doc["c"]), _flist(doc["gamma"], nu0.n), nu0, lam)


_WRITERS = [
    (ComplexMeasure, measure_doc),
    (LatticeGFS, lattice_doc),
    (BanachGFS, banach_doc),
    (TaylorFactorization, factorization_doc),
    (CLK0Triplet, clk0_doc),
]
_READERS = {
    "measure": measure_from_doc,
    "lattice": lattice_from_doc,
    "banach_gfs": banach_from_doc,
    "factorization": factorization_from_doc,
    "clk0": clk0_from_doc,
}


def to_doc(obj) -> dict:
    for cls, fn in _WRITERS:
        if isinstance(obj, cls):
            return fn(obj)
    raise TypeError(f"no interchange form for {type(obj).__name__}")


def from_doc(doc: Any):
    if not isinstance(doc, dict):
        raise ParseError("document must be a JSON object")
    kind = doc.get("type", "measure")
    if kind not in _READERS:
        raise ParseError(f"unknown document type {kind!r}")
    try:
        return _READERS[kind](doc)
    except ParseError:
        raise
    except (KeyError, TypeError, ValueError) as e:
        raise ParseError(f"malformed {kind} document: {e!r}") from e


def dumps(obj) -> str:
    doc = obj if isinstance(obj, dict) else to_doc(obj)
    return json.dumps(doc, separators=(",", ":"), allow_nan=False) + "\n"


def loads(text: str):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"invalid JSON: {e}") from e
    return from_doc(doc)


def write(path, obj) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(obj))


def read(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return loads(fh.read())
    except OSError as e:
        raise ParseError(f"cannot read {path}: {e}") from e
