"""Complex measures on R^n (n <= 3) as atoms plus gridded slab densities.

A slab is the image under an orthogonal frame ``U`` of a density on a
q-dimensional coordinate plane placed at offset ``y`` in the complementary
coordinates: the sample ``s_k`` of the density sits at ``U @ (s_k, y)``.
Densities are sampled on uniform grids and carry mass ``h**q * samples``;
every numerical routine treats them as that finite lattice measure, so the
transform of a slab is a rectangle-rule sum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import _numerics as nx
from .errors import (
    DimensionMismatch,
    GridMismatch,
    NotOrthogonal,
    SupportOverflow,
    UnsupportedFramePair,
    UnsupportedProductPair,
    UnsupportedProjection,
)

MAX_DIM = 3
DEFAULT_WINDOW = 32.0
ORTHO_TOL = 1e-12
# relative tolerance for two grids to count as the same lattice
ALIGN_TOL = 1e-9


def _frozen(a, dtype):
    a = np.array(a, dtype=dtype, copy=True)
    a.setflags(write=False)
    return a


def _nz(a):
    # fold -0.0 into +0.0 so byte keys agree
    return np.asarray(a, dtype=float) + 0.0


@dataclass(frozen=True, eq=False)
class GridDensity:
    """Density samples on the grid ``origin + h * k`` (k a multi-index)."""

    origin: np.ndarray
    h: float
    samples: np.ndarray

    def __post_init__(self):
        s = _frozen(self.samples, complex)
        o = _frozen(_nz(np.atleast_1d(self.origin)), float)
        if o.shape != (s.ndim,):
            raise ValueError(f"origin has {o.size} entries for a {s.ndim}-d sample array")
        if not (self.h > 0 and math.isfinite(self.h)):
            raise ValueError("grid spacing must be positive")
        object.__setattr__(self, "samples", s)
        object.__setattr__(self, "origin", o)
        object.__setattr__(self, "h", float(self.h))

    @property
    def q(self) -> int:
        return self.samples.ndim

    @property
    def shape(self):
        return self.samples.shape

    def axis(self, j: int) -> np.ndarray:
        return self.origin[j] + self.h * np.arange(self.samples.shape[j])

    def points(self) -> np.ndarray:
        grids = np.meshgrid(*[self.axis(j) for j in range(self.q)], indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=1)

    @property
    def cell(self) -> float:
        return self.h ** self.q

    def mass(self) -> complex:
        return complex(self.cell * self.samples.sum())

    def abs_mass(self) -> float:
        return float(self.cell * np.abs(self.samples).sum())

    def scaled(self, c) -> "GridDensity":
        return GridDensity(self.origin, self.h, self.samples * c)

    def shifted(self, d) -> "GridDensity":
        return GridDensity(self.origin + np.asarray(d, float), self.h, self.samples)

    def flipped(self, j: int) -> "GridDensity":
        o = self.origin.copy()
        o[j] = -(o[j] + self.h * (self.samples.shape[j] - 1))
        return GridDensity(o, self.h, np.flip(self.samples, axis=j))


@dataclass(frozen=True)
class Atom:
    location: tuple
    weight: complex


@dataclass(frozen=True, eq=False)
class SlabComponent:
    U: np.ndarray
    q: int
    y: np.ndarray
    density: GridDensity

    def __post_init__(self):
        U = _frozen(_nz(np.atleast_2d(self.U)), float)
        n = U.shape[0]
        if U.shape != (n, n) or not 1 <= n <= MAX_DIM:
            raise DimensionMismatch(f"frame must be square with n <= {MAX_DIM}")
        if not np.allclose(U.T @ U, np.eye(n), rtol=0.0, atol=ORTHO_TOL):
            raise NotOrthogonal("slab frame is not orthogonal")
        q = int(self.q)
        y = _frozen(_nz(np.asarray(self.y, dtype=float).reshape(-1)), float)
        if not 1 <= q <= n or y.shape != (n - q,):
            raise DimensionMismatch("slab dimension and offset do not fit the frame")
        if self.density.q != q:
            raise DimensionMismatch("density dimension differs from slab dimension")
        object.__setattr__(self, "U", U)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.U.shape[0]

    def frame_key(self):
        return (self.U.tobytes(), self.q)

    def key(self):
        return (self.U.tobytes(), self.q, self.y.tobytes(), self.density.h)

    def points(self) -> np.ndarray:
        s = self.density.points()
        full = np.concatenate([s, np.broadcast_to(self.y, (s.shape[0], self.n - self.q))], axis=1)
        return full @ self.U.T

    def scaled(self, c) -> "SlabComponent":
        return SlabComponent(self.U, self.q, self.y, self.density.scaled(c))


class ComplexMeasure:
    """Finite complex measure: atoms plus slabs.

    Immutable.  ``locs`` has shape (k, n); ``weights`` shape (k,).
    """

    __slots__ = ("n", "locs", "weights", "slabs", "_canonical")

    def __init__(self, n: int, locs=None, weights=None, slabs: Iterable[SlabComponent] = (),
                 _canonical: bool = False):
        n = int(n)
        if not 1 <= n <= MAX_DIM:
            raise DimensionMismatch(f"dimension must be in 1..{MAX_DIM}, got {n}")
        if locs is None:
            locs = np.zeros((0, n))
            weights = np.zeros(0, dtype=complex)
        locs = np.asarray(locs, dtype=float).reshape(-1, n)
        weights = np.asarray(weights, dtype=complex).reshape(-1)
        if locs.shape[0] != weights.shape[0]:
            raise ValueError("atom locations and weights differ in count")
        if not np.all(np.isfinite(locs)):
            raise ValueError("atom locations must be finite")
        slabs = tuple(slabs)
        for s in slabs:
            if s.n != n:
                raise DimensionMismatch("slab lives in a different dimension")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "locs", _frozen(_nz(locs), float))
        object.__setattr__(self, "weights", _frozen(weights, complex))
        object.__setattr__(self, "slabs", slabs)
        object.__setattr__(self, "_canonical", bool(_canonical))

    def __setattr__(self, name, value):
        raise AttributeError("ComplexMeasure is immutable")

    @property
    def atoms(self) -> tuple:
        return tuple(Atom(tuple(float(v) for v in x), complex(w))
                     for x, w in zip(self.locs, self.weights))

    @property
    def is_atomic(self) -> bool:
        return not self.slabs

    def __repr__(self):
        return f"ComplexMeasure(n={self.n}, atoms={len(self.weights)}, slabs={len(self.slabs)})"

    def __eq__(self, other):
        if not isinstance(other, ComplexMeasure):
            return NotImplemented
        a, b = canonicalize(self), canonicalize(other)
        if a.n != b.n or a.locs.shape != b.locs.shape or len(a.slabs) != len(b.slabs):
            return False
        if a.locs.tobytes() != b.locs.tobytes() or a.weights.tobytes() != b.weights.tobytes():
            return False
        for s, t in zip(a.slabs, b.slabs):
            if s.key() != t.key() or s.density.origin.tobytes() != t.density.origin.tobytes():
                return False
            if s.density.samples.shape != t.density.samples.shape:
                return False
            if s.density.samples.tobytes() != t.density.samples.tobytes():
                return False
        return True

    __hash__ = None


# ---------------------------------------------------------------- constructors

def zero_measure(n: int) -> ComplexMeasure:
    return ComplexMeasure(n, _canonical=True)


def dirac(location, weight=1.0) -> ComplexMeasure:
    x = np.atleast_1d(np.asarray(location, dtype=float))
    return canonicalize(ComplexMeasure(x.size, x[None, :], [complex(weight)]))


def atomic(locations, weights) -> ComplexMeasure:
    locs = np.asarray(locations, dtype=float)
    if locs.ndim == 1:
        locs = locs[:, None]
    return canonicalize(ComplexMeasure(locs.shape[1], locs, weights))


def density_measure(samples, origin, h, U=None, y=None) -> ComplexMeasure:
    """Measure with one slab.  Without ``U`` the density is full-dimensional."""
    d = GridDensity(origin, h, samples)
    if U is None:
        U = np.eye(d.q)
    U = np.atleast_2d(np.asarray(U, dtype=float))
    n = U.shape[0]
    y = np.zeros(n - d.q) if y is None else y
    return canonicalize(ComplexMeasure(n, slabs=[SlabComponent(U, d.q, y, d)]))


def sample_density(fn, lo, hi, h, at_edges=None) -> GridDensity:
    """Sample ``fn`` on the grid covering ``[lo, hi]`` per axis (1-d or box).

    ``lo``/``hi`` are snapped outward to multiples of ``h`` so the grid lattice
    contains 0.  ``at_edges`` optionally scales the boundary samples (0.5 gives
    the trapezoid weight at a jump).
    """
    lo = np.atleast_1d(np.asarray(lo, dtype=float))
    hi = np.atleast_1d(np.asarray(hi, dtype=float))
    kl = np.floor(lo / h + 1e-9).astype(int)
    kh = np.ceil(hi / h - 1e-9).astype(int)
    axes = [h * np.arange(a, b + 1) for a, b in zip(kl, kh)]
    if len(axes) == 1:
        vals = np.asarray(fn(axes[0]), dtype=complex)
    else:
        grids = np.meshgrid(*axes, indexing="ij")
        vals = np.asarray(fn(*grids), dtype=complex)
    if at_edges is not None:
        vals = vals.copy()
        for j in range(vals.ndim):
            edge = np.moveaxis(vals, j, 0)
            edge[0] *= at_edges
            edge[-1] *= at_edges
    return GridDensity(kl * h, h, vals)


# ---------------------------------------------------------------- canonical form

def _gram_schmidt_complement(S: np.ndarray) -> np.ndarray:
    """Deterministic orthonormal basis of the complement of span(S)."""
    n, q = S.shape
    P = np.eye(n) - S @ S.T
    basis = []
    for _ in range(n - q):
        best, bv = -1.0, None
        for i in range(n):
            v = P[:, i].copy()
            for b in basis:
                v -= (b @ v) * b
            nv = np.linalg.norm(v)
            if nv > best + 1e-12:
                best, bv = nv, v
        basis.append(bv / best)
    return np.array(basis).T


def _first_nonzero_sign(col) -> float:
    for v in col:
        if abs(v) > 1e-15:
            return 1.0 if v > 0 else -1.0
    return 1.0


def _is_signed_permutation(U) -> bool:
    return bool(np.all((U == 0) | (np.abs(U) == 1)) and np.all(np.abs(U).sum(axis=0) == 1))


def _normalize_slab(s: SlabComponent) -> SlabComponent:
    U, q, y, d = s.U.copy(), s.q, s.y.copy(), s.density
    n = U.shape[0]
    if q == n and _is_signed_permutation(U):
        # reduce to the identity frame by permuting and flipping sample axes
        rows = [int(np.flatnonzero(U[:, j])[0]) for j in range(q)]
        for j in range(q):
            if U[rows[j], j] < 0:
                d = d.flipped(j)
        order = np.argsort(rows)
        samples = np.transpose(d.samples, order)
        origin = d.origin[order]
        return SlabComponent(np.eye(n), n, np.zeros(0), GridDensity(origin, d.h, samples))
    if n - q >= 2:
        C = _gram_schmidt_complement(U[:, :q])
        C = C * np.array([_first_nonzero_sign(c) for c in C.T])
        old = U[:, q:]
        signs = [1.0 if np.array_equal(a, b) else -1.0 if np.array_equal(a, -b) else 0.0
                 for a, b in zip(old.T, C.T)]
        # keep y bitwise when the complement is already the canonical one up to signs
        y = y * np.array(signs) if all(signs) else C.T @ (old @ y)
        U = np.concatenate([U[:, :q], C], axis=1)
    for j in range(n):
        if _first_nonzero_sign(U[:, j]) < 0:
            U[:, j] = -U[:, j]
            if j < q:
                d = d.flipped(j)
            else:
                y[j - q] = -y[j - q]
    return SlabComponent(U, q, y, d)


def _merge_group(slabs: list) -> list:
    """Merge slabs sharing (U, q, y, h) whose grids lie on a common lattice."""
    out = []
    pending = list(slabs)
    while pending:
        base = pending.pop(0)
        h = base.density.h
        members = [base]
        rest = []
        for s in pending:
            k = (s.density.origin - base.density.origin) / h
            if np.all(np.abs(k - np.round(k)) <= ALIGN_TOL):
                members.append(s)
            else:
                rest.append(s)
        pending = rest
        if len(members) == 1:
            out.append(base)
            continue
        o0 = base.density.origin
        offs = [np.round((m.density.origin - o0) / h).astype(np.int64) for m in members]
        lo = np.min(offs, axis=0)
        hi = np.max([o + np.array(m.density.shape) for o, m in zip(offs, members)], axis=0)
        acc = np.zeros(tuple(hi - lo), dtype=complex)
        for o, m in zip(offs, members):
            idx = tuple(slice(a - b, a - b + c) for a, b, c in zip(o, lo, m.density.shape))
            acc[idx] += m.density.samples
        origin = o0 + lo * h
        out.append(SlabComponent(base.U, base.q, base.y, GridDensity(origin, h, acc)))
    return out


def _slab_sort_key(s: SlabComponent):
    return (s.U.tobytes(), s.q, tuple(s.y), s.density.h, tuple(s.density.origin))


def canonicalize(mu: ComplexMeasure) -> ComplexMeasure:
    """Merge coincident atoms and compatible slabs; drop zero weights.

    Coincidence is bitwise (after folding -0.0).  Slabs merge when frame,
    dimension, offset and spacing agree bitwise and the grids share a lattice.
    """
    if mu._canonical:
        return mu
    n = mu.n
    locs, w = mu.locs, mu.weights
    if locs.shape[0]:
        uniq, inv = np.unique(locs, axis=0, return_inverse=True)
        acc = np.zeros(uniq.shape[0], dtype=complex)
        np.add.at(acc, inv.reshape(-1), w)
        keep = acc != 0
        locs, w = uniq[keep], acc[keep]
    groups: dict = {}
    for s in mu.slabs:
        s = _normalize_slab(s)
        if not np.any(s.density.samples):
            continue
        groups.setdefault(s.key(), []).append(s)
    slabs = []
    for key in sorted(groups):
        for s in _merge_group(groups[key]):
            if np.any(s.density.samples):
                slabs.append(s)
    slabs.sort(key=_slab_sort_key)
    return ComplexMeasure(n, locs, w, slabs, _canonical=True)


# ---------------------------------------------------------------- algebra

def _check_same_dim(measures):
    dims = {m.n for m in measures}
    if len(dims) > 1:
        raise DimensionMismatch(f"measures of dimensions {sorted(dims)} cannot be combined")


def linear_combine(terms: Sequence) -> ComplexMeasure:
    """Canonical sum of ``c_i * mu_i`` for pairs ``(c_i, mu_i)``."""
    terms = list(terms)
    if not terms:
        raise ValueError("need at least one term")
    _check_same_dim([m for _, m in terms])
    n = terms[0][1].n
    locs, ws, slabs = [], [], []
    for c, m in terms:
        c = complex(c)
        locs.append(m.locs)
        ws.append(m.weights * c)
        slabs.extend(s.scaled(c) for s in m.slabs)
    return canonicalize(ComplexMeasure(n, np.concatenate(locs), np.concatenate(ws), slabs))


def scale(mu: ComplexMeasure, c) -> ComplexMeasure:
    return linear_combine([(c, mu)])


def _truncate(d: GridDensity, window: float):
    """Restrict to |coordinate| <= window; returns (density or None, lost tv)."""
    sl = []
    for j in range(d.q):
        ax = d.axis(j)
        ok = np.flatnonzero(np.abs(ax) <= window * (1 + 1e-12))
        if ok.size == 0:
            return None, d.abs_mass()
        sl.append(slice(ok[0], ok[-1] + 1))
    sl = tuple(sl)
    kept = d.samples[sl]
    if kept.shape == d.shape:
        return d, 0.0
    lost = d.abs_mass() - d.cell * float(np.abs(kept).sum())
    origin = np.array([d.origin[j] + d.h * sl[j].start for j in range(d.q)])
    return GridDensity(origin, d.h, kept), max(lost, 0.0)


def _shift_slab(s: SlabComponent, p) -> SlabComponent:
    local = s.U.T @ np.asarray(p, dtype=float)
    d = s.density.shifted(local[: s.q]) if np.any(local[: s.q]) else s.density
    return SlabComponent(s.U, s.q, s.y + local[s.q:], d)


def convolve(mu1: ComplexMeasure, mu2: ComplexMeasure, window: float = DEFAULT_WINDOW,
             return_info: bool = False):
    """Convolution product.

    Slab pairs must share frame and dimension; the density part is a discrete
    convolution of samples scaled by ``h**q``, truncated to ``|s_j| <= window``.
    ``return_info`` adds the total variation lost to truncation.
    """
    _check_same_dim([mu1, mu2])
    a, b = canonicalize(mu1), canonicalize(mu2)
    n = a.n
    for s in a.slabs:
        for t in b.slabs:
            if s.frame_key() != t.frame_key():
                raise UnsupportedFramePair(
                    "slab frames differ; this representation only convolves densities "
                    "living in a common frame")
            if s.density.h != t.density.h:
                raise GridMismatch("slab densities use different grid spacings")
    if a.locs.shape[0] and b.locs.shape[0]:
        locs = (a.locs[:, None, :] + b.locs[None, :, :]).reshape(-1, n)
        ws = np.outer(a.weights, b.weights).reshape(-1)
    else:
        locs, ws = np.zeros((0, n)), np.zeros(0, dtype=complex)
    slabs = []
    for x, w in zip(a.locs, a.weights):
        slabs.extend(_shift_slab(t, x).scaled(w) for t in b.slabs)
    for x, w in zip(b.locs, b.weights):
        slabs.extend(_shift_slab(s, x).scaled(w) for s in a.slabs)
    lost = 0.0
    for s in a.slabs:
        for t in b.slabs:
            d1, d2 = s.density, t.density
            f = nx.fftconvolve(d1.samples, d2.samples) * d1.cell
            d, lo = _truncate(GridDensity(d1.origin + d2.origin, d1.h, f), window)
            lost += lo
            if d is not None:
                slabs.append(SlabComponent(s.U, s.q, s.y + t.y, d))
    out = canonicalize(ComplexMeasure(n, locs, ws, slabs))
    if return_info:
        return out, {"lost_mass": lost}
    return out


def tv_norm(mu: ComplexMeasure) -> float:
    m = canonicalize(mu)
    return float(np.abs(m.weights).sum() + sum(s.density.abs_mass() for s in m.slabs))


def total_mass(mu: ComplexMeasure) -> complex:
    """Sum of atom weights plus quadrature masses; the transform at 0."""
    total = np.sum(mu.weights) if mu.weights.size else 0j
    for s in mu.slabs:
        total = total + s.density.cell * np.sum(s.density.samples)
    return complex(total)


def atom_at(mu: ComplexMeasure, x) -> complex:
    x = np.asarray(x, dtype=float).reshape(-1) + 0.0
    m = canonicalize(mu)
    hit = np.flatnonzero(np.all(m.locs == x, axis=1))
    return complex(m.weights[hit[0]]) if hit.size else 0j


def _exp_terms(r: float, tol: float) -> tuple[int, float]:
    """Smallest N with e^r - sum_{j<=N} r^j/j! < tol, and that tail."""
    if r == 0.0:
        return 0, 0.0
    term, N = 1.0, 0
    while True:
        # tail after N is bounded by term_{N+1} / (1 - r/(N+2)) once N+2 > r
        nxt = term * r / (N + 1)
        if N + 2 > r:
            bound = nxt / (1.0 - r / (N + 2))
            if bound < tol:
                return N, bound
        term, N = nxt, N + 1
        if N > 10_000:
            raise SupportOverflow("exponential series does not converge in 10000 terms")


def exp_measure(nu: ComplexMeasure, tol: float = 1e-12, window: float = DEFAULT_WINDOW,
                return_info: bool = False):
    """Measure exponential by the truncated power series (Horner form)."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    nu = canonicalize(nu)
    n = nu.n
    r = tv_norm(nu)
    N, tail = _exp_terms(r, tol)
    one = dirac(np.zeros(n))
    S = one
    lost = 0.0
    for j in range(N, 0, -1):
        P, info = convolve(nu, S, window=window, return_info=True)
        lost = lost / j * r + info["lost_mass"] / j
        S = linear_combine([(1.0, one), (1.0 / j, P)])
    if lost > tol:
        raise SupportOverflow(f"exponential lost mass {lost:.3e} outside the window")
    if return_info:
        return S, {"terms": N, "truncation_bound": tail, "lost_mass": lost}
    return S


def _check_orthogonal(U):
    U = np.atleast_2d(np.asarray(U, dtype=float))
    if U.shape[0] != U.shape[1] or not np.allclose(U.T @ U, np.eye(U.shape[0]), rtol=0.0,
                                                   atol=ORTHO_TOL):
        raise NotOrthogonal("matrix is not orthogonal to 1e-12")
    return U


def pushforward_orthogonal(U, mu: ComplexMeasure) -> ComplexMeasure:
    """Image measure under ``x -> U x``."""
    U = _check_orthogonal(U)
    if U.shape[0] != mu.n:
        raise DimensionMismatch("matrix size differs from measure dimension")
    slabs = []
    for s in mu.slabs:
        V = U @ s.U
        # re-orthonormalize drift from the product
        uu, _, vt = np.linalg.svd(V)
        V = uu @ vt if not np.allclose(V.T @ V, np.eye(mu.n), atol=1e-14, rtol=0) else V
        slabs.append(SlabComponent(V, s.q, s.y, s.density))
    return canonicalize(ComplexMeasure(mu.n, mu.locs @ U.T, mu.weights, slabs))


def product_measure(mu1: ComplexMeasure, mu2: ComplexMeasure) -> ComplexMeasure:
    """Product measure on R^(a+b)."""
    a, b = canonicalize(mu1), canonicalize(mu2)
    na, nb = a.n, b.n
    n = na + nb
    if n > MAX_DIM:
        raise DimensionMismatch(f"product dimension {n} exceeds {MAX_DIM}")
    locs = np.zeros((0, n))
    ws = np.zeros(0, dtype=complex)
    if a.locs.shape[0] and b.locs.shape[0]:
        locs = np.concatenate([np.repeat(a.locs, b.locs.shape[0], axis=0),
                               np.tile(b.locs, (a.locs.shape[0], 1))], axis=1)
        ws = np.outer(a.weights, b.weights).reshape(-1)
    slabs = []
    Ia, Ib = np.eye(na), np.eye(nb)
    for p, w in zip(a.locs, a.weights):
        for t in b.slabs:
            U = np.zeros((n, n))
            U[na:, : t.q] = t.U[:, : t.q]
            U[:na, t.q:t.q + na] = Ia
            U[na:, t.q + na:] = t.U[:, t.q:]
            y = np.concatenate([p, t.y])
            slabs.append(SlabComponent(U, t.q, y, t.density.scaled(w)))
    for r, w in zip(b.locs, b.weights):
        for s in a.slabs:
            U = np.zeros((n, n))
            U[:na, : s.q] = s.U[:, : s.q]
            U[:na, s.q:na] = s.U[:, s.q:]
            U[na:, na:] = Ib
            y = np.concatenate([s.y, r])
            slabs.append(SlabComponent(U, s.q, y, s.density.scaled(w)))
    for s in a.slabs:
        for t in b.slabs:
            if s.q != na or t.q != nb:
                raise UnsupportedProductPair("slab by slab products need full-dimensional densities")
            if s.density.h != t.density.h:
                raise GridMismatch("product of densities with different spacings")
            U = np.zeros((n, n))
            U[:na, :na] = s.U
            U[na:, na:] = t.U
            f = np.multiply.outer(s.density.samples, t.density.samples)
            d = GridDensity(np.concatenate([s.density.origin, t.density.origin]), s.density.h, f)
            slabs.append(SlabComponent(U, n, np.zeros(0), d))
    return canonicalize(ComplexMeasure(n, locs, ws, slabs))


def _cic_bin(pos, mass, h):
    """Cloud-in-cell binning onto the lattice h*Z; returns a GridDensity."""
    t = pos / h
    i0 = np.floor(t).astype(np.int64)
    fr = t - i0
    lo = int(i0.min())
    hi = int(i0.max()) + 1
    acc = np.zeros(hi - lo + 1, dtype=complex)
    np.add.at(acc, i0 - lo, mass * (1.0 - fr))
    np.add.at(acc, i0 - lo + 1, mass * fr)
    return GridDensity([lo * h], h, acc / h)


def project_line(a, mu: ComplexMeasure, method: str = "auto") -> ComplexMeasure:
    """Image of ``mu`` under ``x -> a.x`` for a unit vector ``a``.

    Slab densities are binned exactly when the projected sample positions form
    a lattice (rational direction within the slab plane); otherwise
    ``method='auto'`` falls back to cloud-in-cell binning on spacing ``h`` and
    ``method='exact'`` raises UnsupportedProjection.  ``method='cic'`` forces
    the binning route.
    """
    a = np.asarray(a, dtype=float).reshape(-1)
    if a.size != mu.n:
        raise DimensionMismatch("direction length differs from measure dimension")
    if abs(np.linalg.norm(a) - 1.0) > 1e-12:
        raise ValueError("direction must be a unit vector")
    if method not in ("auto", "exact", "cic"):
        raise ValueError(f"unknown projection method {method!r}")
    m = canonicalize(mu)
    locs = (m.locs @ a)[:, None]
    ws = m.weights
    extra_locs, extra_w, slabs = [], [], []
    one = np.eye(1)
    for s in m.slabs:
        c = s.U.T @ a
        cs, cy = c[: s.q], c[s.q:]
        shift = float(cy @ s.y) if cy.size else 0.0
        d = s.density
        mass = d.cell * d.samples
        if np.all(np.abs(cs) <= nx.ZERO_DIR):
            extra_locs.append([shift])
            extra_w.append(mass.sum())
            continue
        rat = None if method == "cic" else nx.rational_direction(cs)
        if rat is not None:
            g, ints = rat
            if g < 0:
                g, ints = -g, -ints
            idx = np.zeros(d.shape, dtype=np.int64)
            for j in range(s.q):
                shp = [1] * s.q
                shp[j] = -1
                idx = idx + ints[j] * np.arange(d.shape[j]).reshape(shp)
            lo = int(idx.min())
            acc = np.zeros(int(idx.max()) - lo + 1, dtype=complex)
            np.add.at(acc, (idx - lo).reshape(-1), mass.reshape(-1))
            step = d.h * g
            origin = shift + float(cs @ d.origin) + step * lo
            slabs.append(SlabComponent(one, 1, [], GridDensity([origin], step, acc / step)))
            continue
        if method == "exact":
            raise UnsupportedProjection("projected grid is not a lattice along this direction")
        pos = shift + s.density.points() @ cs
        slabs.append(SlabComponent(one, 1, [], _cic_bin(pos, mass.reshape(-1), d.h)))
    if extra_locs:
        locs = np.concatenate([locs, np.array(extra_locs)])
        ws = np.concatenate([ws, np.array(extra_w, dtype=complex)])
    return canonicalize(ComplexMeasure(1, locs, ws, slabs))
