"""Discrete measures with atoms on ``B k`` (k integer), seen as torus polynomials.

``mu = sum_k a_k delta_{B k}`` has transform ``P(B^T z)`` with the torus
polynomial ``P(theta) = sum_k a_k exp(i k.theta)``.  With rationally
independent columns of ``B`` the infimum over R^n equals the minimum of
``|P|`` on the torus.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

import numpy as np
import scipy.signal as ss

from . import _numerics as nx
from .errors import NoDominantAtom, ResidualTooLarge, TorusDimTooLarge
from .measure_core import ComplexMeasure, atomic, canonicalize

MAX_TORUS_DIM = 3
REFUTE_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class LatticeGFS:
    """Finite lattice series: basis ``B`` (n x d), integer keys ``ks`` (m x d), weights ``ws``."""

    B: np.ndarray
    ks: np.ndarray
    ws: np.ndarray

    def __post_init__(self):
        B = np.atleast_2d(np.asarray(self.B, dtype=float))
        ks = np.asarray(self.ks, dtype=np.int64).reshape(-1, B.shape[1])
        ws = np.asarray(self.ws, dtype=complex).reshape(-1)
        if ks.shape[0] != ws.shape[0]:
            raise ValueError("keys and weights differ in count")
        if ks.shape[0]:
            uniq, inv = np.unique(ks, axis=0, return_inverse=True)
            acc = np.zeros(uniq.shape[0], dtype=complex)
            np.add.at(acc, inv.reshape(-1), ws)
            keep = acc != 0
            ks, ws = uniq[keep], acc[keep]
        for name, v in (("B", B), ("ks", ks), ("ws", ws)):
            v.setflags(write=False)
            object.__setattr__(self, name, v)

    @property
    def n(self) -> int:
        return self.B.shape[0]

    @property
    def d(self) -> int:
        return self.B.shape[1]

    @classmethod
    def from_dict(cls, B, coeffs: Mapping) -> "LatticeGFS":
        B = np.atleast_2d(np.asarray(B, dtype=float))
        keys = [np.atleast_1d(np.asarray(k, dtype=np.int64)) for k in coeffs]
        ks = np.array(keys, dtype=np.int64).reshape(-1, B.shape[1])
        return cls(B, ks, np.array(list(coeffs.values()), dtype=complex))

    def coeffs(self) -> dict:
        return {tuple(int(v) for v in k): complex(w) for k, w in zip(self.ks, self.ws)}

    def coeff(self, k) -> complex:
        k = np.asarray(k, dtype=np.int64).reshape(-1)
        hit = np.flatnonzero(np.all(self.ks == k, axis=1))
        return complex(self.ws[hit[0]]) if hit.size else 0j

    def norm(self) -> float:
        return float(np.abs(self.ws).sum())

    def to_measure(self) -> ComplexMeasure:
        if not self.ws.size:
            return ComplexMeasure(self.n)
        return atomic(self.ks @ self.B.T, self.ws)

    def cf(self, z) -> np.ndarray:
        z = np.atleast_2d(np.asarray(z, dtype=float))
        return self.poly(z @ self.B)

    def poly(self, theta) -> np.ndarray:
        theta = np.atleast_2d(np.asarray(theta, dtype=float))
        return np.exp(1j * theta @ self.ks.T) @ self.ws

    # dense helpers
    def dense(self):
        """(array, offset) with ``array[k - offset] = a_k``."""
        if not self.ws.size:
            return np.zeros((1,) * self.d, dtype=complex), np.zeros(self.d, dtype=np.int64)
        lo = self.ks.min(axis=0)
        hi = self.ks.max(axis=0)
        arr = np.zeros(tuple(hi - lo + 1), dtype=complex)
        arr[tuple((self.ks - lo).T)] = self.ws
        return arr, lo

    @classmethod
    def from_dense(cls, B, arr, offset, prune: float = 0.0) -> "LatticeGFS":
        arr = np.asarray(arr, dtype=complex)
        idx = np.argwhere(np.abs(arr) > prune) if prune > 0 else np.argwhere(arr != 0)
        ks = idx + np.asarray(offset, dtype=np.int64)
        return cls(B, ks, arr[tuple(idx.T)] if idx.size else np.zeros(0, complex))

    def scaled(self, c) -> "LatticeGFS":
        return LatticeGFS(self.B, self.ks, self.ws * c)

    def shifted(self, k) -> "LatticeGFS":
        return LatticeGFS(self.B, self.ks + np.asarray(k, dtype=np.int64), self.ws)


def delta_series(B, k=None) -> LatticeGFS:
    B = np.atleast_2d(np.asarray(B, dtype=float))
    k = np.zeros(B.shape[1], dtype=np.int64) if k is None else k
    return LatticeGFS(B, np.atleast_2d(k), [1.0])


def lattice_convolve(a: LatticeGFS, b: LatticeGFS, prune: float = 0.0) -> LatticeGFS:
    if not np.array_equal(a.B, b.B):
        raise ValueError("series use different bases")
    if not a.ws.size or not b.ws.size:
        return LatticeGFS(a.B, np.zeros((0, a.d)), [])
    A, oa = a.dense()
    Bd, ob = b.dense()
    C = ss.convolve(A, Bd)
    return LatticeGFS.from_dense(a.B, C, oa + ob, prune)


def lattice_combine(terms: Sequence) -> LatticeGFS:
    B = terms[0][1].B
    ks = np.concatenate([t.ks for _, t in terms])
    ws = np.concatenate([c * t.ws for c, t in terms])
    return LatticeGFS(B, ks, ws)


def lattice_l1_distance(a: LatticeGFS, b: LatticeGFS) -> float:
    return lattice_combine([(1.0, a), (-1.0, b)]).norm()


# ---------------------------------------------------------------- torus sampling

def torus_samples(mu: LatticeGFS, G: int) -> np.ndarray:
    """``P`` on the grid ``theta_j = 2 pi j / G`` per axis (exact: keys folded mod G)."""
    arr = np.zeros((G,) * mu.d, dtype=complex)
    if mu.ws.size:
        np.add.at(arr, tuple((mu.ks % G).T), mu.ws)
    return G ** mu.d * nx.ifftn(arr)


@dataclass(frozen=True, eq=False)
class InvertibilityCertificate:
    """``status`` is 'certified', 'refuted' or 'undecided'.

    Certified means ``grid_min - lipschitz * mesh / 2 > 0``; refuted carries
    the torus point ``witness`` where ``|P| < 1e-9``.
    """

    status: str
    grid_min: float
    lipschitz: float
    mesh: float
    witness: np.ndarray

    @property
    def lower_bound(self) -> float:
        return self.grid_min - self.lipschitz * self.mesh / 2

    @property
    def invertible(self) -> bool:
        return self.status == "certified"

    def __bool__(self):
        return self.invertible


def lipschitz_bound(mu: LatticeGFS) -> float:
    """``sum |k - c|_2 |a_k|`` minimized over the two natural centers c (|P| is shift invariant)."""
    if not mu.ws.size:
        return 0.0
    cands = [np.zeros(mu.d), 0.5 * (mu.ks.min(axis=0) + mu.ks.max(axis=0))]
    return float(min(np.sum(np.linalg.norm(mu.ks - c, axis=1) * np.abs(mu.ws)) for c in cands))


def certify_invertible_lattice(mu: LatticeGFS, grid_per_axis: int = 256) -> InvertibilityCertificate:
    """Grid minimum of ``|P|`` with a Lipschitz margin."""
    d = mu.d
    if d > MAX_TORUS_DIM:
        raise TorusDimTooLarge(f"torus dimension {d} exceeds {MAX_TORUS_DIM}")
    G = int(grid_per_axis)
    vals = torus_samples(mu, G)
    mod = np.abs(vals)
    i = int(np.argmin(mod))
    m0 = float(mod.reshape(-1)[i])
    theta = 2 * math.pi * np.array(np.unravel_index(i, mod.shape), dtype=float) / G
    L = lipschitz_bound(mu)
    rho = 2 * math.pi / G * math.sqrt(d)
    if m0 < REFUTE_TOL:
        status = "refuted"
    elif m0 - L * rho / 2 > 0:
        status = "certified"
    else:
        status = "undecided"
    return InvertibilityCertificate(status, m0, L, rho, theta)


# ---------------------------------------------------------------- inverse and log

def _dominant_index(mu: LatticeGFS) -> int:
    return int(np.argmax(np.abs(mu.ws)))


def invert_lattice(mu: LatticeGFS, trunc: int = 40, tol: float = 1e-10,
                   grid: Optional[int] = None) -> LatticeGFS:
    """Coefficients of ``1/P`` within ``|k - c|_inf <= trunc`` around the mirror ``c`` of the largest atom."""
    if not mu.ws.size:
        raise ResidualTooLarge("the zero series has no inverse")
    d = mu.d
    span = int((mu.ks.max(axis=0) - mu.ks.min(axis=0)).max())
    if grid is None:
        want = 4 * (trunc + span) + 16
        cap = {1: 1 << 16, 2: 1 << 10, 3: 1 << 7}[min(d, 3)]
        grid = min(1 << int(math.ceil(math.log2(want))), cap)
        grid = max(grid, 2 * trunc + 2)
    vals = torus_samples(mu, grid)
    if np.abs(vals).min() < REFUTE_TOL:
        raise ResidualTooLarge("torus polynomial vanishes on the grid")
    coef = nx.fftn(1.0 / vals) / grid ** d
    center = -mu.ks[_dominant_index(mu)]
    rng = np.arange(-trunc, trunc + 1)
    offs = np.array(list(itertools.product(rng, repeat=d)), dtype=np.int64).reshape(-1, d)
    ks = center + offs
    ws = coef[tuple((ks % grid).T)]
    inv = LatticeGFS(mu.B, ks, ws)
    res = lattice_l1_distance(lattice_convolve(mu, inv), delta_series(mu.B))
    if res >= tol:
        raise ResidualTooLarge(f"inverse residual {res:.3e} exceeds {tol:.1e}; raise trunc")
    return inv


def _log_series_terms(r: float, tol: float) -> int:
    """Smallest J with ``r^(J+1) / ((J+1)(1 - r)) < tol``."""
    J = 1
    while r ** (J + 1) / ((J + 1) * (1 - r)) >= tol:
        J += 1
        if J > 100_000:
            break
    return J


def log_lattice_dominant(mu: LatticeGFS, tol: float = 1e-12, prune: float = 1e-18):
    """``mu = delta_{B k0} * exp(nu)`` with ``nu`` a lattice series.

    The largest atom ``a_{k0}`` must dominate the rest in l1.  Returns
    ``(gamma, nu)`` with ``gamma = B k0`` and ``nu`` the truncated series
    ``log(a_{k0}) delta_0 + sum_j (-1)^(j+1) rho^j / j``.
    """
    if not mu.ws.size:
        raise NoDominantAtom("zero series")
    i0 = _dominant_index(mu)
    a0 = mu.ws[i0]
    k0 = mu.ks[i0]
    rest = mu.norm() - abs(a0)
    if not abs(a0) > rest:
        raise NoDominantAtom(f"largest atom {abs(a0):.4g} does not exceed the rest {rest:.4g}")
    rho = LatticeGFS(mu.B, mu.ks - k0, mu.ws / a0)
    rho = lattice_combine([(1.0, rho), (-1.0, delta_series(mu.B))])
    r = rho.norm()
    zero = np.zeros(mu.d, dtype=np.int64)
    logc = LatticeGFS(mu.B, zero[None, :], [np.log(a0)])
    if r == 0:
        return mu.B @ k0, logc
    J = _log_series_terms(r, tol)
    # Horner: S = c_J; S = c_j + rho * S, c_j = (-1)^(j+1) / j
    S = LatticeGFS(mu.B, zero[None, :], [(-1) ** (J + 1) / J])
    for j in range(J - 1, 0, -1):
        S = lattice_combine([(1.0, lattice_convolve(rho, S, prune)),
                             ((-1) ** (j + 1) / j, delta_series(mu.B))])
    nu = lattice_combine([(1.0, lattice_convolve(rho, S, prune)), (1.0, logc)])
    return mu.B @ k0, nu


def exp_lattice(nu: LatticeGFS, tol: float = 1e-14, prune: float = 1e-18) -> LatticeGFS:
    """Series exponential in coefficient space."""
    from .measure_core import _exp_terms

    N, _ = _exp_terms(nu.norm(), tol)
    one = delta_series(nu.B)
    S = one
    for j in range(N, 0, -1):
        S = lattice_combine([(1.0, one), (1.0 / j, lattice_convolve(nu, S, prune))])
    return S


# ---------------------------------------------------------------- bases and projections

def infer_lattice_basis(locs, max_den: int = 64, tol: float = 1e-12):
    """Basis ``B`` and integer keys with ``locs = keys @ B.T``.

    Tries an axis-wise rational base (diagonal ``B``); otherwise returns the
    distinct nonzero locations as columns (declared independent).
    """
    locs = np.atleast_2d(np.asarray(locs, dtype=float))
    n = locs.shape[1]
    steps = []
    ok = True
    for j in range(n):
        col = locs[:, j]
        r = nx.rational_direction(col, max_den=max_den, rtol=tol) if np.any(col) else (1.0, np.zeros(col.size, np.int64))
        if r is None:
            ok = False
            break
        g, ints = r
        if g == 0.0:
            g, ints = 1.0, np.zeros(col.size, np.int64)
        steps.append((abs(g), ints * (1 if g > 0 else -1)))
    if ok:
        B = np.diag([s for s, _ in steps])
        keys = np.stack([k for _, k in steps], axis=1)
        if np.allclose(keys @ B.T, locs, rtol=0, atol=tol * max(1.0, np.abs(locs).max())):
            return B, keys
    cols = []
    keys = np.zeros((locs.shape[0], 0), dtype=np.int64)
    for i, x in enumerate(locs):
        if not np.any(x):
            continue
        if any(np.array_equal(x, c) for c in cols):
            continue
        cols.append(x)
    B = np.array(cols).T if cols else np.zeros((n, 0))
    keys = np.zeros((locs.shape[0], len(cols)), dtype=np.int64)
    for i, x in enumerate(locs):
        for j, c in enumerate(cols):
            if np.array_equal(x, c):
                keys[i, j] = 1
    return B, keys


def lattice_from_measure(mu: ComplexMeasure) -> LatticeGFS:
    m = canonicalize(mu)
    if m.slabs:
        raise ValueError("measure has densities")
    B, keys = infer_lattice_basis(m.locs)
    if B.shape[1] == 0:
        B = np.eye(m.n)[:, :1]
        keys = np.zeros((m.locs.shape[0], 1), dtype=np.int64)
    return LatticeGFS(B, keys, m.weights)


def _reduce_projection(v: np.ndarray, search: int = 6):
    """Reduce projected frequencies ``v`` (length d) to an independent set.

    Returns ``(basis values, integer map)`` with ``v = map @ basis``, or
    ``None`` when an integer relation is suspected but not exploitable.
    """
    v = np.where(np.abs(v) <= 1e-12 * max(1.0, np.abs(v).max()), 0.0, v)
    nz = np.flatnonzero(v)
    if nz.size == 0:
        return np.zeros(0), np.zeros((v.size, 0), dtype=np.int64)
    r = nx.rational_direction(v, max_den=64)
    if r is not None:
        g, ints = r
        return np.array([g]), ints.reshape(-1, 1)
    if nz.size == 1:
        mp = np.zeros((v.size, 1), dtype=np.int64)
        mp[nz[0], 0] = 1
        return v[nz], mp
    # look for a small integer relation among the nonzero entries
    w = v[nz]
    for c in itertools.product(range(-search, search + 1), repeat=nz.size):
        if not any(c):
            continue
        if abs(np.dot(c, w)) <= 1e-10 * np.abs(w).sum():
            return None
    mp = np.zeros((v.size, nz.size), dtype=np.int64)
    for j, i in enumerate(nz):
        mp[i, j] = 1
    return w, mp


@dataclass(frozen=True, eq=False)
class DiscreteCWReport:
    full: InvertibilityCertificate
    directions: tuple
    decisions: tuple
    consistent: bool

    @property
    def failing(self):
        return [a for a, d in zip(self.directions, self.decisions) if not d.invertible]


@dataclass(frozen=True, eq=False)
class LineDecision:
    invertible: bool
    status: str
    min_abs: float
    route: str

    def __bool__(self):
        return self.invertible


def project_lattice(a, mu: LatticeGFS):
    """Line image of ``mu`` along ``a``; ``None`` when no lattice form is found."""
    a = np.asarray(a, dtype=float)
    v = mu.B.T @ a
    red = _reduce_projection(v)
    if red is None:
        return None
    basis, mp = red
    if basis.size == 0:
        return LatticeGFS(np.ones((1, 1)), np.zeros((mu.ks.shape[0], 1), np.int64), mu.ws)
    return LatticeGFS(basis[None, :], mu.ks @ mp, mu.ws)


def cramer_wold_discrete(mu: LatticeGFS, directions: Sequence, grid_per_axis: int = 1024,
                         Z: float = 64.0, dz: float = 2.0 ** -6) -> DiscreteCWReport:
    """Certify each line image on its own torus, or estimate on a z-grid if no lattice form."""
    from .charfn import sample_cf_line

    full = certify_invertible_lattice(mu, 64 if mu.d >= 3 else (256 if mu.d == 2 else grid_per_axis))
    dirs, decs = [], []
    for a in directions:
        a = np.asarray(a, dtype=float)
        dirs.append(a)
        p = project_lattice(a, mu)
        if p is not None and p.d <= MAX_TORUS_DIM:
            G = grid_per_axis if p.d == 1 else (256 if p.d == 2 else 64)
            c = certify_invertible_lattice(p, G)
            decs.append(LineDecision(c.invertible, c.status, c.grid_min, f"torus d={p.d}"))
            continue
        vals = sample_cf_line(mu.to_measure(), a, Z, dz).values
        mn = float(np.abs(vals).min())
        if mn < REFUTE_TOL:
            decs.append(LineDecision(False, "refuted", mn, "grid estimate"))
        else:
            decs.append(LineDecision(mn > 1e-6, "estimated", mn, "grid estimate"))
    if full.invertible:
        ok = all(d.invertible for d in decs)
    else:
        ok = full.status == "refuted" or any(not d.invertible for d in decs) or not decs
    return DiscreteCWReport(full, tuple(dirs), tuple(decs), ok)
