"""Series ``sum_y a_y exp(i z2.y)`` with coefficients in ``C delta_0 + L1(R^q)`` (q = 1).

A coefficient ``a = alpha delta_0 + f`` is evaluated at the points of its
maximal ideal space: ``w -> alpha + f^(w)`` for real ``w`` and ``alpha`` at
infinity.  Products in the coefficient algebra are convolutions, computed as
pointwise products of transforms on a common periodic spectral window, with
the value at infinity carried in a separate channel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.signal as ss

from . import _numerics as nx
from .ac_algebra import ZERO_TOL, ACMeasure, SpectralGrid, _snap, spectral_grid
from .charfn import distinguished_log_grid
from .errors import (
    GridMismatch,
    NoDominantCoefficient,
    NonzeroWindingInCoefficient,
    ResidualTooLarge,
    TorusDimTooLarge,
    UnsupportedClass,
)
from .lattice_gfs import REFUTE_TOL, infer_lattice_basis, lipschitz_bound, LatticeGFS
from .measure_core import (
    ComplexMeasure,
    GridDensity,
    SlabComponent,
    canonicalize,
)

AElement = ACMeasure

DEFAULT_W = 32.0
DEFAULT_W_STEP = 2.0 ** -3
PRUNE = 1e-16


def gelfand_eval(a: ACMeasure, w):
    """``alpha + f^(w)``; ``w = inf`` (or the string 'inf') gives ``alpha``."""
    if isinstance(w, str) or (np.isscalar(w) and math.isinf(float(w))):
        return complex(a.alpha)
    w = np.asarray(w, dtype=float)
    d = a.density
    flat = w.reshape(-1, d.q)
    vals = nx.direct_dtft_nd(d.samples, d.origin, d.h, flat) * d.cell + a.alpha
    if w.ndim == 0 or (w.ndim == 1 and d.q > 1):
        return complex(vals[0])
    return vals


def a_product(a: ACMeasure, b: ACMeasure) -> ACMeasure:
    """Convolution product in the coefficient algebra."""
    from .measure_core import convolve

    return ACMeasure.from_measure(convolve(a.to_measure(), b.to_measure(), window=np.inf))


@dataclass(frozen=True, eq=False)
class BanachGFS:
    """``mu = sum_k U(a_k (x) delta_{Y k})`` with q = 1 coefficients ``a_k``.

    ``Y`` is the r x d basis of offsets (r = n - 1), ``ks`` the integer keys.
    """

    Y: np.ndarray
    ks: np.ndarray
    coeffs: tuple
    U: np.ndarray

    def __post_init__(self):
        Y = np.atleast_2d(np.asarray(self.Y, dtype=float))
        ks = np.asarray(self.ks, dtype=np.int64).reshape(-1, Y.shape[1])
        U = np.atleast_2d(np.asarray(self.U, dtype=float))
        if len(self.coeffs) != ks.shape[0]:
            raise ValueError("keys and coefficients differ in count")
        if U.shape[0] != Y.shape[0] + 1:
            raise ValueError("frame size must be r + 1")
        object.__setattr__(self, "Y", Y)
        object.__setattr__(self, "ks", ks)
        object.__setattr__(self, "U", U)
        object.__setattr__(self, "coeffs", tuple(self.coeffs))

    @property
    def q(self) -> int:
        return 1

    @property
    def r(self) -> int:
        return self.Y.shape[0]

    @property
    def n(self) -> int:
        return self.r + 1

    @property
    def d(self) -> int:
        return self.Y.shape[1]

    @property
    def coefficients(self) -> dict:
        """Map from offset ``y`` (tuple) to coefficient."""
        return {tuple(float(v) for v in self.Y @ k): a for k, a in zip(self.ks, self.coeffs)}

    def coeff(self, k) -> Optional[ACMeasure]:
        k = np.asarray(k, dtype=np.int64).reshape(-1)
        hit = np.flatnonzero(np.all(self.ks == k, axis=1))
        return self.coeffs[hit[0]] if hit.size else None

    def norm(self) -> float:
        return float(sum(a.norm() for a in self.coeffs))

    def to_measure(self) -> ComplexMeasure:
        n = self.n
        locs, ws, slabs = [], [], []
        for k, a in zip(self.ks, self.coeffs):
            y = self.Y @ k
            if a.alpha != 0:
                locs.append(self.U @ np.concatenate([[0.0], y]))
                ws.append(a.alpha)
            if np.any(a.density.samples):
                slabs.append(SlabComponent(self.U, 1, y, a.density))
        return canonicalize(ComplexMeasure(n, np.array(locs).reshape(-1, n), ws, slabs))

    @classmethod
    def from_measure(cls, mu: ComplexMeasure) -> "BanachGFS":
        """Read slabs of dimension 1 in one common frame and atoms on their lines."""
        m = canonicalize(mu)
        n = m.n
        if n < 2 or not m.slabs:
            raise UnsupportedClass("need n >= 2 and at least one line density")
        frames = {s.frame_key() for s in m.slabs}
        if len(frames) != 1 or m.slabs[0].q != 1:
            raise UnsupportedClass("line densities must share one frame")
        U = m.slabs[0].U
        h = m.slabs[0].density.h
        if any(s.density.h != h for s in m.slabs):
            raise GridMismatch("line densities use different spacings")
        local = m.locs @ U if m.locs.size else np.zeros((0, n))
        scale = max(1.0, float(np.abs(m.locs).max()) if m.locs.size else 1.0)
        if local.size and np.any(np.abs(local[:, 0]) > 1e-12 * scale):
            raise UnsupportedClass("atoms off the density lines")
        ys = [s.y for s in m.slabs] + [x[1:] for x in local]
        Y, keys = infer_lattice_basis(np.array(ys))
        if Y.shape[1] == 0:
            Y = np.eye(n - 1)[:, :1]
            keys = np.zeros((len(ys), 1), dtype=np.int64)
        table: dict = {}
        ns = len(m.slabs)
        for i, s in enumerate(m.slabs):
            k = tuple(keys[i])
            alpha, dens = table.get(k, (0j, []))
            dens.append(_snap(s.density))
            table[k] = (alpha, dens)
        for j, w in enumerate(m.weights):
            k = tuple(keys[ns + j])
            alpha, dens = table.get(k, (0j, []))
            table[k] = (alpha + w, dens)
        ks, coeffs = [], []
        for k in sorted(table):
            alpha, dens = table[k]
            ks.append(k)
            coeffs.append(ACMeasure(alpha, _merge_densities(dens, h)))
        return cls(Y, np.array(ks), coeffs, U)


def _merge_densities(dens, h) -> GridDensity:
    if not dens:
        return GridDensity([0.0], h, np.zeros(1))
    lo = min(int(round(d.origin[0] / h)) for d in dens)
    hi = max(int(round(d.origin[0] / h)) + d.shape[0] for d in dens)
    acc = np.zeros(hi - lo, dtype=complex)
    for d in dens:
        k = int(round(d.origin[0] / h)) - lo
        acc[k:k + d.shape[0]] += d.samples
    return GridDensity([lo * h], h, acc)


# ---------------------------------------------------------------- spectral form

@dataclass(frozen=True, eq=False)
class GFSSpectrum:
    """Coefficients as transforms: ``S[l, k...] = a_k(w_l)`` and ``alpha[k...] = a_k(inf)``.

    ``offset`` is the key of the first entry along the key axes.
    """

    grid: SpectralGrid
    S: np.ndarray
    alpha: np.ndarray
    offset: np.ndarray
    Y: np.ndarray
    U: np.ndarray

    @property
    def d(self) -> int:
        return self.alpha.ndim

    @classmethod
    def from_gfs(cls, F: BanachGFS, pad: float = 1.0, min_half_width: float = 0.0) -> "GFSSpectrum":
        h = F.coeffs[0].density.h
        R = 0.0
        for a in F.coeffs:
            if a.density.h != h:
                raise GridMismatch("coefficients use different spacings")
            dd = _snap(a.density)
            R = max(R, abs(dd.origin[0]), abs(dd.origin[0] + h * (dd.shape[0] - 1)))
        probe = GridDensity([-R], h, np.zeros(int(round(2 * R / h)) + 1))
        grid = spectral_grid(probe, pad=pad, min_half_width=min_half_width)
        lo = F.ks.min(axis=0)
        shape = tuple(F.ks.max(axis=0) - lo + 1)
        S = np.zeros((grid.M,) + shape, dtype=complex)
        alpha = np.zeros(shape, dtype=complex)
        for k, a in zip(F.ks, F.coeffs):
            idx = tuple(k - lo)
            alpha[idx] = a.alpha
            S[(slice(None),) + idx] = a.alpha + grid.transform(_snap(a.density))
        return cls(grid, S, alpha, lo, F.Y, F.U)

    def to_gfs(self, prune: float = PRUNE) -> BanachGFS:
        ks, coeffs = [], []
        g = self.grid
        for idx in np.ndindex(*self.alpha.shape):
            al = self.alpha[idx]
            spec = self.S[(slice(None),) + idx] - al
            if np.abs(spec).max() <= prune and abs(al) <= prune:
                continue
            ks.append(np.array(idx) + self.offset)
            coeffs.append(ACMeasure(al, g.density(spec)))
        if not ks:
            ks = [self.offset]
            coeffs = [ACMeasure(0.0, GridDensity([0.0], g.h, np.zeros(1)))]
        return BanachGFS(self.Y, np.array(ks), coeffs, self.U)

    def _with(self, S, alpha, offset) -> "GFSSpectrum":
        return GFSSpectrum(self.grid, S, alpha, np.asarray(offset, dtype=np.int64), self.Y, self.U)

    def key_axes(self):
        return tuple(range(1, 1 + self.d))

    def times(self, other: "GFSSpectrum") -> "GFSSpectrum":
        S = ss.fftconvolve(self.S, other.S, axes=self.key_axes())
        al = ss.convolve(self.alpha, other.alpha)
        return self._with(S, al, self.offset + other.offset)._trim()

    def plus(self, other: "GFSSpectrum", c: complex = 1.0) -> "GFSSpectrum":
        lo = np.minimum(self.offset, other.offset)
        hi = np.maximum(self.offset + np.array(self.alpha.shape), other.offset + np.array(other.alpha.shape))
        shape = tuple(hi - lo)
        S = np.zeros((self.grid.M,) + shape, dtype=complex)
        al = np.zeros(shape, dtype=complex)
        for src, cc in ((self, 1.0), (other, c)):
            sl = tuple(slice(a, a + b) for a, b in zip(src.offset - lo, src.alpha.shape))
            S[(slice(None),) + sl] += cc * src.S
            al[sl] += cc * src.alpha
        return self._with(S, al, lo)

    def scaled(self, c) -> "GFSSpectrum":
        return self._with(self.S * c, self.alpha * c, self.offset)

    def times_scalar(self, values: np.ndarray, at_inf: complex) -> "GFSSpectrum":
        """Multiply every coefficient by one element given by its transform."""
        shp = (-1,) + (1,) * self.d
        return self._with(self.S * values.reshape(shp), self.alpha * at_inf, self.offset)

    def shifted(self, k) -> "GFSSpectrum":
        return self._with(self.S, self.alpha, self.offset + np.asarray(k, dtype=np.int64))

    def coefficient(self, k):
        """(transform, value at infinity) of the coefficient at key ``k``."""
        idx = tuple(np.asarray(k) - self.offset)
        if any(i < 0 or i >= s for i, s in zip(idx, self.alpha.shape)):
            return np.zeros(self.grid.M, dtype=complex), 0j
        return self.S[(slice(None),) + idx], complex(self.alpha[idx])

    def unit(self) -> "GFSSpectrum":
        S = np.ones((self.grid.M,) + (1,) * self.d, dtype=complex)
        return self._with(S, np.ones((1,) * self.d, dtype=complex), np.zeros(self.d, np.int64))

    def norms(self) -> np.ndarray:
        """Coefficient norms ``|alpha| + int |f|`` (quadrature of the density)."""
        out = np.zeros(self.alpha.shape)
        g = self.grid
        for idx in np.ndindex(*self.alpha.shape):
            al = self.alpha[idx]
            spec = self.S[(slice(None),) + idx] - al
            dens = nx.fftn(spec) / (g.h * g.M)
            out[idx] = abs(al) + g.h * float(np.abs(dens).sum())
        return out

    def _trim(self, prune: float = PRUNE) -> "GFSSpectrum":
        mag = np.abs(self.S).max(axis=0) + np.abs(self.alpha)
        keep = np.argwhere(mag > prune)
        if keep.size == 0:
            return self._with(self.S[(slice(None),) + (slice(0, 1),) * self.d],
                              self.alpha[(slice(0, 1),) * self.d], self.offset)
        lo = keep.min(axis=0)
        hi = keep.max(axis=0) + 1
        sl = tuple(slice(a, b) for a, b in zip(lo, hi))
        return self._with(self.S[(slice(None),) + sl], self.alpha[sl], self.offset + lo)

    def torus_values(self, G: int) -> tuple:
        """Values on the product grid (w samples, torus grid) and at (inf, torus grid)."""
        shape = (G,) * self.d
        arr = np.zeros((self.grid.M,) + shape, dtype=complex)
        al = np.zeros(shape, dtype=complex)
        for idx in np.ndindex(*self.alpha.shape):
            k = tuple((np.array(idx) + self.offset) % G)
            arr[(slice(None),) + k] += self.S[(slice(None),) + idx]
            al[k] += self.alpha[idx]
        axes = self.key_axes()
        return G ** self.d * nx.ifftn(arr, axes=axes), G ** self.d * nx.ifftn(al)


# ---------------------------------------------------------------- invertibility

@dataclass(frozen=True, eq=False)
class BanachDecision:
    """Per-Gelfand-point certification of the scalar series.

    Not certified over the continuum of ``w``; ``worst`` is ``(w, theta)`` of
    the smallest sampled modulus.
    """

    invertible: bool
    status: str
    w: np.ndarray
    minima: np.ndarray
    lower_bounds: np.ndarray
    worst: tuple

    def __bool__(self):
        return self.invertible


def check_invertible_banach_gfs(F: BanachGFS, w_grid=None, grid_per_axis: int = 256) -> BanachDecision:
    """Certify ``z2 -> sum_k phi_w(a_k) exp(i z2.Y k)`` for each sampled ``w`` and at infinity."""
    if F.d > 3:
        raise TorusDimTooLarge(f"offset lattice dimension {F.d} exceeds 3")
    if w_grid is None:
        w_grid = np.arange(-DEFAULT_W, DEFAULT_W + DEFAULT_W_STEP / 2, DEFAULT_W_STEP)
    w = np.asarray(w_grid, dtype=float).reshape(-1)
    G = int(grid_per_axis)
    rows = np.zeros((w.size + 1, len(F.coeffs)), dtype=complex)
    for j, a in enumerate(F.coeffs):
        d = a.density
        rows[:-1, j] = a.alpha + d.cell * nx.direct_dtft_nd(d.samples, d.origin, d.h, w[:, None])
        rows[-1, j] = a.alpha
    dd = F.d
    arr = np.zeros((rows.shape[0],) + (G,) * dd, dtype=complex)
    for j, k in enumerate(F.ks):
        arr[(slice(None),) + tuple(k % G)] += rows[:, j]
    vals = G ** dd * nx.ifftn(arr, axes=tuple(range(1, dd + 1)))
    mod = np.abs(vals).reshape(rows.shape[0], -1)
    minima = mod.min(axis=1)
    rho = 2 * math.pi / G * math.sqrt(dd)
    bounds = np.empty(rows.shape[0])
    for i in range(rows.shape[0]):
        L = lipschitz_bound(LatticeGFS(np.eye(dd), F.ks, rows[i]))
        bounds[i] = minima[i] - L * rho / 2
    i = int(np.argmin(minima))
    flat = int(np.argmin(mod[i]))
    theta = 2 * math.pi * np.array(np.unravel_index(flat, (G,) * dd), dtype=float) / G
    wi = float(w[i]) if i < w.size else math.inf
    if minima.min() < REFUTE_TOL:
        status = "refuted"
    elif np.all(bounds > 0):
        status = "certified"
    else:
        status = "undecided"
    return BanachDecision(status == "certified", status, np.concatenate([w, [math.inf]]),
                          minima, bounds, (wi, theta))


def _inverse_norm(values: np.ndarray, alpha: complex, grid: SpectralGrid) -> float:
    """Norm of the element with transform ``1/values`` and value ``1/alpha`` at infinity."""
    dens = nx.fftn(1.0 / values - 1.0 / alpha) / (grid.h * grid.M)
    return abs(1.0 / alpha) + grid.h * float(np.abs(dens).sum())


def _dominant(spec: GFSSpectrum):
    """Key ``k0`` with ``|a_k0^{-1}| * sum_{k != k0} |a_k| < 1``, and that ratio."""
    norms = spec.norms()
    total = float(norms.sum())
    for flat in np.argsort(-norms.reshape(-1), kind="stable"):
        idx = np.unravel_index(flat, norms.shape)
        k = np.array(idx) + spec.offset
        v, al = spec.coefficient(k)
        if al == 0 or np.abs(v).min() < ZERO_TOL:
            continue
        ratio = _inverse_norm(v, al, spec.grid) * (total - norms[idx])
        if ratio < 1:
            return k, ratio
    raise NoDominantCoefficient("no coefficient whose inverse norm times the rest is below 1")


def _series_terms(r: float, tol: float) -> int:
    J = 1
    while r ** (J + 1) / (1 - r) >= tol:
        J += 1
    return J


def _remainder(spec: GFSSpectrum, k0, inv_spec, inv_alpha) -> GFSSpectrum:
    """``a_{k0}^{-1} * (F shifted by -k0) - e``."""
    R = spec.shifted(-np.asarray(k0)).times_scalar(inv_spec, inv_alpha)
    return R.plus(R.unit(), -1.0)._trim()


def invert_banach_gfs_dominant(F: BanachGFS, tol: float = 1e-10, pad: float = 1.0) -> BanachGFS:
    """Neumann inverse ``e^{-i y0.z2} a0^{-1} sum_j (-R)^j`` around a dominant coefficient."""
    spec = GFSSpectrum.from_gfs(F, pad=pad)
    k0, r = _dominant(spec)
    v0, a0 = spec.coefficient(k0)
    inv_spec, inv_alpha = 1.0 / v0, 1.0 / a0
    R = _remainder(spec, k0, inv_spec, inv_alpha)
    J = _series_terms(r, tol)
    acc = R.unit()
    for _ in range(J):
        acc = acc.times(R.scaled(-1.0)).plus(R.unit())._trim()
    out = acc.times_scalar(inv_spec, inv_alpha).shifted(-k0)
    G = out.to_gfs()
    res = _product_residual(F, G, pad)
    if res >= max(10 * tol, 1e-8):
        raise ResidualTooLarge(f"Neumann inverse residual {res:.3e}")
    return G


def _product_residual(F: BanachGFS, G: BanachGFS, pad: float) -> float:
    """``sup_w sum_k |(F G)_k(w) - delta_k|`` including the point at infinity."""
    a = GFSSpectrum.from_gfs(F, pad=pad)
    b = GFSSpectrum.from_gfs(G, pad=pad)
    if a.grid.M != b.grid.M:
        M = max(a.grid.M, b.grid.M)
        hw = M * a.grid.h / 2 - a.grid.h
        a = GFSSpectrum.from_gfs(F, pad=pad, min_half_width=hw)
        b = GFSSpectrum.from_gfs(G, pad=pad, min_half_width=hw)
    P = a.times(b).plus(a.unit(), -1.0)
    ax = P.key_axes()
    return float(max(np.abs(P.S).sum(axis=ax).max(), np.abs(P.alpha).sum()))


# ---------------------------------------------------------------- logarithm

def a_log_spectrum(values: np.ndarray, alpha: complex, grid: SpectralGrid, stab_tol: float = 0.5):
    """Logarithm in the coefficient algebra from transform samples (FFT order).

    Returns ``(log spectrum, log at infinity)``.  Raises
    NonzeroWindingInCoefficient when the transform winds around 0.
    """
    vc = np.fft.fftshift(values)
    c = grid.M // 2
    psi = distinguished_log_grid(vc, (c,))
    wind = ((psi[-1] - psi[0]).imag + np.angle(vc[0] / vc[-1])) / (2 * math.pi)
    if abs(wind) > 0.5:
        raise NonzeroWindingInCoefficient(f"coefficient transform winds {wind:.2f} times")
    ends = np.array([psi[1], psi[-1]])
    kappa = ends.mean()
    if np.max(np.abs(ends - kappa)) > stab_tol:
        raise NonzeroWindingInCoefficient("coefficient log does not settle at the band edge")
    base = np.log(vc[c])
    at_inf = base + kappa
    # keep the value at infinity a logarithm of alpha exactly
    if alpha != 0:
        k = np.round((at_inf - np.log(alpha)).imag / (2 * math.pi))
        at_inf = np.log(alpha) + 2j * math.pi * k
    return np.fft.ifftshift(base + psi), complex(at_inf)


def log_spectral(spec: GFSSpectrum, tol: float = 1e-10):
    """Dominant-coefficient logarithm on spectral arrays; returns ``(k0, G)``."""
    k0, r = _dominant(spec)
    v0, a0 = spec.coefficient(k0)
    inv_spec = 1.0 / v0
    R = _remainder(spec, k0, inv_spec, 1.0 / a0)
    J = _series_terms(r, tol)
    # Horner for sum_{j>=1} (-1)^(j+1) R^j / j
    acc = R.unit().scaled((-1) ** (J + 1) / J)
    for j in range(J - 1, 0, -1):
        acc = R.times(acc).plus(R.unit(), (-1) ** (j + 1) / j)._trim()
    series = R.times(acc)._trim()
    lg, lg_inf = a_log_spectrum(v0, a0, spec.grid)
    S0 = np.ones((spec.grid.M,) + (1,) * spec.d, dtype=complex)
    log0 = spec._with(S0 * lg.reshape((-1,) + (1,) * spec.d),
                      np.full((1,) * spec.d, lg_inf, dtype=complex), np.zeros(spec.d, np.int64))
    return k0, series.plus(log0)._trim()


def log_banach_gfs_dominant(F: BanachGFS, tol: float = 1e-10, pad: float = 1.0, check: bool = True):
    """``F(w, z2) = exp(i gamma2.z2 + G(w, z2))`` with ``gamma2 = Y k0``.

    Returns ``(gamma2, G)``.  The reconstruction is checked on the product of
    the spectral samples and a torus grid.
    """
    spec = GFSSpectrum.from_gfs(F, pad=pad)
    k0, Gs = log_spectral(spec, tol)
    G = Gs.to_gfs()
    if check:
        res = log_residual(spec, k0, Gs)
        if res >= max(10 * tol, 1e-8):
            raise ResidualTooLarge(f"log reconstruction residual {res:.3e}")
    return F.Y @ k0, G


def log_residual(spec: GFSSpectrum, k0, Gs: GFSSpectrum) -> float:
    span = max(int(np.max(np.array(spec.alpha.shape))), int(np.max(np.array(Gs.alpha.shape))), 2)
    G = 1 << int(math.ceil(math.log2(4 * span + np.abs(np.asarray(k0)).max() + 8)))
    G = min(G, 256 if spec.d == 1 else 32)
    fv, fi = spec.torus_values(G)
    gv, gi = Gs.torus_values(G)
    theta = 2 * math.pi * np.arange(G) / G
    grids = np.meshgrid(*([theta] * spec.d), indexing="ij")
    phase = np.exp(1j * sum(k * t for k, t in zip(np.asarray(k0), grids)))
    lhs = fv
    rhs = phase[None, ...] * np.exp(gv)
    return float(max(np.abs(lhs - rhs).max(), np.abs(fi - phase * np.exp(gi)).max()))
