"""Measures ``alpha delta_0 + f lambda^n``: invertibility, inverse, logarithm.

A density sampled on ``h Z^n`` is the lattice measure ``h^n sum f_k delta_{hk}``.
Its transform is periodic, and on a periodic window of ``M`` samples per axis
the discrete Fourier transform gives it exactly at ``z_l = 2 pi l / (M h)``.
Inverse and logarithm are formed pointwise on those samples and mapped back
by the inverse transform; the only error is the wrap-around of tails beyond
the window, which the residual checks measure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import _numerics as nx
from .charfn import (
    DEFAULT_DZ,
    DEFAULT_Z,
    distinguished_log,
    distinguished_log_grid,
    sample_cf_line,
    winding_index_1d,
)
from .errors import GridMismatch, NotStabilized, ResidualTooLarge, UnsupportedClass, ZeroOnGrid
from .measure_core import (
    ComplexMeasure,
    GridDensity,
    SlabComponent,
    canonicalize,
    project_line,
)
from .sigma import sigma_power_cf

ZERO_TOL = 1e-9
LEVY_TOL = 1e-4


@dataclass(frozen=True, eq=False)
class ACMeasure:
    """``alpha * delta_0 + density`` with a full-dimensional density."""

    alpha: complex
    density: GridDensity

    def __post_init__(self):
        object.__setattr__(self, "alpha", complex(self.alpha))

    @property
    def n(self) -> int:
        return self.density.q

    def to_measure(self) -> ComplexMeasure:
        n = self.n
        slabs = [SlabComponent(np.eye(n), n, [], self.density)]
        locs = np.zeros((1, n)) if self.alpha != 0 else np.zeros((0, n))
        w = [self.alpha] if self.alpha != 0 else []
        return canonicalize(ComplexMeasure(n, locs, w, slabs))

    def norm(self) -> float:
        return abs(self.alpha) + self.density.abs_mass()

    @classmethod
    def from_measure(cls, mu: ComplexMeasure, h: Optional[float] = None) -> "ACMeasure":
        """Read an atom at 0 plus one full-dimensional identity-frame density."""
        m = canonicalize(mu)
        n = m.n
        if m.locs.shape[0] and np.any(m.locs != 0):
            raise UnsupportedClass("atoms away from the origin")
        alpha = complex(m.weights[0]) if m.weights.size else 0j
        slabs = [s for s in m.slabs]
        if any(s.q != n or not np.array_equal(s.U, np.eye(n)) for s in slabs):
            raise UnsupportedClass("density is not full-dimensional in the standard frame")
        if not slabs:
            hh = h if h is not None else 1.0
            return cls(alpha, GridDensity(np.zeros(n), hh, np.zeros((1,) * n)))
        if len(slabs) > 1:
            raise GridMismatch("densities on distinct sample lattices")
        return cls(alpha, _snap(slabs[0].density))

    @classmethod
    def identity(cls, n: int = 1, h: float = 1.0) -> "ACMeasure":
        return cls(1.0, GridDensity(np.zeros(n), h, np.zeros((1,) * n)))


def _snap(d: GridDensity) -> GridDensity:
    """Check that the sample lattice contains 0 and snap the origin onto it."""
    k = d.origin / d.h
    if np.any(np.abs(k - np.round(k)) > 1e-9 * np.maximum(1.0, np.abs(k))):
        raise GridMismatch("density grid does not contain the origin")
    return GridDensity(np.round(k) * d.h, d.h, d.samples)


# ---------------------------------------------------------------- spectral tools

@dataclass(frozen=True, eq=False)
class SpectralGrid:
    """Periodic window of ``M`` samples per axis on spacing ``h``."""

    n: int
    h: float
    M: int

    @property
    def dz(self) -> float:
        return 2 * math.pi / (self.M * self.h)

    def freqs(self) -> np.ndarray:
        """Frequencies along one axis in FFT order."""
        return self.dz * np.fft.fftfreq(self.M, d=1.0 / self.M)

    def centered_freqs(self) -> np.ndarray:
        return self.dz * (np.arange(self.M) - self.M // 2)

    def place(self, d: GridDensity) -> np.ndarray:
        """Density samples folded into the periodic array (index k -> k mod M)."""
        arr = np.zeros((self.M,) * self.n, dtype=complex)
        k0 = np.round(d.origin / d.h).astype(np.int64)
        idx = np.ix_(*[(k0[j] + np.arange(d.shape[j])) % self.M for j in range(self.n)])
        np.add.at(arr, idx, d.samples)
        return arr

    def transform(self, d: GridDensity) -> np.ndarray:
        """DTFT of the density at the grid frequencies, FFT order."""
        if d.h != self.h:
            raise GridMismatch("density spacing differs from spectral grid")
        return (self.h * self.M) ** self.n * nx.ifftn(self.place(d))

    def density(self, spectrum: np.ndarray) -> GridDensity:
        """Inverse of ``transform``: coefficients on ``[-M/2, M/2) h``."""
        arr = nx.fftn(spectrum) / (self.h * self.M) ** self.n
        arr = np.fft.fftshift(arr)
        origin = np.full(self.n, -(self.M // 2) * self.h)
        return GridDensity(origin, self.h, arr)


def spectral_grid(d: GridDensity, pad: float = 2.0, dz: Optional[float] = None,
                  min_half_width: float = 0.0) -> SpectralGrid:
    """Window covering ``pad`` times the support radius (and ``min_half_width``)."""
    d = _snap(d)
    hi = d.origin + d.h * (np.array(d.shape) - 1)
    R = float(max(np.max(np.abs(d.origin)), np.max(np.abs(hi)), d.h))
    half = max(pad * R, min_half_width)
    M = 2 * int(math.ceil(half / d.h)) + 2
    if dz is not None:
        M = max(M, int(math.ceil(2 * math.pi / (d.h * dz))))
    M = 1 << int(math.ceil(math.log2(M)))
    return SpectralGrid(d.q, d.h, M)


def ac_symbol(mu: ACMeasure, grid: SpectralGrid) -> np.ndarray:
    return mu.alpha + grid.transform(_snap(mu.density))


# ---------------------------------------------------------------- decisions

@dataclass(frozen=True, eq=False)
class Decision:
    """Outcome of a numerical invertibility test.

    ``status`` is 'invertible', 'refuted' or 'inconclusive'; ``invertible`` is
    True only for the first.  ``argmin`` is the sampled location of the
    smallest modulus (the witness when refuted).
    """

    invertible: bool
    status: str
    min_abs: float
    argmin: np.ndarray
    tail_ok: bool = True
    note: str = ""

    def __bool__(self):
        return self.invertible


def _grid_points(grid: SpectralGrid, flat_index) -> np.ndarray:
    f = grid.freqs()
    idx = np.unravel_index(flat_index, (grid.M,) * grid.n)
    return np.array([f[i] for i in idx])


def is_invertible_ac(mu: ACMeasure, Z: Optional[float] = None, margin: float = 1e-6,
                     pad: float = 2.0) -> Decision:
    """Test ``alpha != 0`` and zero-freeness of the transform on a grid.

    The transform is sampled on the full periodic band (or on ``|z|_inf <= Z``
    when given).  Numerical, not certified.
    """
    grid = spectral_grid(mu.density, pad=pad)
    S = ac_symbol(mu, grid)
    f = grid.freqs()
    mesh = np.meshgrid(*([f] * grid.n), indexing="ij")
    zinf = np.max(np.abs(np.stack(mesh)), axis=0)
    mask = np.ones(S.shape, bool) if Z is None else zinf <= Z
    mod = np.where(mask, np.abs(S), np.inf)
    i = int(np.argmin(mod))
    mn = float(mod.reshape(-1)[i])
    where = _grid_points(grid, i)
    scale = abs(mu.alpha) + mu.density.abs_mass()
    if abs(mu.alpha) <= 1e-12 * max(scale, 1e-300):
        return Decision(False, "refuted", mn, where, False, "atom at the origin is zero")
    if mn < ZERO_TOL:
        return Decision(False, "refuted", mn, where, True, "transform vanishes on the grid")
    zmax = zinf[mask].max()
    tail = mask & (zinf >= 0.9 * zmax)
    tail_ok = bool(np.all(np.abs(S[tail] - mu.alpha) < 0.5 * abs(mu.alpha)))
    if mn > max(1e-6, margin) and tail_ok:
        return Decision(True, "invertible", mn, where, True)
    return Decision(False, "inconclusive", mn, where, tail_ok,
                    "minimum below margin" if tail_ok else "transform not near alpha at the band edge")


def _control_directions(n: int):
    dirs = [np.eye(n)[j] for j in range(n)]
    if n >= 2:
        dirs.append(np.ones(n) / math.sqrt(n))
    return dirs


def invert_ac(mu: ACMeasure, Z: float = 32.0, dz: Optional[float] = None, tol: float = 1e-6,
              pad: float = 2.0) -> ACMeasure:
    """Inverse ``(1/alpha) delta_0 + g`` via the sampled reciprocal transform.

    ``dz`` caps the spectral step (refines the periodic window); ``Z`` is the
    half-width of the control lines on which ``|mu^ * inv^ - 1| < tol`` is
    verified.
    """
    if mu.alpha == 0:
        raise ZeroOnGrid("atom at the origin is zero; the transform vanishes at infinity")
    grid = spectral_grid(mu.density, pad=pad, dz=dz)
    S = ac_symbol(mu, grid)
    mod = np.abs(S)
    if mod.min() < ZERO_TOL:
        i = int(np.argmin(mod))
        raise ZeroOnGrid(f"transform vanishes at z = {_grid_points(grid, i)}")
    inv = ACMeasure(1.0 / mu.alpha, grid.density(1.0 / S - 1.0 / mu.alpha))
    res = product_residual(mu, inv, Z)
    if res >= tol:
        raise ResidualTooLarge(f"inverse residual {res:.3e} exceeds {tol:.1e}; enlarge the window")
    return inv


def product_residual(mu: ACMeasure, nu: ACMeasure, Z: float = 32.0, dz: float = DEFAULT_DZ) -> float:
    """``sup |mu^ nu^ - 1|`` over the control lines (axes, plus diagonal for n >= 2)."""
    a, b = mu.to_measure(), nu.to_measure()
    worst = 0.0
    for d in _control_directions(mu.n):
        va = sample_cf_line(a, d, Z, dz).values
        vb = sample_cf_line(b, d, Z, dz).values
        worst = max(worst, float(np.abs(va * vb - 1).max()))
    return worst


# ---------------------------------------------------------------- logarithm

@dataclass(frozen=True, eq=False)
class LevyDensityDecomposition:
    """``mu^ = c * sigma^(z)**m * exp(g^(z))`` with ``g`` a density (n = 1: any m)."""

    m: int
    g: GridDensity
    c: complex
    residual: float = 0.0

    @property
    def n(self) -> int:
        return self.g.q

    def exponent_measure(self) -> ComplexMeasure:
        n = self.n
        return canonicalize(ComplexMeasure(n, slabs=[SlabComponent(np.eye(n), n, [], self.g)]))

    def levy_density(self, x):
        """``m e^{-|x|}/x`` plus the sampled finite part, on the grid of ``g`` (n = 1)."""
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            sing = np.where(x != 0, self.m * np.exp(-np.abs(x)) / x, 0.0)
        k = np.round((x - self.g.origin[0]) / self.g.h).astype(int)
        inside = (k >= 0) & (k < self.g.shape[0])
        gv = np.where(inside, self.g.samples[np.clip(k, 0, self.g.shape[0] - 1)], 0)
        return sing + gv


def _smooth_step(t):
    t = np.clip(t, 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        a = np.where(t > 0, np.exp(-1.0 / np.where(t > 0, t, 1.0)), 0.0)
        b = np.where(t < 1, np.exp(-1.0 / np.where(t < 1, 1 - t, 1.0)), 0.0)
    return a / (a + b)


def sigma_band_log(zc: np.ndarray, h: float, m: int) -> np.ndarray:
    """Log of the sigma power transform adapted to a periodic band.

    Equals ``2i m arctan(z)`` for ``|z| <= pi/(2h)`` and blends smoothly into
    the log of the lattice-sampled sigma near the band edge, so that the
    difference with any band log of winding ``m`` closes periodically.
    ``zc`` are the centered band frequencies.
    """
    if m == 0:
        return np.zeros(zc.shape, dtype=complex)
    q = np.exp((1j * zc - 1.0) * h)
    lat = -1.0 + h * (1 + q) / (1 - q)
    c = int(np.argmin(np.abs(zc)))
    lat_log = distinguished_log_grid(lat, (c,))
    cont = 2j * np.arctan(zc)
    w = _smooth_step((np.abs(zc) * h / math.pi - 0.5) / 0.4)
    return m * (cont + w * (lat_log - cont))


def _ends_constant(psi_c: np.ndarray, n: int):
    """Average of the log over the symmetric band edge, and its spread."""
    M = psi_c.shape[0]
    c = M // 2
    if n == 1:
        ends = np.array([psi_c[1], psi_c[M - 1]])
    else:
        idx = np.indices(psi_c.shape) - c
        rad = np.max(np.abs(idx), axis=0)
        ends = psi_c[rad == c - 1]
    kappa = ends.mean()
    return kappa, float(np.max(np.abs(ends - kappa)))


def _checked_winding(mu: ACMeasure, psi_c, Sc, Z, dz) -> int:
    m = winding_index_1d(distinguished_log(sample_cf_line(mu.to_measure(), [1.0], Z, dz)))
    band = ((psi_c[-1] - psi_c[0]).imag + np.angle(Sc[0] / Sc[-1])) / (2 * math.pi)
    if int(round(band)) != m:
        raise NotStabilized(f"winding {m} on [-Z, Z] differs from band winding {band:.3f}")
    return m


def winding_ac(mu: ACMeasure, Z: float = DEFAULT_Z, dz: float = DEFAULT_DZ, pad: float = 2.0) -> int:
    """Winding index of a 1D ``alpha delta_0 + f``, read on ``[-Z, Z]`` and checked on the full band."""
    if mu.n != 1:
        raise ValueError("winding index is defined for n = 1")
    grid = spectral_grid(mu.density, pad=pad)
    Sc = np.fft.fftshift(ac_symbol(mu, grid))
    if mu.alpha == 0 or np.abs(Sc).min() < ZERO_TOL:
        raise ZeroOnGrid("measure is not invertible on the sample grid")
    psi = distinguished_log_grid(Sc, (grid.M // 2,))
    return _checked_winding(mu, psi, Sc, Z, dz)


def levy_decompose(mu: ACMeasure, Z: float = DEFAULT_Z, dz: float = DEFAULT_DZ, pad: float = 2.0,
                   tol: float = LEVY_TOL, stab_tol: float = 0.5) -> LevyDensityDecomposition:
    """Split the distinguished log into the sigma winding part and a density.

    n = 1: the winding ``m`` is read from the line path on ``[-Z, Z]`` and must
    match the exact winding over the periodic band; n >= 2: ``m = 0``.  The
    remaining log is shifted by its band-edge average (the branch of
    ``log alpha``) and inverse transformed into ``g``.
    """
    n = mu.n
    grid = spectral_grid(mu.density, pad=pad)
    S = ac_symbol(mu, grid)
    if mu.alpha == 0 or np.abs(S).min() < ZERO_TOL:
        raise ZeroOnGrid("measure is not invertible on the sample grid")
    Sc = np.fft.fftshift(S)
    c0 = (grid.M // 2,) * n
    psi = distinguished_log_grid(Sc, c0)
    zc = grid.centered_freqs()
    m = 0
    if n == 1:
        m = _checked_winding(mu, psi, Sc, Z, dz)
        psi = psi - sigma_band_log(zc, grid.h, m)
    kappa, spread = _ends_constant(psi, n)
    if spread > stab_tol:
        raise NotStabilized(f"log does not settle at the band edge (spread {spread:.3g})")
    g = grid.density(np.fft.ifftshift(psi - kappa))
    c = complex(Sc[c0] * np.exp(kappa))
    dec = LevyDensityDecomposition(m, g, c)
    res = levy_residual(mu, dec, Z, dz)
    if res >= tol:
        raise ResidualTooLarge(f"log reconstruction residual {res:.3e} exceeds {tol:.1e}")
    return LevyDensityDecomposition(m, g, c, res)


def levy_residual(mu: ACMeasure, dec: LevyDensityDecomposition, Z: float = DEFAULT_Z,
                  dz: float = DEFAULT_DZ) -> float:
    a = mu.to_measure()
    gm = dec.exponent_measure()
    worst = 0.0
    for d in _control_directions(mu.n):
        lhs = sample_cf_line(a, d, Z, dz)
        gh = sample_cf_line(gm, d, Z, dz).values
        rhs = dec.c * np.exp(gh)
        if dec.m:
            rhs = rhs * sigma_power_cf(dec.m, lhs.z * d[0])
        worst = max(worst, float(np.abs(lhs.values - rhs).max()))
    return worst


# ---------------------------------------------------------------- Cramer-Wold

@dataclass(frozen=True, eq=False)
class CramerWoldReport:
    full: Decision
    directions: tuple
    decisions: tuple
    consistent: bool

    @property
    def failing(self):
        return [a for a, d in zip(self.directions, self.decisions) if not d.invertible]


def project_ac(a, mu: ACMeasure) -> ACMeasure:
    """Line image as an ACMeasure, binned onto a lattice through the origin."""
    p = project_line(a, mu.to_measure())
    try:
        return ACMeasure.from_measure(p)
    except GridMismatch:
        return ACMeasure.from_measure(project_line(a, mu.to_measure(), method="cic"))


def cramer_wold_check(mu: ACMeasure, directions: Sequence, Z: Optional[float] = None) -> CramerWoldReport:
    """Per-direction invertibility of the line images versus the full decision."""
    full = is_invertible_ac(mu, Z)
    dirs, decs = [], []
    for a in directions:
        a = np.asarray(a, dtype=float)
        dirs.append(a)
        decs.append(is_invertible_ac(project_ac(a, mu), Z))
    if full.invertible:
        ok = all(d.invertible for d in decs)
    else:
        ok = full.status == "refuted" or any(not d.invertible for d in decs) or not decs
    return CramerWoldReport(full, tuple(dirs), tuple(decs), ok)
