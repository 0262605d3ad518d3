"""Factorization ``mu = c delta_gamma * prod_j U_j(sigma^{*m_j} (x) delta_0) * exp(nu)``.

Supported classes: finite lattice measures with a dominant atom, measures
``alpha delta_0 + f`` (n <= 3), and for n = 2 series of line densities in one
frame with a dominant coefficient.  The exponent is normalized to
``nu(R^n) = 0`` so that ``c = mu(R^n)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .ac_algebra import (
    ACMeasure,
    _control_directions,
    is_invertible_ac,
    levy_decompose,
    sigma_band_log,
    winding_ac,
)
from .banach_gfs import (
    BanachGFS,
    GFSSpectrum,
    _merge_densities,
    check_invertible_banach_gfs,
    log_residual,
    log_spectral,
)
from .charfn import DEFAULT_DZ, DEFAULT_Z, eval_cf, sample_cf_line
from .errors import (
    GridMismatch,
    HasSigmaFactors,
    NoDominantAtom,
    NoDominantCoefficient,
    NotInvertible,
    ResidualTooLarge,
    UnsupportedClass,
)
from .lattice_gfs import (
    LatticeGFS,
    certify_invertible_lattice,
    exp_lattice,
    lattice_from_measure,
    log_lattice_dominant,
)
from .measure_core import (
    ComplexMeasure,
    DEFAULT_WINDOW,
    GridDensity,
    SlabComponent,
    atom_at,
    atomic,
    canonicalize,
    convolve,
    dirac,
    exp_measure,
    linear_combine,
    scale,
    total_mass,
)
from .sigma import DEFAULT_H, embed_sigma_slab, sigma_log_cf

DEFAULT_TOL = 1e-5


@dataclass(frozen=True, eq=False)
class TaylorFactorization:
    """``c delta_gamma * prod_j U_j(sigma^{*m_j} (x) delta_0) * exp(nu)``.

    ``lattice`` holds ``nu`` as a lattice series when it is discrete, which
    lets powers use the exact coefficient-space exponential.  ``h`` is the
    sample spacing used when the sigma factors are realized as measures.
    """

    gamma: np.ndarray
    factors: tuple
    nu: ComplexMeasure
    c: complex
    route: str = ""
    residual: float = 0.0
    lattice: Optional[LatticeGFS] = None
    h: float = DEFAULT_H

    @property
    def n(self) -> int:
        return self.nu.n

    @property
    def index(self) -> tuple:
        return tuple(int(m) for _, m in self.factors)


@dataclass(frozen=True, eq=False)
class CLK0Triplet:
    """``c exp(i gamma.z + int (e^{iz.x} - 1) nu0(dx) + sum_j m_j Log sigma^(u_j.z))``."""

    c: complex
    gamma: np.ndarray
    nu0: ComplexMeasure
    lambda_atoms: tuple

    @property
    def n(self) -> int:
        return self.nu0.n


# ---------------------------------------------------------------- helpers

def _normalized(nu: ComplexMeasure, c: complex):
    """Move ``nu(R^n)`` into ``c`` so that the exponent has zero total mass."""
    beta = total_mass(nu)
    if beta == 0:
        return nu, complex(c)
    nu = linear_combine([(1.0, nu), (-beta, dirac(np.zeros(nu.n)))])
    return nu, complex(c * np.exp(beta))


def _rotation_to(u: np.ndarray) -> np.ndarray:
    """Rotation of R^2 with first column ``u``."""
    return np.array([[u[0], -u[1]], [u[1], u[0]]])


def _lex_positive(u: np.ndarray, m: int):
    nz = np.flatnonzero(np.abs(u) > 1e-15)
    if nz.size and u[nz[0]] < 0:
        return -u, -m
    return u, m


# ---------------------------------------------------------------- routes

def _factor_lattice(mu: ComplexMeasure, tol: float, grid: int) -> TaylorFactorization:
    lat = lattice_from_measure(mu)
    if lat.d <= 3:
        cert = certify_invertible_lattice(lat, grid)
        if cert.status == "refuted":
            raise NotInvertible(f"lattice series vanishes at torus point {cert.witness}")
    try:
        gamma, nu_lat = log_lattice_dominant(lat, tol=min(tol, 1e-12) * 1e-2)
    except NoDominantAtom as e:
        raise NoDominantCoefficient(str(e)) from e
    beta = complex(nu_lat.ws.sum())
    zero = np.zeros((1, nu_lat.d), dtype=np.int64)
    nu_lat = LatticeGFS(nu_lat.B, np.vstack([nu_lat.ks, zero]), np.concatenate([nu_lat.ws, [-beta]]))
    return TaylorFactorization(np.asarray(gamma, float), (), nu_lat.to_measure(), complex(np.exp(beta)),
                               "lattice", lattice=nu_lat)


def _split_atom(mu: ComplexMeasure):
    """Single atom at ``a`` plus full-dimensional densities -> (a, mu shifted by -a)."""
    m = canonicalize(mu)
    if m.locs.shape[0] > 1:
        raise UnsupportedClass("several atoms next to a full-dimensional density")
    if m.locs.shape[0] == 0 or not np.any(m.locs[0]):
        return np.zeros(m.n), m
    a = m.locs[0]
    return a, convolve(m, dirac(-a), window=np.inf)


def _factor_ac(mu: ComplexMeasure, tol: float, Z: float, dz: float) -> TaylorFactorization:
    gamma, base = _split_atom(mu)
    try:
        ac = ACMeasure.from_measure(base)
    except GridMismatch as e:
        raise UnsupportedClass(f"density grid does not contain the atom: {e}") from e
    dec0 = is_invertible_ac(ac)
    if dec0.status == "refuted":
        raise NotInvertible(f"{dec0.note} (|mu^| = {dec0.min_abs:.3e} at z = {dec0.argmin})")
    dec = levy_decompose(ac, Z=Z, dz=dz, tol=max(tol, 1e-12))
    n = ac.n
    factors = ((np.eye(n), dec.m),) if dec.m else ()
    nu, c = _normalized(dec.exponent_measure(), dec.c)
    return TaylorFactorization(gamma, factors, nu, c, "ac", h=dec.g.h)


def _section(F: BanachGFS) -> ACMeasure:
    h = F.coeffs[0].density.h
    alpha = sum(a.alpha for a in F.coeffs)
    return ACMeasure(alpha, _merge_densities([a.density for a in F.coeffs], h))


def _factor_mixed(mu: ComplexMeasure, tol: float, Z: float, dz: float, grid: int) -> TaylorFactorization:
    F = BanachGFS.from_measure(mu)
    chk = check_invertible_banach_gfs(F, grid_per_axis=grid)
    if chk.status == "refuted":
        raise NotInvertible(f"coefficient series vanishes at (w, theta) = {chk.worst}")
    m = winding_ac(_section(F), Z=Z, dz=dz)
    spec = GFSSpectrum.from_gfs(F, pad=1.0, min_half_width=DEFAULT_WINDOW)
    if m:
        zc = spec.grid.centered_freqs()
        div = np.exp(-np.fft.ifftshift(sigma_band_log(zc, spec.grid.h, m)))
        spec = spec.times_scalar(div, (-1.0) ** m)
    k0, Gs = log_spectral(spec, tol=min(tol, 1e-10))
    res = log_residual(spec, k0, Gs)
    if res >= max(tol, 1e-8):
        raise ResidualTooLarge(f"coefficient log residual {res:.3e}")
    G = Gs.to_gfs()
    u = F.U[:, 0]
    gamma = F.U @ np.concatenate([[0.0], F.Y @ k0])
    factors = ((_rotation_to(u), m),) if m else ()
    nu, c = _normalized(G.to_measure(), 1.0)
    return TaylorFactorization(gamma, factors, nu, c, "mixed", h=spec.grid.h)


def factorize(mu: ComplexMeasure, tol: float = DEFAULT_TOL, Z: float = DEFAULT_Z, dz: float = DEFAULT_DZ,
              grid: int = 256, check: bool = True) -> TaylorFactorization:
    """Dispatch on the measure class and verify the CF reconstruction on the control lines."""
    m = canonicalize(mu)
    if not m.slabs:
        if not m.weights.size:
            raise NotInvertible("the zero measure is not invertible")
        fac = _factor_lattice(m, tol, grid)
    elif all(s.q == m.n for s in m.slabs):
        fac = _factor_ac(m, tol, Z, dz)
    elif m.n == 2 and all(s.q == 1 for s in m.slabs):
        fac = _factor_mixed(m, tol, Z, dz, grid)
    else:
        raise UnsupportedClass("measure is outside the lattice, density and line-series classes")
    if not check:
        return fac
    res = clk0_residual(to_clk0(fac), m, Z, dz)
    if res >= tol:
        raise ResidualTooLarge(f"factorization reconstruction residual {res:.3e} exceeds {tol:.1e}")
    return TaylorFactorization(fac.gamma, fac.factors, fac.nu, fac.c, fac.route, res, fac.lattice, fac.h)


# ---------------------------------------------------------------- triplets

def to_clk0(fac: TaylorFactorization) -> CLK0Triplet:
    n = fac.n
    atoms = []
    for U, mj in fac.factors:
        u, mm = _lex_positive(np.asarray(U, float)[:, 0], int(mj))
        for i, (v, w) in enumerate(atoms):
            if np.array_equal(v, u):
                atoms[i] = (v, w + mm)
                break
        else:
            atoms.append((u, mm))
    atoms = tuple((u, m) for u, m in atoms if m)
    zero = np.zeros(n)
    b = atom_at(fac.nu, zero)
    nu0 = fac.nu if b == 0 else linear_combine([(1.0, fac.nu), (-b, dirac(zero))])
    c = complex(fac.c * np.exp(total_mass(fac.nu)))
    return CLK0Triplet(c, np.asarray(fac.gamma, float), nu0, atoms)


def _sigma_sum(t: CLK0Triplet, pts: np.ndarray) -> np.ndarray:
    out = np.zeros(pts.shape[0], dtype=complex)
    for u, m in t.lambda_atoms:
        out += sigma_log_cf(m, pts @ u)
    return out


def eval_clk0(t: CLK0Triplet, z):
    """Evaluate the triplet's CF at a point (scalar for n = 1) or an array of points."""
    z = np.asarray(z, dtype=float)
    pts = z.reshape(-1, t.n)
    scalar = z.ndim == 0 or (z.ndim == 1 and t.n > 1 and z.shape[0] == t.n)
    expo = 1j * (pts @ t.gamma) + _sigma_sum(t, pts)
    if t.nu0.weights.size or t.nu0.slabs:
        expo = expo + np.atleast_1d(eval_cf(t.nu0, pts if t.n > 1 else pts[:, 0])) - total_mass(t.nu0)
    vals = t.c * np.exp(expo)
    return complex(vals[0]) if scalar else vals


def eval_clk0_line(t: CLK0Triplet, a=None, Z: float = DEFAULT_Z, dz: float = DEFAULT_DZ):
    """(z, values) of the triplet's CF along ``z a`` on the symmetric line grid."""
    a = np.eye(t.n)[0] if a is None else np.asarray(a, dtype=float).reshape(-1)
    g = sample_cf_line(t.nu0, a, Z, dz)
    pts = np.outer(g.z, a)
    expo = 1j * (pts @ t.gamma) + _sigma_sum(t, pts) + g.values - total_mass(t.nu0)
    return g.z, t.c * np.exp(expo)


def clk0_residual(t: CLK0Triplet, mu: ComplexMeasure, Z: float = DEFAULT_Z, dz: float = DEFAULT_DZ) -> float:
    """``sup |triplet CF - mu^|`` over the control lines (axes, plus diagonal for n >= 2)."""
    worst = 0.0
    for d in _control_directions(mu.n):
        _, v = eval_clk0_line(t, d, Z, dz)
        w = sample_cf_line(mu, d, Z, dz).values
        worst = max(worst, float(np.abs(v - w).max()))
    return worst


# ---------------------------------------------------------------- realizations

def reconstruct(fac: TaylorFactorization, tol: float = 1e-12, window: float = DEFAULT_WINDOW) -> ComplexMeasure:
    """The factorized measure, with sigma factors sampled on ``fac.h``."""
    n = fac.n
    out = scale(dirac(fac.gamma), fac.c)
    for U, mj in fac.factors:
        out = convolve(out, embed_sigma_slab(U, mj, fac.h, window), window=np.inf)
    if fac.lattice is not None:
        e = exp_lattice(fac.lattice, tol=tol).to_measure()
    else:
        e = exp_measure(fac.nu, tol=tol, window=window)
    return convolve(out, e, window=np.inf)


def inverse_factorization(fac: TaylorFactorization) -> TaylorFactorization:
    """Factor-wise inverse: negated shift, indices and exponent, reciprocal scalar."""
    factors = tuple((U, -m) for U, m in fac.factors)
    lat = fac.lattice.scaled(-1.0) if fac.lattice is not None else None
    return TaylorFactorization(-np.asarray(fac.gamma), factors, scale(fac.nu, -1.0), 1.0 / fac.c,
                               fac.route, fac.residual, lat, fac.h)


def conv_power(fac: TaylorFactorization, t: float, tol: float = 1e-14,
               window: float = DEFAULT_WINDOW) -> ComplexMeasure:
    """``c^t delta_{t gamma} * exp(t nu)`` with the principal branch of ``c^t``."""
    if fac.factors:
        raise HasSigmaFactors(f"index {fac.index} is nonzero; no roots of all orders exist")
    t = float(t)
    ct = complex(np.exp(t * np.log(complex(fac.c))))
    shift = t * np.asarray(fac.gamma, float)
    if fac.lattice is not None:
        e = exp_lattice(fac.lattice.scaled(t), tol=tol)
        locs = e.ks @ e.B.T + shift
        return atomic(locs, ct * e.ws)
    e = exp_measure(scale(fac.nu, t), tol=tol, window=window)
    if np.any(shift):
        e = convolve(e, dirac(shift), window=np.inf)
    return scale(e, ct)
