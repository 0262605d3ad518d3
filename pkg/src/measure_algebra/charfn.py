"""Characteristic functions: evaluation, line sampling, phase unwrapping."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import _numerics as nx
from .errors import NotNearInteger, NotStabilized, PhaseStepTooLarge, UnsupportedProjection, ZeroOnGrid
from .measure_core import ComplexMeasure, canonicalize, project_line

DEFAULT_Z = 64.0
DEFAULT_DZ = 2.0 ** -6
MAX_REFINE = 8
STEP_LIMIT = math.pi / 2
# values this far below the largest modulus count as zeros
ZERO_REL = 1e-14


@dataclass(frozen=True, eq=False)
class CFGrid:
    """CF samples on the symmetric line grid ``z * direction``."""

    z: np.ndarray
    values: np.ndarray
    direction: Optional[np.ndarray] = None
    source: Optional[Callable] = field(default=None, repr=False)

    @property
    def dz(self) -> float:
        return float(self.z[1] - self.z[0]) if self.z.size > 1 else 0.0

    @property
    def Z(self) -> float:
        return float(self.z[-1])

    @property
    def zero_index(self) -> int:
        return int(np.flatnonzero(self.z == 0.0)[0])


@dataclass(frozen=True, eq=False)
class LogPath:
    """Continuous logarithm of ``values / values(0)`` along a CFGrid."""

    z: np.ndarray
    psi: np.ndarray
    base: complex
    direction: Optional[np.ndarray] = None

    @property
    def zero_index(self) -> int:
        return int(np.flatnonzero(self.z == 0.0)[0])


# ---------------------------------------------------------------- evaluation

def _as_points(z, n):
    z = np.asarray(z, dtype=float)
    if n == 1:
        return z.reshape(-1, 1), z.ndim == 0
    return z.reshape(-1, n), z.ndim == 1


def _as_line(pts: np.ndarray):
    """``(a, t)`` when the points are ``t_i a`` with ``t`` evenly spaced, else None."""
    P = pts.shape[0]
    if P < 16:
        return None
    step = pts[1] - pts[0]
    ns = np.linalg.norm(step)
    if ns == 0:
        return None
    a = step / ns
    t = pts @ a
    dt = t[1] - t[0]
    expected = t[0] + dt * np.arange(P)
    scale = max(np.abs(pts).max(), 1.0)
    if np.abs(np.outer(expected, a) - pts).max() > 1e-12 * scale:
        return None
    return a, expected


def eval_cf(mu: ComplexMeasure, z, method: str = "auto"):
    """``sum_atoms w exp(i z.x) + sum_slabs h^q sum_k f_k exp(i z.x_k)``.

    ``z`` may be a scalar (n = 1), a point of length n, or an array of shape
    (P, n) (or (P,) for n = 1).  ``method='direct'`` forces plain summation;
    'auto' uses chirp-z sums when the points are evenly spaced on a line
    through the origin.
    """
    pts, scalar = _as_points(z, mu.n)
    if method == "auto" and not scalar:
        line = _as_line(pts)
        if line is not None:
            return _line_values_uniform(mu, line[0], line[1])
    elif method not in ("auto", "direct"):
        raise ValueError(f"unknown method {method!r}")
    P = pts.shape[0]
    out = np.zeros(P, dtype=complex)
    if mu.weights.size:
        per = max(1, 2_000_000 // mu.weights.size)
        for a in range(0, P, per):
            e = np.exp(1j * (pts[a:a + per] @ mu.locs.T))
            out[a:a + per] = (e * mu.weights).sum(axis=1)
    for s in mu.slabs:
        zeta = pts @ s.U
        f = s.density.samples.reshape(-1)
        sp = s.density.points()
        phase_y = np.exp(1j * (zeta[:, s.q:] @ s.y)) if s.q < s.n else np.ones(P, dtype=complex)
        per = max(1, 2_000_000 // f.size)
        for a in range(0, P, per):
            e = np.exp(1j * (zeta[a:a + per, : s.q] @ sp.T))
            out[a:a + per] = out[a:a + per] + s.density.cell * (e * f).sum(axis=1) * phase_y[a:a + per]
    return complex(out[0]) if scalar else out


def _line_grid(Z: float, dz: float) -> np.ndarray:
    if Z <= 0 or dz <= 0:
        raise ValueError("Z and dz must be positive")
    K = Z / dz
    if abs(K - round(K)) > 1e-9 * max(1.0, K):
        raise ValueError("Z / dz must be an integer")
    K = int(round(K))
    return dz * np.arange(-K, K + 1)


def _line_values_uniform(mu: ComplexMeasure, a, t: np.ndarray) -> np.ndarray:
    """CF along ``t * a`` on a uniform symmetric grid ``t``."""
    m = canonicalize(mu)
    count = t.size
    dz = float(t[1] - t[0]) if count > 1 else 1.0
    t0 = float(t[0])
    out = np.zeros(count, dtype=complex)
    if m.weights.size:
        p = m.locs @ a
        per = max(1, 2_000_000 // p.size)
        for i in range(0, count, per):
            out[i:i + per] = np.exp(1j * np.outer(t[i:i + per], p)) @ m.weights
    for s in m.slabs:
        single = canonicalize(ComplexMeasure(m.n, slabs=[s]))
        try:
            proj = project_line(a, single, method="exact")
        except UnsupportedProjection:
            c = s.U.T @ a
            phase = np.exp(1j * t * float(c[s.q:] @ s.y)) if s.q < s.n else 1.0
            vals = nx.direct_dtft_nd(s.density.samples, s.density.origin, s.density.h,
                                     np.outer(t, c[: s.q]))
            out += s.density.cell * vals * phase
            continue
        if proj.weights.size:
            out += np.exp(1j * np.outer(t, proj.locs[:, 0])) @ proj.weights
        for ps in proj.slabs:
            d = ps.density
            out += d.h * nx.uniform_dtft(d.samples[...], d.origin[0], d.h, t0, dz, count)
    return out


def sample_cf_line(mu: ComplexMeasure, a=None, Z: float = DEFAULT_Z, dz: float = DEFAULT_DZ) -> CFGrid:
    """Sample the CF along the line ``z * a`` for ``z`` in ``[-Z, Z]``."""
    if a is None:
        a = np.eye(mu.n)[0]
    a = np.asarray(a, dtype=float).reshape(-1)
    if abs(np.linalg.norm(a) - 1.0) > 1e-12:
        raise ValueError("direction must be a unit vector")
    t = _line_grid(Z, dz)
    vals = _line_values_uniform(mu, a, t)

    def source(tt, _mu=mu, _a=a):
        return eval_cf(_mu, np.outer(np.asarray(tt, float), _a), method="direct")

    return CFGrid(t, vals, a, source)


# ---------------------------------------------------------------- logarithms

def _refined_increment(source, z0, z1, v0, v1, limit):
    for r in range(1, MAX_REFINE + 1):
        zz = np.linspace(z0, z1, 2 ** r + 1)
        vv = np.asarray(source(zz[1:-1]), dtype=complex)
        vv = np.concatenate([[v0], vv, [v1]])
        if np.any(vv == 0):
            raise ZeroOnGrid(f"CF vanishes near z = {z0}")
        inc = np.angle(vv[1:] / vv[:-1])
        if np.all(np.abs(inc) <= limit):
            return float(inc.sum())
    raise PhaseStepTooLarge(f"phase step near z = {z0} stays above pi/2 after {MAX_REFINE} halvings")


def _check_zeros(v, where):
    mod = np.abs(v)
    top = mod.max() if mod.size else 0.0
    bad = np.flatnonzero(mod <= ZERO_REL * top) if top > 0 else np.arange(v.size)
    if bad.size:
        raise ZeroOnGrid(f"CF vanishes on the grid at {where(bad[0])}")


def distinguished_log(grid: CFGrid, limit: float = STEP_LIMIT) -> LogPath:
    """Continuous logarithm anchored at 0 by accumulating principal increments.

    A step above ``limit`` is refined by halving through ``grid.source`` (up to
    8 times); without a source it raises PhaseStepTooLarge.
    """
    z, v = grid.z, np.asarray(grid.values, dtype=complex)
    _check_zeros(v, lambda i: float(z[i]))
    i0 = grid.zero_index
    inc = np.angle(v[1:] / v[:-1])
    for k in np.flatnonzero(np.abs(inc) > limit):
        if grid.source is None:
            raise PhaseStepTooLarge(f"phase step {inc[k]:.3f} at z = {z[k]} exceeds pi/2")
        inc[k] = _refined_increment(grid.source, z[k], z[k + 1], v[k], v[k + 1], limit)
    phase = np.zeros(z.size)
    phase[i0 + 1:] = np.cumsum(inc[i0:])
    phase[:i0] = -np.cumsum(inc[:i0][::-1])[::-1]
    base = v[i0]
    psi = np.log(np.abs(v / base)) + 1j * phase
    return LogPath(z, psi, complex(base), grid.direction)


def unwrap_axis(values: np.ndarray, axis: int, center: int, limit: float = STEP_LIMIT) -> np.ndarray:
    """Phase accumulated along ``axis`` starting from index ``center``."""
    v = np.moveaxis(values, axis, 0)
    inc = np.angle(v[1:] / v[:-1])
    if np.any(np.abs(inc) > limit):
        raise PhaseStepTooLarge("phase step on the sample grid exceeds pi/2")
    phase = np.zeros(v.shape)
    phase[center + 1:] = np.cumsum(inc[center:], axis=0)
    phase[:center] = -np.cumsum(inc[:center][::-1], axis=0)[::-1]
    return np.moveaxis(phase, 0, axis)


def distinguished_log_grid(values: np.ndarray, center, limit: float = STEP_LIMIT) -> np.ndarray:
    """Staircase logarithm on an n-d grid, anchored at index ``center``.

    Axis 0 is unwrapped along the line through the anchor, then each further
    axis is unwrapped starting from the part already done.
    """
    v = np.asarray(values, dtype=complex)
    center = tuple(int(c) for c in np.atleast_1d(center))
    _check_zeros(v.reshape(-1), lambda i: np.unravel_index(i, v.shape))
    nd = v.ndim
    phase = np.zeros(v.shape)
    for j in range(nd):
        # block with the axes after j pinned at the anchor
        idx = tuple(slice(None) if k <= j else center[k] for k in range(nd))
        local = unwrap_axis(v[idx], j, center[j], limit)
        if j:
            local = local + np.take(phase[idx], [center[j]], axis=j)
        phase[idx] = local
    base = v[center]
    return np.log(np.abs(v / base)) + 1j * phase


def winding_index_1d(path: LogPath, stab_tol: float = 0.05, int_tol: float = 0.1) -> int:
    """Nearest integer to ``(psi(Z) - psi(-Z)) / (2 pi i)`` after stabilization checks."""
    z, psi = path.z, path.psi
    Z = z[-1]
    i_hi = int(np.argmin(np.abs(z - 0.9 * Z)))
    i_lo = int(np.argmin(np.abs(z + 0.9 * Z)))
    if abs(psi[-1] - psi[i_hi]) >= stab_tol or abs(psi[0] - psi[i_lo]) >= stab_tol:
        raise NotStabilized(
            f"log path moves by {max(abs(psi[-1] - psi[i_hi]), abs(psi[0] - psi[i_lo])):.3g} "
            f"between 0.9Z and Z; increase Z")
    w = float((psi[-1] - psi[0]).imag / (2 * math.pi))
    m = int(round(w))
    if abs(w - m) > int_tol:
        raise NotNearInteger(f"winding {w:.4f} is not within {int_tol} of an integer")
    return m


def inf_abs_estimate(grid, locations=None):
    """Minimum modulus over samples and its location (an upper bound for the infimum)."""
    if isinstance(grid, CFGrid):
        vals, locs = grid.values, grid.z
    else:
        vals = np.asarray(grid)
        locs = locations
    mod = np.abs(vals)
    if mod.size == 0:
        raise ValueError("no samples")
    i = int(np.argmin(mod))
    if locs is None:
        where = np.unravel_index(i, mod.shape)
    else:
        locs = np.asarray(locs)
        where = locs.reshape(-1, *locs.shape[mod.ndim:])[i] if locs.ndim > mod.ndim else locs.reshape(-1)[i]
    return float(mod.reshape(-1)[i]), where


# ---------------------------------------------------------------- CSV output

def _csv_text(header, cols) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in zip(*cols):
        w.writerow([repr(float(x)) for x in row])
    return buf.getvalue()


def cfgrid_csv(grid: CFGrid) -> str:
    return _csv_text(["z", "Re", "Im"], [grid.z, grid.values.real, grid.values.imag])


def logpath_csv(path: LogPath) -> str:
    return _csv_text(["z", "Re psi", "Im psi"], [path.z, path.psi.real, path.psi.imag])
