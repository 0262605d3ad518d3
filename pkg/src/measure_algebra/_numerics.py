"""Small numerical helpers shared by the modules."""

from __future__ import annotations

import math
import os
from fractions import Fraction

import numpy as np
import scipy.fft as sfft
import scipy.signal as ss

THREADS_ENV = "MEASURE_ALGEBRA_THREADS"

#: entries of a projection vector below this magnitude are treated as zero
ZERO_DIR = 1e-15


def threads() -> int:
    """Worker count for scipy.fft, capped by ``MEASURE_ALGEBRA_THREADS``."""
    raw = os.environ.get(THREADS_ENV)
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            return 1
    return 1


def fftn(a, axes=None):
    return sfft.fftn(a, axes=axes, workers=threads())


def ifftn(a, axes=None):
    return sfft.ifftn(a, axes=axes, workers=threads())


def fftconvolve(a, b):
    return ss.fftconvolve(a, b)


def next_fast(n: int) -> int:
    return sfft.next_fast_len(int(n))


def rational_direction(c, max_den: int = 64, rtol: float = 1e-12):
    """Write ``c`` as ``g * ints`` with small integers when possible.

    Returns ``(g, ints)`` or ``None``.  Zero entries (below ``ZERO_DIR``) map
    to integer 0.
    """
    c = np.asarray(c, dtype=float)
    nz = np.flatnonzero(np.abs(c) > ZERO_DIR)
    ints = np.zeros(c.shape, dtype=np.int64)
    if nz.size == 0:
        return 0.0, ints
    ref = c[nz[0]]
    fracs = []
    for i in nz:
        r = c[i] / ref
        f = Fraction(r).limit_denominator(max_den)
        if abs(r - float(f)) > rtol * max(1.0, abs(r)):
            return None
        fracs.append(f)
    den = 1
    for f in fracs:
        den = den * f.denominator // math.gcd(den, f.denominator)
    num = [int(f * den) for f in fracs]
    g0 = 0
    for v in num:
        g0 = math.gcd(g0, abs(v))
    for i, v in zip(nz, num):
        ints[i] = v // g0
    g = ref / ints[nz[0]]
    if np.any(np.abs(ints) > 10_000):
        return None
    return float(g), ints


def uniform_dtft(samples, x0: float, step: float, omega0: float, domega: float, count: int):
    """``sum_k samples[k] exp(i w_j (x0 + k step))`` for ``w_j = omega0 + j domega``.

    Uses the chirp z-transform; falls back to a direct sum for tiny inputs.
    """
    f = np.asarray(samples, dtype=complex)
    count = int(count)
    omega = omega0 + domega * np.arange(count)
    if f.size == 0:
        return np.zeros(count, dtype=complex)
    if f.size * count <= 200_000 or domega == 0.0:
        x = x0 + step * np.arange(f.size)
        return np.exp(1j * np.outer(omega, x)) @ f
    a = np.exp(-1j * omega0 * step)
    w = np.exp(1j * domega * step)
    out = ss.czt(f, m=count, w=w, a=a)
    return out * np.exp(1j * omega * x0)


def direct_dtft_nd(samples, origin, h, zeta):
    """Direct evaluation of ``sum_k f_k exp(i zeta . s_k)`` on an axis grid.

    ``zeta`` has shape (P, q); the sum runs over the full q-dimensional
    sample grid ``origin + h * k``.  Separable in the axes.
    """
    f = np.asarray(samples, dtype=complex)
    zeta = np.atleast_2d(np.asarray(zeta, dtype=float))
    q = f.ndim
    axes = [origin[j] + h * np.arange(f.shape[j]) for j in range(q)]
    out = np.empty(zeta.shape[0], dtype=complex)
    budget = 4_000_000
    per = max(1, budget // max(1, max(f.shape) * (f.size // max(f.shape))))
    for start in range(0, zeta.shape[0], per):
        zc = zeta[start:start + per]
        if q == 1:
            e = np.exp(1j * np.outer(zc[:, 0], axes[0]))
            out[start:start + per] = e @ f
            continue
        e0 = np.exp(1j * np.outer(zc[:, 0], axes[0]))
        t = (e0 @ f.reshape(f.shape[0], -1)).reshape((zc.shape[0],) + f.shape[1:])
        for j in range(1, q):
            ej = np.exp(1j * np.outer(zc[:, j], axes[j]))
            t = np.einsum("pk...,pk->p...", t, ej)
        out[start:start + per] = t
    return out
