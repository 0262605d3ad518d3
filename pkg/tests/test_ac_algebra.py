from __future__ import annotations

import math

import numpy as np
import pytest

from _fixtures import H1, ac2, delta_plus_exp, gauss_2d, gauss_ac, one_sided_exp
from measure_algebra.ac_algebra import (
    ACMeasure,
    ac_symbol,
    cramer_wold_check,
    invert_ac,
    is_invertible_ac,
    levy_decompose,
    levy_residual,
    product_residual,
    project_ac,
    spectral_grid,
    winding_ac,
)
from measure_algebra.charfn import eval_cf
from measure_algebra.errors import GridMismatch, UnsupportedClass, ZeroOnGrid
from measure_algebra.measure_core import GridDensity, dirac
from measure_algebra.sigma import sigma_power_cf, sigma_power_measure


def test_from_measure_round_trip():
    a = gauss_ac(alpha=0.5 - 1j)
    b = ACMeasure.from_measure(a.to_measure())
    assert b.alpha == a.alpha
    assert b.density.h == a.density.h
    assert np.array_equal(b.density.samples, a.density.samples)
    assert math.isclose(a.norm(), abs(0.5 - 1j) + a.density.abs_mass())


def test_from_measure_rejects_other_classes():
    with pytest.raises(UnsupportedClass):
        ACMeasure.from_measure(dirac([1.0]))
    with pytest.raises(GridMismatch):
        ac_symbol(ACMeasure(1.0, GridDensity([0.3], 0.25, np.ones(4))), spectral_grid(GridDensity([0.0], 0.25, np.ones(4))))


def test_spectral_transform_matches_direct_sum():
    mu = gauss_ac(mass=0.4, mean=0.7, h=2.0 ** -6)
    grid = spectral_grid(mu.density)
    S = ac_symbol(mu, grid)
    f = grid.freqs()
    pick = np.arange(0, grid.M, grid.M // 32)
    want = eval_cf(mu.to_measure(), f[pick], method="direct")
    assert np.abs(S[pick] - want).max() < 1e-12


def test_decisions():
    assert is_invertible_ac(delta_plus_exp()).status == "invertible"
    d = is_invertible_ac(ACMeasure(0.0, one_sided_exp()))
    assert d.status == "refuted" and not d
    d = is_invertible_ac(ACMeasure(1.0, one_sided_exp(weight=-1.0)))
    assert not d.invertible
    assert d.min_abs < 1e-5
    assert abs(d.argmin[0]) < 1e-12
    d = is_invertible_ac(gauss_ac(mass=-1.0))
    assert d.status == "refuted"


def test_invert_identity():
    inv = invert_ac(ACMeasure.identity(1, H1))
    assert inv.alpha == 1
    assert np.abs(inv.density.samples).max() == 0


def test_invert_delta_plus_exp_closed_form():
    mu = delta_plus_exp()
    inv = invert_ac(mu)
    s = inv.density.axis(0)
    ref = np.where(s > 0, -np.exp(-2 * s), np.where(s == 0, -0.5, 0.0))
    assert inv.alpha == 1
    assert inv.density.h * np.abs(inv.density.samples - ref).sum() < 1e-4


def test_invert_sigma_gives_sigma_inverse():
    sig = ACMeasure.from_measure(sigma_power_measure(1, H1))
    inv = invert_ac(sig)
    assert abs(inv.alpha + 1) < 1e-15
    z = np.linspace(-16, 16, 257)
    assert np.abs(eval_cf(inv.to_measure(), z) - sigma_power_cf(-1, z)).max() < 1e-5


def test_invert_is_an_involution():
    mu = gauss_ac(alpha=2.0, mass=0.7, mean=-0.5, h=2.0 ** -7)
    back = invert_ac(invert_ac(mu))
    z = np.linspace(-16, 16, 129)
    assert np.abs(eval_cf(back.to_measure(), z) - eval_cf(mu.to_measure(), z)).max() < 1e-9
    assert product_residual(mu, invert_ac(mu)) < 1e-9


def test_invert_2d():
    mu = ac2(mass=0.4, mean=(0.5, -0.5))
    inv = invert_ac(mu)
    assert product_residual(mu, inv) < 1e-8


def test_invert_rejects_zero_atom():
    with pytest.raises(ZeroOnGrid):
        invert_ac(ACMeasure(0.0, one_sided_exp()))


def test_levy_sigma_has_winding_one():
    dec = levy_decompose(ACMeasure.from_measure(sigma_power_measure(1, H1)))
    assert dec.m == 1
    assert abs(dec.c - 1) < 1e-6
    assert dec.g.abs_mass() < 1e-3


@pytest.mark.parametrize("m", [-2, 2])
def test_winding_ac_sigma_powers(m):
    assert winding_ac(ACMeasure.from_measure(sigma_power_measure(m, H1))) == m


def test_levy_delta_plus_exp_log():
    mu = delta_plus_exp()
    dec = levy_decompose(mu)
    assert dec.m == 0
    z = np.linspace(-16, 16, 129)
    gm = dec.exponent_measure()
    got = eval_cf(gm, z) - eval_cf(gm, 0.0)
    want = np.log((2 - 1j * z) / (1 - 1j * z)) - math.log(2)
    assert np.abs(got - want).max() < 1e-5
    assert levy_residual(mu, dec) < 1e-5


def test_levy_real_measure_gives_real_exponent():
    dec = levy_decompose(gauss_ac(alpha=1.0, mass=0.5, mean=1.0, h=2.0 ** -7))
    assert abs(dec.c.imag) < 1e-12
    assert np.abs(dec.g.samples.imag).max() < 1e-10


def test_levy_2d_has_no_winding():
    dec = levy_decompose(ac2(mass=0.4, mean=(0.5, 0.0)))
    assert dec.m == 0
    assert dec.residual < 1e-6


def test_levy_density_singular_part():
    dec = levy_decompose(ACMeasure.from_measure(sigma_power_measure(1, H1)))
    x = np.array([-2.0, 0.5, 3.0])
    assert np.allclose(dec.levy_density(x), np.exp(-np.abs(x)) / x, atol=1e-3)


def test_project_ac_preserves_mass():
    mu = ac2(mass=0.4, mean=(0.5, -0.25))
    p = project_ac([0.6, 0.8], mu)
    assert p.n == 1
    assert p.alpha == mu.alpha
    assert abs(p.density.mass() - mu.density.mass()) < 1e-12


def test_cramer_wold_empty_and_refuted():
    r = cramer_wold_check(ac2(mass=0.3), [])
    assert r.full.invertible and r.consistent and not r.decisions
    r = cramer_wold_check(ACMeasure(0.0, gauss_2d()), [[1.0, 0.0]])
    assert r.full.status == "refuted"
    assert r.failing and r.consistent


def test_cramer_wold_shifted_gaussian_directions():
    mu = ac2(mass=0.8, mean=(1.0, 0.0))
    r = cramer_wold_check(mu, [[1.0, 0.0], [0.0, 1.0]])
    assert r.full.invertible and r.consistent
