from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from _fixtures import delta_plus_exp, gauss_2d, gauss_samples, line_grid, rotation
from measure_algebra.charfn import (
    CFGrid,
    LogPath,
    cfgrid_csv,
    distinguished_log,
    distinguished_log_grid,
    eval_cf,
    inf_abs_estimate,
    logpath_csv,
    sample_cf_line,
    winding_index_1d,
)
from measure_algebra.errors import NotNearInteger, NotStabilized, PhaseStepTooLarge, ZeroOnGrid
from measure_algebra.measure_core import atomic, density_measure, dirac, exp_measure, linear_combine
from measure_algebra.sigma import sigma_power_cf, sigma_power_measure


def test_eval_cf_examples():
    sig = sigma_power_measure(1)
    assert abs(eval_cf(sig, 1.0) - 1j) < 1e-6
    z = np.linspace(-16, 16, 257)
    assert np.abs(eval_cf(sig, z) - sigma_power_cf(1, z)).max() < 1e-5
    mu = atomic([[0.0], [1.0]], [1.0, -0.5])
    assert np.abs(eval_cf(mu, z) - (1 - 0.5 * np.exp(1j * z))).max() < 1e-15


def test_eval_cf_shapes():
    mu = dirac([1.0, 2.0])
    assert isinstance(eval_cf(mu, [0.5, 0.5]), complex)
    assert eval_cf(mu, np.zeros((3, 2))).shape == (3,)
    assert isinstance(eval_cf(dirac([0.0]), 2.0), complex)


def test_eval_cf_line_route_matches_direct():
    h = 1.0 / 16
    U = rotation(0.3)
    s = line_grid(h, 6.0)
    mu = linear_combine([(1.0, density_measure(gauss_2d(mass=0.5).samples, gauss_2d().origin, h)),
                         (1.0, dirac([0.3, -0.7], 0.2j))])
    line = density_measure(gauss_samples(s), [s[0]], h, U=U, y=[0.4])
    a = np.array([0.6, 0.8])
    t = np.linspace(-12, 12, 97)
    for m in (mu, line):
        fast = eval_cf(m, np.outer(t, a))
        slow = eval_cf(m, np.outer(t, a), method="direct")
        assert np.abs(fast - slow).max() < 1e-10


def test_sample_cf_line_contract():
    g = sample_cf_line(dirac([0.0, 0.0]), [1.0, 0.0], Z=4.0, dz=0.25)
    assert np.all(g.values == 1)
    assert g.z[g.zero_index] == 0.0
    assert np.array_equal(g.z, -g.z[::-1])
    assert g.Z == 4.0 and g.dz == 0.25
    with pytest.raises(ValueError):
        sample_cf_line(dirac([0.0]), [2.0])
    with pytest.raises(ValueError):
        sample_cf_line(dirac([0.0]), Z=1.0, dz=0.3)


def test_sample_cf_line_sigma_closed_form():
    g = sample_cf_line(sigma_power_measure(1), Z=16.0)
    assert np.abs(g.values - sigma_power_cf(1, g.z)).max() < 1e-5


def test_sample_cf_line_agrees_with_direct_eval():
    d = gauss_2d(mass=0.7, mean=(0.5, -0.25))
    mu = density_measure(d.samples, d.origin, d.h)
    a = np.array([1.0, 2.0]) / math.sqrt(5)
    g = sample_cf_line(mu, a, Z=8.0, dz=2.0 ** -3)
    direct = eval_cf(mu, np.outer(g.z, a), method="direct")
    assert np.abs(g.values - direct).max() < 1e-10


def test_distinguished_log_constant_and_sigma():
    one = sample_cf_line(dirac([0.0]), Z=8.0)
    assert np.all(distinguished_log(one).psi == 0)
    path = distinguished_log(sample_cf_line(sigma_power_measure(1), Z=64.0))
    assert np.abs(path.psi.imag - 2 * np.arctan(path.z)).max() < 5e-5


def test_distinguished_log_shift_refines_steps():
    gamma = 30.0
    g = sample_cf_line(dirac([gamma]), Z=16.0, dz=2.0 ** -4)
    path = distinguished_log(g)
    assert np.abs(path.psi - 1j * gamma * g.z).max() < 1e-9


def test_distinguished_log_without_source_raises():
    g = sample_cf_line(dirac([30.0]), Z=4.0, dz=2.0 ** -4)
    bare = CFGrid(g.z, g.values, g.direction)
    with pytest.raises(PhaseStepTooLarge):
        distinguished_log(bare)


def test_distinguished_log_zero_on_grid():
    g = sample_cf_line(atomic([[0.0], [1.0]], [1.0, -1.0]), Z=8.0, dz=0.125)
    with pytest.raises(ZeroOnGrid):
        distinguished_log(g)


def test_distinguished_log_of_exponential():
    h = 2.0 ** -8
    s = line_grid(h, 6.0)
    nu = linear_combine([(0.4 - 0.3j, dirac([1.5])), (1.0, density_measure(0.8 * gauss_samples(s), [s[0]], h))])
    path = distinguished_log(sample_cf_line(exp_measure(nu), Z=16.0))
    want = eval_cf(nu, path.z) - eval_cf(nu, 0.0)
    assert np.abs(path.psi - want).max() < 1e-6


@pytest.mark.parametrize("m", [-3, -2, -1, 0, 1, 2, 3])
def test_winding_sigma_powers(m):
    path = distinguished_log(sample_cf_line(sigma_power_measure(m), Z=64.0))
    assert winding_index_1d(path) == m


def test_winding_delta_plus_exp_is_zero():
    path = distinguished_log(sample_cf_line(delta_plus_exp().to_measure(), Z=64.0))
    assert winding_index_1d(path) == 0


def test_winding_errors():
    path = distinguished_log(sample_cf_line(dirac([1.0]), Z=64.0))
    with pytest.raises(NotStabilized):
        winding_index_1d(path)
    z = np.linspace(-10, 10, 201)
    half = LogPath(z, 1j * np.pi * np.tanh(4 * z) * 0.5, 1.0)
    with pytest.raises(NotNearInteger):
        winding_index_1d(half)


def test_log_grid_path_independence_2d():
    d = gauss_2d(mass=0.6, mean=(0.5, 0.0))
    mu = linear_combine([(1.0, dirac([0.0, 0.0])), (1.0, density_measure(d.samples, d.origin, d.h))])
    t = np.linspace(-6, 6, 49)
    Z1, Z2 = np.meshgrid(t, t, indexing="ij")
    vals = eval_cf(mu, np.stack([Z1.ravel(), Z2.ravel()], 1)).reshape(Z1.shape)
    c = (24, 24)
    a = distinguished_log_grid(vals, c)
    b = distinguished_log_grid(vals.T, c[::-1]).T
    assert np.abs(a - b).max() < 1e-12


def test_inf_abs_estimate_examples():
    g = sample_cf_line(atomic([[0.0], [1.0]], [1.0, -0.5]), Z=8.0, dz=2.0 ** -6)
    mn, where = inf_abs_estimate(g)
    assert abs(mn - 0.5) < 1e-12
    assert abs(math.remainder(where, 2 * math.pi)) < 1e-12
    assert inf_abs_estimate(sample_cf_line(dirac([0.0]), Z=2.0))[0] == 1.0


def test_inf_abs_estimate_density_decays():
    d = gauss_2d(mass=1.0).samples[:, 128]
    h = 1.0 / 16
    mu = density_measure(d, [-8.0], h)
    mins = [inf_abs_estimate(sample_cf_line(mu, Z=Z, dz=2.0 ** -4))[0] for Z in (1.0, 4.0, 16.0)]
    assert mins[0] > mins[1] > mins[2]
    assert mins[2] < 1e-10


@settings(max_examples=30, deadline=None)
@given(st.lists(st.tuples(st.floats(-4, 4), st.floats(-1, 1)), min_size=1, max_size=6))
def test_real_measures_are_conjugate_symmetric(atoms):
    mu = atomic([[x] for x, _ in atoms], [w for _, w in atoms])
    z = np.linspace(-5, 5, 21)
    assert np.array_equal(eval_cf(mu, -z, method="direct"), np.conj(eval_cf(mu, z, method="direct")))


def test_csv_columns():
    g = sample_cf_line(dirac([0.5]), Z=1.0, dz=0.5)
    text = cfgrid_csv(g)
    lines = text.splitlines()
    assert lines[0] == "z,Re,Im"
    assert len(lines) == 6
    assert lines[3].split(",")[0] == "0.0"
    p = logpath_csv(distinguished_log(g))
    assert p.splitlines()[0] == "z,Re psi,Im psi"
    assert float(p.splitlines()[-1].split(",")[2]) == pytest.approx(0.5)
