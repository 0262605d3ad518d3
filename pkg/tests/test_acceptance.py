"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line."""

from __future__ import annotations

import math
import time

import numpy as np
import pytest

from _fixtures import (
    ac2,
    delta_plus_exp,
    discrete_2d_dominant,
    gauss_2d,
    mixed_fixture,
    one_sided_exp,
    random_density,
    random_lattice,
    rotation,
    slab1,
)
from measure_algebra.ac_algebra import ACMeasure, cramer_wold_check, invert_ac, is_invertible_ac, levy_decompose, product_residual
from measure_algebra.charfn import distinguished_log, eval_cf, sample_cf_line
from measure_algebra.charfn import winding_index_1d
from measure_algebra.errors import HasSigmaFactors, UnsupportedFramePair
from measure_algebra.factorization import clk0_residual, conv_power, eval_clk0, factorize, to_clk0
from measure_algebra.lattice_gfs import (
    LatticeGFS,
    certify_invertible_lattice,
    cramer_wold_discrete,
    exp_lattice,
    invert_lattice,
    lattice_convolve,
    lattice_from_measure,
    lattice_l1_distance,
    log_lattice_dominant,
)
from measure_algebra.measure_core import (
    ComplexMeasure,
    GridDensity,
    atomic,
    convolve,
    density_measure,
    dirac,
    exp_measure,
    linear_combine,
)
from measure_algebra.sigma import sigma_log_cf, sigma_log_cf_quadrature, sigma_power_cf, sigma_power_measure

SIXTEEN = [np.array([math.cos(k * math.pi / 16), math.sin(k * math.pi / 16)]) for k in range(16)]


@pytest.fixture
def report(capsys):
    def _report(num, ok, detail):
        with capsys.disabled():
            print(f"\n[criterion {num}] {'PASS' if ok else 'FAIL'}: {detail}")
    return _report


def test_criterion_01_sigma_closed_form(report):
    t0 = time.perf_counter()
    z = np.linspace(-16, 16, 1025)
    worst = 0.0
    for m in range(-3, 4):
        mu = sigma_power_measure(m)
        err = np.abs(eval_cf(mu, z) - sigma_power_cf(m, z)).max()
        worst = max(worst, float(err))
    dt = time.perf_counter() - t0
    ok = worst < 1e-5 and dt < 5
    report(1, ok, f"sup error {worst:.2e} over m=-3..3, |z|<=16, {dt:.2f}s")
    assert worst < 1e-5
    assert dt < 5


def test_criterion_02_winding_index(report):
    got = {}
    for m in range(-3, 4):
        grid = sample_cf_line(sigma_power_measure(m), Z=64.0)
        got[m] = winding_index_1d(distinguished_log(grid))
    ok = all(got[m] == m for m in got)
    report(2, ok, f"recovered {got}")
    assert ok


def test_criterion_03_wiener_levy_inversion(report):
    t0 = time.perf_counter()
    mu = delta_plus_exp()
    inv = invert_ac(mu, Z=32.0)
    d = inv.density
    s = d.axis(0)
    ref = np.where(s > 0, -np.exp(-2 * s), np.where(s == 0, -0.5, 0.0))
    l1 = d.h * float(np.abs(d.samples - ref).sum())
    res = product_residual(mu, inv, Z=32.0)
    dt = time.perf_counter() - t0
    ok = l1 < 1e-4 and res < 1e-6 and abs(inv.alpha - 1) < 1e-15 and dt < 10
    report(3, ok, f"L1 density error {l1:.2e}, CF product residual {res:.2e}, {dt:.2f}s")
    assert abs(inv.alpha - 1) < 1e-15
    assert l1 < 1e-4
    assert res < 1e-6
    assert dt < 10


def test_criterion_04_discrete_inversion(report):
    mu = LatticeGFS([[1.0]], [[0], [1]], [1.0, -0.5])
    inv = invert_lattice(mu)
    err = max(abs(inv.coeff([j]) - 2.0 ** -j) for j in range(31))
    cert = certify_invertible_lattice(mu, grid_per_axis=2 ** 12)
    ok = err < 1e-10 and cert.invertible and cert.lower_bound >= 0.45
    report(4, ok, f"max coefficient error {err:.2e}, certificate lower bound {cert.lower_bound:.4f}")
    assert err < 1e-10
    assert cert.invertible
    assert cert.lower_bound >= 0.45


def test_criterion_05_exp_log_round_trips(report):
    rng = np.random.default_rng(20240605)
    lat_err = 0.0
    for i in range(20):
        nu = random_lattice(rng, d=1 + i % 2)
        gamma, back = log_lattice_dominant(exp_lattice(nu))
        assert not np.any(gamma)
        lat_err = max(lat_err, lattice_l1_distance(back, nu))
    z = np.linspace(-16, 16, 513)
    ac_err = 0.0
    for _ in range(10):
        g = random_density(rng)
        gm = density_measure(g.samples, g.origin, g.h)
        mu = ACMeasure.from_measure(exp_measure(gm))
        dec = levy_decompose(mu)
        assert dec.m == 0
        want = eval_cf(gm, z) - eval_cf(gm, 0.0)
        got = eval_cf(dec.exponent_measure(), z) - eval_cf(dec.exponent_measure(), 0.0)
        ac_err = max(ac_err, float(np.abs(got - want).max()))
    ok = lat_err < 1e-8 and ac_err < 1e-4
    report(5, ok, f"lattice l1 error {lat_err:.2e} (20 cases), density CF error {ac_err:.2e} (10 cases)")
    assert lat_err < 1e-8
    assert ac_err < 1e-4


def test_criterion_06_sigma_log_identity(report):
    worst = 0.0
    for z in (-4.0, -1.0, -0.5, 0.5, 1.0, 4.0):
        quad = sigma_log_cf_quadrature(z)
        closed = np.log(sigma_power_cf(1, z))
        worst = max(worst, abs(quad - closed), abs(quad - sigma_log_cf(1, z)))
    ok = worst < 1e-6
    report(6, ok, f"max |quadrature - Log| {worst:.2e}")
    assert ok


def _battery():
    return {
        "sigma^2": sigma_power_measure(2),
        "sigma^-1": sigma_power_measure(-1),
        "rotated sigma line * exp(nu)": mixed_fixture(),
        "dominant-atom discrete": discrete_2d_dominant(),
        "dominant-atom discrete 1D": atomic([[0.0], [1.0], [-2.0]], [1.0, 0.35, -0.25]),
        "delta + f (2D)": ac2().to_measure(),
    }


def test_criterion_07_factorization_round_trip(report):
    t0 = time.perf_counter()
    errs = {}
    for name, mu in _battery().items():
        fac = factorize(mu)
        tri = to_clk0(fac)
        errs[name] = clk0_residual(tri, mu)
        # pointwise evaluation agrees with the line route
        z = np.full(mu.n, 0.7)
        errs[name] = max(errs[name], abs(eval_clk0(tri, z) - eval_cf(mu, z)))
    dt = time.perf_counter() - t0
    worst = max(errs.values())
    ok = worst < 1e-4 and dt < 60
    report(7, ok, f"max residual {worst:.2e} over {len(errs)} fixtures, {dt:.1f}s")
    assert worst < 1e-4, errs
    assert dt < 60


def test_criterion_08_divisibility(report):
    mu = atomic([[0.0], [1.0]], [0.6, 0.4])
    fac = factorize(mu)
    lat = lattice_from_measure(mu)
    errs = {}
    for k in (2, 3):
        root = lattice_from_measure(conv_power(fac, 1.0 / k))
        acc = root
        for _ in range(k - 1):
            acc = lattice_convolve(acc, root)
        errs[k] = lattice_l1_distance(acc, lat)
    raised = False
    try:
        conv_power(factorize(sigma_power_measure(1)), 0.5)
    except HasSigmaFactors:
        raised = True
    ok = max(errs.values()) < 1e-8 and raised
    report(8, ok, f"l1 errors t=1/2: {errs[2]:.2e}, t=1/3: {errs[3]:.2e}; HasSigmaFactors on sigma: {raised}")
    assert max(errs.values()) < 1e-8
    assert raised


def _cw_fixtures():
    inv_ac = [ac2(mass=0.3), ac2(alpha=1.0, mass=-0.5, mean=(0.5, -0.3), cov=((1.0, 0.3), (0.3, 0.5))),
              ac2(alpha=2.0, mass=0.8, cov=((2.0, 0.0), (0.0, 0.3)))]
    inv_lat = [lattice_from_measure(discrete_2d_dominant()),
               lattice_from_measure(atomic([[0, 0], [1, 0], [0, 1]], [1.0, 0.3, 0.2]))]
    non_ac = [ACMeasure(1.0, gauss_2d(mass=-1.0)), ACMeasure(0.0, gauss_2d(mass=1.0))]
    non_lat = [lattice_from_measure(atomic([[0, 0], [1, 0], [0, 1]], [1.0, -0.5, -0.5]))]
    return inv_ac, inv_lat, non_ac, non_lat


def test_criterion_09_cramer_wold(report):
    inv_ac, inv_lat, non_ac, non_lat = _cw_fixtures()
    rows = []
    for mu in inv_ac:
        r = cramer_wold_check(mu, SIXTEEN)
        rows.append(r.full.invertible and all(d.invertible for d in r.decisions) and r.consistent)
    for mu in inv_lat:
        r = cramer_wold_discrete(mu, SIXTEEN)
        rows.append(r.full.invertible and all(d.invertible for d in r.decisions) and r.consistent)
    for mu in non_ac:
        r = cramer_wold_check(mu, SIXTEEN)
        rows.append((not r.full.invertible) and len(r.failing) >= 1 and r.consistent)
    for mu in non_lat:
        r = cramer_wold_discrete(mu, SIXTEEN)
        rows.append((not r.full.invertible) and len(r.failing) >= 1 and r.consistent)
    ok = all(rows) and len(rows) == 8
    report(9, ok, f"{sum(rows)}/8 fixtures consistent over 16 directions")
    assert len(rows) == 8
    assert all(rows), rows


def test_criterion_10_negative_controls(report):
    expo = ACMeasure(0.0, one_sided_exp())
    d_exp = is_invertible_ac(expo)
    cert = certify_invertible_lattice(LatticeGFS([[1.0]], [[0], [1]], [1.0, -1.0]))
    witness_ok = cert.status == "refuted" and abs(1 - np.exp(1j * cert.witness[0])) < 1e-6
    a = slab1(np.eye(2), [0.0], GridDensity([-1.0], 0.25, np.ones(9, complex)))
    b = slab1(rotation(0.3), [0.0], GridDensity([-1.0], 0.25, np.ones(9, complex)))
    raised = False
    try:
        convolve(a, b)
    except UnsupportedFramePair:
        raised = True
    ok = (not d_exp.invertible) and d_exp.status == "refuted" and witness_ok and raised
    report(10, ok, f"exponential: {d_exp.status}; delta0-delta1: {cert.status} at theta={cert.witness}; "
                   f"mixed frames raise: {raised}")
    assert not d_exp.invertible and d_exp.status == "refuted"
    assert witness_ok
    assert raised
