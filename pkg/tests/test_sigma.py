from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from _fixtures import rotation
from measure_algebra.charfn import eval_cf
from measure_algebra.errors import NotOrthogonal, PowerTooLarge
from measure_algebra.measure_core import atom_at, convolve, dirac, product_measure
from measure_algebra.sigma import (
    embed_sigma_slab,
    sigma_log_cf,
    sigma_log_cf_quadrature,
    sigma_power_cf,
    sigma_power_density,
    sigma_power_measure,
)

Z16 = np.linspace(-16, 16, 513)


def test_closed_form_values():
    assert sigma_power_cf(1, 0.0) == 1
    assert abs(sigma_power_cf(1, 1.0) - 1j) < 1e-15
    assert abs(sigma_power_cf(-1, 1.0) + 1j) < 1e-15


@settings(max_examples=50, deadline=None)
@given(st.integers(-16, 16), st.floats(-1e3, 1e3))
def test_closed_form_has_unit_modulus(m, z):
    assert abs(abs(sigma_power_cf(m, z)) - 1) < 1e-12


def test_log_closed_form_exponentiates():
    z = np.linspace(-20, 20, 101)
    for m in (-2, 1, 3):
        assert np.abs(np.exp(sigma_log_cf(m, z)) - sigma_power_cf(m, z)).max() < 1e-12


def test_power_zero_is_identity():
    assert sigma_power_measure(0) == dirac([0.0])
    U = rotation(0.4)
    assert embed_sigma_slab(U, 0) == dirac([0.0, 0.0])


def test_power_one_matches_definition():
    h = 2.0 ** -10
    mu = sigma_power_measure(1, h)
    assert atom_at(mu, [0.0]) == -1
    d = mu.slabs[0].density
    s = d.axis(0)
    assert d.samples[0] == 1.0
    assert np.allclose(d.samples[1:], 2 * np.exp(-s[1:]), rtol=1e-15, atol=0)


def test_power_two_density_formula():
    s = np.linspace(0.01, 10, 50)
    assert np.allclose(sigma_power_density(2, s), (4 * s - 4) * np.exp(-s), atol=1e-14)
    mu = sigma_power_measure(2)
    assert atom_at(mu, [0.0]) == 1


def test_power_two_matches_self_convolution():
    h = 2.0 ** -9
    direct = sigma_power_measure(2, h)
    conv = convolve(sigma_power_measure(1, h), sigma_power_measure(1, h))
    a = direct.slabs[0].density
    b = conv.slabs[0].density
    k = int(round((a.origin[0] - b.origin[0]) / h))
    seg = b.samples[k:k + a.shape[0]]
    inside = slice(1, int(16 / h))
    assert np.abs(seg[inside] - a.samples[inside]).max() < 1e-12
    assert abs(atom_at(conv, [0.0]) - 1) < 1e-15


@pytest.mark.parametrize("m", [-3, -2, -1, 1, 2, 3])
def test_power_cf_on_grid(m):
    assert np.abs(eval_cf(sigma_power_measure(m), Z16) - sigma_power_cf(m, Z16)).max() < 1e-5


@pytest.mark.parametrize("a,b", [(1, 1), (2, -1), (-3, 2), (3, 3)])
def test_group_law(a, b):
    c = convolve(sigma_power_measure(a), sigma_power_measure(b), window=64.0)
    z = np.linspace(-16, 16, 257)
    assert np.abs(eval_cf(c, z) - sigma_power_cf(a + b, z)).max() < 1e-4


def test_power_guard():
    with pytest.raises(PowerTooLarge):
        sigma_power_measure(17)
    with pytest.raises(ValueError):
        sigma_power_measure(1.5)


def test_embedding_identity_frame():
    mu = embed_sigma_slab(np.eye(2), 1)
    assert mu == product_measure(sigma_power_measure(1), dirac([0.0]))
    z = np.array([[0.5, 3.0], [-2.0, 7.0], [4.0, 0.0]])
    assert np.abs(eval_cf(mu, z) - sigma_power_cf(1, z[:, 0])).max() < 1e-5


def test_embedding_rotated_depends_on_second_coordinate():
    mu = embed_sigma_slab(rotation(np.pi / 2), 2)
    z = np.array([[0.0, 1.5], [5.0, 1.5], [-3.0, 1.5]])
    v = eval_cf(mu, z)
    assert np.abs(v - v[0]).max() < 1e-12
    assert abs(v[0] - sigma_power_cf(2, 1.5)) < 1e-5


def test_embedding_rejects_non_orthogonal():
    with pytest.raises(NotOrthogonal):
        embed_sigma_slab(np.array([[1.0, 0.2], [0.0, 1.0]]), 1)


@pytest.mark.parametrize("z", [-4.0, -1.0, -0.5, 0.5, 1.0, 4.0])
def test_log_quadrature_identity(z):
    assert abs(sigma_log_cf_quadrature(z) - np.log(sigma_power_cf(1, z))) < 1e-6
    assert abs(sigma_log_cf_quadrature(z, m=2) - sigma_log_cf(2, z)) < 1e-6
