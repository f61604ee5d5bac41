import numpy as np
import pytest
from scipy.special import sph_harm_y

from spinor_hardy.harmonics import Poly3, X, Y, Z, basis_indices, real_solid_harmonic, solid_harmonic, ylm_table


def _unit(rng, n):
    w = rng.normal(size=(n, 3))
    return w / np.linalg.norm(w, axis=-1, keepdims=True)


@pytest.mark.parametrize("l", range(0, 9))
def test_matches_scipy(rng, l):
    w = _unit(rng, 50)
    theta = np.arccos(w[:, 2])
    phi = np.arctan2(w[:, 1], w[:, 0])
    for m in range(-l, l + 1):
        ours = solid_harmonic(l, m)(w)
        ref = sph_harm_y(l, m, theta, phi)
        assert np.max(np.abs(ours - ref)) < 1e-12


def test_homogeneous_of_degree_l(rng):
    w = _unit(rng, 10)
    for l, m in [(2, 1), (3, -2), (4, 0)]:
        p = solid_harmonic(l, m)
        assert np.allclose(p(2.5 * w), 2.5**l * p(w), rtol=1e-13)
        assert p.degree == l


def test_harmonic_polynomials_are_harmonic(rng):
    x = rng.normal(size=(20, 3))
    for l, m in [(2, 2), (3, 1), (4, -3)]:
        p = solid_harmonic(l, m)
        lap = p.derivative(0).derivative(0) + p.derivative(1).derivative(1) + p.derivative(2).derivative(2)
        assert np.max(np.abs(lap(x))) < 1e-10


def test_real_harmonics_are_real():
    for l in range(5):
        for m in range(-l, l + 1):
            p = real_solid_harmonic(l, m)
            assert all(np.all(np.imag(c) == 0) for c in p.terms.values())


def test_poly_algebra():
    p = (X + Y * 2.0) * Z - Z * X
    pts = np.array([[1.0, 2.0, 3.0], [-0.5, 0.1, 2.0]])
    assert np.allclose(p(pts), 2 * pts[:, 1] * pts[:, 2])
    assert np.allclose(p.derivative(1)(pts), 2 * pts[:, 2])
    assert (X**3).degree == 3


def test_outer_requires_scalar():
    s = Poly3.constant(1.0).outer([1.0, 2.0])
    with pytest.raises(ValueError):
        s.outer([1.0, 0.0])


def test_basis_ordering():
    b = basis_indices(1)
    assert b[:4] == [(0, 0, 1), (0, 0, 2), (1, -1, 1), (1, -1, 2)]
    assert len(basis_indices(8)) == 2 * 81


def test_invalid_lm():
    with pytest.raises(ValueError):
        solid_harmonic(1, 2)
    with pytest.raises(ValueError):
        ylm_table(-1, np.zeros((1, 3)))
