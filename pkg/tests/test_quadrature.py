import math

import numpy as np
import pytest

from spinor_hardy import quadrature as q
from spinor_hardy.harmonics import solid_harmonic


def test_sphere_area():
    for nt, nphi in [(2, 4), (8, 16), (32, 64)]:
        g = q.sphere_grid(nt, nphi)
        assert abs(q.accurate_sum(g.weights) - 4 * math.pi) < 1e-12


def test_sphere_exactness_degree():
    assert q.sphere_grid(8, 20).degree == 15
    assert q.sphere_grid(8, 10).degree == 9


def test_sphere_grid_minimum_sizes():
    with pytest.raises(ValueError):
        q.sphere_grid(1, 8)
    with pytest.raises(ValueError):
        q.sphere_grid(4, 3)


def test_y21_normalized_and_y10_orthogonal_to_constants():
    g = q.sphere_grid(4, 8)
    y21 = solid_harmonic(2, 1)(g.points)
    assert abs(q.integrate_sphere(g, np.abs(y21) ** 2) - 1) < 1e-13
    assert abs(q.integrate_sphere(g, solid_harmonic(1, 0)(g.points))) < 1e-15


def test_harmonic_gram_identity():
    g = q.sphere_grid(10, 18)
    G = q.harmonic_gram(8, g)
    assert np.max(np.abs(G - np.eye(81))) < 1e-12


def test_radial_references():
    rg = q.radial_grid(64, 1e-12, 10.0)
    assert abs(q.integrate_radial(rg, lambda r: r * np.exp(-(r**2))) - 0.5) < 1e-12
    rg = q.radial_grid(2, 1.0, 2.0)
    assert q.integrate_radial(rg, lambda r: r**3) == pytest.approx(15 / 4, abs=1e-14)


def test_radial_grid_validation():
    for args in [(8, 0.0, 1.0), (8, 2.0, 1.0)]:
        with pytest.raises(ValueError):
            q.radial_grid(*args)
    with pytest.raises(ValueError):
        q.radial_grid(8, 1e-3, 1.0, map="cubic")


def test_log_map_and_breakpoints():
    rg = q.radial_grid(10, 1e-6, 10.0, map="log", breakpoints=(1.0, 20.0))
    assert len(rg.nodes) == 20
    assert np.all(rg.nodes > 0)
    assert q.integrate_radial(rg, lambda r: 1 / r) == pytest.approx(math.log(1e7), rel=1e-13)


def test_gaussian_references_3d():
    g = q.grid3d()
    one_over_r = q.integrate_weighted(g, lambda x: np.exp(-2 * np.sum(x * x, axis=-1)), "inv_r")
    assert abs(one_over_r - math.pi) < 1e-10
    two_pi = q.integrate_weighted(g, lambda x: np.exp(-np.sum(x * x, axis=-1)), "inv_r")
    assert abs(two_pi - 2 * math.pi) < 1e-10


def test_zero_and_linearity():
    g = q.grid3d(16, 6, 12, r_max=8)
    f = lambda x: np.exp(-np.sum(x * x, axis=-1)) * (1 + x[:, 2] ** 2)  # noqa: E731
    assert q.integrate_weighted(g, np.zeros(len(g.points))) == 0.0
    assert q.integrate_weighted(g, lambda x: 3.0 * f(x), "r") == pytest.approx(3.0 * q.integrate_weighted(g, f, "r"), rel=1e-14)


def test_non_finite_integrand_reports_node():
    g = q.grid3d(4, 2, 4, r_max=2)
    vals = np.ones(len(g.points))
    vals[5] = np.nan
    with pytest.raises(q.NonFiniteIntegrandError) as info:
        q.integrate_weighted(g, vals)
    assert np.allclose(info.value.point, g.points[5])


def test_wrong_shape_rejected():
    g = q.grid3d(4, 2, 4, r_max=2)
    with pytest.raises(ValueError):
        q.integrate_weighted(g, np.ones(3))


def test_refinement_reduces_error():
    errs = []
    for n in (8, 16, 32):
        g = q.grid3d(n, 4, 8, r_max=8)
        errs.append(abs(q.integrate_weighted(g, lambda x: np.exp(-2 * np.sum(x * x, axis=-1)), "inv_r") - math.pi))
    assert errs[0] > errs[1] > errs[2] or errs[2] < 1e-14


def test_reduction_is_order_independent(rng):
    vals = rng.normal(size=10000) * 10.0 ** rng.integers(-8, 8, size=10000)
    perm = rng.permutation(len(vals))
    assert q.accurate_sum(vals) == q.accurate_sum(vals[perm])


def test_metadata():
    md = q.grid3d(10, 4, 8, r_max=5.0, radial_map="log").metadata()
    assert md == {"n_r": 10, "n_theta": 4, "n_phi": 8, "r_min": 1e-6, "r_max": 5.0, "radial_map": "log"}
