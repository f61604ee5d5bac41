import math

import numpy as np
import pytest

from spinor_hardy import fields
from spinor_hardy.errors import OutOfRangeError, SingularityError, SingularPointError
from spinor_hardy.expr import ExpressionError

from helpers import shell_points


def test_example_field_profiles():
    spec = fields.example_field(1.0, 0.0)
    r = np.array([0.5, 1.0, 2.0])
    assert np.allclose(spec.radial.phi(r), r)
    assert np.allclose(spec.radial.primitive(r), r**3 / 3, rtol=1e-15)
    assert spec.radial.analytic_primitive


def test_example_field_rejections():
    with pytest.raises(SingularityError):
        fields.example_field(1.0, -3.0)
    with pytest.raises(ValueError):
        fields.example_field(0.0, 1.0)


@pytest.mark.parametrize(
    "lam, alpha, x, expected",
    [
        (1.0, 0.0, (1, 0, 0), (0, 1, 0)),
        (2.0, 1.0, (0, 0, 5), (0, 0, 0)),
        (3.0, -2.0, (0, 1, 0), (-3, 0, 0)),
    ],
)
def test_eval_B_examples(lam, alpha, x, expected):
    B = fields.eval_B(fields.example_field(lam, alpha), np.array(x, dtype=float))
    assert np.allclose(B, expected, atol=1e-15)


def test_eval_B_matches_closed_form(rng):
    x = shell_points(rng, 50)
    for lam, alpha in [(1.0, 0.0), (2.0, 1.0), (3.0, -2.5)]:
        B = fields.eval_B(fields.example_field(lam, alpha), x)
        r = np.linalg.norm(x, axis=-1)
        ref = lam * r[:, None] ** alpha * np.stack([-x[:, 1], x[:, 0], np.zeros(len(x))], axis=-1)
        assert np.max(np.abs(B - ref)) < 1e-13


def test_constant_g_gives_zero_B(rng):
    spec = fields.TransversalFieldSpec(fields.power_profile(1.0, 1.0), fields.angular_profile("const"))
    assert np.all(fields.eval_B(spec, shell_points(rng, 10)) == 0)


def test_eval_B_at_origin_rejected():
    with pytest.raises(SingularPointError):
        fields.eval_B(fields.example_field(1.0, 0.0), np.zeros(3))


@pytest.mark.parametrize("name", sorted(fields.ANGULAR_CATALOG))
def test_angular_gradient_tangential_and_homogeneous(rng, name):
    ang = fields.angular_profile(name)
    x = shell_points(rng, 30)
    gx = ang.grad(x)
    assert np.max(np.abs(np.sum(gx * x, axis=-1))) < 1e-13
    assert np.allclose(ang.grad(3.0 * x), gx / 3.0, atol=1e-14)
    assert np.allclose(ang.g(2.0 * x), ang.g(x), atol=1e-14)
    fd = fields.fd_jacobian(ang.g, x, order=4)
    assert np.max(np.abs(fd - gx)) < 1e-8


def test_unknown_angular_profile():
    with pytest.raises(KeyError):
        fields.angular_profile("nope")


@pytest.mark.parametrize("name", ["z/r", "x/r", "Y_2_1", "Y_3_-2", "mixed"])
def test_B_tangential(rng, name):
    spec = fields.TransversalFieldSpec(fields.power_profile(1.5, 0.5), fields.angular_profile(name))
    x = shell_points(rng, 40)
    assert np.max(np.abs(np.sum(fields.eval_B(spec, x) * x, axis=-1))) < 1e-13


def test_zero_profile_gauge_vanishes(rng):
    g = fields.make_gauge(fields.zero_spec())
    x = shell_points(rng, 5)
    for fn in (g.A, g.B, g.xwedgeA, g.grad_eta):
        assert np.all(fn(x) == 0)
    assert np.all(g.eta(x) == 0)
    assert np.all(fields.curl_residual(g, x) == 0)
    res = fields.gauge_condition_residual(g, x)
    assert np.all(res.closed_form == 0) and np.all(res.finite_difference == 0)


def test_example_gauge_closed_forms(rng):
    g = fields.make_gauge(fields.example_field(1.0, 0.0))
    x = shell_points(rng, 40)
    r = np.linalg.norm(x, axis=-1)
    assert np.allclose(g.eta(x), r**2 * x[:, 2] / 6, rtol=1e-14)
    ez = np.array([0.0, 0.0, 1.0])
    grad_g = ez / r[:, None] - x[:, 2:3] * x / r[:, None] ** 3
    A_ref = 0.5 * x[:, 2:3] * x - r[:, None] ** 3 / 6 * grad_g
    assert np.allclose(g.A(x), A_ref, atol=1e-14)
    assert np.allclose(g.A_r(x), np.sum(g.A(x) * x, axis=-1) / r, atol=1e-14)
    assert np.allclose(g.xwedgeA(x), np.cross(x, g.A(x)), atol=1e-14)
    P = r**3 / 3
    assert np.allclose(g.xwedgeA(x), -0.5 * P[:, None] * np.cross(x, grad_g), atol=1e-14)


def test_gauge_relations_to_B(rng, example_gauges):
    x = shell_points(rng, 40)
    for g in example_gauges.values():
        r = np.linalg.norm(x, axis=-1)[:, None]
        B = g.B(x)
        assert np.allclose(g.dr_xwedgeA(x), 0.5 * r * B, atol=1e-13)
        assert np.allclose(g.xwedge_grad_Ar(x), -0.5 * r * B, atol=1e-13)


def test_grad_eta_matches_fd(rng, example_gauges):
    x = shell_points(rng, 20)
    for g in example_gauges.values():
        assert np.max(np.abs(fields.fd_jacobian(g.eta, x, order=4) - g.grad_eta(x))) < 1e-7


def test_curl_residual_small(rng, example_gauges):
    x = shell_points(rng, 100)
    for g in example_gauges.values():
        assert np.max(fields.curl_residual(g, x, 1e-4)) < 1e-6


def test_curl_second_order_convergence(example_gauge):
    x = np.array([[1.0, 1.0, 1.0]])
    g = fields.make_gauge(fields.example_field(2.0, 1.0))
    coarse = fields.curl_residual(g, x, 1e-2)[0]
    fine = fields.curl_residual(g, x, 1e-3)[0]
    assert 50 < coarse / fine < 200


def test_gauge_condition(rng, example_gauges):
    x = shell_points(rng, 100)
    for g in example_gauges.values():
        res = fields.gauge_condition_residual(g, x)
        assert np.max(res.closed_form) == 0.0
        assert np.max(res.finite_difference) < 1e-6


def test_fd_near_origin():
    f = lambda x: np.sum(x**2, axis=-1)  # noqa: E731
    with pytest.raises(SingularPointError):
        fields.fd_jacobian(f, np.array([5e-5, 0, 0]), h=1e-4)
    with pytest.warns(RuntimeWarning):
        fields.fd_jacobian(f, np.array([5e-4, 0, 0]), h=1e-4)


def test_parse_radial_expression_closed_form():
    prof = fields.parse_radial_expression("r^2")
    assert prof.analytic_primitive
    r = np.array([0.3, 1.0, 4.0])
    assert np.allclose(prof.primitive(r), r**4 / 4, rtol=1e-14)


def test_parse_radial_expression_zero():
    prof = fields.parse_radial_expression("0")
    assert prof.zero
    assert fields.TransversalFieldSpec(prof, fields.angular_profile("z/r")).zero


def test_parse_radial_expression_quadrature():
    prof = fields.parse_radial_expression("exp(-r)*r")
    assert not prof.analytic_primitive
    assert abs(prof.primitive(np.array([1.0]))[0] - (2 - 5 / math.e)) < 1e-12
    assert prof.primitive(np.array([1.0]))[0] == pytest.approx(0.160603, abs=1e-6)


def test_quadrature_primitive_singular_endpoint():
    prof = fields.parse_radial_expression("3*exp(-r)*r^(-1.5)", exponent_hint=-1.5)
    # int_0^1 3 s^(-0.5) e^(-s) ds = 3 sqrt(pi) erf(1)
    assert abs(prof.primitive(np.array([1.0]))[0] - 3 * math.sqrt(math.pi) * math.erf(1.0)) < 1e-10


def test_quadrature_primitive_derivative(rng):
    prof = fields.parse_radial_expression("sin(r)^2 + 1")
    r = rng.uniform(0.5, 5.0, size=5)
    h = 1e-5
    dP = (prof.primitive(r + h) - prof.primitive(r - h)) / (2 * h)
    assert np.allclose(dP, r * prof.phi(r), rtol=1e-7)


@pytest.mark.parametrize("src", ["r^-2", "r^(-2.5) + 1", "1/r/r"])
def test_divergent_primitive(src):
    with pytest.raises(SingularityError):
        fields.parse_radial_expression(src)


def test_non_finite_expression():
    with pytest.raises(ExpressionError):
        fields.parse_radial_expression("sqrt(1 - r)")


def test_out_of_range():
    prof = fields.power_profile(1.0, 1.0)
    with pytest.raises(OutOfRangeError):
        prof.phi(np.array([100.0]))
