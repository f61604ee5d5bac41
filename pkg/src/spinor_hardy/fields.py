"""Transversal magnetic fields B(x) = phi(r) grad g(omega) x x and their gauge.

The potential is the one with vanishing radial-angular mixing,

    A(x) = 1/2 phi(r) g(omega) x - 1/2 P(r) grad g(omega),   P(r) = int_0^r s phi(s) ds,

together with the phase eta = 1/2 P(r) g(omega) that conjugates the magnetic
angular momentum back to the free one.
"""

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate

from . import expr
from .errors import OutOfRangeError, SingularPointError, SingularityError
from .harmonics import Poly3, X, Y, Z, real_solid_harmonic

R_MIN = 1e-6
R_MAX = 50.0


def _norm(x):
    return np.linalg.norm(x, axis=-1)


def _check_point(x, r_min=R_MIN):
    x = np.asarray(x, dtype=float)
    r = _norm(x)
    if np.any(r < r_min):
        raise SingularPointError(f"evaluation point within r_min={r_min:g} of the origin")
    return x, r


@dataclass(frozen=True)
class RadialProfile:
    """phi(r) together with its weighted primitive P(r) = int_0^r s phi(s) ds."""

    phi_fn: Callable
    primitive_fn: Callable
    analytic_primitive: bool
    label: str = ""
    r_max: float = R_MAX
    zero: bool = False

    def _check(self, r):
        r = np.asarray(r, dtype=float)
        if np.any(r < 0) or np.any(r > self.r_max * (1 + 1e-12)):
            raise OutOfRangeError(f"radius outside working range [0, {self.r_max:g}]")
        return r

    def phi(self, r):
        return self.phi_fn(self._check(r))

    def primitive(self, r):
        return self.primitive_fn(self._check(r))


def zero_profile():
    return RadialProfile(np.zeros_like, np.zeros_like, True, "0", zero=True)


def power_profile(coef, power, r_max=R_MAX):
    """phi(r) = coef * r^power with its closed-form primitive (power > -2)."""
    if power <= -2:
        raise SingularityError(f"int_0^r s^{power + 1} ds diverges for power {power:g} <= -2")
    k = power + 2.0

    def phi(r):
        return coef * np.power(r, power)

    def prim(r):
        return coef * np.power(r, k) / k

    return RadialProfile(phi, prim, True, f"{coef:g}*r^{power:g}", r_max=r_max, zero=(coef == 0))


def quadrature_primitive(phi, exponent_hint=None, tol=1e-12):
    """Build P(r) = int_0^r s phi(s) ds by adaptive Gauss-Kronrod quadrature.

    With ``exponent_hint = a`` (phi ~ r^a near 0, a > -2) the first panel uses
    the substitution s = t^(2/(a+3)), which turns the endpoint singularity into
    a smooth integrand.  Distinct radii are integrated panel by panel and
    accumulated, so a grid with few distinct radii costs few quadratures.
    """

    def first_panel(r0):
        if r0 == 0:
            return 0.0
        if exponent_hint is None:
            return _quad(lambda s: s * phi(s), 0.0, r0, tol)
        q = 2.0 / (exponent_hint + 3.0)
        return _quad(lambda t: q * t ** (2 * q - 1) * phi(t**q), 0.0, r0 ** (1.0 / q), tol)

    def prim(r):
        r = np.asarray(r, dtype=float)
        flat = r.ravel()
        order = np.argsort(flat, kind="stable")
        vals = np.empty_like(flat)
        acc = None
        prev = 0.0
        for idx in order:
            ri = flat[idx]
            if acc is not None and ri - prev <= 1e-13 * max(ri, 1.0):
                vals[idx] = acc
                continue
            acc = first_panel(ri) if acc is None else acc + _quad(lambda s: s * phi(s), prev, ri, tol)
            prev = ri
            vals[idx] = acc
        return vals.reshape(r.shape)

    return prim


def _quad(f, a, b, tol):
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            val, err = integrate.quad(lambda s: float(f(np.float64(s))), a, b, epsabs=tol, epsrel=tol, limit=400)
        except (integrate.IntegrationWarning, ZeroDivisionError, OverflowError) as exc:
            raise SingularityError(f"primitive quadrature failed on [{a:g}, {b:g}]: {exc}") from exc
    if not math.isfinite(val):
        raise SingularityError(f"primitive quadrature is not finite on [{a:g}, {b:g}]")
    return val


def parse_radial_expression(src, r_max=R_MAX, exponent_hint=None):
    """Parse a radial profile phi(r) from an infix expression in ``r``.

    Finite sums of power laws get a closed-form primitive; anything else goes
    through adaptive quadrature.
    """
    tree = expr.parse(src)

    def phi(r):
        with np.errstate(all="ignore"):
            out = expr.evaluate(tree, r)
        return out

    probe = np.geomspace(R_MIN, r_max, 64)
    vals = phi(probe)
    if not np.all(np.isfinite(vals)):
        bad = probe[~np.isfinite(vals)][0]
        raise expr.ExpressionError(f"expression {src!r} is not finite at r={bad:g}")

    series = expr.power_series(tree)
    if series is not None:
        series = {k: v for k, v in series.items() if v != 0}
        if not series:
            return RadialProfile(np.zeros_like, np.zeros_like, True, src, r_max=r_max, zero=True)
        bad = [k for k in series if k <= -2]
        if bad:
            raise SingularityError(f"int_0^r s*phi(s) ds diverges: term r^{min(bad):g} in {src!r}")

        def prim(r):
            r = np.asarray(r, dtype=float)
            return sum(v * np.power(r, k + 2) / (k + 2) for k, v in series.items())

        return RadialProfile(phi, prim, True, src, r_max=r_max)

    prim = quadrature_primitive(phi, exponent_hint)
    prim(np.array([r_max]))  # fail fast on a divergent primitive
    return RadialProfile(phi, prim, False, src, r_max=r_max)


@dataclass(frozen=True)
class AngularProfile:
    """g(omega) given as p(x) / |x|^d for a homogeneous real polynomial p of degree d."""

    name: str
    poly: Poly3
    degree: int
    grad_polys: tuple = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "grad_polys", tuple(self.poly.derivative(a) for a in range(3)))

    def g(self, x):
        x = np.asarray(x, dtype=float)
        return self.poly(x).real / _norm(x) ** self.degree

    def grad(self, x):
        """Gradient of the degree-0 extension; tangential and homogeneous of degree -1."""
        x = np.asarray(x, dtype=float)
        r = _norm(x)[..., None]
        dp = np.stack([gp(x).real for gp in self.grad_polys], axis=-1)
        p = self.poly(x).real[..., None]
        return dp / r**self.degree - self.degree * p * x / r ** (self.degree + 2)


def _catalog():
    cat = {
        "const": (Poly3.constant(1.0), 0),
        "x/r": (X, 1),
        "y/r": (Y, 1),
        "z/r": (Z, 1),
    }
    for l in range(0, 5):
        for m in range(-l, l + 1):
            cat[f"Y_{l}_{m}"] = (real_solid_harmonic(l, m), l)
    # a non-axisymmetric mixture of degrees 1..3
    r2 = X * X + Y * Y + Z * Z
    mixed = Z * r2 + real_solid_harmonic(2, 2) * X * 0.5 - real_solid_harmonic(3, -1) * (1 / 3)
    cat["mixed"] = (mixed, 3)
    return cat


ANGULAR_CATALOG = _catalog()


def angular_profile(name):
    try:
        poly, deg = ANGULAR_CATALOG[name]
    except KeyError:
        raise KeyError(f"unknown angular profile {name!r}; known: {', '.join(sorted(ANGULAR_CATALOG))}") from None
    return AngularProfile(name, poly, deg)


@dataclass(frozen=True)
class TransversalFieldSpec:
    radial: RadialProfile
    angular: AngularProfile
    label: str = ""

    @property
    def zero(self):
        return self.radial.zero


def eval_B(spec, x):
    """B(x) = phi(|x|) grad g(x) x x."""
    x, r = _check_point(x)
    return spec.radial.phi(r)[..., None] * np.cross(spec.angular.grad(x), x)


def example_field(lam, alpha, r_max=R_MAX):
    """The field lam r^alpha (-y, x, 0): phi = lam r^(alpha+1), g = z/r."""
    if lam == 0:
        raise ValueError("lambda must be nonzero")
    if alpha <= -3:
        raise SingularityError(f"alpha = {alpha:g} <= -3: int_0^r s phi(s) ds diverges")
    return TransversalFieldSpec(power_profile(lam, alpha + 1.0, r_max), angular_profile("z/r"), f"example(lambda={lam:g}, alpha={alpha:g})")


def zero_spec():
    return TransversalFieldSpec(zero_profile(), angular_profile("z/r"), "zero")


class GaugePotential:
    """The potential A built from a transversal field spec, with closed-form
    evaluators for the quantities entering the spinor identities."""

    def __init__(self, spec):
        self.spec = spec
        self.zero = spec.zero

    def _parts(self, x):
        x, r = _check_point(x)
        phi = self.spec.radial.phi(r)
        P = self.spec.radial.primitive(r)
        g = self.spec.angular.g(x)
        dg = self.spec.angular.grad(x)
        return x, r, phi, P, g, dg

    def A(self, x):
        if self.zero:
            return np.zeros(np.shape(x))
        x, r, phi, P, g, dg = self._parts(x)
        return 0.5 * (phi * g)[..., None] * x - 0.5 * P[..., None] * dg

    def A_r(self, x):
        if self.zero:
            return np.zeros(np.shape(x)[:-1])
        x, r, phi, P, g, dg = self._parts(x)
        return 0.5 * phi * g * r

    def xwedgeA(self, x):
        if self.zero:
            return np.zeros(np.shape(x))
        x, r, phi, P, g, dg = self._parts(x)
        return -0.5 * P[..., None] * np.cross(x, dg)

    def dr_xwedgeA(self, x):
        """Radial derivative of x ^ A, using P'(r) = r phi(r) and the degree-0
        homogeneity of x ^ grad g."""
        if self.zero:
            return np.zeros(np.shape(x))
        x, r, phi, P, g, dg = self._parts(x)
        return -0.5 * (r * phi)[..., None] * np.cross(x, dg)

    def xwedge_grad_Ar(self, x):
        """x ^ grad(A . x/r) with A . x/r = phi(r) g r / 2; the radial part of the
        gradient drops out of the cross product."""
        if self.zero:
            return np.zeros(np.shape(x))
        x, r, phi, P, g, dg = self._parts(x)
        return 0.5 * (r * phi)[..., None] * np.cross(x, dg)

    def eta(self, x):
        if self.zero:
            return np.zeros(np.shape(x)[:-1])
        x, r, phi, P, g, dg = self._parts(x)
        return 0.5 * P * g

    def grad_eta(self, x):
        if self.zero:
            return np.zeros(np.shape(x))
        x, r, phi, P, g, dg = self._parts(x)
        return 0.5 * (phi * g)[..., None] * x + 0.5 * P[..., None] * dg

    def B(self, x):
        if self.zero:
            return np.zeros(np.shape(x))
        return eval_B(self.spec, x)


def make_gauge(spec):
    """Construct the potential; fails if the primitive diverges on the working range."""
    if not spec.zero:
        P = spec.radial.primitive(np.array([spec.radial.r_max]))
        if not np.all(np.isfinite(P)):
            raise SingularityError("primitive of the radial profile is not finite on the working range")
    return GaugePotential(spec)


def default_step(x):
    return 1e-4 * np.maximum(1.0, _norm(np.asarray(x, dtype=float)))


def fd_jacobian(f, x, h=None, order=2):
    """Central differences of f at x: J[..., i, ...] = d f / d x_i.

    ``order`` selects the second- or fourth-order stencil.
    """
    x = np.asarray(x, dtype=float)
    batch = x.shape[:-1]
    h = default_step(x) if h is None else np.broadcast_to(np.asarray(h, dtype=float), batch)
    reach = h if order == 2 else 2 * h
    if np.any(_norm(x) <= reach):
        raise SingularPointError("finite-difference stencil reaches the origin")
    if np.any(_norm(x) <= 10 * reach):
        warnings.warn("finite-difference stencil close to the origin; expect loss of accuracy", RuntimeWarning, stacklevel=2)
    cols = []
    for i in range(3):
        e = np.zeros(3)
        e[i] = 1.0
        step = h[..., None] * e
        if order == 2:
            diff = (f(x + step) - f(x - step)) / 2
        elif order == 4:
            diff = (8 * (f(x + step) - f(x - step)) - (f(x + 2 * step) - f(x - 2 * step))) / 12
        else:
            raise ValueError("order must be 2 or 4")
        cols.append(diff / h.reshape(batch + (1,) * (diff.ndim - len(batch))))
    return np.stack(cols, axis=len(batch))


def curl_fd(gauge, x, h=None):
    J = fd_jacobian(gauge.A, x, h)  # J[..., i, j] = d_i A_j
    return np.stack(
        [J[..., 1, 2] - J[..., 2, 1], J[..., 2, 0] - J[..., 0, 2], J[..., 0, 1] - J[..., 1, 0]], axis=-1
    )


def curl_residual(gauge, x, h=None):
    """|curl A - B| with curl A from central differences of step h."""
    if gauge.zero:
        return np.zeros(np.shape(x)[:-1])
    return _norm(curl_fd(gauge, x, h) - gauge.B(x))


@dataclass(frozen=True)
class GaugeResidual:
    closed_form: np.ndarray
    finite_difference: np.ndarray


def gauge_condition_residual(gauge, x, h=None):
    """|d_r(x ^ A) + x ^ grad(A_r)| from the closed forms and from finite differences."""
    x, r = _check_point(x)
    closed = _norm(gauge.dr_xwedgeA(x) + gauge.xwedge_grad_Ar(x))
    if gauge.zero:
        return GaugeResidual(closed, np.zeros_like(closed))
    h = default_step(x) if h is None else np.broadcast_to(np.asarray(h, dtype=float), r.shape)
    omega = x / r[..., None]
    step = h[..., None] * omega
    dr = (gauge.xwedgeA(x + step) - gauge.xwedgeA(x - step)) / (2 * h[..., None])
    grad_Ar = fd_jacobian(gauge.A_r, x, h)
    fd = _norm(dr + np.cross(x, grad_Ar))
    return GaugeResidual(closed, fd)
