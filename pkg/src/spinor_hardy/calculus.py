"""Magnetic differential operators acting on C^2-valued fields on R^3.

Conventions: a field evaluated at points ``x`` of shape (..., 3) returns
spinors of shape (..., 2); derivatives come as (..., 3, 2) with the
Cartesian index first.  ``gauge=None`` means A = 0.
"""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import SingularPointError
from .fields import R_MIN, fd_jacobian
from .harmonics import Poly3, solid_harmonic
from .pauli import apply_sigma_dot, contract_spinor_vector

ENVELOPE_FLOOR = 1e-14


@dataclass(frozen=True)
class SpinorField:
    eval: Callable
    jacobian: Optional[Callable] = None
    support_radius: float = np.inf
    label: str = ""

    def __call__(self, x):
        return self.eval(np.asarray(x, dtype=float))


def _radius(x, r_min):
    x = np.asarray(x, dtype=float)
    r = np.linalg.norm(x, axis=-1)
    if np.any(r < r_min):
        raise SingularPointError(f"operator evaluated within r_min={r_min:g} of the origin")
    return x, r


# --- trial fields -----------------------------------------------------------


def zero_field():
    return SpinorField(
        lambda x: np.zeros(x.shape[:-1] + (2,), dtype=complex),
        lambda x: np.zeros(x.shape[:-1] + (3, 2), dtype=complex),
        0.0,
        "zero",
    )


def constant_field(spinor):
    s = np.asarray(spinor, dtype=complex)
    return SpinorField(
        lambda x: np.broadcast_to(s, x.shape[:-1] + (2,)).copy(),
        lambda x: np.zeros(x.shape[:-1] + (3, 2), dtype=complex),
        np.inf,
        "constant",
    )


def _gaussian_support(poly, s):
    coef = sum(float(np.max(np.abs(v))) for v in poly.terms.values()) or 1.0
    d = poly.degree
    r = s
    while coef * max(r, 1.0) ** d * np.exp(-(r**2) / (2 * s**2)) >= ENVELOPE_FLOOR:
        r *= 1.05
    return r


def polynomial_gaussian(poly, s=1.0, label="polynomial_gaussian"):
    """phi(x) = p(x) exp(-|x|^2 / (2 s^2)) for a spinor-valued polynomial p."""
    if poly.shape != (2,):
        raise ValueError("polynomial must be spinor-valued (coefficient shape (2,))")
    dpoly = [poly.derivative(a) for a in range(3)]
    inv = 1.0 / s**2

    def env(x):
        return np.exp(-0.5 * inv * np.sum(x * x, axis=-1))

    def ev(x):
        return poly(x) * env(x)[..., None]

    def jac(x):
        p = poly(x)
        e = env(x)[..., None, None]
        dp = np.stack([d(x) for d in dpoly], axis=-2)
        return (dp - inv * x[..., :, None] * p[..., None, :]) * e

    return SpinorField(ev, jac, _gaussian_support(poly, s), label)


def gaussian_radial(s=1.0, spinor=(1.0, 0.0)):
    return polynomial_gaussian(Poly3.constant(1.0).outer(spinor), s, f"gaussian_radial(s={s:g})")


def gaussian_times_basis(l, m, spin, s=1.0):
    """r^l Y_l^m(omega) e_spin exp(-r^2 / (2 s^2))."""
    e = np.zeros(2, dtype=complex)
    e[spin - 1] = 1.0
    return polynomial_gaussian(solid_harmonic(l, m).outer(e), s, f"gaussian_times_basis(l={l}, m={m}, s={spin})")


def random_gaussian_field(rng, l_max=3, s_range=(0.7, 1.3)):
    """Random complex combination of r^l Y_l^m e_s (l <= l_max) under a
    Gaussian envelope of random width."""
    poly = Poly3({}, (2,))
    for l in range(l_max + 1):
        for m in range(-l, l + 1):
            c = (rng.normal(size=2) + 1j * rng.normal(size=2)) / np.sqrt(2 * (l + 1))
            poly = poly + solid_harmonic(l, m).outer(c)
    s = float(rng.uniform(*s_range))
    return polynomial_gaussian(poly, s, f"random_gaussian(l_max={l_max}, s={s:.6f})")


def radial_field(f, df, spinor=(1.0, 0.0), support_radius=np.inf, label="radial"):
    """phi(x) = f(|x|) e for a constant spinor e; grad phi = f'(r) omega e."""
    e = np.asarray(spinor, dtype=complex)

    def ev(x):
        r = np.linalg.norm(x, axis=-1)
        return f(r)[..., None] * e

    def jac(x):
        r = np.linalg.norm(x, axis=-1)
        w = x / r[..., None]
        return (df(r)[..., None] * w)[..., :, None] * e

    return SpinorField(ev, jac, support_radius, label)


def scaled(field, c):
    jac = None if field.jacobian is None else (lambda x: c * field.jacobian(x))
    return SpinorField(lambda x: c * field.eval(x), jac, field.support_radius, f"{c}*{field.label}")


def phased(field, gauge):
    """e^{i eta} phi, with the analytic product-rule jacobian."""

    def ev(x):
        return np.exp(1j * gauge.eta(x))[..., None] * field.eval(x)

    def jac(x):
        ph = np.exp(1j * gauge.eta(x))[..., None, None]
        return ph * (1j * gauge.grad_eta(x)[..., :, None] * field.eval(x)[..., None, :] + field.jacobian(x))

    return SpinorField(ev, jac if field.jacobian is not None else None, field.support_radius, f"e^(i eta)*{field.label}")


def degree_zero(field):
    """Homogeneous degree-0 extension x -> phi(x/|x|) of the field's trace on S^2."""

    def ev(x):
        r = np.linalg.norm(x, axis=-1)
        return field.eval(x / r[..., None])

    def jac(x):
        r = np.linalg.norm(x, axis=-1)[..., None]
        w = x / r
        J = field.jacobian(w)
        radial = np.einsum("...i,...ia->...a", w, J)
        return (J - w[..., :, None] * radial[..., None, :]) / r[..., None]

    return SpinorField(ev, jac if field.jacobian is not None else None, np.inf, f"deg0({field.label})")


# --- operators --------------------------------------------------------------


def grad(field, x, method="analytic", h=None, order=2):
    x = np.asarray(x, dtype=float)
    if method == "analytic":
        if field.jacobian is None:
            raise ValueError(f"field {field.label!r} has no analytic jacobian")
        return field.jacobian(x)
    if method == "fd":
        return fd_jacobian(field.eval, x, h, order)
    raise ValueError(f"unknown derivative method {method!r}")


def _A(gauge, x):
    return np.zeros(x.shape) if gauge is None or gauge.zero else gauge.A(x)


def _xwedgeA(gauge, x):
    return np.zeros(x.shape) if gauge is None or gauge.zero else gauge.xwedgeA(x)


def magnetic_grad(field, gauge, x, method="analytic", h=None, order=2):
    """nabla_A phi = nabla phi + i A phi."""
    x = np.asarray(x, dtype=float)
    return grad(field, x, method, h, order) + 1j * _A(gauge, x)[..., :, None] * field.eval(x)[..., None, :]


def radial_derivative_A(field, gauge, x, method="analytic", h=None, order=2, r_min=R_MIN):
    x, r = _radius(x, r_min)
    w = x / r[..., None]
    return np.einsum("...i,...ia->...a", w, magnetic_grad(field, gauge, x, method, h, order))


def _wedge(x, V):
    """x ^ V for a vector of spinors V (..., 3, 2)."""
    return np.cross(x[..., :, None], V, axisa=-2, axisb=-2, axisc=-2)


def angular_momentum(field, x, gauge=None, method="analytic", h=None, order=2, r_min=R_MIN):
    """L_A phi = x ^ (-i nabla) phi + (x ^ A) phi; with gauge=None this is L phi."""
    x, r = _radius(x, r_min)
    L = -1j * _wedge(x, grad(field, x, method, h, order))
    if gauge is None or gauge.zero:
        return L
    return L + gauge.xwedgeA(x)[..., :, None] * field.eval(x)[..., None, :]


def sigma_dot_magnetic_grad(field, gauge, x, method="analytic", h=None, order=2):
    return contract_spinor_vector(magnetic_grad(field, gauge, x, method, h, order))


def spin_orbit(field, gauge, x, method="analytic", h=None, order=2, r_min=R_MIN):
    """(sigma . L_A + 1) phi."""
    x = np.asarray(x, dtype=float)
    return contract_spinor_vector(angular_momentum(field, x, gauge, method, h, order, r_min)) + field.eval(x)


@dataclass(frozen=True)
class LocalQuantities:
    """Everything the spinor identities need at a batch of points, computed
    from a single evaluation of phi and its jacobian."""

    x: np.ndarray
    r: np.ndarray
    phi: np.ndarray
    grad_A: np.ndarray  # (..., 3, 2)
    dr_A: np.ndarray  # (..., 2)
    L_A: np.ndarray  # (..., 3, 2)
    sigma_grad_A: np.ndarray  # (..., 2)
    sigma_L_A: np.ndarray  # (..., 2)


def local_quantities(field, gauge, x, method="analytic", h=None, order=2, r_min=R_MIN):
    x, r = _radius(x, r_min)
    phi = field.eval(x)
    J = grad(field, x, method, h, order)
    ga = J + 1j * _A(gauge, x)[..., :, None] * phi[..., None, :]
    w = x / r[..., None]
    dr = np.einsum("...i,...ia->...a", w, ga)
    LA = -1j * _wedge(x, J) + _xwedgeA(gauge, x)[..., :, None] * phi[..., None, :]
    return LocalQuantities(x, r, phi, ga, dr, LA, contract_spinor_vector(ga), contract_spinor_vector(LA))


def factorization_residual(field, gauge, x, method="analytic", h=None, order=2, r_min=R_MIN):
    """|sigma.nabla_A phi - (sigma.omega)(d_r^A phi - (1/r) sigma.L_A phi)| pointwise."""
    q = local_quantities(field, gauge, x, method, h, order, r_min)
    w = q.x / q.r[..., None]
    rhs = apply_sigma_dot(w, q.dr_A - q.sigma_L_A / q.r[..., None])
    return np.linalg.norm(q.sigma_grad_A - rhs, axis=-1)


def pythagoras_residual(field, gauge, x, method="analytic", h=None, order=2, r_min=R_MIN):
    """| |nabla_A phi|^2 - |d_r^A phi|^2 - |L_A phi|^2 / r^2 | pointwise."""
    q = local_quantities(field, gauge, x, method, h, order, r_min)
    lhs = np.sum(np.abs(q.grad_A) ** 2, axis=(-2, -1))
    rhs = np.sum(np.abs(q.dr_A) ** 2, axis=-1) + np.sum(np.abs(q.L_A) ** 2, axis=(-2, -1)) / q.r**2
    return np.abs(lhs - rhs)
