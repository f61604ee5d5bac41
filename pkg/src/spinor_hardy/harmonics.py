"""Polynomials in (x, y, z) and solid spherical harmonics.

Solid harmonics r^l Y_l^m are homogeneous polynomials, so trial fields built
from them are smooth at the origin and have exact Cartesian gradients.  The
Condon-Shortley phase is included in Y_l^m.
"""

from math import factorial, pi, sqrt

import numpy as np
from numpy.polynomial import legendre
from scipy.special import sph_harm_y


class Poly3:
    """Polynomial in x, y, z with scalar or array-valued coefficients.

    ``terms`` maps exponent triples (a, b, c) to coefficients; all coefficients
    share the same numpy shape.
    """

    def __init__(self, terms, shape=()):
        self.shape = tuple(shape)
        self.terms = {}
        for exps, coef in terms.items():
            coef = np.asarray(coef, dtype=complex)
            if coef.shape != self.shape:
                coef = np.broadcast_to(coef, self.shape).copy()
            if np.any(coef != 0):
                self.terms[tuple(int(e) for e in exps)] = coef

    @classmethod
    def monomial(cls, a, b, c, coef=1.0):
        return cls({(a, b, c): coef}, np.shape(coef))

    @classmethod
    def constant(cls, value):
        return cls({(0, 0, 0): value}, np.shape(value))

    def __add__(self, other):
        out = {k: v.copy() for k, v in self.terms.items()}
        for k, v in other.terms.items():
            out[k] = out[k] + v if k in out else v.copy()
        return Poly3(out, np.broadcast_shapes(self.shape, other.shape))

    def __sub__(self, other):
        return self + other.scale(-1.0)

    def __mul__(self, other):
        if not isinstance(other, Poly3):
            return self.scale(other)
        out = {}
        for (a1, b1, c1), v1 in self.terms.items():
            for (a2, b2, c2), v2 in other.terms.items():
                k = (a1 + a2, b1 + b2, c1 + c2)
                prod = v1 * v2
                out[k] = out[k] + prod if k in out else prod
        return Poly3(out, np.broadcast_shapes(self.shape, other.shape))

    __rmul__ = __mul__

    def __pow__(self, n):
        out = Poly3.constant(np.ones(self.shape, dtype=complex))
        for _ in range(n):
            out = out * self
        return out

    def scale(self, c):
        c = np.asarray(c, dtype=complex)
        return Poly3({k: v * c for k, v in self.terms.items()}, np.broadcast_shapes(self.shape, c.shape))

    def outer(self, vec):
        """Scalar polynomial times a constant array, e.g. a spinor."""
        if self.shape:
            raise ValueError("outer() needs a scalar polynomial")
        vec = np.asarray(vec, dtype=complex)
        return Poly3({k: v * vec for k, v in self.terms.items()}, vec.shape)

    def conj(self):
        return Poly3({k: np.conj(v) for k, v in self.terms.items()}, self.shape)

    @property
    def degree(self):
        return max((sum(k) for k in self.terms), default=0)

    def derivative(self, axis):
        out = {}
        for k, v in self.terms.items():
            if k[axis] == 0:
                continue
            nk = list(k)
            nk[axis] -= 1
            out[tuple(nk)] = v * k[axis]
        return Poly3(out, self.shape)

    def __call__(self, points):
        points = np.asarray(points, dtype=float)
        batch = points.shape[:-1]
        out = np.zeros(batch + self.shape, dtype=complex)
        if not self.terms:
            return out
        deg = self.degree
        powers = [np.ones((deg + 1,) + batch) for _ in range(3)]
        for ax in range(3):
            for p in range(1, deg + 1):
                powers[ax][p] = powers[ax][p - 1] * points[..., ax]
        extra = (None,) * len(self.shape)
        for (a, b, c), v in self.terms.items():
            mono = powers[0][a] * powers[1][b] * powers[2][c]
            out += mono[(...,) + extra] * v
        return out


X = Poly3.monomial(1, 0, 0)
Y = Poly3.monomial(0, 1, 0)
Z = Poly3.monomial(0, 0, 1)
R2 = X * X + Y * Y + Z * Z


def ylm_norm(l, m):
    m = abs(m)
    return sqrt((2 * l + 1) / (4 * pi) * factorial(l - m) / factorial(l + m))


def solid_harmonic(l, m):
    """r^l Y_l^m(omega) as a homogeneous complex polynomial of degree l."""
    if l < 0 or abs(m) > l:
        raise ValueError(f"invalid (l, m) = ({l}, {m})")
    am = abs(m)
    # d^m P_l / dt^m as a power series in t
    c = np.zeros(l + 1)
    c[l] = 1.0
    dP = legendre.leg2poly(legendre.legder(c, am)) if am else legendre.leg2poly(c)
    radial = Poly3({}, ())
    for j, a in enumerate(dP):
        if abs(a) < 1e-300:
            continue
        k2 = l - am - j
        if k2 < 0 or k2 % 2:
            continue
        radial = radial + (Z ** j) * (R2 ** (k2 // 2)) * float(a)
    p = (X + Y * 1j) ** am * radial * ((-1) ** am * ylm_norm(l, am))
    if m < 0:
        p = p.conj() * ((-1) ** am)
    return p


def real_solid_harmonic(l, m):
    """Real solid harmonic (the usual real Y_lm times r^l)."""
    if m == 0:
        return solid_harmonic(l, 0)
    p = solid_harmonic(l, abs(m))
    sign = (-1) ** abs(m)
    if m > 0:
        q = (p + p.conj()).scale(sign / sqrt(2))
    else:
        q = (p - p.conj()).scale(sign / (sqrt(2) * 1j))
    return Poly3({k: v.real.astype(complex) for k, v in q.terms.items()})


def basis_indices(l_max):
    """(l, m, s) triples ordered by l, then m, then spin s in {1, 2}."""
    return [(l, m, s) for l in range(l_max + 1) for m in range(-l, l + 1) for s in (1, 2)]


def ylm_table(l_max, omega):
    """Y_l^m at unit vectors omega, shape (N, (l_max+1)^2), ordered by (l, m)."""
    if l_max < 0:
        raise ValueError(f"l_max must be >= 0, got {l_max}")
    omega = np.asarray(omega, dtype=float)
    theta = np.arccos(np.clip(omega[..., 2], -1.0, 1.0))
    phi = np.arctan2(omega[..., 1], omega[..., 0])
    l = np.array([l for l in range(l_max + 1) for _ in range(-l, l + 1)])
    m = np.array([m for l in range(l_max + 1) for m in range(-l, l + 1)])
    return sph_harm_y(l, m, theta[..., None], phi[..., None])

