"""Product quadrature on S^2 and on R^3 in polar form.

Sums over nodes go through ``math.fsum`` so a given grid always produces the
same bits, whatever the worker count.
"""

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss

from .harmonics import ylm_table


class NonFiniteIntegrandError(ValueError):
    def __init__(self, point, value):
        self.point = point
        super().__init__(f"non-finite integrand {value!r} at node x = {tuple(float(c) for c in point)}")


@dataclass(frozen=True)
class SphereGrid:
    points: np.ndarray  # (N, 3) unit vectors
    weights: np.ndarray  # (N,)
    degree: int
    n_theta: int
    n_phi: int


@dataclass(frozen=True)
class RadialGrid:
    nodes: np.ndarray
    weights: np.ndarray
    r_min: float
    r_max: float
    map: str


@dataclass(frozen=True)
class Grid3D:
    radial: RadialGrid
    sphere: SphereGrid

    @property
    def points(self):
        return (self.radial.nodes[:, None, None] * self.sphere.points[None, :, :]).reshape(-1, 3)

    @property
    def radii(self):
        return np.repeat(self.radial.nodes, len(self.sphere.weights))

    @property
    def weights(self):
        """Volume weights r^2 w_r w_omega, flattened in the order of ``points``."""
        w = (self.radial.nodes**2 * self.radial.weights)[:, None] * self.sphere.weights[None, :]
        return w.ravel()

    def metadata(self):
        return {
            "n_r": int(len(self.radial.nodes)),
            "n_theta": self.sphere.n_theta,
            "n_phi": self.sphere.n_phi,
            "r_min": self.radial.r_min,
            "r_max": self.radial.r_max,
            "radial_map": self.radial.map,
        }


def sphere_grid(n_theta, n_phi):
    """Gauss-Legendre in cos(theta) times the uniform azimuthal rule."""
    if n_theta < 2 or n_phi < 4:
        raise ValueError(f"sphere grid needs n_theta >= 2 and n_phi >= 4, got ({n_theta}, {n_phi})")
    t, wt = leggauss(n_theta)
    phi = 2 * np.pi * np.arange(n_phi) / n_phi
    st = np.sqrt(1 - t**2)
    pts = np.stack(
        [
            st[:, None] * np.cos(phi)[None, :],
            st[:, None] * np.sin(phi)[None, :],
            np.broadcast_to(t[:, None], (n_theta, n_phi)),
        ],
        axis=-1,
    ).reshape(-1, 3)
    w = (wt[:, None] * np.full(n_phi, 2 * np.pi / n_phi)[None, :]).ravel()
    return SphereGrid(pts, w, min(2 * n_theta - 1, n_phi - 1), n_theta, n_phi)


def radial_grid(n_r, r_min, r_max, map="linear", breakpoints=()):
    """Gauss-Legendre nodes on [r_min, r_max].

    ``map="log"`` places the rule in t = log r, clustering nodes near the
    origin.  ``breakpoints`` splits the interval into panels of ``n_r`` nodes
    each, which keeps localized features (kinks, cutoffs) resolved.
    """
    if not 0 < r_min < r_max:
        raise ValueError(f"need 0 < r_min < r_max, got ({r_min!r}, {r_max!r})")
    if map not in ("linear", "log"):
        raise ValueError(f"unknown radial map {map!r}")
    if n_r < 1:
        raise ValueError("n_r must be positive")
    edges = [r_min] + sorted(b for b in breakpoints if r_min < b < r_max) + [r_max]
    x, w = leggauss(n_r)
    nodes, weights = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        if map == "linear":
            nodes.append(0.5 * (b - a) * x + 0.5 * (a + b))
            weights.append(0.5 * (b - a) * w)
        else:
            la, lb = math.log(a), math.log(b)
            t = 0.5 * (lb - la) * x + 0.5 * (la + lb)
            r = np.exp(t)
            nodes.append(r)
            weights.append(0.5 * (lb - la) * w * r)
    return RadialGrid(np.concatenate(nodes), np.concatenate(weights), r_min, r_max, map)


def grid3d(n_r=96, n_theta=32, n_phi=64, r_min=1e-6, r_max=30.0, radial_map="linear", breakpoints=()):
    return Grid3D(radial_grid(n_r, r_min, r_max, radial_map, breakpoints), sphere_grid(n_theta, n_phi))


def accurate_sum(values):
    return math.fsum(np.asarray(values, dtype=float).ravel().tolist())


_WEIGHTS = {
    "one": lambda r: np.ones_like(r),
    "r": lambda r: r,
    "inv_r": lambda r: 1.0 / r,
}


def integrate_weighted(grid, integrand, weight="one"):
    """sum integrand(r omega) weight(r) r^2 w_r w_omega over the grid.

    ``integrand`` is either a callable taking the (N, 3) node array or an
    array of values already evaluated on ``grid.points``.  Complex integrands
    must have negligible imaginary part; the real part is returned.
    """
    pts = grid.points
    vals = integrand(pts) if callable(integrand) else np.asarray(integrand)
    if vals.shape != (len(pts),):
        raise ValueError(f"integrand must give one value per node, got shape {vals.shape}")
    bad = ~np.isfinite(vals)
    if np.any(bad):
        i = int(np.argmax(bad))
        raise NonFiniteIntegrandError(pts[i], vals[i])
    terms = np.real(vals) * _WEIGHTS[weight](grid.radii) * grid.weights
    return accurate_sum(terms)


def integrate_sphere(grid, values):
    vals = values(grid.points) if callable(values) else np.asarray(values)
    re = accurate_sum(np.real(vals) * grid.weights)
    if np.iscomplexobj(vals):
        return complex(re, accurate_sum(np.imag(vals) * grid.weights))
    return re


def integrate_radial(grid, values):
    vals = values(grid.nodes) if callable(values) else np.asarray(values)
    return accurate_sum(vals * grid.weights)


def harmonic_gram(l_max, grid):
    """Gram matrix of {Y_l^m : l <= l_max} under the sphere rule."""
    Y = ylm_table(l_max, grid.points)
    return (np.conj(Y) * grid.weights[:, None]).T @ Y
