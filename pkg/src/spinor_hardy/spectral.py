"""sigma.L_A + 1 on L^2(S^2; C^2) in the basis Y_l^m (x) e_s.

The free part comes from the ladder actions
L_3 Y_l^m = m Y_l^m and L_(+/-) Y_l^m = sqrt((l -/+ m)(l +/- m + 1)) Y_l^(m +/- 1),
using sigma.L = sigma_3 L_3 + [[0, L_-], [L_+, 0]].  The magnetic part is the
multiplication operator sigma.(x ^ A) restricted to |x| = 1, integrated on a
product sphere rule.
"""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .calculus import SpinorField, angular_momentum, phased
from .harmonics import Poly3, basis_indices, solid_harmonic, ylm_table
from .pauli import SIGMA, contract_spinor_vector
from .quadrature import sphere_grid

HERMITIAN_TOL = 1e-8
CONTAMINATION_WEIGHT = 1e-8


@dataclass(frozen=True)
class SpinOrbitMatrix:
    entries: np.ndarray
    l_max: int
    gauge_tag: str
    basis: list = field(repr=False)

    @property
    def dim(self):
        return self.entries.shape[0]

    @property
    def hermiticity_residual(self):
        return float(np.max(np.abs(self.entries - self.entries.conj().T)))

    def shell_of(self):
        return np.array([l for l, _, _ in self.basis])


@dataclass(frozen=True)
class SpectrumResult:
    eigenvalues: list
    mu1: float
    lambda1: float
    l_max: int
    hermiticity_residual: float
    discarded: int = 0
    note: str = "spectrum of the truncated operator"

    def to_dict(self):
        return {
            "l_max": self.l_max,
            "eigenvalues": [float(v) for v in self.eigenvalues],
            "mu1": self.mu1,
            "lambda1": self.lambda1,
            "hermiticity_residual": self.hermiticity_residual,
        }


def assemble_free(l_max):
    if l_max < 0:
        raise ValueError(f"l_max must be >= 0, got {l_max}")
    basis = basis_indices(l_max)
    index = {b: i for i, b in enumerate(basis)}
    M = np.eye(len(basis), dtype=complex)
    for (l, m, s), j in index.items():
        M[j, j] += m if s == 1 else -m
        if s == 1 and m < l:  # L_+ Y_lm e_1 -> e_2 component
            M[index[(l, m + 1, 2)], j] += math.sqrt((l - m) * (l + m + 1))
        if s == 2 and m > -l:  # L_- Y_lm e_2 -> e_1 component
            M[index[(l, m - 1, 1)], j] += math.sqrt((l + m) * (l - m + 1))
    return SpinOrbitMatrix(M, l_max, "free", basis)


def magnetic_sphere_grid(gauge, l_max):
    """Product rule exact for Y_l'^m' (x ^ A) Y_l^m with l, l' <= l_max."""
    deg = 2 * l_max + gauge.spec.angular.degree + 2
    return sphere_grid(deg // 2 + 2, deg + 2)


def assemble_magnetic(gauge, l_max, grid=None):
    """Free matrix plus <Y e_s, sigma.(x ^ A)|_{S^2} Y' e_s'> by sphere quadrature."""
    free = assemble_free(l_max)
    if gauge is None or gauge.zero:
        return SpinOrbitMatrix(free.entries, l_max, "magnetic", free.basis)
    extra = gauge.spec.angular.degree + 2
    grid = grid or magnetic_sphere_grid(gauge, l_max)
    if grid.degree < 2 * l_max + extra:
        warnings.warn(
            f"sphere rule exact to degree {grid.degree} < {2 * l_max + extra}; matrix elements may be inexact",
            RuntimeWarning,
            stacklevel=2,
        )
    Y = ylm_table(l_max, grid.points)  # (N, K) ordered (l, m)
    V = gauge.xwedgeA(grid.points)  # (N, 3)
    SV = np.einsum("nj,jab->nab", V, SIGMA)
    K = Y.shape[1]
    W = np.zeros((2 * K, 2 * K), dtype=complex)
    Yw = np.conj(Y) * grid.weights[:, None]
    for a in range(2):
        for b in range(2):
            W[a::2, b::2] = Yw.T @ (SV[:, a, b][:, None] * Y)
    mat = SpinOrbitMatrix(free.entries + W, l_max, "magnetic", free.basis)
    res = mat.hermiticity_residual
    if res > 1e-10:
        warnings.warn(f"magnetic matrix Hermiticity residual {res:.3g}", RuntimeWarning, stacklevel=2)
    return mat


def _mu_lambda(vals):
    nonneg = [v for v in vals if v >= 0]
    neg = [v for v in vals if v < 0]
    mu1 = min(nonneg) if nonneg else math.nan
    lam1 = -max(neg) if neg else math.nan
    return float(mu1), float(lam1)


def eigenvalues(mat, filter_contamination=None):
    """Sorted real spectrum with mu_1 (smallest eigenvalue >= 0) and lambda_1
    (distance to 0 of the largest negative eigenvalue).

    Magnetic matrices drop eigenvectors carrying more than 1e-8 of their weight
    in the top two l-shells, where truncation corrupts the spectrum.
    """
    res = mat.hermiticity_residual
    if res > HERMITIAN_TOL:
        raise ValueError(f"matrix is not Hermitian (residual {res:.3g})")
    H = 0.5 * (mat.entries + mat.entries.conj().T)
    vals, vecs = np.linalg.eigh(H)
    if filter_contamination is None:
        filter_contamination = mat.gauge_tag == "magnetic"
    discarded = 0
    if filter_contamination and mat.l_max >= 1:
        top = mat.shell_of() >= mat.l_max - 1
        weight = np.sum(np.abs(vecs[top, :]) ** 2, axis=0)
        keep = weight < CONTAMINATION_WEIGHT
        discarded = int(np.sum(~keep))
        vals = vals[keep]
    vals = sorted(float(v) for v in vals)
    mu1, lam1 = _mu_lambda(vals)
    return SpectrumResult(vals, mu1, lam1, mat.l_max, res, discarded)


@dataclass(frozen=True)
class SpectrumComparison:
    free: list
    magnetic: list
    max_deviation: float
    pad: int
    clean: bool
    hermiticity_residual: float = 0.0

    def magnetic_result(self, l_max):
        mu1, lam1 = _mu_lambda(self.magnetic)
        return SpectrumResult(self.magnetic, mu1, lam1, l_max, self.hermiticity_residual)


def windowed_magnetic_spectrum(gauge, l_max, pad):
    """Eigenvalues in [-l_max, l_max + 1] of the magnetic operator assembled with
    ``pad`` extra shells, keeping only eigenvectors clean of the top shells.

    Returns (eigenvalues, clean, hermiticity residual)."""
    mat = assemble_magnetic(gauge, l_max + pad)
    res = mat.hermiticity_residual
    if res > HERMITIAN_TOL:
        raise ValueError(f"matrix is not Hermitian (residual {res:.3g})")
    H = 0.5 * (mat.entries + mat.entries.conj().T)
    vals, vecs = np.linalg.eigh(H)
    top = mat.shell_of() >= mat.l_max - 1
    weight = np.sum(np.abs(vecs[top, :]) ** 2, axis=0)
    window = (vals > -l_max - 0.5) & (vals < l_max + 1.5)
    clean = bool(np.all(weight[window] < CONTAMINATION_WEIGHT))
    return sorted(float(v) for v in vals[window]), clean, res


def compare_spectra(gauge, l_max, pad=None, max_pad=24, settle=1e-12):
    """Free spectrum at l_max against the magnetic spectrum in the same window.

    With ``pad=None`` the padding grows in steps of two until the windowed
    eigenvectors are free of truncation contamination and the windowed
    eigenvalues move by less than ``settle`` between steps (or ``max_pad`` is
    reached).
    """
    free = eigenvalues(assemble_free(l_max)).eigenvalues
    if pad is not None:
        mag, clean, res = windowed_magnetic_spectrum(gauge, l_max, pad)
        p = pad
    else:
        prev = None
        # multiplication by a degree-d profile spreads each shell over roughly
        # 4d neighbours once the phase is expanded; start near that
        start = 4 if gauge is None or gauge.zero else max(4, 2 * gauge.spec.angular.degree + 2)
        for p in range(start, max_pad + 1, 2):
            mag, clean, res = windowed_magnetic_spectrum(gauge, l_max, p)
            settled = prev is not None and len(prev) == len(mag) and np.max(np.abs(np.subtract(prev, mag)), initial=0.0) < settle
            if clean and len(mag) == len(free) and settled:
                break
            prev = mag
    if not clean:
        warnings.warn(f"truncation contamination persists at pad={p}", RuntimeWarning, stacklevel=2)
    if len(mag) != len(free):
        dev = math.inf
    else:
        dev = float(np.max(np.abs(np.array(mag) - np.array(free)))) if free else 0.0
    return SpectrumComparison(free, mag, dev, p, clean, res)


def magnetic_spectrum(gauge, l_max, pad=None):
    """SpectrumResult of sigma.L_A + 1 in the window of the l_max free spectrum."""
    return compare_spectra(gauge, l_max, pad).magnetic_result(l_max)


def free_spectrum_reference(l_max):
    """Multiset {l+1 (x 2l+2), -l (x 2l, l >= 1)} for l <= l_max."""
    out = []
    for l in range(l_max + 1):
        out += [float(l + 1)] * (2 * l + 2) + [float(-l)] * (2 * l if l >= 1 else 0)
    return sorted(out)


def phase_intertwine_residual(gauge, field, x, method="analytic", h=None):
    """max |L_A(e^{i eta} phi) - e^{i eta} L phi| over the sample points."""
    x = np.asarray(x, dtype=float)
    if gauge is None or gauge.zero:
        return 0.0
    lhs = angular_momentum(phased(field, gauge), x, gauge, method, h)
    rhs = np.exp(1j * gauge.eta(x))[..., None, None] * angular_momentum(field, x, None, method, h)
    return float(np.max(np.abs(lhs - rhs)))


def sphere_spinor(coefficients, l_max):
    """Field sum_k c_k r^l Y_l^m e_s over ``basis_indices(l_max)``; on |x| = 1 it
    is the corresponding element of L^2(S^2; C^2)."""
    poly = Poly3({}, (2,))
    for c, (l, m, s) in zip(coefficients, basis_indices(l_max)):
        if c == 0:
            continue
        e = np.zeros(2, dtype=complex)
        e[s - 1] = c
        poly = poly + solid_harmonic(l, m).outer(e)
    dpoly = [poly.derivative(a) for a in range(3)]
    return SpinorField(poly, lambda x: np.stack([d(x) for d in dpoly], axis=-2), np.inf, f"sphere_spinor(l_max={l_max})")


def sphere_norm_bound_check(field, gauge, grid):
    """(||(sigma.L_A + 1) phi||, ||phi||) in L^2(S^2; C^2)."""
    w = grid.points
    phi = field.eval(w)
    so = contract_spinor_vector(angular_momentum(field, w, gauge)) + phi
    lhs = math.sqrt(math.fsum((np.sum(np.abs(so) ** 2, axis=-1) * grid.weights).tolist()))
    rhs = math.sqrt(math.fsum((np.sum(np.abs(phi) ** 2, axis=-1) * grid.weights).tolist()))
    return lhs, rhs


def operator_matrix_by_quadrature(l_max, gauge=None, grid=None):
    """Matrix of sigma.L_A + 1 obtained by applying the differential operator to
    each basis field and projecting with the sphere rule; an independent check
    of the ladder assembly."""
    grid = grid or sphere_grid(l_max + 4, 2 * l_max + 8)
    basis = basis_indices(l_max)
    Y = ylm_table(l_max, grid.points)
    cols = []
    for k in range(len(basis)):
        c = np.zeros(len(basis), dtype=complex)
        c[k] = 1.0
        f = sphere_spinor(c, l_max)
        so = contract_spinor_vector(angular_momentum(f, grid.points, gauge)) + f.eval(grid.points)
        col = np.empty(len(basis), dtype=complex)
        for i, (l, m, s) in enumerate(basis):
            col[i] = np.sum(np.conj(Y[:, i // 2]) * so[:, s - 1] * grid.weights)
        cols.append(col)
    return np.stack(cols, axis=1)


__all__ = [
    "SpinOrbitMatrix",
    "SpectrumResult",
    "assemble_free",
    "assemble_magnetic",
    "eigenvalues",
    "compare_spectra",
    "magnetic_spectrum",
    "free_spectrum_reference",
    "phase_intertwine_residual",
    "sphere_norm_bound_check",
    "sphere_spinor",
    "operator_matrix_by_quadrature",
]
