"""Quadrature evaluation of the weighted Dirac identity and the Hardy-Dirac chain.

For a field phi and potential A the six integrals are

    T1 = int r |sigma.nabla_A phi|^2        T2 = int r |d_r^A phi|^2
    T3 = int |(sigma.L_A + 1) phi|^2 / r     T4 = -int |phi|^2 / r
    T5 = int <sigma.[d_r(x ^ A)] phi, phi>   T6 = int <sigma.(x ^ grad A_r) phi, phi>

Two closures are reported.  The ``stated`` form checks T1 = T2+T3+T4+T5+T6.
The ``corrected`` form checks T1 = T2+T3+T4+T5-T6, which is what the
integration by parts actually produces; T5 - T6 equals int r <sigma.B phi, phi>
for transversal fields and vanishes for pure gauges.  Under A = 0 both agree.
"""

import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import integrate

from .calculus import local_quantities, radial_field
from .errors import VerificationError
from .pauli import apply_sigma_dot, sesq
from .quadrature import grid3d, integrate_weighted

IDENTITY_TOL_ANALYTIC = 1e-6
IDENTITY_TOL_FD = 1e-4
CHAIN_SLACK = 1e-8


def _sq(v):
    return np.sum(np.abs(v) ** 2, axis=-1)


@dataclass(frozen=True)
class IdentityReport:
    T1: float
    T2: float
    T3: float
    T4: float
    T5: float
    T6: float
    residual: float
    scale: float
    corrected_residual: float
    pauli_term: float
    max_imag: float
    grid: dict = field(default_factory=dict)

    @property
    def relative_residual(self):
        return self.residual / self.scale if self.scale > 0 else 0.0

    @property
    def relative_corrected_residual(self):
        return self.corrected_residual / self.scale if self.scale > 0 else 0.0

    def terms(self):
        return [self.T1, self.T2, self.T3, self.T4, self.T5, self.T6]

    def dominant_term(self):
        """Index (1-based) of the term with the largest magnitude; a coarse grid
        usually fails first there."""
        return int(np.argmax(np.abs(self.terms()))) + 1

    def to_dict(self):
        d = asdict(self)
        d["relative_residual"] = self.relative_residual
        d["relative_corrected_residual"] = self.relative_corrected_residual
        return d


def _sesq_integral(grid, vec, phi):
    vals = sesq(apply_sigma_dot(vec, phi), phi)
    return integrate_weighted(grid, vals), float(np.max(np.abs(np.imag(vals)), initial=0.0))


def identity_terms(gauge, field, grid, method="analytic", h=None, order=2):
    """Evaluate T1..T6 on ``grid``; ``gauge=None`` means A = 0."""
    x = grid.points
    q = local_quantities(field, gauge, x, method, h, order, r_min=grid.radial.r_min)
    T1 = integrate_weighted(grid, _sq(q.sigma_grad_A), "r")
    T2 = integrate_weighted(grid, _sq(q.dr_A), "r")
    T3 = integrate_weighted(grid, _sq(q.sigma_L_A + q.phi), "inv_r")
    T4 = 0.0 - integrate_weighted(grid, _sq(q.phi), "inv_r")
    if gauge is None or gauge.zero:
        T5 = T6 = 0.0
        imag = 0.0
        pauli = 0.0
    else:
        T5, im5 = _sesq_integral(grid, gauge.dr_xwedgeA(x), q.phi)
        T6, im6 = _sesq_integral(grid, gauge.xwedge_grad_Ar(x), q.phi)
        imag = max(im5, im6)
        pauli = T5 - T6
    stated = abs(T1 - math.fsum([T2, T3, T4, T5, T6]))
    corrected = abs(T1 - math.fsum([T2, T3, T4, T5, -T6]))
    scale = max(abs(t) for t in (T1, T2, T3, T4, T5, T6))
    return IdentityReport(T1, T2, T3, T4, T5, T6, stated, scale, corrected, pauli, imag, grid.metadata())


def verify_identity(gauge, field, grid, tol=IDENTITY_TOL_ANALYTIC, form="stated", method="analytic"):
    """(passed, report) with passed iff residual / scale <= tol."""
    report = identity_terms(gauge, field, grid, method)
    if form == "stated":
        rel = report.relative_residual
    elif form == "corrected":
        rel = report.relative_corrected_residual
    else:
        raise ValueError(f"unknown identity form {form!r}")
    return rel <= tol, report


def pauli_term_direct(gauge, field, grid):
    """int r <sigma.B phi, phi> computed from B itself."""
    if gauge is None or gauge.zero:
        return 0.0
    x = grid.points
    phi = field.eval(x)
    return integrate_weighted(grid, sesq(apply_sigma_dot(gauge.B(x), phi), phi), "r")


def cancellation_residual(gauge, field, x):
    """Pointwise |<sigma.[d_r(x^A) + x ^ grad A_r] phi, phi>|."""
    if gauge is None or gauge.zero:
        return np.zeros(np.shape(x)[:-1])
    phi = field.eval(x)
    vec = gauge.dr_xwedgeA(x) + gauge.xwedge_grad_Ar(x)
    return np.abs(sesq(apply_sigma_dot(vec, phi), phi))


@dataclass(frozen=True)
class ChainValues:
    """int |phi|^2/r, int |(sigma.L_A+1) phi|^2/r, int r |sigma.nabla_A phi|^2."""

    first: float
    second: float
    third: float
    slack: float = CHAIN_SLACK

    @property
    def ordered(self):
        tol = self.slack * max(abs(self.third), 1.0)
        return self.first <= self.second + tol and self.second <= self.third + tol

    def __iter__(self):
        return iter((self.first, self.second, self.third))


def chain_check(gauge, field, grid, slack=CHAIN_SLACK, strict=False):
    rep = identity_terms(gauge, field, grid)
    out = ChainValues(-rep.T4, rep.T3, rep.T1, slack)
    if strict and not out.ordered:
        raise VerificationError(f"chain ordering violated: {out.first!r} <= {out.second!r} <= {out.third!r} fails", out)
    return out


def hardy_quotient(gauge, field, grid):
    rep = identity_terms(gauge, field, grid)
    if rep.T4 == 0:
        raise ZeroDivisionError("int |phi|^2 / r vanishes; the quotient is undefined")
    return rep.T1 / -rep.T4


def radial_hardy_check(gauge, field, grid, slack=CHAIN_SLACK, strict=False):
    """(int |phi|^2 / r, int r |d_r^A phi|^2); the first never exceeds the second."""
    rep = identity_terms(gauge, field, grid)
    first, second = -rep.T4, rep.T2
    if strict and first > second + slack * max(abs(second), 1.0):
        raise VerificationError(f"radial Hardy ordering violated: {first!r} > {second!r}", (first, second))
    return first, second


# --- near-extremal family ---------------------------------------------------


def _smoothstep(u):
    """C^2 quintic ramp 0 -> 1 on [0, 1] and its derivative."""
    u = np.clip(u, 0.0, 1.0)
    s = u**3 * (10 - 15 * u + 6 * u**2)
    ds = 30 * u**2 * (1 - u) ** 2
    return s, ds


@dataclass(frozen=True)
class NearExtremalProfile:
    """f(r) = r^(-1+eps) inside, r^(-1-eps) outside, blended over [1-w, 1+w]
    and ramped to zero (in log r, over ``ramp`` e-folds) at r_lo and r_hi."""

    epsilon: float
    smoothing: float = 0.05
    r_lo: float = 2e-12
    r_hi: float = 5e11
    ramp: float = 6.0

    def __post_init__(self):
        if not 0 < self.epsilon < 1:
            raise ValueError(f"epsilon must lie in (0, 1), got {self.epsilon!r}")
        if not 0 < self.smoothing < 0.5:
            raise ValueError(f"smoothing width must lie in (0, 0.5), got {self.smoothing!r}")

    def _parts(self, r):
        r = np.asarray(r, dtype=float)
        e, w = self.epsilon, self.smoothing
        fm, fp = r ** (-1 + e), r ** (-1 - e)
        dfm, dfp = (-1 + e) * r ** (-2 + e), (-1 - e) * r ** (-2 - e)
        s, ds = _smoothstep((r - (1 - w)) / (2 * w))
        ds = ds / (2 * w)
        core = (1 - s) * fm + s * fp
        dcore = (1 - s) * dfm + s * dfp + ds * (fp - fm)
        t = np.log(r)
        c1, dc1 = _smoothstep((t - math.log(self.r_lo)) / self.ramp)
        c2, dc2 = _smoothstep((math.log(self.r_hi) - t) / self.ramp)
        cut = c1 * c2
        dcut = (dc1 * c2 - c1 * dc2) / (self.ramp * r)
        return core, dcore, cut, dcut

    def f(self, r):
        core, _, cut, _ = self._parts(r)
        return core * cut

    def df(self, r):
        core, dcore, cut, dcut = self._parts(r)
        return dcore * cut + core * dcut

    def breakpoints(self):
        w = self.smoothing
        return sorted(
            {
                self.r_lo,
                self.r_lo * math.exp(self.ramp),
                1 - w,
                1.0,
                1 + w,
                self.r_hi * math.exp(-self.ramp),
                self.r_hi,
            }
        )

    def field(self):
        return radial_field(self.f, self.df, (1.0, 0.0), self.r_hi, f"near_extremal(eps={self.epsilon:g})")

    def grid(self, n_per_panel=48, n_theta=4, n_phi=8):
        b = self.breakpoints()
        return grid3d(n_per_panel, n_theta, n_phi, r_min=b[0], r_max=b[-1], radial_map="log", breakpoints=b[1:-1])


def ideal_quotient(epsilon):
    """Quotient of the unsmoothed, uncut profile: ((1-e)^2 I + (1+e)^2 I) / (2 I) = 1 + e^2."""
    return 1.0 + epsilon**2


def radial_quotient_oracle(profile):
    """int r^3 f'^2 dr / int r f^2 dr by adaptive 1D quadrature in t = log r."""
    b = [math.log(v) for v in profile.breakpoints()]

    def num(t):
        r = math.exp(t)
        return float(profile.df(r)) ** 2 * r**4

    def den(t):
        r = math.exp(t)
        return float(profile.f(r)) ** 2 * r**2

    N = sum(integrate.quad(num, a, c, epsabs=0, epsrel=1e-12, limit=200)[0] for a, c in zip(b[:-1], b[1:]))
    D = sum(integrate.quad(den, a, c, epsabs=0, epsrel=1e-12, limit=200)[0] for a, c in zip(b[:-1], b[1:]))
    return N / D


@dataclass(frozen=True)
class QuotientCurve:
    entries: list
    field_tag: str
    family_tag: str

    def epsilons(self):
        return [e for e, _ in self.entries]

    def quotients(self):
        return [q for _, q in self.entries]


def near_extremal_family(gauge, epsilons, smoothing=0.05, **profile_kw):
    """Hardy quotients of the near-extremal family, in input order."""
    if len(epsilons) == 0:
        raise ValueError("epsilon list is empty")
    entries = []
    for eps in epsilons:
        prof = NearExtremalProfile(float(eps), smoothing, **profile_kw)
        entries.append((float(eps), hardy_quotient(gauge, prof.field(), prof.grid())))
    tag = "free" if gauge is None or gauge.zero else gauge.spec.label
    return QuotientCurve(entries, tag, f"piecewise_power(smoothing={smoothing:g})")


def default_grid():
    return grid3d()
