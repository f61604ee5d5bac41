"""Pauli matrices and the 2x2 complex algebra built on them.

Spinors are numpy arrays whose last axis has length 2; vectors of R^3 (or of
spinors) carry the Cartesian index on the axis just before it.  Everything is
plain double-precision complex arithmetic.
"""

import numpy as np

SIGMA = np.array(
    [
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=complex,
)
SIGMA.setflags(write=False)

IDENTITY = np.eye(2, dtype=complex)


def pauli(j):
    """Return sigma_j for j in {1, 2, 3}."""
    if j not in (1, 2, 3):
        raise ValueError(f"Pauli index must be 1, 2 or 3, got {j!r}")
    return SIGMA[j - 1].copy()


def sigma_dot(F, sigmas=SIGMA):
    """Contract a (possibly complex) 3-vector with the Pauli matrices.

    ``F`` may carry leading batch axes; the result has shape ``F.shape[:-1] + (2, 2)``.
    """
    F = np.asarray(F)
    if F.shape[-1] != 3:
        raise ValueError("last axis of F must have length 3")
    return np.einsum("...j,jab->...ab", F.astype(complex), sigmas)


def apply_sigma_dot(F, s, sigmas=SIGMA):
    """(sigma . F) s for batched real vectors F (..., 3) and spinors s (..., 2)."""
    return np.einsum("...ab,...b->...a", sigma_dot(F, sigmas), s)


def contract_spinor_vector(V, sigmas=SIGMA):
    """sum_j sigma_j V_j for a vector of spinors V with shape (..., 3, 2)."""
    return np.einsum("jab,...jb->...a", sigmas, V)


def cross(a, b):
    return np.cross(a, b, axis=-1)


def sesq(u, v):
    """Sesquilinear product <u, v> = sum_k u_k conj(v_k), batched over leading axes."""
    return np.sum(u * np.conj(v), axis=-1)


def norm2(s):
    """|s|^2 summed over the trailing spinor axis (and any vector axes given)."""
    return np.real(s * np.conj(s))


def sigma_product_check(F, G, sigmas=SIGMA):
    """Max-norm of (sigma.F)(sigma.G) - (F.G) I - i sigma.(F x G) for real F, G."""
    F = np.asarray(F, dtype=float)
    G = np.asarray(G, dtype=float)
    lhs = sigma_dot(F, sigmas) @ sigma_dot(G, sigmas)
    dot = np.sum(F * G, axis=-1)[..., None, None] * IDENTITY
    rhs = dot + 1j * sigma_dot(cross(F, G), sigmas)
    return float(np.max(np.abs(lhs - rhs)))


def unit_contraction_norm(omega, s, tol=1e-12):
    """|(sigma.omega) s| for a unit vector omega."""
    omega = np.asarray(omega, dtype=float)
    if abs(np.linalg.norm(omega) - 1.0) > tol:
        raise ValueError(f"omega must be a unit vector, |omega| = {np.linalg.norm(omega)!r}")
    out = sigma_dot(omega) @ np.asarray(s, dtype=complex)
    return float(np.linalg.norm(out))


def anticommutation_residuals(sigmas=SIGMA):
    """Residuals of sigma_j sigma_k + sigma_k sigma_j = 2 delta_jk I and of the
    cyclic products sigma_1 sigma_2 = i sigma_3 (and permutations).

    Returns a dict mapping a readable relation name to its max-norm residual.
    """
    out = {}
    for j in range(3):
        for k in range(3):
            anti = sigmas[j] @ sigmas[k] + sigmas[k] @ sigmas[j]
            target = 2 * IDENTITY if j == k else np.zeros((2, 2))
            out[f"s{j + 1}s{k + 1}+s{k + 1}s{j + 1}"] = float(np.max(np.abs(anti - target)))
    for j, k, l in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        res = sigmas[j] @ sigmas[k] - 1j * sigmas[l]
        out[f"s{j + 1}s{k + 1}=i*s{l + 1}"] = float(np.max(np.abs(res)))
    return out
