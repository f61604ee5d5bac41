"""Numerical toolkit for Hardy-Dirac inequalities with transversal magnetic fields.

Submodules: ``pauli`` (spin algebra), ``fields`` (fields and their gauge),
``calculus`` (magnetic differential operators), ``quadrature`` (sphere and
3D rules), ``spectral`` (sigma.L_A + 1 on the sphere), ``hardy`` (identity,
inequality chain and near-extremal families) and ``cli``.
"""

__version__ = "0.1.0"
