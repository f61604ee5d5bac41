import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spinor_hardy import pauli

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)
vec3 = st.tuples(finite, finite, finite).map(np.array)


def test_sigma3_entries():
    assert np.array_equal(pauli.pauli(3), np.array([[1, 0], [0, -1]], dtype=complex))


def test_sigma1_squared_is_identity():
    assert np.array_equal(pauli.pauli(1) @ pauli.pauli(1), np.eye(2))


def test_sigma1_sigma2_is_i_sigma3():
    assert np.array_equal(pauli.pauli(1) @ pauli.pauli(2), 1j * pauli.pauli(3))


@pytest.mark.parametrize("j", [0, 4, -1])
def test_pauli_index_out_of_range(j):
    with pytest.raises(ValueError):
        pauli.pauli(j)


def test_matrix_invariants():
    for j in (1, 2, 3):
        s = pauli.pauli(j)
        assert np.array_equal(s, s.conj().T)
        assert np.trace(s) == 0
        assert np.linalg.det(s) == pytest.approx(-1)


def test_sigma_is_read_only():
    with pytest.raises(ValueError):
        pauli.SIGMA[0, 0, 0] = 5


def test_sigma_dot_examples():
    assert np.array_equal(pauli.sigma_dot([0, 0, 1]), pauli.pauli(3))
    assert np.array_equal(pauli.sigma_dot([0, 0, 0]), np.zeros((2, 2)))
    assert np.array_equal(pauli.sigma_dot(np.array([1, 1j, 0])), np.array([[0, 2], [0, 0]]))


def test_anticommutation_exact():
    res = pauli.anticommutation_residuals()
    assert len(res) == 12
    assert all(v == 0.0 for v in res.values())


def test_anticommutation_detects_sign_flip():
    bad = pauli.SIGMA.copy()
    bad[1] *= -1
    res = pauli.anticommutation_residuals(bad)
    failed = [k for k, v in res.items() if v > 0]
    # -sigma_2 still anticommutes; only the orientation (cyclic products) breaks
    assert failed and all("=i*" in k for k in failed)


def test_product_formula_examples():
    assert pauli.sigma_product_check([1, 0, 0], [0, 1, 0]) == 0.0
    F = np.array([0.3, -1.2, 2.5])
    assert pauli.sigma_product_check(F, F) < 1e-14


def test_product_formula_random(rng):
    F, G = rng.normal(size=(1000, 3)), rng.normal(size=(1000, 3))
    assert pauli.sigma_product_check(F, G) < 1e-14


@settings(max_examples=200, deadline=None)
@given(vec3, vec3)
def test_product_formula_property(F, G):
    scale = max(1.0, np.linalg.norm(F) * np.linalg.norm(G))
    assert pauli.sigma_product_check(F, G) <= 1e-14 * scale


def test_unit_contraction_examples():
    assert pauli.unit_contraction_norm([0, 0, 1], [1, 0]) == 1.0
    a, b = 0.6 - 0.2j, 1.5j
    assert pauli.unit_contraction_norm([1, 0, 0], [a, b]) == pytest.approx(np.sqrt(abs(a) ** 2 + abs(b) ** 2), rel=1e-15)


def test_unit_contraction_random(rng):
    for _ in range(1000):
        w = rng.normal(size=3)
        w /= np.linalg.norm(w)
        s = rng.normal(size=2) + 1j * rng.normal(size=2)
        assert abs(pauli.unit_contraction_norm(w, s) - np.linalg.norm(s)) <= 1e-14 * np.linalg.norm(s)


def test_unit_contraction_rejects_non_unit():
    with pytest.raises(ValueError):
        pauli.unit_contraction_norm([1, 1, 0], [1, 0])


@settings(max_examples=100, deadline=None)
@given(vec3, vec3, finite, finite)
def test_sigma_dot_linear(F, G, a, b):
    lhs = pauli.sigma_dot(a * F + b * G)
    rhs = a * pauli.sigma_dot(F) + b * pauli.sigma_dot(G)
    assert np.max(np.abs(lhs - rhs)) <= 1e-12 * max(1.0, np.max(np.abs(rhs)))


def test_sesquilinear_conjugate_symmetric(rng):
    u = rng.normal(size=(5, 2)) + 1j * rng.normal(size=(5, 2))
    v = rng.normal(size=(5, 2)) + 1j * rng.normal(size=(5, 2))
    assert np.allclose(pauli.sesq(u, v), np.conj(pauli.sesq(v, u)), atol=0)
    assert np.all(pauli.sesq(u, u).real >= 0)


def test_contract_spinor_vector_matches_sigma_dot(rng):
    V = rng.normal(size=(3, 2)) + 1j * rng.normal(size=(3, 2))
    direct = sum(pauli.pauli(j + 1) @ V[j] for j in range(3))
    assert np.allclose(pauli.contract_spinor_vector(V), direct, atol=1e-15)
