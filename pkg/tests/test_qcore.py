import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qtomo.qcore import (
    DimensionMismatch,
    ENTANGLED,
    PLUS,
    coeffs_to_density,
    density_to_coeffs,
    fidelity,
    is_hermitian,
    kron,
    pauli,
    projector,
    pure_state,
)

from conftest import random_density, random_hermitian


def test_pauli_identity_and_z():
    assert np.array_equal(pauli(0), np.eye(2))
    assert np.array_equal(pauli(3), np.diag([1, -1]))


@pytest.mark.parametrize("j", [-1, 4, 7])
def test_pauli_rejects_bad_index(j):
    with pytest.raises(IndexError):
        pauli(j)


def test_pauli_orthogonality():
    for j in range(4):
        for k in range(4):
            assert np.trace(pauli(j) @ pauli(k)) == pytest.approx(2.0 if j == k else 0.0)


def test_two_qubit_pauli_orthogonality():
    ops = [kron(pauli(i), pauli(j)) for i in range(4) for j in range(4)]
    gram = np.array([[np.trace(a @ b) for b in ops] for a in ops])
    assert np.allclose(gram, 4 * np.eye(16))


def test_kron_examples():
    assert np.array_equal(kron(pauli(0), pauli(0)), np.eye(4))
    assert np.array_equal(kron(pauli(3), pauli(3)), np.diag([1, -1, -1, 1]))
    m = np.arange(16).reshape(4, 4)
    swapped = kron(pauli(1), pauli(0)) @ m
    assert np.array_equal(swapped[:2], m[2:]) and np.array_equal(swapped[2:], m[:2])


def test_coeffs_to_density_examples():
    assert np.allclose(coeffs_to_density([1, 0, 0, 1]), np.diag([1, 0]))
    assert np.allclose(coeffs_to_density([1, 1, 0, 0]), 0.5 * np.ones((2, 2)))
    assert np.allclose(coeffs_to_density([1, 1, 0, 0]), projector(PLUS))


def test_coeffs_to_density_wrong_length():
    with pytest.raises(DimensionMismatch):
        coeffs_to_density([1, 0, 0])


def test_round_trip_random_vectors(rng):
    for _ in range(100):
        v = rng.normal(size=4)
        assert np.allclose(density_to_coeffs(coeffs_to_density(v)), v, atol=1e-14)
        w = rng.normal(size=16)
        assert np.allclose(density_to_coeffs(coeffs_to_density(w)), w, atol=1e-14)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([2, 4]))
def test_round_trip_hermitian_matrices(seed, dim):
    h = random_hermitian(np.random.default_rng(seed), dim)
    assert np.allclose(coeffs_to_density(density_to_coeffs(h)), h, atol=1e-13)


def test_density_to_coeffs_examples():
    assert np.allclose(density_to_coeffs(np.eye(2) / 2), [1, 0, 0, 0])
    assert np.allclose(density_to_coeffs(np.diag([0, 1])), [1, 0, 0, -1])


def test_entangled_state_coefficients_match_trace_formula():
    rho = projector(ENTANGLED)
    c = density_to_coeffs(rho)
    oracle = np.array([np.trace(rho @ np.kron(pauli(i), pauli(j))).real
                       for i in range(4) for j in range(4)])
    assert np.allclose(c, oracle, atol=1e-14)
    # the state is CZ|++>, stabilized by X(x)Z, Z(x)X and Y(x)Y
    expected = np.zeros(16)
    expected[[0, 4 * 1 + 3, 4 * 3 + 1, 4 * 2 + 2]] = 1.0
    assert np.allclose(c, expected, atol=1e-14)
    assert c[0] == pytest.approx(1.0)


def test_density_to_coeffs_rejects_non_hermitian():
    with pytest.raises(ValueError):
        density_to_coeffs(np.array([[1, 1], [0, 0]]))
    with pytest.raises(DimensionMismatch):
        density_to_coeffs(np.eye(3))


def test_hermitian_check_tolerance():
    m = np.eye(2, dtype=complex)
    m[0, 1] = 5e-13
    assert is_hermitian(m)
    m[0, 1] = 1e-11
    assert not is_hermitian(m)


def test_fidelity_examples():
    zero = np.array([1, 0])
    minus = np.array([1, -1]) / np.sqrt(2)
    assert fidelity(zero, np.diag([1, 0])) == pytest.approx(1.0)
    assert fidelity(zero, np.eye(2) / 2) == pytest.approx(0.5)
    assert fidelity(PLUS, projector(minus)) == pytest.approx(0.0, abs=1e-15)


def test_fidelity_phase_invariance_and_linearity(rng):
    a, b = random_density(rng, 4), random_density(rng, 4)
    psi = ENTANGLED * np.exp(0.7j)
    assert fidelity(psi, a) == pytest.approx(fidelity(ENTANGLED, a))
    mix = 0.3 * a + 0.7 * b
    assert fidelity(ENTANGLED, mix) == pytest.approx(0.3 * fidelity(ENTANGLED, a) + 0.7 * fidelity(ENTANGLED, b))


def test_fidelity_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        fidelity(PLUS, np.eye(4) / 4)


def test_pure_state_normalization():
    with pytest.raises(ValueError):
        pure_state([1, 1])
    with pytest.raises(DimensionMismatch):
        pure_state([1, 0, 0])
