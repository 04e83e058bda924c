"""Pauli algebra and conversions between density matrices and coefficient vectors.

Single-qubit states are written ``rho = 1/2 sum_j c_j sigma_j`` and two-qubit
states ``rho = 1/4 sum_ij c_ij sigma_i (x) sigma_j`` so that ``c_0 = c_00 = Tr rho``.
Two-qubit coefficients are flattened with index ``4 * i + j``.
"""

from __future__ import annotations

import numpy as np

HERMITIAN_TOL = 1e-10

_PAULI = (
    np.array([[1, 0], [0, 1]], dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)
for _m in _PAULI:
    _m.setflags(write=False)

# sigma_i (x) sigma_j stacked in coefficient order 4*i + j
_PAULI2 = np.array([np.kron(a, b) for a in _PAULI for b in _PAULI])
_PAULI2.setflags(write=False)


class DimensionMismatch(ValueError):
    """Operand shapes are inconsistent with each other or with the qubit count."""


def pauli(j: int) -> np.ndarray:
    """Return ``sigma_j`` (``sigma_0`` is the identity) in the basis ``{|0>, |1>}``."""
    if j not in (0, 1, 2, 3):
        raise IndexError(f"Pauli index must be in 0..3, got {j!r}")
    return _PAULI[j].copy()


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.kron(np.asarray(a), np.asarray(b))


def is_hermitian(m: np.ndarray, tol: float = 1e-12) -> bool:
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return False
    return bool(np.max(np.abs(m - m.conj().T), initial=0.0) <= tol)


def coeffs_to_density(v) -> np.ndarray:
    """Build the density matrix for a length-4 or length-16 coefficient vector."""
    v = np.asarray(v, dtype=float)
    if v.shape == (4,):
        return 0.5 * np.einsum("j,jab->ab", v, np.array(_PAULI))
    if v.shape == (16,):
        return 0.25 * np.einsum("j,jab->ab", v, _PAULI2)
    raise DimensionMismatch(f"coefficient vector must have length 4 or 16, got shape {v.shape}")


def density_to_coeffs(rho, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Return ``c_j = Tr(rho sigma_j)`` (or ``c_ij = Tr(rho sigma_i (x) sigma_j)``)."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape == (2, 2):
        basis = np.array(_PAULI)
    elif rho.shape == (4, 4):
        basis = _PAULI2
    else:
        raise DimensionMismatch(f"density matrix must be 2x2 or 4x4, got shape {rho.shape}")
    if not is_hermitian(rho, tol):
        dev = np.max(np.abs(rho - rho.conj().T))
        raise ValueError(f"density matrix is not hermitian (max deviation {dev:.3e})")
    # Tr(rho P) = sum_ab rho_ab P_ba
    return np.einsum("ab,jba->j", rho, basis).real


def pure_state(amplitudes) -> np.ndarray:
    """Validate and return a normalized state vector of length 2 or 4."""
    psi = np.asarray(amplitudes, dtype=complex)
    if psi.shape not in ((2,), (4,)):
        raise DimensionMismatch(f"pure state must have 2 or 4 amplitudes, got shape {psi.shape}")
    norm = np.vdot(psi, psi).real
    if abs(norm - 1.0) > 1e-12:
        raise ValueError(f"pure state is not normalized (norm^2 = {norm!r})")
    return psi


def projector(psi) -> np.ndarray:
    psi = pure_state(psi)
    return np.outer(psi, psi.conj())


def fidelity(psi, rho) -> float:
    """Overlap ``<psi|rho|psi>`` of a pure target with a (possibly unphysical) estimate."""
    psi = pure_state(psi)
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (psi.size, psi.size):
        raise DimensionMismatch(f"state of size {psi.size} does not match matrix {rho.shape}")
    if not is_hermitian(rho, HERMITIAN_TOL):
        raise ValueError("density matrix is not hermitian")
    value = np.vdot(psi, rho @ psi)
    assert abs(value.imag) <= 1e-10, value
    return float(value.real)


PLUS = np.array([1, 1], dtype=complex) / np.sqrt(2)
ENTANGLED = np.array([1, 1, 1, -1], dtype=complex) / 2
