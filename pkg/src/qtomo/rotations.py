"""Ideal equatorial-axis rotations and their action on Pauli coefficient vectors."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .qcore import DimensionMismatch

TWO_PI = 2 * math.pi


@dataclass(frozen=True)
class RotationSpec:
    """Rotation of the Bloch vector by ``theta`` about ``(cos phi, sin phi, 0)``."""

    theta: float
    phi: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.theta) and math.isfinite(self.phi)):
            raise ValueError(f"rotation angles must be finite, got ({self.theta}, {self.phi})")

    def canonical(self) -> "RotationSpec":
        return RotationSpec(self.theta % TWO_PI, self.phi % TWO_PI)


def rotation_matrix(spec: RotationSpec) -> np.ndarray:
    """Unitary ``D(phi, theta)`` acting on ``{|0>, |1>}``."""
    c = math.cos(spec.theta / 2)
    s = math.sin(spec.theta / 2)
    return np.array(
        [
            [c, -1j * np.exp(-1j * spec.phi) * s],
            [-1j * np.exp(1j * spec.phi) * s, c],
        ],
        dtype=complex,
    )


def analytic_superop(spec: RotationSpec) -> np.ndarray:
    """Closed-form 4x4 superoperator ``B`` with ``v_rotated = B @ v``.

    Column ``j`` holds the Pauli coefficients of ``D sigma_j D^dagger``, i.e.
    ``B[k, j] = b_jk``. Row and column 0 carry the trace.
    """
    th, ph = spec.theta, spec.phi
    c2 = math.cos(th / 2) ** 2
    s2 = math.sin(th / 2) ** 2
    st, ct = math.sin(th), math.cos(th)
    sp, cp = math.sin(ph), math.cos(ph)
    s2p, c2p = math.sin(2 * ph), math.cos(2 * ph)

    b = np.zeros((4, 4))
    b[0, 0] = 1.0
    b[1:, 1] = (c2 + s2 * c2p, s2 * s2p, -st * sp)
    b[1:, 2] = (s2 * s2p, c2 - s2 * c2p, st * cp)
    b[1:, 3] = (st * sp, -st * cp, ct)
    return b


def apply_superop(b, v) -> np.ndarray:
    b = np.asarray(b, dtype=float)
    v = np.asarray(v, dtype=float)
    if b.ndim != 2 or b.shape[0] != b.shape[1] or b.shape[1] != v.shape[-1]:
        raise DimensionMismatch(f"superoperator {b.shape} cannot act on vector {v.shape}")
    return b @ v
