"""Design matrices for tomography: per-offset, ensemble-averaged and two-qubit superoperators.

Superoperators are plain ``ndarray`` objects acting on coefficient vectors
(``v_rotated = B @ v``). Measurement rows map a coefficient vector to the
populations of the computational basis states after the rotation.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass

import numpy as np

from .dynamics import (
    CollapseOperator,
    DetunedRotation,
    HamiltonianModel,
    Ideal,
    propagate_superop,
)
from .ensemble import SampleSet
from .qcore import DimensionMismatch
from .rotations import RotationSpec

FD_STEP = 1e-3

# diagonal of sigma_0 and sigma_3
_DIAG = {0: (1.0, 1.0), 3: (1.0, -1.0)}


@dataclass(frozen=True)
class TomographySetting:
    """One rotation per qubit followed by a population measurement.

    ``dt`` caps the integration step (``None`` uses each model's default).
    Two qubits driven by the same rotation cannot be told apart in the
    antisymmetric sector, so identical per-qubit models are rejected unless
    ``allow_identical`` is set.
    """

    models: tuple
    dt: float | None = None
    allow_identical: bool = False

    def __post_init__(self):
        models = tuple(self.models)
        object.__setattr__(self, "models", models)
        if len(models) not in (1, 2):
            raise ValueError(f"a setting drives 1 or 2 qubits, got {len(models)} models")
        if not all(isinstance(m, HamiltonianModel) for m in models):
            raise TypeError("models must be HamiltonianModel instances")
        if len(models) == 2 and models[0] == models[1] and not self.allow_identical:
            raise ValueError("both qubits get the same rotation; pass allow_identical=True to force it")

    @property
    def n_qubits(self) -> int:
        return len(self.models)

    @property
    def specs(self) -> tuple:
        return tuple(getattr(m, "spec", None) for m in self.models)


def make_model(spec, kind: str = "detuned", omega: float = 1.0, leak: float = 0.0):
    """Rotation model; ``leak > 0`` adds an auxiliary level fed from ``|1>`` at that rate."""
    if not isinstance(spec, RotationSpec):
        spec = RotationSpec(*spec)
    cls = {"ideal": Ideal, "detuned": DetunedRotation}[kind]
    if leak:
        return cls(spec, omega, levels=3, collapses=(CollapseOperator(leak, 1, 2),))
    return cls(spec, omega)


def make_setting(specs, kind: str = "detuned", omega: float = 1.0, leak: float = 0.0,
                 dt: float | None = None, allow_identical: bool = False) -> TomographySetting:
    """Setting from one ``(theta, phi)`` pair, or a list of one pair per qubit."""
    if isinstance(specs, RotationSpec) or np.isscalar(specs[0]):
        specs = [specs]
    models = tuple(make_model(s, kind, omega, leak) for s in specs)
    return TomographySetting(models, dt=dt, allow_identical=allow_identical)


@functools.lru_cache(maxsize=8192)
def _cached_superop(model, delta: float, dt) -> np.ndarray:
    b = propagate_superop(model, delta, model.default_pulse(dt))
    b.setflags(write=False)
    return b


def qubit_superop(model: HamiltonianModel, delta: float = 0.0, dt: float | None = None) -> np.ndarray:
    """Single-qubit superoperator of ``model`` at offset ``delta`` (memoized)."""
    return _cached_superop(model, float(delta), dt).copy()


def _average(model, samples: SampleSet, dt) -> np.ndarray:
    out = np.zeros((4, 4))
    for delta, p in samples:  # fixed order for bit-stable sums
        out += p * _cached_superop(model, float(delta), dt)
    return out


def ensemble_superop(setting: TomographySetting, samples: SampleSet) -> np.ndarray:
    """``sum_i p_i B(delta_i)`` for a single-qubit setting."""
    if setting.n_qubits != 1:
        raise DimensionMismatch("ensemble_superop takes a single-qubit setting; use design_superop")
    return _average(setting.models[0], samples, setting.dt)


def two_qubit_superop(b1, b2) -> np.ndarray:
    """Coefficient-space tensor product, index ``(i, j) -> 4*i + j``."""
    b1 = np.asarray(b1, dtype=float)
    b2 = np.asarray(b2, dtype=float)
    if b1.shape != (4, 4) or b2.shape != (4, 4):
        raise DimensionMismatch(f"need two 4x4 superoperators, got {b1.shape} and {b2.shape}")
    return np.kron(b1, b2)


def design_superop(setting: TomographySetting, samples: SampleSet | None = None) -> np.ndarray:
    """Ensemble-averaged superoperator of a 1- or 2-qubit setting.

    Each qubit is its own ensemble with an independent offset drawn from
    ``samples``, so the two-qubit average factorizes into a tensor product.
    ``samples=None`` means every member sits at ``delta = 0``.
    """
    samples = samples or SampleSet((0.0,), (1.0,))
    mats = [_average(m, samples, setting.dt) for m in setting.models]
    return mats[0] if len(mats) == 1 else two_qubit_superop(*mats)


def outcome_labels(n_qubits: int) -> list[str]:
    return ["".join(bits) for bits in itertools.product("01", repeat=n_qubits)]


def population_rows(b) -> np.ndarray:
    """Rows mapping the pre-rotation coefficients to measured populations.

    One qubit: ``P_n = (c0' +/- c3') / 2`` with ``c' = B c``, a 2x4 matrix.
    Two qubits: ``P_nm = 1/4 sum_{k,k' in {0,3}} sgn(n,m,k,k') c'_{kk'}``, a 4x16
    matrix, where ``sgn`` is the ``(nm, nm)`` diagonal entry of
    ``sigma_k (x) sigma_k'``.
    """
    b = np.asarray(b, dtype=float)
    if b.shape == (4, 4):
        return 0.5 * np.array([b[0] + b[3], b[0] - b[3]])
    if b.shape == (16, 16):
        rows = np.zeros((4, 16))
        for n, m in itertools.product(range(2), repeat=2):
            for k, kp in itertools.product((0, 3), repeat=2):
                rows[2 * n + m] += _DIAG[k][n] * _DIAG[kp][m] * b[4 * k + kp]
        return 0.25 * rows
    raise DimensionMismatch(f"superoperator must be 4x4 or 16x16, got {b.shape}")


@dataclass(frozen=True)
class SuperopExpansion:
    """Taylor coefficients ``B(delta) ~ sum_a delta**a * terms[a]``."""

    terms: tuple

    def __post_init__(self):
        terms = tuple(np.asarray(t, dtype=float) for t in self.terms)
        if not terms or any(t.shape != terms[0].shape for t in terms):
            raise DimensionMismatch("expansion terms must be non-empty and share a shape")
        object.__setattr__(self, "terms", terms)

    @property
    def order(self) -> int:
        return len(self.terms) - 1

    def evaluate(self, delta: float) -> np.ndarray:
        return sum(delta**a * t for a, t in enumerate(self.terms))


def expand_superop(setting: TomographySetting, order: int = 2, h: float | None = None) -> SuperopExpansion:
    """Central finite-difference Taylor expansion of ``B(delta)`` about 0.

    ``h`` defaults to ``1e-3`` times the model's largest frequency.
    """
    if order not in (0, 1, 2):
        raise ValueError(f"expansion order must be 0, 1 or 2, got {order}")
    if setting.n_qubits != 1:
        raise DimensionMismatch("expand_superop takes a single-qubit setting")
    model = setting.models[0]
    h = FD_STEP * model.rate_scale if h is None else h
    if not h > 0:
        raise ValueError("finite-difference step must be positive")
    b0 = qubit_superop(model, 0.0, setting.dt)
    terms = [b0]
    if order >= 1:
        bp = qubit_superop(model, h, setting.dt)
        bm = qubit_superop(model, -h, setting.dt)
        terms.append((bp - bm) / (2 * h))
        if order == 2:
            terms.append((bp - 2 * b0 + bm) / (2 * h * h))
    return SuperopExpansion(tuple(terms))
