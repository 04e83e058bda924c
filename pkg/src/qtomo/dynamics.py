"""Control Hamiltonians, Lindblad relaxation and a fixed-step RK4 integrator.

Levels 0 and 1 are the qubit; level 2, when present, is auxiliary (an
excited or shelving state). Density matrices are vectorized row-major, so
``vec(A @ rho @ B) = kron(A, B.T) @ vec(rho)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .qcore import DimensionMismatch, density_to_coeffs, pauli
from .rotations import RotationSpec

STEPS_PER_PERIOD = 600
CONVERGENCE_TOL = 1e-9


class ConvergenceError(RuntimeError):
    """Halving the integration step changed the result by more than the tolerance."""


@dataclass(frozen=True)
class CollapseOperator:
    """Jump ``sqrt(rate) |to_level><from_level|``."""

    rate: float
    from_level: int
    to_level: int

    def __post_init__(self):
        if not self.rate >= 0:
            raise ValueError(f"collapse rate must be non-negative, got {self.rate}")

    def matrix(self, dim: int) -> np.ndarray:
        if not (0 <= self.from_level < dim and 0 <= self.to_level < dim):
            raise DimensionMismatch(
                f"collapse {self.from_level}->{self.to_level} outside a {dim}-level space"
            )
        c = np.zeros((dim, dim), dtype=complex)
        c[self.to_level, self.from_level] = math.sqrt(self.rate)
        return c


@dataclass(frozen=True)
class PulseSpec:
    """Pulse of length ``duration`` integrated with ``n_steps`` equal steps of ``dt``."""

    duration: float
    dt: float

    def __post_init__(self):
        if not (self.duration >= 0 and self.dt > 0):
            raise ValueError(f"invalid pulse: duration={self.duration}, dt={self.dt}")
        if self.duration > 0:
            if self.dt > self.duration * (1 + 1e-12):
                raise ValueError("step dt exceeds pulse duration")
            ratio = self.duration / self.dt
            if abs(ratio - round(ratio)) > 1e-9 * max(ratio, 1.0):
                raise ValueError(f"duration/dt = {ratio} is not an integer")

    @classmethod
    def fit(cls, duration: float, max_dt: float) -> "PulseSpec":
        """Largest step not exceeding ``max_dt`` that tiles ``duration`` exactly."""
        if duration == 0:
            return cls(0.0, max_dt)
        n = max(1, math.ceil(duration / max_dt - 1e-9))
        return cls(duration, duration / n)

    @property
    def n_steps(self) -> int:
        return 0 if self.duration == 0 else int(round(self.duration / self.dt))

    def halved(self) -> "PulseSpec":
        return PulseSpec(self.duration, self.dt / 2)


def _embed(op: np.ndarray, dim: int) -> np.ndarray:
    out = np.zeros((dim, dim), dtype=complex)
    out[: op.shape[0], : op.shape[1]] = op
    return out


class HamiltonianModel:
    """Base class: a (possibly time-dependent) Hamiltonian ``H(t; delta)`` plus collapses."""

    dim: int = 2
    collapses: tuple = ()
    time_dependent = False

    def hamiltonian(self, t: float, delta: float) -> np.ndarray:
        raise NotImplementedError

    @property
    def duration(self) -> float:
        raise NotImplementedError

    @property
    def rate_scale(self) -> float:
        """Largest angular frequency in the problem, sets the default step."""
        raise NotImplementedError

    def default_pulse(self, dt: float | None = None) -> PulseSpec:
        max_dt = dt if dt is not None else 2 * math.pi / self.rate_scale / STEPS_PER_PERIOD
        return PulseSpec.fit(self.duration, max_dt)

    def collapse_matrices(self) -> list[np.ndarray]:
        return [c.matrix(self.dim) for c in self.collapses]


@dataclass(frozen=True)
class Ideal(HamiltonianModel):
    """Resonant rotation ``H = Omega/2 (cos phi sigma_1 + sin phi sigma_2)``, independent of delta."""

    spec: RotationSpec
    omega: float = 1.0
    levels: int = 2
    collapses: tuple = ()

    def __post_init__(self):
        if not self.omega > 0:
            raise ValueError("Rabi frequency must be positive")
        if self.levels not in (2, 3):
            raise ValueError("levels must be 2 or 3")
        object.__setattr__(self, "collapses", tuple(self.collapses))

    @property
    def dim(self) -> int:
        return self.levels

    @property
    def duration(self) -> float:
        return abs(self.spec.theta) / self.omega

    @property
    def rate_scale(self) -> float:
        return self.omega

    def _drive(self) -> np.ndarray:
        sign = 1.0 if self.spec.theta >= 0 else -1.0
        ph = self.spec.phi
        return 0.5 * sign * self.omega * (math.cos(ph) * pauli(1) + math.sin(ph) * pauli(2))

    def hamiltonian(self, t: float, delta: float) -> np.ndarray:
        return _embed(self._drive(), self.dim)


@dataclass(frozen=True)
class DetunedRotation(Ideal):
    """Ideal drive plus a static detuning ``delta/2 sigma_3`` of the qubit splitting."""

    def hamiltonian(self, t: float, delta: float) -> np.ndarray:
        return _embed(self._drive() + 0.5 * delta * pauli(3), self.dim)


@dataclass(frozen=True)
class ThreeLevelLambda(HamiltonianModel):
    """Two ground levels coupled through an excited level ``|e> = |2>`` (rotating frame).

    ``omega0`` couples ``|0> <-> |e>``, ``omega1`` couples ``|1> <-> |e>``, the
    excited level sits at one-photon detuning ``detuning`` and ``delta`` shifts
    ``|1>`` (two-photon detuning). The ``"chirped"`` envelope sweeps the
    one-photon detuning linearly at ``chirp_rate`` through the pulse centre.
    """

    omega0: float
    omega1: float
    detuning: float
    pulse_duration: float
    chirp_rate: float = 0.0
    envelope: str = "square"
    collapses: tuple = ()

    dim = 3

    def __post_init__(self):
        if self.envelope not in ("square", "chirped"):
            raise ValueError(f"unknown envelope {self.envelope!r}")
        if not self.pulse_duration >= 0:
            raise ValueError("pulse duration must be non-negative")
        object.__setattr__(self, "collapses", tuple(self.collapses))

    @property
    def time_dependent(self) -> bool:
        return self.envelope == "chirped" and self.chirp_rate != 0.0

    @property
    def duration(self) -> float:
        return self.pulse_duration

    @property
    def rate_scale(self) -> float:
        sweep = abs(self.chirp_rate) * self.pulse_duration / 2 if self.time_dependent else 0.0
        return max(math.hypot(self.omega0, self.omega1), abs(self.detuning) + sweep, 1e-300)

    def hamiltonian(self, t: float, delta: float) -> np.ndarray:
        det = self.detuning
        if self.time_dependent:
            det += self.chirp_rate * (t - self.pulse_duration / 2)
        h = np.zeros((3, 3), dtype=complex)
        h[1, 1] = delta
        h[2, 2] = det
        h[2, 0] = h[0, 2] = 0.5 * self.omega0
        h[2, 1] = h[1, 2] = 0.5 * self.omega1
        return h


def lindblad_rhs(rho, h, collapses=()) -> np.ndarray:
    """``i[rho, H] - 1/2 sum {C^dag C, rho} + sum C rho C^dag``.

    ``collapses`` may hold :class:`CollapseOperator` instances or matrices.
    """
    rho = np.asarray(rho, dtype=complex)
    h = np.asarray(h, dtype=complex)
    if rho.shape != h.shape or rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise DimensionMismatch(f"rho {rho.shape} and H {h.shape} are inconsistent")
    dim = rho.shape[0]
    out = 1j * (rho @ h - h @ rho)
    for c in collapses:
        c = c.matrix(dim) if isinstance(c, CollapseOperator) else np.asarray(c, dtype=complex)
        if c.shape != rho.shape:
            raise DimensionMismatch(f"collapse {c.shape} does not match rho {rho.shape}")
        cd = c.conj().T
        cdc = cd @ c
        out += c @ rho @ cd - 0.5 * (cdc @ rho + rho @ cdc)
    return out


def liouvillian(h: np.ndarray, collapses: list[np.ndarray]) -> np.ndarray:
    """Matrix of :func:`lindblad_rhs` acting on row-major ``vec(rho)``."""
    dim = h.shape[0]
    eye = np.eye(dim)
    gen = -1j * (np.kron(h, eye) - np.kron(eye, h.T))
    for c in collapses:
        cdc = c.conj().T @ c
        gen += np.kron(c, c.conj()) - 0.5 * (np.kron(cdc, eye) + np.kron(eye, cdc.T))
    return gen


def _rk4_step_matrix(gen: np.ndarray, dt: float) -> np.ndarray:
    # one classical RK4 step of y' = gen y, written as its stability polynomial
    z = dt * gen
    eye = np.eye(gen.shape[0], dtype=complex)
    z2 = z @ z
    return eye + z + z2 / 2 + z2 @ z / 6 + z2 @ z2 / 24


def _integrate(y0: np.ndarray, model: HamiltonianModel, delta: float, pulse: PulseSpec,
               keep: bool = False):
    """RK4 on a batch of vectorized states ``y0`` of shape ``(dim**2, m)``."""
    cols = model.collapse_matrices()
    n, dt = pulse.n_steps, pulse.dt
    if n == 0:
        return (y0, [y0]) if keep else y0

    if not model.time_dependent:
        step = _rk4_step_matrix(liouvillian(model.hamiltonian(0.0, delta), cols), dt)
        if not keep:
            return np.linalg.matrix_power(step, n) @ y0
        ys = [y0]
        for _ in range(n):
            ys.append(step @ ys[-1])
        return ys[-1], ys

    def gen(t):
        return liouvillian(model.hamiltonian(t, delta), cols)

    y = y0
    ys = [y0]
    for i in range(n):
        t = i * dt
        g0, gm, g1 = gen(t), gen(t + dt / 2), gen(t + dt)
        k1 = g0 @ y
        k2 = gm @ (y + dt / 2 * k1)
        k3 = gm @ (y + dt / 2 * k2)
        k4 = g1 @ (y + dt * k3)
        y = y + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        if keep:
            ys.append(y)
    return (y, ys) if keep else y


def _as_model_state(rho0, dim: int) -> np.ndarray:
    rho0 = np.asarray(rho0, dtype=complex)
    if rho0.shape == (dim, dim):
        return rho0
    if rho0.shape == (2, 2):
        return _embed(rho0, dim)
    raise DimensionMismatch(f"initial state {rho0.shape} does not fit a {dim}-level model")


def propagate(rho0, model: HamiltonianModel, delta: float = 0.0,
              pulse: PulseSpec | None = None, check: bool = False) -> np.ndarray:
    """Integrate the master equation over one pulse and return the full final state.

    A 2x2 ``rho0`` is embedded in the qubit block of larger models. With
    ``check=True`` the pulse is re-integrated at half the step and
    :class:`ConvergenceError` is raised if the two results differ by more
    than ``CONVERGENCE_TOL``.
    """
    pulse = pulse or model.default_pulse()
    dim = model.dim
    rho0 = _as_model_state(rho0, dim)
    y = _integrate(rho0.reshape(-1, 1), model, delta, pulse)
    rho = y.reshape(dim, dim)
    if check:
        fine = _integrate(rho0.reshape(-1, 1), model, delta, pulse.halved()).reshape(dim, dim)
        err = float(np.max(np.abs(fine - rho)))
        if err > CONVERGENCE_TOL:
            raise ConvergenceError(f"step dt={pulse.dt:.3g} not converged (change {err:.2e})")
    return rho


def trajectory(rho0, model: HamiltonianModel, delta: float = 0.0,
               pulse: PulseSpec | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Times and states at every integration step, shapes ``(n+1,)`` and ``(n+1, d, d)``."""
    pulse = pulse or model.default_pulse()
    dim = model.dim
    rho0 = _as_model_state(rho0, dim)
    _, ys = _integrate(rho0.reshape(-1, 1), model, delta, pulse, keep=True)
    times = np.arange(len(ys)) * pulse.dt
    return times, np.array([y.reshape(dim, dim) for y in ys])


def _pauli_batch(dim: int) -> np.ndarray:
    # sigma_j / 2 has coefficient vector e_j
    return np.stack([_embed(0.5 * pauli(j), dim).reshape(-1) for j in range(4)], axis=1)


def propagate_superop(model: HamiltonianModel, delta: float = 0.0,
                      pulse: PulseSpec | None = None, check: bool = False) -> np.ndarray:
    """Numerical 4x4 superoperator on the qubit subspace.

    Each ``sigma_j / 2`` is embedded in the model space, propagated, projected back
    onto the qubit block and expanded in Pauli coefficients, giving column
    ``j``. Population left outside the qubit shows up as ``B[0, :] != e_0``.
    """
    pulse = pulse or model.default_pulse()
    dim = model.dim
    y = _integrate(_pauli_batch(dim), model, delta, pulse)
    if check:
        fine = _integrate(_pauli_batch(dim), model, delta, pulse.halved())
        err = float(np.max(np.abs(fine - y)))
        if err > CONVERGENCE_TOL:
            raise ConvergenceError(f"step dt={pulse.dt:.3g} not converged (change {err:.2e})")
    b = np.empty((4, 4))
    for j in range(4):
        block = y[:, j].reshape(dim, dim)[:2, :2]
        b[:, j] = density_to_coeffs(block)
    return b


def step_convergence(model: HamiltonianModel, delta: float = 0.0,
                     pulse: PulseSpec | None = None) -> float:
    """Max change of the superoperator when the step is halved."""
    pulse = pulse or model.default_pulse()
    coarse = propagate_superop(model, delta, pulse)
    fine = propagate_superop(model, delta, pulse.halved())
    return float(np.max(np.abs(coarse - fine)))
