"""Linear inversion of tomography data.

The unknowns are the Pauli coefficients of the state before the tomographic
rotation. ``pin_c0_to_1`` fixes the trace coefficient (``c_0`` or ``c_00``)
for trace-preserving reconstructions; ``free`` keeps it as an unknown, which
lossy designs need.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .calibration import SuperopExpansion, TomographySetting, outcome_labels, population_rows
from .qcore import DimensionMismatch, coeffs_to_density, density_to_coeffs

RANK_RTOL = 1e-8
MAX_CONDITION = 1e8
MODES = ("exact", "least_squares")
CONSTRAINTS = ("pin_c0_to_1", "free")


class RankDeficient(ValueError):
    """The tomography settings do not determine every unknown coefficient."""


@dataclass(frozen=True)
class MeasurementRecord:
    """Populations measured after one tomography setting.

    ``moments`` optionally overrides the offset moments used by
    :func:`reconstruct_correlated` for this record (``m_0, m_1, ...``).
    """

    setting_id: object
    populations: tuple
    moments: tuple | None = None

    def __post_init__(self):
        p = np.asarray(self.populations, dtype=float)
        if p.shape not in ((2,), (4,)):
            raise DimensionMismatch(f"need 2 or 4 populations, got shape {p.shape}")
        if np.any(p < -1e-9) or np.any(p > 1 + 1e-9) or p.sum() > 1 + 1e-9:
            raise ValueError(f"populations {p.tolist()} are not a sub-distribution")
        object.__setattr__(self, "populations", tuple(p.tolist()))
        if self.moments is not None:
            object.__setattr__(self, "moments", tuple(float(m) for m in self.moments))


@dataclass(frozen=True)
class ReconstructionResult:
    coeffs: np.ndarray
    residual_norm: float
    rank: int
    condition_number: float

    @property
    def density(self) -> np.ndarray:
        return coeffs_to_density(self.coeffs)


def assemble_system(settings, designs):
    """Stack measurement rows; returns ``(A, row_map)`` with ``row_map[i] = (setting, outcome)``."""
    settings = list(settings)
    designs = [np.asarray(b, dtype=float) for b in designs]
    if len(settings) != len(designs) or not designs:
        raise DimensionMismatch(f"{len(settings)} settings but {len(designs)} designs")
    shape = designs[0].shape
    if any(b.shape != shape for b in designs):
        raise DimensionMismatch("designs differ in dimension")
    n_qubits = 1 if shape == (4, 4) else 2
    for s in settings:
        if isinstance(s, TomographySetting) and s.n_qubits != n_qubits:
            raise DimensionMismatch("setting qubit count does not match its design")
    labels = outcome_labels(n_qubits)
    rows, row_map = [], []
    for idx, b in enumerate(designs):
        rows.append(population_rows(b))
        row_map.extend((idx, lab) for lab in labels)
    return np.vstack(rows), row_map


def _reduce(a, p, constraint):
    if constraint not in CONSTRAINTS:
        raise ValueError(f"unknown constraint {constraint!r}")
    if constraint == "pin_c0_to_1":
        return a[:, 1:], p - a[:, 0]
    return a, p


def _expand(x, constraint):
    return np.concatenate(([1.0], x)) if constraint == "pin_c0_to_1" else x


def _spectrum(a):
    s = np.linalg.svd(a, compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0, np.inf
    rank = int(np.sum(s > RANK_RTOL * s[0]))
    cond = np.inf if s[-1] == 0 else float(s[0] / s[-1])
    return rank, cond


def system_rank(a, constraint: str = "free") -> int:
    """Numerical rank (singular values above ``1e-8 * ||A||_2``) of the reduced system."""
    a = np.asarray(a, dtype=float)
    red, _ = _reduce(a, np.zeros(a.shape[0]), constraint)
    return _spectrum(red)[0]


def solve(a, p, mode: str = "least_squares", constraint: str = "free") -> ReconstructionResult:
    """Solve ``A c = p`` for the coefficient vector.

    ``exact`` inverts a square, full-rank subsystem: the system itself when
    square, otherwise the best-conditioned independent rows picked by
    column-pivoted QR. ``least_squares`` minimizes ``||A c - p||`` with an
    SVD-based solver. Raises :class:`RankDeficient` when the reduced system
    has rank below the unknown count or condition number above ``1e8``.
    """
    a = np.asarray(a, dtype=float)
    p = np.asarray(p, dtype=float)
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    if a.ndim != 2 or a.shape[1] not in (4, 16) or p.shape != (a.shape[0],):
        raise DimensionMismatch(f"system {a.shape} incompatible with data {p.shape}")
    red, rhs = _reduce(a, p, constraint)
    n = red.shape[1]
    rank, cond = _spectrum(red)
    if rank < n or cond > MAX_CONDITION:
        raise RankDeficient(f"rank {rank} of {n} unknowns (condition number {cond:.3g})")

    if mode == "least_squares":
        x = np.linalg.lstsq(red, rhs, rcond=None)[0]
    elif red.shape[0] == n:
        x = np.linalg.solve(red, rhs)
    else:
        _, _, piv = scipy.linalg.qr(red.T, pivoting=True, mode="economic")
        rows = np.sort(piv[:n])
        x = np.linalg.solve(red[rows], rhs[rows])

    c = _expand(x, constraint)
    return ReconstructionResult(
        coeffs=c,
        residual_norm=float(np.linalg.norm(a @ c - p)),
        rank=rank,
        condition_number=cond,
    )


def measured_vector(records) -> np.ndarray:
    return np.concatenate([np.asarray(r.populations, dtype=float) for r in records])


def _record_moments(record, shared, order):
    m = record.moments if record.moments is not None else shared
    if m is None or len(m) < order + 1:
        raise ValueError(f"need moments m_0..m_{order} for every record")
    return m


def correlated_system(records, expansions, moments=None, order: int = 2):
    """Linear model of ensemble-averaged data in the stacked per-order unknowns.

    Block ``b`` of the columns multiplies ``v^(b)``; its rows for record ``r``
    are ``population_rows(sum_{a <= K-b} m_{a+b} B^(a))``.
    """
    records = list(records)
    expansions = list(expansions)
    if len(records) != len(expansions) or not records:
        raise DimensionMismatch(f"{len(records)} records but {len(expansions)} expansions")
    for e in expansions:
        if not isinstance(e, SuperopExpansion) or e.order < order:
            raise ValueError(f"every expansion must reach order {order}")
    blocks = []
    for rec, exp in zip(records, expansions):
        m = _record_moments(rec, moments, order)
        row = []
        for b in range(order + 1):
            op = sum(m[a + b] * exp.terms[a] for a in range(order + 1 - b))
            row.append(population_rows(op))
        blocks.append(np.hstack(row))
    return np.vstack(blocks), measured_vector(records)


def reconstruct_correlated(records, expansions, moments=None, order: int = 2,
                           constraint: str = "pin_c0_to_1", full_output: bool = False):
    """Per-order state coefficients ``[v^(0), ..., v^(K)]`` from correlated tomography.

    The state of the ensemble member at offset ``delta`` is modelled as
    ``sum_b delta**b v^(b)`` and the tomographic rotation as
    ``sum_a delta**a B^(a)``; averaging over the ensemble gives data linear
    in the ``v^(b)`` with weights from the offset moments. ``moments`` is
    shared by all records unless a record carries its own, which lets
    records taken at several inhomogeneous widths enter one fit.

    With ``pin_c0_to_1`` the trace coefficient of ``v^(0)`` is 1 and that of
    every higher order is 0. Columns are equilibrated before the solve. A
    column with no weight in the data (e.g. the first-order block under a
    symmetric profile) is reported as zero rather than fitted.
    """
    if constraint not in CONSTRAINTS:
        raise ValueError(f"unknown constraint {constraint!r}")
    a, p = correlated_system(records, expansions, moments, order)
    dim = a.shape[1] // (order + 1)

    known = np.zeros(a.shape[1])
    free = np.ones(a.shape[1], dtype=bool)
    if constraint == "pin_c0_to_1":
        free[::dim] = False
        known[0] = 1.0
    rhs = p - a @ known

    norms = np.linalg.norm(a, axis=0)
    ref = norms[free].max() if free.any() else 0.0
    free &= norms > 1e-12 * ref
    cols = np.flatnonzero(free)
    red = a[:, cols] / norms[cols]
    rank, cond = _spectrum(red)
    if rank < cols.size or cond > MAX_CONDITION:
        raise RankDeficient(
            f"rank {rank} of {cols.size} unknowns (condition number {cond:.3g}); "
            "add rotation settings or widths"
        )
    y = np.linalg.lstsq(red, rhs, rcond=None)[0]
    x = known.copy()
    x[cols] = y / norms[cols]
    orders = [x[b * dim:(b + 1) * dim] for b in range(order + 1)]
    if not full_output:
        return orders
    info = ReconstructionResult(
        coeffs=x,
        residual_norm=float(np.linalg.norm(a @ x - p)),
        rank=rank,
        condition_number=cond,
    )
    return orders, info


def psd_project(v) -> np.ndarray:
    """Nearest state with non-negative spectrum, keeping the trace coefficient."""
    v = np.asarray(v, dtype=float)
    rho = coeffs_to_density(v)
    vals, vecs = np.linalg.eigh(rho)
    if vals.min() >= 0:
        return v.copy()
    clipped = np.clip(vals, 0.0, None)
    if v[0] <= 0 or clipped.sum() == 0:
        return np.zeros_like(v)
    clipped *= v[0] / clipped.sum()
    rho = (vecs * clipped) @ vecs.conj().T
    return density_to_coeffs(0.5 * (rho + rho.conj().T))
