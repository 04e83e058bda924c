"""Inhomogeneity profiles P(delta) and their discretization into weighted samples."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

DEFAULT_POINTS = 21
DEFAULT_TRUNCATION = 5.0


@dataclass(frozen=True)
class Lorentzian:
    hwhm: float

    def __post_init__(self):
        _check_width(self.hwhm)

    @property
    def width(self) -> float:
        return self.hwhm

    def density(self, delta):
        x = np.asarray(delta) / self.hwhm
        return 1.0 / (1.0 + x * x)


@dataclass(frozen=True)
class Gaussian:
    sigma: float

    def __post_init__(self):
        _check_width(self.sigma)

    @property
    def width(self) -> float:
        return self.sigma

    def density(self, delta):
        x = np.asarray(delta) / self.sigma
        return np.exp(-0.5 * x * x)


@dataclass(frozen=True)
class DiracDelta:
    """Every ensemble member sees ``delta = 0``."""


@dataclass(frozen=True)
class Discrete:
    """Explicit ``(delta, weight)`` points; weights are renormalized."""

    points: tuple

    def __post_init__(self):
        object.__setattr__(self, "points", tuple((float(d), float(p)) for d, p in self.points))


def _check_width(w):
    if not (math.isfinite(w) and w > 0):
        raise ValueError(f"distribution width must be finite and positive, got {w!r}")


@dataclass(frozen=True)
class SampleSet:
    """Quadrature of P(delta): sorted offsets with normalized non-negative weights."""

    deltas: tuple
    weights: tuple

    def __post_init__(self):
        d = np.asarray(self.deltas, dtype=float)
        p = np.asarray(self.weights, dtype=float)
        if d.ndim != 1 or d.shape != p.shape or d.size == 0:
            raise ValueError("sample set needs equally many deltas and weights (at least one)")
        if not np.all(np.isfinite(d)) or np.any(p < 0):
            raise ValueError("deltas must be finite and weights non-negative")
        if np.any(np.diff(d) <= 0):
            raise ValueError("deltas must be strictly increasing")
        if abs(p.sum() - 1.0) > 1e-12:
            raise ValueError(f"weights sum to {p.sum()!r}, not 1")
        object.__setattr__(self, "deltas", tuple(d.tolist()))
        object.__setattr__(self, "weights", tuple(p.tolist()))

    def __len__(self) -> int:
        return len(self.deltas)

    def __iter__(self):
        return iter(zip(self.deltas, self.weights))

    @classmethod
    def from_points(cls, deltas, weights) -> "SampleSet":
        d = np.asarray(deltas, dtype=float)
        p = np.asarray(weights, dtype=float)
        order = np.argsort(d, kind="stable")
        total = p.sum()
        if not total > 0:
            raise ValueError("weights must have positive sum")
        return cls(tuple(d[order]), tuple(p[order] / total))


def sample(dist, n: int = DEFAULT_POINTS, trunc: float = DEFAULT_TRUNCATION) -> SampleSet:
    """Discretize ``dist`` on a uniform grid over ``[-trunc*w, trunc*w]``.

    Weights are proportional to the profile at the grid points. A Dirac delta
    gives the single point ``(0, 1)`` for any ``n``; a :class:`Discrete`
    distribution is returned as given (normalized).
    """
    if n < 1:
        raise ValueError(f"need at least one sample point, got n={n}")
    if isinstance(dist, DiracDelta):
        return SampleSet((0.0,), (1.0,))
    if isinstance(dist, Discrete):
        d, p = zip(*dist.points) if dist.points else ((), ())
        return SampleSet.from_points(d, p)
    if not (math.isfinite(trunc) and trunc > 0):
        raise ValueError(f"truncation must be positive, got {trunc!r}")
    if n == 1:
        return SampleSet((0.0,), (1.0,))
    half = trunc * dist.width
    grid = np.linspace(-half, half, n)
    # exact mirror symmetry so odd moments cancel to rounding
    grid = 0.5 * (grid - grid[::-1])
    weights = dist.density(grid)
    return SampleSet(tuple(grid), tuple(weights / weights.sum()))


def moment(samples: SampleSet, k: int) -> float:
    if k < 0:
        raise ValueError("moment order must be non-negative")
    d = np.asarray(samples.deltas)
    p = np.asarray(samples.weights)
    return float(np.dot(p, d**k))


def profile(kind: str, width: float):
    """Distribution named ``kind`` with the given width; zero width is a Dirac delta."""
    if width == 0:
        return DiracDelta()
    if kind == "lorentzian":
        return Lorentzian(width)
    if kind == "gaussian":
        return Gaussian(width)
    raise ValueError(f"unknown distribution kind {kind!r}")
