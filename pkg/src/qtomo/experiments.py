"""Width scans and the correlated-error demonstration, driven by a JSON config.

All frequencies are in units of the Rabi frequency (``omega = 1``).
"""

from __future__ import annotations

import csv
import dataclasses
import io
import itertools
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .calibration import (
    design_superop,
    expand_superop,
    make_setting,
    population_rows,
    qubit_superop,
    two_qubit_superop,
)
from .ensemble import moment, profile, sample
from .qcore import ENTANGLED, PLUS, coeffs_to_density, density_to_coeffs, fidelity, projector
from .reconstruction import (
    MeasurementRecord,
    assemble_system,
    measured_vector,
    reconstruct_correlated,
    solve,
)
from .rotations import RotationSpec, rotation_matrix

PI = math.pi
SCENARIOS = ("single_qubit_scan", "two_qubit_scan", "correlated_demo")
CSV_HEADER = ("width", "fidelity_averaged", "fidelity_naive", "residual_averaged", "residual_naive")

SINGLE_QUBIT_ANGLES = [[PI / 2, 0.0], [PI / 2, PI / 2], [PI, 0.0]]
# pool whose six ordered pairs give a rank-16 design under leakage
TWO_QUBIT_POOL = [[PI / 2, 0.0], [3 * PI / 2, PI / 2], [PI, PI / 4]]
TWO_QUBIT_ANGLES = [[a, b] for a, b in itertools.permutations(TWO_QUBIT_POOL, 2)]
CORRELATED_ANGLES = [[th, ph] for th in (PI / 2, PI, 3 * PI / 2) for ph in (0.0, PI / 4, PI / 2, 3 * PI / 4)]


class ConfigError(ValueError):
    """The experiment configuration is malformed or inconsistent."""


def _default_widths():
    return [0.0] + np.geomspace(1e-3, 0.05, 7).tolist()


@dataclass
class ExperimentConfig:
    scenario: str
    model: str = "detuned"
    omega: float = 1.0
    leak_rate: float = 0.0
    distribution: str = "lorentzian"
    widths: list = field(default_factory=_default_widths)
    angles: list = field(default_factory=lambda: [list(a) for a in SINGLE_QUBIT_ANGLES])
    samples: int = 21
    truncation: float = 5.0
    shots: int = 0
    seed: int = 0
    dt: float | None = None
    gate: list = field(default_factory=lambda: [PI / 2, 0.0])
    taylor_widths: list = field(default_factory=lambda: [0.0, 1e-3])
    fd_step: float | None = None

    @classmethod
    def default(cls, scenario: str) -> "ExperimentConfig":
        if scenario == "single_qubit_scan":
            return cls(scenario)
        if scenario == "two_qubit_scan":
            return cls(scenario, leak_rate=0.05, angles=[[list(a), list(b)] for a, b in TWO_QUBIT_ANGLES])
        if scenario == "correlated_demo":
            return cls(scenario, widths=np.geomspace(5e-3, 0.05, 6).tolist(),
                       angles=[list(a) for a in CORRELATED_ANGLES])
        raise ConfigError(f"unknown scenario {scenario!r}; expected one of {SCENARIOS}")

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        if "scenario" not in data:
            raise ConfigError("config is missing 'scenario'")
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        cfg = dataclasses.replace(cls.default(data["scenario"]), **data)
        cfg.validate()
        return cfg

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def validate(self) -> None:
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"unknown scenario {self.scenario!r}")
        if self.model not in ("ideal", "detuned"):
            raise ConfigError(f"model must be 'ideal' or 'detuned', got {self.model!r}")
        if self.distribution not in ("lorentzian", "gaussian"):
            raise ConfigError(f"distribution must be 'lorentzian' or 'gaussian', got {self.distribution!r}")
        _check_number("omega", self.omega, positive=True)
        _check_number("leak_rate", self.leak_rate)
        _check_number("truncation", self.truncation, positive=True)
        if self.dt is not None:
            _check_number("dt", self.dt, positive=True)
        if self.fd_step is not None:
            _check_number("fd_step", self.fd_step, positive=True)
        for name in ("samples", "shots", "seed"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int) or value < 0:
                raise ConfigError(f"{name} must be a non-negative integer, got {value!r}")
        if self.samples < 1:
            raise ConfigError("samples must be at least 1")
        for name in ("widths", "taylor_widths"):
            ws = getattr(self, name)
            if not isinstance(ws, list) or not ws:
                raise ConfigError(f"{name} must be a non-empty list")
            for w in ws:
                _check_number(name, w)
        self._validate_angles()

    def _validate_angles(self) -> None:
        per_setting = 2 if self.scenario == "two_qubit_scan" else 1
        if not isinstance(self.angles, list) or not self.angles:
            raise ConfigError("angles must be a non-empty list")
        for entry in self.angles:
            pairs = entry if per_setting == 2 else [entry]
            if not isinstance(pairs, list) or len(pairs) != per_setting:
                raise ConfigError(f"malformed angle entry {entry!r}")
            for pair in pairs:
                if not isinstance(pair, list) or len(pair) != 2:
                    raise ConfigError(f"angles must be [theta, phi] pairs, got {pair!r}")
                for x in pair:
                    _check_number("angle", x, allow_negative=True)
        if per_setting == 2:
            if len(self.angles) < 4:
                raise ConfigError("two-qubit reconstruction needs at least four settings")
            if any(a == b for a, b in self.angles):
                raise ConfigError("each two-qubit setting must rotate the qubits differently")
        if not isinstance(self.gate, list) or len(self.gate) != 2:
            raise ConfigError("gate must be a [theta, phi] pair")
        for x in self.gate:
            _check_number("gate", x, allow_negative=True)

    def settings(self):
        return [make_setting(a, self.model, self.omega, self.leak_rate, self.dt) for a in self.angles]

    def samples_for(self, width: float):
        return sample(profile(self.distribution, width), self.samples, self.truncation)

    @property
    def constraint(self) -> str:
        return "free" if self.leak_rate > 0 else "pin_c0_to_1"


def _check_number(name, x, positive=False, allow_negative=False):
    if isinstance(x, bool) or not isinstance(x, (int, float)) or not math.isfinite(x):
        raise ConfigError(f"{name} must be a finite number, got {x!r}")
    if positive and not x > 0:
        raise ConfigError(f"{name} must be positive, got {x!r}")
    if not allow_negative and x < 0:
        raise ConfigError(f"{name} must be non-negative, got {x!r}")


def load_config(path) -> ExperimentConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from exc
    try:
        return ExperimentConfig.from_dict(data)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


@dataclass(frozen=True)
class ScanRow:
    width: float
    fidelity_averaged: float
    fidelity_naive: float
    residual_averaged: float
    residual_naive: float


def simulate_shots(populations, n: int, seed=None, setting_id=0) -> MeasurementRecord:
    """Empirical frequencies from ``n`` multinomial draws.

    The outcomes are the listed populations plus one "lost" outcome carrying
    the missing probability. ``seed`` is an int or a ``numpy`` Generator.
    """
    p = np.asarray(populations, dtype=float)
    if n < 1:
        raise ValueError("need at least one shot")
    if p.ndim != 1 or np.any(p < -1e-12) or p.sum() > 1 + 1e-9:
        raise ValueError(f"populations {p.tolist()} are not a sub-distribution")
    p = np.clip(p, 0.0, None)
    lost = max(0.0, 1.0 - p.sum())
    probs = np.append(p, lost)
    probs /= probs.sum()
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    counts = rng.multinomial(n, probs)
    return MeasurementRecord(setting_id, tuple(counts[:-1] / n))


def _measure(exact: np.ndarray, n_outcomes: int, shots: int, rng) -> np.ndarray:
    if shots == 0:
        return exact
    chunks = exact.reshape(-1, n_outcomes)
    freq = [simulate_shots(np.clip(c, 0, 1), shots, rng, k).populations for k, c in enumerate(chunks)]
    return np.concatenate(freq)


def _width_rng(cfg: ExperimentConfig, index: int):
    return np.random.default_rng([cfg.seed, index])


def _scan(cfg, target, forward):
    settings = cfg.settings()
    n_out = 2 ** settings[0].n_qubits
    v = density_to_coeffs(projector(target))
    naive, _ = assemble_system(settings, [design_superop(s) for s in settings])
    rows = []
    for idx, width in enumerate(cfg.widths):
        samples = cfg.samples_for(width)
        averaged, _ = assemble_system(settings, [design_superop(s, samples) for s in settings])
        exact = forward(settings, samples, v)
        data = _measure(exact, n_out, cfg.shots, _width_rng(cfg, idx))
        ra = solve(averaged, data, "least_squares", cfg.constraint)
        rn = solve(naive, data, "least_squares", cfg.constraint)
        rows.append(ScanRow(
            float(width),
            fidelity(target, coeffs_to_density(ra.coeffs)),
            fidelity(target, coeffs_to_density(rn.coeffs)),
            ra.residual_norm,
            rn.residual_norm,
        ))
    return rows


def _forward_single(settings, samples, v):
    # member by member: populations of each rotated member, then the weighted sum
    out = []
    for s in settings:
        model = s.models[0]
        p = np.zeros(2)
        for delta, w in samples:
            p += w * (population_rows(qubit_superop(model, delta, s.dt)) @ v)
        out.append(p)
    return np.concatenate(out)


def _forward_two(settings, samples, v):
    # independent offsets on the two qubits: sum over all member pairs
    out = []
    for s in settings:
        m1, m2 = s.models
        p = np.zeros(4)
        for (d1, w1), (d2, w2) in itertools.product(samples, samples):
            b = two_qubit_superop(qubit_superop(m1, d1, s.dt), qubit_superop(m2, d2, s.dt))
            p += w1 * w2 * (population_rows(b) @ v)
        out.append(p)
    return np.concatenate(out)


def run_single_qubit_scan(cfg: ExperimentConfig) -> list[ScanRow]:
    """Reconstruct ``|+>`` at each width with the averaged and the delta = 0 design."""
    return _scan(cfg, PLUS, _forward_single)


def run_two_qubit_scan(cfg: ExperimentConfig) -> list[ScanRow]:
    """Reconstruct ``(|00> + |01> + |10> - |11>)/2`` at each width."""
    if len(cfg.angles) < 4:
        raise ConfigError("two-qubit reconstruction needs at least four settings")
    return _scan(cfg, ENTANGLED, _forward_two)


@dataclass
class CorrelatedReport:
    widths: list
    error_k0: list
    error_k2: list
    slope_k2: float
    orders: list
    taylor: list
    order_errors: list
    rows: list

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["orders"] = [np.asarray(v).tolist() for v in self.orders]
        d["taylor"] = [np.asarray(v).tolist() for v in self.taylor]
        d["rows"] = [dataclasses.asdict(r) for r in self.rows]
        return d


def run_correlated_demo(cfg: ExperimentConfig) -> CorrelatedReport:
    """Gate errors correlated with tomography errors, reconstructed at orders 0 and 2.

    Each member starts in ``|0>``, passes the gate at its own offset and is then
    measured after tomographic rotations at that same offset. At every width
    the ensemble-averaged state is estimated with the uncorrected design
    (order 0) and with the second-order correlated solver; records from
    ``taylor_widths`` are fitted jointly for the per-order coefficients.
    """
    gate = make_setting(cfg.gate, cfg.model, cfg.omega, cfg.leak_rate, cfg.dt).models[0]
    settings = cfg.settings()
    expansions = [expand_superop(s, 2, cfg.fd_step) for s in settings]
    v_in = np.array([1.0, 0.0, 0.0, 1.0])
    target = rotation_matrix(RotationSpec(*cfg.gate)) @ np.array([1.0, 0.0], dtype=complex)

    def prepared(delta):
        return qubit_superop(gate, delta, cfg.dt) @ v_in

    def records_at(width, idx):
        samples = cfg.samples_for(width)
        moments = tuple(moment(samples, k) for k in range(3))
        recs = []
        rng = _width_rng(cfg, idx)
        for k, s in enumerate(settings):
            p = np.zeros(2)
            for delta, w in samples:
                p += w * (population_rows(qubit_superop(s.models[0], delta, s.dt)) @ prepared(delta))
            p = _measure(p, 2, cfg.shots, rng)
            recs.append(MeasurementRecord(k, tuple(np.clip(p, 0.0, 1.0)), moments))
        average = sum(w * prepared(delta) for delta, w in samples)
        return recs, average, moments

    naive, _ = assemble_system(settings, [e.terms[0] for e in expansions])
    err0, err2, rows = [], [], []
    for idx, width in enumerate(cfg.widths):
        recs, average, m = records_at(width, idx)
        data = measured_vector(recs)
        r0 = solve(naive, data, "least_squares", cfg.constraint)
        orders, info = reconstruct_correlated(recs, expansions, order=2,
                                              constraint=cfg.constraint, full_output=True)
        est2 = sum(m[b] * orders[b] for b in range(3))
        err0.append(float(np.max(np.abs(r0.coeffs - average))))
        err2.append(float(np.max(np.abs(est2 - average))))
        rows.append(ScanRow(
            float(width),
            fidelity(target, coeffs_to_density(est2)),
            fidelity(target, coeffs_to_density(r0.coeffs)),
            info.residual_norm,
            r0.residual_norm,
        ))

    nonzero = [(w, e) for w, e in zip(cfg.widths, err2) if w > 0 and e > 0]
    slope = float("nan")
    if len(nonzero) >= 2:
        slope = float(np.polyfit(np.log([w for w, _ in nonzero]), np.log([e for _, e in nonzero]), 1)[0])

    joint = []
    for idx, width in enumerate(cfg.taylor_widths):
        joint.extend(records_at(width, len(cfg.widths) + idx)[0])
    orders = reconstruct_correlated(joint, expansions * len(cfg.taylor_widths), order=2,
                                    constraint=cfg.constraint)
    h = cfg.fd_step or 1e-3 * cfg.omega
    taylor = [
        prepared(0.0),
        (prepared(h) - prepared(-h)) / (2 * h),
        (prepared(h) - 2 * prepared(0.0) + prepared(-h)) / (2 * h * h),
    ]
    order_errors = [float(np.max(np.abs(a - b))) for a, b in zip(orders, taylor)]
    return CorrelatedReport(list(map(float, cfg.widths)), err0, err2, slope, orders, taylor,
                            order_errors, rows)


def shot_noise_study(cfg: ExperimentConfig, shot_counts, repeats: int = 20):
    """RMS coefficient error of the averaged single-qubit reconstruction vs shots.

    Returns ``(errors, slope)`` where ``slope`` is the log-log fit of error
    against shot count; statistical scaling gives ``-1/2``.
    """
    settings = cfg.settings()
    samples = cfg.samples_for(cfg.widths[0])
    design, _ = assemble_system(settings, [design_superop(s, samples) for s in settings])
    v = density_to_coeffs(projector(PLUS))
    exact = _forward_single(settings, samples, v)
    errors = []
    for i, n in enumerate(shot_counts):
        sq = []
        for r in range(repeats):
            rng = np.random.default_rng([cfg.seed, i, r])
            data = _measure(exact, 2, int(n), rng)
            c = solve(design, data, "least_squares", cfg.constraint).coeffs
            sq.append(np.sum((c - v) ** 2))
        errors.append(float(np.sqrt(np.mean(sq))))
    slope = float(np.polyfit(np.log(shot_counts), np.log(errors), 1)[0])
    return errors, slope


def run(cfg: ExperimentConfig):
    """Run the configured scenario; returns ``(rows, report_or_None)``."""
    if cfg.scenario == "single_qubit_scan":
        return run_single_qubit_scan(cfg), None
    if cfg.scenario == "two_qubit_scan":
        return run_two_qubit_scan(cfg), None
    report = run_correlated_demo(cfg)
    return report.rows, report


def format_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for r in rows:
        writer.writerow([f"{getattr(r, name):.12g}" for name in CSV_HEADER])
    return buf.getvalue()
