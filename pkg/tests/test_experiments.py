import dataclasses
import json
import numpy as np
import pytest

from qtomo.experiments import (
    CSV_HEADER,
    ConfigError,
    ExperimentConfig,
    format_csv,
    load_config,
    run,
    run_correlated_demo,
    run_single_qubit_scan,
    shot_noise_study,
    simulate_shots,
)
from qtomo.reconstruction import RankDeficient


def test_shots_are_deterministic_per_seed():
    a = simulate_shots([0.3, 0.6], 1000, seed=5)
    b = simulate_shots([0.3, 0.6], 1000, seed=5)
    c = simulate_shots([0.3, 0.6], 1000, seed=6)
    assert a == b and a != c


def test_many_shots_approach_probabilities():
    r = simulate_shots([0.2, 0.3, 0.1, 0.35], 10**6, seed=1)
    assert np.allclose(r.populations, [0.2, 0.3, 0.1, 0.35], atol=2e-3)


def test_shot_frequencies_keep_missing_probability_out():
    r = simulate_shots([0.0, 0.5], 500, seed=2)
    assert r.populations[0] == 0.0 and sum(r.populations) < 1.0


def test_shot_validation():
    with pytest.raises(ValueError):
        simulate_shots([0.5, 0.5], 0)
    with pytest.raises(ValueError):
        simulate_shots([0.8, 0.5], 10)


def test_single_qubit_scan_properties():
    rows = run_single_qubit_scan(ExperimentConfig.default("single_qubit_scan"))
    assert rows[0].width == 0.0
    assert rows[0].fidelity_naive == pytest.approx(1.0, abs=1e-9)
    for r in rows:
        assert r.fidelity_averaged >= r.fidelity_naive - 1e-12
        assert r.fidelity_averaged == pytest.approx(1.0, abs=1e-8)
    naive = [r.fidelity_naive for r in rows]
    assert all(b < a for a, b in zip(naive, naive[1:]))


def test_gaussian_scan_also_degrades_naively():
    cfg = dataclasses.replace(ExperimentConfig.default("single_qubit_scan"), distribution="gaussian",
                              widths=[0.01, 0.05])
    rows = run_single_qubit_scan(cfg)
    assert rows[1].fidelity_naive < rows[0].fidelity_naive < 1.0


def test_correlated_demo_with_offset_free_rotations_cannot_split_orders():
    # rotations without offset dependence see only v0 + m2 v2 at a single width
    cfg = dataclasses.replace(ExperimentConfig.default("correlated_demo"), model="ideal", widths=[0.01])
    with pytest.raises(RankDeficient):
        run_correlated_demo(cfg)


def test_correlated_demo_report_is_json_serializable():
    cfg = dataclasses.replace(ExperimentConfig.default("correlated_demo"), widths=[0.01, 0.02])
    rep = run_correlated_demo(cfg)
    d = json.loads(json.dumps(rep.to_dict()))
    assert len(d["orders"]) == 3 and len(d["rows"]) == 2
    assert all(e2 < e0 for e0, e2 in zip(rep.error_k0, rep.error_k2))


def test_shot_noise_study_returns_errors():
    cfg = dataclasses.replace(ExperimentConfig.default("single_qubit_scan"), widths=[0.01])
    errors, slope = shot_noise_study(cfg, [100, 10000], repeats=5)
    assert len(errors) == 2 and errors[1] < errors[0] and slope < 0


def test_config_round_trip_through_dict():
    for scenario in ("single_qubit_scan", "two_qubit_scan", "correlated_demo"):
        cfg = ExperimentConfig.default(scenario)
        cfg.validate()
        assert ExperimentConfig.from_dict(json.loads(json.dumps(cfg.to_dict()))) == cfg


@pytest.mark.parametrize("patch", [
    {"scenario": "nope"},
    {"bogus": 1},
    {"omega": -1.0},
    {"omega": "fast"},
    {"samples": 0},
    {"shots": 1.5},
    {"seed": True},
    {"widths": []},
    {"widths": [-0.1]},
    {"angles": [[1.0]]},
    {"gate": [1.0]},
    {"gate": ["a", 0.0]},
    {"model": "lambda"},
    {"distribution": "voigt"},
])
def test_config_rejects_bad_values(patch):
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"scenario": "single_qubit_scan", **patch})


def test_two_qubit_config_needs_distinct_rotations():
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"scenario": "two_qubit_scan",
                                    "angles": [[[1.0, 0.0], [1.0, 0.0]]] * 4})
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"scenario": "two_qubit_scan", "angles": [[[1.0, 0.0], [2.0, 0.0]]]})


def test_lossless_two_qubit_scan_is_rank_deficient():
    cfg = ExperimentConfig.from_dict({"scenario": "two_qubit_scan", "leak_rate": 0.0, "widths": [0.01]})
    with pytest.raises(RankDeficient):
        run(cfg)


def test_load_config_errors(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError):
        load_config(bad)
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.json")
    good = tmp_path / "good.json"
    good.write_text(json.dumps({"scenario": "single_qubit_scan", "widths": [0.0, 0.01]}))
    assert load_config(good).widths == [0.0, 0.01]


def test_csv_format():
    rows = run_single_qubit_scan(ExperimentConfig.from_dict({"scenario": "single_qubit_scan", "widths": [0.0, 0.02]}))
    text = format_csv(rows)
    lines = text.split("\n")
    assert lines[0] == ",".join(CSV_HEADER)
    assert len(lines) == 4 and lines[-1] == "" and "\r" not in text


def test_shots_make_scan_noisy_but_reproducible():
    cfg = ExperimentConfig.from_dict({"scenario": "single_qubit_scan", "widths": [0.0, 0.02], "shots": 1000, "seed": 3})
    a, b = format_csv(run(cfg)[0]), format_csv(run(cfg)[0])
    assert a == b
    exact = format_csv(run(dataclasses.replace(cfg, shots=0))[0])
    assert a != exact
