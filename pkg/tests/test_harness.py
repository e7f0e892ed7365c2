import csv
import json
import math

import pytest

from corrarms import errors, harness
from corrarms.model import make_lower_bound_instance, save_instance

LB = {"family": "lower_bound", "rhos": [0.9, 0.5, 0.3], "h": 2}


def strip_timing(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    col = rows[0].index("wall_time_micros")
    return [r[:col] + r[col + 1 :] for r in rows]


def test_config_validation():
    with pytest.raises(errors.ConfigError):
        harness.ExperimentConfig("bogus").validate()
    with pytest.raises(errors.ConfigError):
        harness.ExperimentConfig("naive", {"m": 5}, LB, trials=0).validate()
    with pytest.raises(errors.ConfigError):
        harness.ExperimentConfig("sr_c", {}, LB).validate()
    with pytest.raises(errors.ConfigError):
        harness.ExperimentConfig("naive", {"m": 5}).validate()
    with pytest.raises(errors.ConfigError):
        harness.ExperimentConfig("se_c", {"delta": 1.0}, LB).validate()
    with pytest.raises(errors.ConfigError):
        harness.ExperimentConfig("phi_star", {"rho0": 0.5, "rho1": 0.9, "t": 3}).validate()
    with pytest.raises(errors.ConfigError):
        harness.ExperimentConfig("oracle_mode", {"base": "phi_star"}, LB).validate()
    with pytest.raises(errors.ConfigError):
        harness.ExperimentConfig.from_dict({"algorithm": "naive", "colour": 1})


def test_load_config_json_and_toml(tmp_path):
    j = tmp_path / "c.json"
    j.write_text(json.dumps({"algorithm": "naive", "params": {"m": 4}, "instance": LB, "trials": 3}))
    t = tmp_path / "c.toml"
    t.write_text(
        'algorithm = "naive"\ntrials = 3\n[params]\nm = 4\n'
        '[instance]\nfamily = "lower_bound"\nrhos = [0.9, 0.5, 0.3]\nh = 2\n'
    )
    a, b = harness.load_config(str(j)), harness.load_config(str(t))
    assert a == b
    with pytest.raises(errors.ConfigError):
        harness.load_config(str(tmp_path / "c.yaml"))


def test_build_instance_variants(tmp_path):
    inst = make_lower_bound_instance([0.9, 0.5, 0.3], 2)
    path = tmp_path / "i.json"
    save_instance(inst, path)
    from_path = harness.build_instance({"path": str(path)})
    from_family = harness.build_instance(LB)
    from_entries = harness.build_instance({"entries": inst.matrix.entries.tolist(), "h": 2})
    for other in (from_path, from_family, from_entries):
        assert other.optimal_subset == (0, 1)
    prime = harness.build_instance(dict(LB, prime=True))
    assert prime.optimal_subset == (0, 2)
    with pytest.raises(errors.ConfigError):
        harness.build_instance({"h": 2})


def test_trial_rng_independent_of_order():
    a = harness.trial_rng(7, 3).standard_normal(4)
    harness.trial_rng(7, 2).standard_normal(4)
    b = harness.trial_rng(7, 3).standard_normal(4)
    assert (a == b).all()
    assert (a != harness.trial_rng(7, 4).standard_normal(4)).any()


def test_binomial_ci():
    lo, hi, method = harness.binomial_ci(0, 100)
    assert method == "clopper_pearson" and lo == 0.0
    assert hi == pytest.approx(1 - 0.025 ** (1 / 100), rel=1e-9)
    lo, hi, method = harness.binomial_ci(50, 100)
    assert method == "normal"
    assert (lo, hi) == pytest.approx((0.5 - 1.959964 * 0.05, 0.5 + 1.959964 * 0.05), rel=1e-6)


def test_oracle_mode_never_errs():
    cfg = harness.ExperimentConfig("oracle_mode", {"n": 200, "base": "sr_c"}, LB, trials=100)
    assert harness.run_experiment(cfg).summary["error_frequency"] == 0.0


def test_se_c_error_within_confidence():
    spec = {"family": "lower_bound", "rhos": [0.9, 0.5, 0.0], "h": 2}
    res = harness.run_experiment(harness.ExperimentConfig("se_c", {"delta": 0.1}, spec, trials=200, master_seed=1))
    lo, _ = res.summary["error_ci95"]
    assert lo <= 0.1


def test_summary_matches_records(tmp_path):
    out = tmp_path / "r.csv"
    cfg = harness.ExperimentConfig("naive", {"m": 3}, LB, trials=40, output_path=str(out))
    res = harness.run_experiment(cfg)
    rows = harness.read_records(str(out))
    assert [int(r["trial_index"]) for r in rows] == list(range(40))
    assert res.summary["error_frequency"] == sum(1 - int(r["correct"]) for r in rows) / 40
    assert all(int(r["total_samples"]) == 12 for r in rows)
    side = json.loads((tmp_path / "r.summary.json").read_text())
    assert side["summary"]["errors"] == res.summary["errors"]
    assert side["summary"]["per_arm_mean"] == [3.0] * 4


def test_replay_is_identical(tmp_path):
    paths = [tmp_path / "a.csv", tmp_path / "b.csv"]
    for p in paths:
        harness.run_experiment(harness.ExperimentConfig("sr_c", {"n": 300}, LB, 30, 11, str(p)))
    assert strip_timing(paths[0]) == strip_timing(paths[1])


def test_rewrite_not_append(tmp_path):
    p = tmp_path / "a.csv"
    for trials in (10, 4):
        harness.run_experiment(harness.ExperimentConfig("naive", {"m": 2}, LB, trials, 0, str(p)))
    assert len(harness.read_records(str(p))) == 4


def test_serial_and_parallel_agree():
    cfg = harness.ExperimentConfig("se_c", {"delta": 0.2}, LB, trials=12, master_seed=5)
    serial = harness.run_experiment(cfg, workers=1).records
    parallel = harness.run_experiment(cfg, workers=3).records
    strip = lambda recs: [r.row() | {"wall_time_micros": 0} for r in recs]
    assert strip(serial) == strip(parallel)


def test_errors_are_recorded_per_trial():
    res = harness.run_experiment(harness.ExperimentConfig("sr_c", {"n": 5}, LB, trials=2))
    assert res.summary["terminal_reasons"] == {"BudgetTooSmall": 2}
    assert res.summary["errors"] == 2


def test_max_steps_recorded():
    spec = {"family": "lower_bound", "rhos": [0.9, 0.85], "h": 2}
    cfg = harness.ExperimentConfig("se_c", {"delta": 0.1}, spec, trials=3, max_steps=4)
    res = harness.run_experiment(cfg)
    assert res.summary["terminal_reasons"] == {"max_steps": 3}
    assert all(r.total_samples == 12 for r in res.records)


def test_phi_star_experiment():
    cfg = harness.ExperimentConfig("phi_star", {"rho0": 0.9, "rho1": 0.5, "t": 20, "truth": 1}, trials=50)
    res = harness.run_experiment(cfg)
    assert res.summary["samples_max"] == 40
    assert "optimal_subset" not in res.summary


def test_compare_estimators(tmp_path):
    out = tmp_path / "mse.csv"
    rows = harness.compare_estimators([0.0, 0.99], [10, 100, 1000], 4000, seed=0, output_path=str(out))
    by = {(r["rho"], r["t"]): r for r in rows}
    for t in (10, 100, 1000):
        assert by[(0.0, t)]["mse_diff"] == pytest.approx(2 / t, rel=0.1)
        assert by[(0.0, t)]["mse_classical"] == pytest.approx(1 / t, rel=0.1)
        assert by[(0.0, t)]["mse_ratio"] == pytest.approx(2.0, rel=0.15)
    assert by[(0.99, 100)]["mse_ratio"] <= 0.01
    for rho in (0.0, 0.99):
        for key in ("mse_diff", "mse_classical"):
            vals = [by[(rho, t)][key] for t in (10, 100, 1000)]
            assert vals == sorted(vals, reverse=True)
    assert len(harness.read_records(str(out))) == 6


def test_compare_estimators_validates():
    with pytest.raises(errors.ConfigError):
        harness.compare_estimators([], [10], 10, 0)
    with pytest.raises(errors.ConfigError):
        harness.compare_estimators([1.0], [10], 10, 0)


def test_samples_statistics():
    recs = [harness.TrialRecord(i, True, (0, 1), s, (s // 2, s - s // 2), "completed", 0) for i, s in enumerate((2, 4, 12))]
    summ = harness.summarize(recs)
    assert (summ["samples_mean"], summ["samples_median"], summ["samples_max"]) == (6, 4, 12)
    assert summ["per_arm_mean"] == [3.0, 3.0]
    assert math.isclose(summ["error_ci95"][1], 1 - 0.025 ** (1 / 3))
