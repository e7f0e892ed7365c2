"""Seeded Monte Carlo experiments and result files.

A run is fully described by an :class:`ExperimentConfig`.  Trial ``i``
draws from its own generator seeded with ``SeedSequence([master_seed, i])``,
so records do not depend on how trials are spread over workers.
"""

import csv
import json
import logging
import math
import os
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import partial
from typing import Optional

import numpy as np
from scipy import stats

from . import algorithms, objective
from .errors import ConfigError, CorrArmsError, MaxStepsExceeded
from .estimators import classical_estimator, diff_estimator, paired_samples
from .model import (
    instance_from_dict,
    load_instance,
    make_lower_bound_instance,
    make_prime_instance,
)

log = logging.getLogger(__name__)

ALGORITHMS = ("naive", "sr_c", "se_c", "phi_star", "oracle_mode")
ORACLE_BASES = ("naive", "sr_c", "se_c")
_REQUIRED = {
    "naive": ("m",),
    "sr_c": ("n",),
    "se_c": ("delta",),
    "phi_star": ("rho0", "rho1", "t"),
}

CSV_FIELDS = (
    "trial_index",
    "correct",
    "selected",
    "total_samples",
    "per_arm_samples",
    "terminal_reason",
    "wall_time_micros",
)


@dataclass
class ExperimentConfig:
    """What to run, how many times, and where to write it.

    ``instance`` is one of ``{"path": ...}``, ``{"entries": ..., "h": ...}``
    or ``{"family": "lower_bound", "rhos": [...], "h": ..., "prime": bool}``;
    it may be omitted for ``phi_star``.  ``params`` holds the algorithm
    inputs: ``n`` (sr_c), ``m`` (naive), ``delta`` (se_c),
    ``rho0``/``rho1``/``t``/``truth`` (phi_star) and ``base`` (oracle_mode).
    """

    algorithm: str
    params: dict = field(default_factory=dict)
    instance: Optional[dict] = None
    trials: int = 1
    master_seed: int = 0
    output_path: Optional[str] = None
    enumeration_cap: int = objective.ENUMERATION_CAP
    max_steps: Optional[int] = None
    workers: int = 1

    @classmethod
    def from_dict(cls, data):
        known = {f for f in cls.__dataclass_fields__}
        extra = set(data) - known
        if extra:
            raise ConfigError(f"unknown config keys: {sorted(extra)}")
        if "algorithm" not in data:
            raise ConfigError("config needs an 'algorithm'")
        return cls(**data)

    def validate(self):
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"algorithm must be one of {ALGORITHMS}, got {self.algorithm!r}")
        if int(self.trials) < 1:
            raise ConfigError("trials must be >= 1")
        if not 0 <= int(self.master_seed) < 2**64:
            raise ConfigError("master_seed must be a 64-bit unsigned integer")
        if int(self.workers) < 1:
            raise ConfigError("workers must be >= 1")
        algo = self.base_algorithm
        missing = [k for k in _REQUIRED[algo] if k not in self.params]
        if missing:
            raise ConfigError(f"{self.algorithm} needs params {missing}")
        if algo != "phi_star" and self.instance is None:
            raise ConfigError(f"{self.algorithm} needs an instance")
        p = self.params
        if algo == "naive" and int(p["m"]) < 1:
            raise ConfigError("m must be >= 1")
        if algo == "se_c" and not 0 < float(p["delta"]) < 1:
            raise ConfigError("delta must lie in (0, 1)")
        if algo == "phi_star":
            if not 1 > float(p["rho0"]) > float(p["rho1"]) >= 0:
                raise ConfigError("phi_star needs 1 > rho0 > rho1 >= 0")
            if int(p["t"]) < 1 or int(p.get("truth", 0)) not in (0, 1):
                raise ConfigError("phi_star needs t >= 1 and truth in {0, 1}")
        return self

    @property
    def base_algorithm(self):
        if self.algorithm == "oracle_mode":
            base = self.params.get("base", "sr_c")
            if base not in ORACLE_BASES:
                raise ConfigError(f"oracle_mode base must be one of {ORACLE_BASES}")
            return base
        return self.algorithm


def load_config(path):
    """Read a JSON or TOML config, chosen by file extension."""
    ext = os.path.splitext(path)[1].lower()
    if ext == ".toml":
        try:
            import tomllib
        except ModuleNotFoundError:  # Python 3.10
            import tomli as tomllib

        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    elif ext == ".json":
        with open(path) as fh:
            data = json.load(fh)
    else:
        raise ConfigError(f"config must be .json or .toml, got {path!r}")
    return ExperimentConfig.from_dict(data)


def build_instance(spec, cap=objective.ENUMERATION_CAP):
    if spec is None:
        return None
    if "path" in spec:
        return load_instance(spec["path"], cap)
    if spec.get("family") in ("lower_bound", "lower-bound") and "entries" not in spec:
        inst = make_lower_bound_instance(spec["rhos"], spec["h"], cap)
        return make_prime_instance(inst, cap) if spec.get("prime") else inst
    if "entries" in spec:
        return instance_from_dict(spec, cap)
    raise ConfigError(f"cannot build an instance from keys {sorted(spec)}")


def trial_rng(master_seed, trial_index):
    return np.random.default_rng(np.random.SeedSequence([int(master_seed), int(trial_index)]))


@dataclass(frozen=True)
class TrialRecord:
    trial_index: int
    correct: bool
    selected: tuple
    total_samples: int
    per_arm_samples: tuple
    terminal_reason: str
    wall_time_micros: int

    def row(self):
        return {
            "trial_index": self.trial_index,
            "correct": int(self.correct),
            "selected": ";".join(str(a) for a in self.selected),
            "total_samples": self.total_samples,
            "per_arm_samples": ";".join(str(c) for c in self.per_arm_samples),
            "terminal_reason": self.terminal_reason,
            "wall_time_micros": self.wall_time_micros,
        }


def _run_algorithm(config, instance, rng):
    p = config.params
    algo = config.base_algorithm
    if algo == "phi_star":
        rho0, rho1, t = float(p["rho0"]), float(p["rho1"]), int(p["t"])
        truth = int(p.get("truth", 0))
        x, y = paired_samples(rho0 if truth == 0 else rho1, t, 1, rng)
        verdict = algorithms.phi_star_test(np.column_stack([x[0], y[0]]), rho0, rho1)
        return (verdict,), verdict == truth, 2 * t, (t, t), "completed"
    source = algorithms.make_source(instance, rng, oracle=config.algorithm == "oracle_mode")
    try:
        if algo == "naive":
            out = algorithms.naive_policy(source, int(p["m"]), instance.h, config.enumeration_cap)
        elif algo == "sr_c":
            out = algorithms.sr_c(source, int(p["n"]), instance.h)
        else:
            out = algorithms.se_c(source, float(p["delta"]), instance.h, config.max_steps)
    except MaxStepsExceeded as exc:
        out = exc.outcome
    correct = out.terminal_reason == "completed" and out.selected == instance.optimal_subset
    return out.selected, correct, out.total_samples, tuple(int(c) for c in out.per_arm_samples), out.terminal_reason


def run_trial(config, instance, trial_index):
    rng = trial_rng(config.master_seed, trial_index)
    start = time.perf_counter_ns()
    try:
        selected, correct, total, per_arm, reason = _run_algorithm(config, instance, rng)
    except CorrArmsError as exc:
        selected, correct, total, per_arm, reason = (), False, 0, (), type(exc).__name__
    wall = (time.perf_counter_ns() - start) // 1000
    return TrialRecord(trial_index, bool(correct), tuple(int(a) for a in selected), int(total), per_arm, reason, int(wall))


def binomial_ci(errors, n, level=0.95):
    """Normal-approximation interval, or Clopper-Pearson when ``errors < 5``."""
    p = errors / n
    if errors < 5:
        a = 1.0 - level
        lo = 0.0 if errors == 0 else float(stats.beta.ppf(a / 2, errors, n - errors + 1))
        hi = 1.0 if errors == n else float(stats.beta.ppf(1 - a / 2, errors + 1, n - errors))
        return lo, hi, "clopper_pearson"
    z = float(stats.norm.ppf(0.5 + level / 2))
    half = z * math.sqrt(p * (1 - p) / n)
    return max(0.0, p - half), min(1.0, p + half), "normal"


def summarize(records):
    n = len(records)
    errors = sum(1 for r in records if not r.correct)
    lo, hi, method = binomial_ci(errors, n)
    totals = [r.total_samples for r in records]
    arms = [r.per_arm_samples for r in records if r.per_arm_samples]
    per_arm = np.mean(np.array(arms, dtype=np.float64), axis=0).tolist() if arms else []
    reasons = {}
    for r in records:
        reasons[r.terminal_reason] = reasons.get(r.terminal_reason, 0) + 1
    return {
        "trials": n,
        "errors": errors,
        "error_frequency": errors / n,
        "error_ci95": [lo, hi],
        "ci_method": method,
        "samples_mean": statistics.fmean(totals),
        "samples_median": statistics.median(totals),
        "samples_max": max(totals),
        "per_arm_mean": per_arm,
        "terminal_reasons": dict(sorted(reasons.items())),
    }


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    records: list
    summary: dict


def run_experiment(config, workers=None):
    """Run ``config.trials`` independent trials and optionally persist them."""
    config.validate()
    instance = build_instance(config.instance, config.enumeration_cap)
    workers = int(workers or config.workers)
    job = partial(run_trial, config, instance)
    indices = range(int(config.trials))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunk = max(1, len(indices) // (4 * workers))
            records = list(pool.map(job, indices, chunksize=chunk))
    else:
        records = [job(i) for i in indices]
    records.sort(key=lambda r: r.trial_index)
    summary = summarize(records)
    if instance is not None:
        summary["optimal_subset"] = list(instance.optimal_subset)
    log.info("%s: %d/%d errors", config.algorithm, summary["errors"], summary["trials"])
    result = ExperimentResult(config, records, summary)
    if config.output_path:
        write_records(result, config.output_path)
    return result


def summary_path(csv_path):
    root, _ = os.path.splitext(csv_path)
    return root + ".summary.json"


def write_records(result, path):
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_FIELDS)
        writer.writeheader()
        for rec in result.records:
            writer.writerow(rec.row())
    with open(summary_path(path), "w") as fh:
        json.dump({"config": asdict(result.config), "summary": result.summary}, fh, indent=1)
        fh.write("\n")


def read_records(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


# ---------------------------------------------------------------------------
# estimator comparison

COMPARE_FIELDS = ("rho", "t", "replications", "mse_diff", "mse_classical", "mse_ratio")


def compare_estimators(rhos, ts, replications, seed, output_path=None):
    """MSE of the difference-based and classical estimators on a (rho, t) grid."""
    rhos, ts = list(rhos), list(ts)
    if not rhos or not ts:
        raise ConfigError("rho and t grids must be non-empty")
    if any(not 0 <= r < 1 for r in rhos) or any(int(t) < 1 for t in ts) or replications < 1:
        raise ConfigError("need rho in [0, 1), t >= 1 and replications >= 1")
    rows = []
    for i, rho in enumerate(rhos):
        for j, t in enumerate(ts):
            rng = np.random.default_rng(np.random.SeedSequence([int(seed), i, j]))
            x, y = paired_samples(float(rho), int(t), int(replications), rng)
            mse_d = float(np.mean((diff_estimator(x, y) - rho) ** 2))
            mse_c = float(np.mean((classical_estimator(x, y) - rho) ** 2))
            rows.append(
                {
                    "rho": float(rho),
                    "t": int(t),
                    "replications": int(replications),
                    "mse_diff": mse_d,
                    "mse_classical": mse_c,
                    "mse_ratio": mse_d / mse_c,
                }
            )
    if output_path:
        with open(output_path, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=COMPARE_FIELDS)
            writer.writeheader()
            writer.writerows(rows)
    return rows
