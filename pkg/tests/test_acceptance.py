"""Acceptance criteria, one test each.

Every test prints a single ``[PASS]``/``[FAIL]`` line with the measured
quantity and its threshold.  ``python tests/test_acceptance.py`` runs the
same checks without pytest.
"""

import csv
import math
import os
import sys
import tempfile
import time

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

import oracles  # noqa: E402
from corrarms import harness, objective  # noqa: E402
from corrarms.checks import verify_bounds  # noqa: E402
from corrarms.estimators import classical_estimator, diff_estimator, paired_samples  # noqa: E402
from corrarms.model import make_problem  # noqa: E402


def _line(number, title, ok, detail):
    return f"[{'PASS' if ok else 'FAIL'}] {number:>2}. {title}: {detail}"


def _suite(number, title, name, budget=None):
    start = time.perf_counter()
    rep = verify_bounds(name, seed=0)
    elapsed = time.perf_counter() - start
    ok = rep.passed and (budget is None or elapsed < budget)
    held = sum(line.passed for line in rep.lines)
    shown = "; ".join(f"{l.measured:.4g} {l.relation} {l.bound:.4g}" for l in rep.lines[:3])
    more = ", ..." if len(rep.lines) > 3 else ""
    detail = f"{held}/{len(rep.lines)} comparisons hold ({shown}{more}); {elapsed:.1f}s"
    return ok, _line(number, title, ok, detail), str(rep)


# ---------------------------------------------------------------------------


def criterion_1():
    start = time.perf_counter()
    sigma, t = 0.7, 50
    x, y = paired_samples(sigma, t, 10_000, np.random.default_rng(0))
    stat = t * (1.0 - diff_estimator(x, y)) / (1.0 - sigma)
    mean, var = float(stat.mean()), float(stat.var(ddof=1))
    elapsed = time.perf_counter() - start
    ok = 49 <= mean <= 51 and 90 <= var <= 110 and elapsed < 5
    return ok, _line(1, "estimator law", ok, f"mean {mean:.3f} in [49, 51], var {var:.2f} in [90, 110], {elapsed:.2f}s"), ""


def criterion_2():
    start = time.perf_counter()
    rho, t = 0.99, 100
    x, y = paired_samples(rho, t, 10_000, np.random.default_rng(1))
    ratio = float(np.mean((diff_estimator(x, y) - rho) ** 2) / np.mean((classical_estimator(x, y) - rho) ** 2))
    elapsed = time.perf_counter() - start
    ok = ratio <= 0.01 and elapsed < 5
    return ok, _line(2, "estimator advantage", ok, f"MSE ratio {ratio:.3g} <= 0.01, {elapsed:.2f}s"), ""


def criterion_3():
    return _suite(3, "chi-square tail domination", "lemma5")


def criterion_4():
    return _suite(4, "KL sandwich on 1000 pairs", "lemma7")


def criterion_5():
    return _suite(5, "perturbed-instance identity and KL", "lemma8")


def criterion_6():
    ok1, l1, r1 = _suite(6, "naive policy bound", "thm1")
    ok2, l2, r2 = _suite(6, "threshold test risk", "phi_star")
    ok = ok1 and ok2
    detail = l1.split(": ", 1)[1] + " | " + l2.split(": ", 1)[1]
    return ok, _line(6, "naive policy and threshold test", ok, detail), r1 + "\n" + r2


def criterion_7():
    return _suite(7, "two-point lower bound", "thm2")


def criterion_8():
    return _suite(8, "SR-C error and budget", "thm3", budget=120)


def criterion_9():
    return _suite(9, "SE-C confidence and adaptivity", "thm4", budget=300)


def _random_sigma(rng, K):
    # nonnegative loadings give nonnegative correlations
    w = rng.uniform(0.0, 1.0, (K, rng.integers(1, K + 1)))
    noise = rng.uniform(0.05, 1.0, K)
    cov = w @ w.T + np.diag(noise)
    s = np.sqrt(np.diag(cov))
    a = cov / np.outer(s, s)
    np.fill_diagonal(a, 1.0)
    return (a + a.T) / 2


def criterion_10():
    rng = np.random.default_rng(10)
    checked, bad, worst = 0, [], 0.0
    while checked < 100:
        K = int(rng.integers(3, 9))
        h = int(rng.integers(2, K))
        try:
            inst = make_problem(_random_sigma(rng, K), h)
        except Exception:
            continue
        checked += 1
        d = inst.distances
        ref_best = oracles.best_subset(d, h)
        if objective.best_subset(d, h) != ref_best or inst.optimal_subset != ref_best:
            bad.append(("best_subset", checked))
        for i in range(K):
            got = objective.suboptimality_ratio_R(d, inst.optimal_subset, i)
            want = oracles.suboptimality_ratio(d, ref_best, i)
            err = abs(got - want) / max(1.0, abs(want))
            worst = max(worst, err)
            if err > 1e-12:
                bad.append(("R", checked, i))
        # U on a noisy estimate over a random active set
        noisy = d * rng.uniform(0.5, 1.5, d.shape)
        noisy = (noisy + noisy.T) / 2
        m = int(rng.integers(h + 1, K + 1))
        active = sorted(rng.choice(K, m, replace=False).tolist())
        arms, u = objective.statistic_U_all(noisy, active, h)
        for i, v in zip(arms, u):
            want = oracles.statistic_u(noisy, active, i, h)
            err = 0.0 if v == want else abs(v - want) / max(1.0, abs(want))
            worst = max(worst, err)
            if err > 1e-12:
                bad.append(("U", checked, i))
    ok = not bad
    return ok, _line(10, "oracle equivalence", ok, f"{checked} instances, {len(bad)} mismatches, max rel err {worst:.2g}"), str(bad[:5])


def _strip_timing(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    col = rows[0].index("wall_time_micros")
    return [r[:col] + r[col + 1 :] for r in rows]


def criterion_11():
    lb = {"family": "lower_bound", "rhos": [0.9, 0.5, 0.3, 0.2], "h": 2}
    configs = [
        ("naive", {"m": 10}, lb),
        ("sr_c", {"n": 400}, lb),
        ("se_c", {"delta": 0.2}, lb),
        ("oracle_mode", {"n": 400, "base": "sr_c"}, lb),
        ("phi_star", {"rho0": 0.9, "rho1": 0.5, "t": 20, "truth": 1}, None),
    ]
    replay, parallel = 0, 0
    with tempfile.TemporaryDirectory() as tmp:
        for algo, params, spec in configs:
            outs = []
            for rep, workers in enumerate((1, 1, 2)):
                path = os.path.join(tmp, f"{algo}_{rep}.csv")
                cfg = harness.ExperimentConfig(algo, params, spec, trials=20, master_seed=1234, output_path=path)
                harness.run_experiment(cfg, workers=workers)
                outs.append(_strip_timing(path))
            replay += outs[0] == outs[1]
            parallel += outs[0] == outs[2]
    n = len(configs)
    ok = replay == n and parallel == n
    detail = f"same-seed replay {replay}/{n} identical, serial vs 2 workers {parallel}/{n} identical"
    return ok, _line(11, "determinism", ok, detail), ""


CRITERIA = [
    criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6,
    criterion_7, criterion_8, criterion_9, criterion_10, criterion_11,
]


@pytest.mark.parametrize("criterion", CRITERIA, ids=lambda f: f.__name__)
def test_acceptance(criterion, capsys):
    ok, line, report = criterion()
    with capsys.disabled():
        print("\n" + line)
    assert ok, report or line


if __name__ == "__main__":
    results = [c() for c in CRITERIA]
    for ok, line, _ in results:
        print(line)
    print(f"{sum(ok for ok, _, _ in results)}/{len(results)} criteria passed")
    sys.exit(0 if all(ok for ok, _, _ in results) else 1)
