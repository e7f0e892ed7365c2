"""Numerical checks of the concentration, divergence and error-rate bounds.

``verify_bounds(name)`` runs one suite at its documented scale and returns
a :class:`BoundReport`; each line of the report carries the measured
value, the bound it is compared to and a verdict.  Trial counts can be
scaled down for quick runs.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import objective, theory
from .errors import UnknownSuite
from .harness import ExperimentConfig, run_experiment
from .model import make_lower_bound_instance, prime_rho


@dataclass(frozen=True)
class CheckLine:
    name: str
    measured: float
    bound: float
    relation: str  # "<=" or ">="
    passed: bool

    def __str__(self):
        verdict = "PASS" if self.passed else "FAIL"
        return f"[{verdict}] {self.name}: {self.measured:.6g} {self.relation} {self.bound:.6g}"


@dataclass
class BoundReport:
    suite: str
    lines: list = field(default_factory=list)

    @property
    def passed(self):
        return all(line.passed for line in self.lines)

    def add(self, name, measured, bound, relation="<="):
        ok = measured <= bound if relation == "<=" else measured >= bound
        self.lines.append(CheckLine(name, float(measured), float(bound), relation, bool(ok)))

    def __str__(self):
        head = f"{self.suite}: {'PASS' if self.passed else 'FAIL'}"
        return "\n".join([head] + ["  " + str(line) for line in self.lines])


def _mc_slack(p, n, k=3.0):
    return k * math.sqrt(max(p * (1.0 - p), 0.0) / n)


# ---------------------------------------------------------------------------


def check_chi_square_tails(seed=0, ts=(1, 10, 100, 1000), thetas=(1.1, 2.0, 5.0)):
    rep = BoundReport("lemma5")
    for t in ts:
        for theta in thetas:
            b = theory.chi_square_tail_bounds(t, theta)
            lower, upper = theory.chi_square_exact_tails(t, theta)
            rep.add(f"P(Y/t<=1/theta) t={t} theta={theta}", lower, b.lower_bound)
            rep.add(f"P(Y/t>=theta) t={t} theta={theta} (sharp)", upper, b.upper_bound_sharp)
            rep.add(f"sharp <= common t={t} theta={theta}", b.upper_bound_sharp, b.upper_bound)
    return rep


def kl_grid(n_rho1=40, n_frac=25):
    """``n_rho1 * n_frac`` pairs ``1 > rho0 > rho1 >= 0``."""
    pairs = []
    for rho1 in np.linspace(0.0, 0.98, n_rho1):
        for frac in np.linspace(0.02, 0.98, n_frac):
            pairs.append((float(rho1 + frac * (1.0 - rho1)), float(rho1)))
    return pairs


def check_kl_sandwich(seed=0, pairs=None):
    rep = BoundReport("lemma7")
    pairs = kl_grid() if pairs is None else pairs
    worst_low, worst_high, worst_route = math.inf, 0.0, 0.0
    for rho0, rho1 in pairs:
        R = (1.0 - rho1) / (1.0 - rho0)
        a = objective.alpha(R)
        kl = theory.kl_bivariate_correlation(rho0, rho1)
        uni = theory.kl_univariate(rho0, 1 - rho0**2, rho1, 1 - rho1**2)
        gen = theory.kl_gaussian_general(
            [0.0, 0.0], [[1, rho0], [rho0, 1]], [0.0, 0.0], [[1, rho1], [rho1, 1]]
        )
        worst_low = min(worst_low, kl / a)
        worst_high = max(worst_high, kl / a)
        worst_route = max(worst_route, abs(kl - uni), abs(kl - gen), abs(uni - gen))
    rep.add(f"min KL/alpha(R) over {len(pairs)} pairs", worst_low, 1.0, ">=")
    rep.add(f"max KL/alpha(R) over {len(pairs)} pairs", worst_high, theory.KL_SANDWICH_CONSTANT)
    rep.add("max |closed form - univariate - general|", worst_route, 1e-10)
    return rep


def check_twin_divergence(seed=0, n_pairs=100, mc_samples=10**6, rhos=(0.9, 0.5)):
    rep = BoundReport("lemma8")
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_pairs):
        rho = float(rng.uniform(0.0, 0.9))
        rho_h = float(rng.uniform(rho, 0.95))
        if rho_h <= rho:
            continue
        rp = prime_rho(rho_h, rho)
        R = (1.0 - rho) / (1.0 - rho_h)
        worst = max(worst, abs((1.0 - rho) / (1.0 - rp) / R**2 - 1.0))
    rep.add(f"max relative error of (1-rho)/(1-rho') = R^2 over {n_pairs} pairs", worst, 1e-12)
    inst = make_lower_bound_instance(list(rhos), 2)
    closed = theory.kl_sigma_prime(inst)
    mc, se = theory.kl_sigma_prime_monte_carlo(inst, mc_samples, np.random.default_rng(seed + 1))
    rep.add(f"|MC - closed| / closed (closed={closed:.6f}, se={se:.2g})", abs(mc - closed) / closed, 0.02)
    rep.add("KL(Sigma', Sigma) / alpha(R_(h+1))", closed / objective.alpha(inst.ratios[2]), theory.TWIN_KL_CONSTANT)
    return rep


def check_phi_star(seed=0, rho0=0.9, rho1=0.5, t=20, trials=10_000):
    rep = BoundReport("phi_star")
    bound = theory.phi_star_risk_bound(rho0, rho1, t)
    slack = _mc_slack(bound, trials)
    for truth in (0, 1):
        cfg = ExperimentConfig(
            "phi_star",
            {"rho0": rho0, "rho1": rho1, "t": t, "truth": truth},
            trials=trials,
            master_seed=seed + truth,
        )
        err = run_experiment(cfg).summary["error_frequency"]
        rep.add(f"risk under rho{truth} (t={t}, {trials} trials)", err, bound + slack)
    return rep


def check_naive_bound(seed=0, rhos=(0.9, 0.5, 0.3), h=2, m=500, trials=1000, c=1.0 / 8.0):
    rep = BoundReport("thm1")
    inst = make_lower_bound_instance(list(rhos), h)
    K = inst.K
    bound = K * (K - 1) * math.exp(-c * m * objective.alpha(inst.ratios[h]))
    cfg = ExperimentConfig(
        "naive", {"m": m}, {"family": "lower_bound", "rhos": list(rhos), "h": h}, trials, seed
    )
    err = run_experiment(cfg).summary["error_frequency"]
    rep.add(f"naive error, m={m}, {trials} trials", err, bound)
    return rep


def check_two_point_bound(seed=0, rhos=(0.9, 0.5), h=2, m=50, trials=10_000, extra_ms=(1, 2)):
    """Max error over the instance and its twin must respect the two-point bound.

    At ``m = 50`` the bound is vanishingly small; the ``extra_ms`` lines
    repeat the comparison where it has teeth.
    """
    rep = BoundReport("thm2")
    inst = make_lower_bound_instance(list(rhos), h)
    kl = theory.kl_sigma_prime(inst)
    for k, mm in enumerate((m,) + tuple(extra_ms)):
        bound = theory.risk_lower_bound(kl, mm)
        errs = []
        for j, prime in enumerate((False, True)):
            spec = {"family": "lower_bound", "rhos": list(rhos), "h": h, "prime": prime}
            cfg = ExperimentConfig("naive", {"m": mm}, spec, trials, seed + 2 * k + j)
            errs.append(run_experiment(cfg).summary["error_frequency"])
        rep.add(
            f"max(err Sigma, err Sigma'), m={mm}, {trials} trials each",
            max(errs),
            bound - _mc_slack(bound, trials),
            ">=",
        )
    return rep


def sr_c_instance():
    # ratios {1, 1, 5, 5, 5, 5, 5, 5}
    return {"family": "lower_bound", "rhos": [0.9] + [0.5] * 6, "h": 2}


def sr_c_budget(instance):
    lb = objective.log_bar(instance.K, instance.h)
    return 40 * math.ceil(instance.complexity * lb)


def check_sr_c(seed=0, trials=400, max_error=0.05):
    rep = BoundReport("thm3")
    spec = sr_c_instance()
    inst = make_lower_bound_instance(spec["rhos"], spec["h"])
    n = sr_c_budget(inst)
    res = run_experiment(ExperimentConfig("sr_c", {"n": n}, spec, trials, seed))
    rep.add(f"SR-C error frequency, n={n}, {trials} trials", res.summary["error_frequency"], max_error)
    rep.add("max total_samples / n", res.summary["samples_max"] / n, 1.0)
    oracle = run_experiment(ExperimentConfig("oracle_mode", {"n": n, "base": "sr_c"}, spec, trials, seed))
    rep.add("oracle-mode SR-C errors", oracle.summary["errors"], 0)
    return rep


def se_c_instance():
    # rho_h = 0.98, ratios 5 (rho = 0.9) and 50 (rho = 0)
    return {"family": "lower_bound", "rhos": [0.98, 0.9] + [0.0] * 5, "h": 2}


def check_se_c(seed=0, trials=200, delta=0.1):
    rep = BoundReport("thm4")
    spec = se_c_instance()
    inst = make_lower_bound_instance(spec["rhos"], spec["h"])
    res = run_experiment(ExperimentConfig("se_c", {"delta": delta}, spec, trials, seed))
    success = 1.0 - res.summary["error_frequency"]
    rep.add(f"SE-C success rate, delta={delta}, {trials} trials", success, 1.0 - delta, ">=")
    per_arm = np.asarray(res.summary["per_arm_mean"])
    r = np.asarray(inst.ratios)
    near = per_arm[np.isclose(r, 5.0)].mean()
    far = per_arm[np.isclose(r, 50.0)].mean()
    rep.add("mean samples of R=50 arms / mean samples of R=5 arm", far / near, 0.5)
    return rep


SUITES = {
    "lemma5": check_chi_square_tails,
    "lemma7": check_kl_sandwich,
    "lemma8": check_twin_divergence,
    "thm1": check_naive_bound,
    "thm2": check_two_point_bound,
    "thm3": check_sr_c,
    "thm4": check_se_c,
    "phi_star": check_phi_star,
}


def verify_bounds(suite, seed=0, **scale):
    try:
        fn = SUITES[suite]
    except KeyError:
        raise UnknownSuite(f"unknown suite {suite!r}; choose from {sorted(SUITES)}") from None
    return fn(seed=seed, **scale)
