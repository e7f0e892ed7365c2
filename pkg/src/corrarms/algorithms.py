"""Decision procedures: the uniform-sampling policy, SR-C, SE-C and the two-arm test.

Every procedure talks to its data through a *source*, which decides what a
"reveal" returns.  :class:`GaussianSource` samples the instance and keeps
difference-based estimates; :class:`OracleSource` charges the same samples
but hands back the true distances, which isolates the decision logic from
estimation noise.
"""

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import objective
from .errors import BudgetTooSmall, CorrArmsError, MaxStepsExceeded, ParameterOrderViolated
from .estimators import PairStatsTable
from .model import Sampler

SE_C_SAMPLE_CAP = 10**8


@dataclass(frozen=True)
class RoundRecord:
    step: int  # round index k for SR-C, time step t for SE-C
    active: tuple
    rejected: tuple
    threshold: float


@dataclass
class AlgorithmOutcome:
    selected: tuple
    total_samples: int
    per_arm_samples: np.ndarray
    rounds: list = field(default_factory=list)
    steps: int = 0
    terminal_reason: str = "completed"


class GaussianSource:
    def __init__(self, instance, rng):
        matrix = getattr(instance, "matrix", instance)
        self.K = matrix.dim
        self.sampler = Sampler(matrix, rng)
        self.table = PairStatsTable(self.K)

    def observe(self, active, count=1):
        if count <= 0:
            return
        idx, x = self.sampler.draw(active, count)
        self.table.update_batch(idx, x)

    def distances(self):
        t = self.table
        with np.errstate(divide="ignore", invalid="ignore"):
            d = np.where(t.count > 0, t.sum_sq_diff / (2.0 * t.count), np.nan)
        np.fill_diagonal(d, 0.0)
        return d

    @property
    def samples(self):
        return self.sampler.samples

    @property
    def per_arm(self):
        return self.sampler.per_arm.copy()

    @property
    def t(self):
        return self.sampler.t


class OracleSource:
    def __init__(self, instance):
        self.K = instance.K
        self._d = instance.distances
        self.t = 0
        self.samples = 0
        self._per_arm = np.zeros(self.K, dtype=np.int64)

    def observe(self, active, count=1):
        if count <= 0:
            return
        idx = np.asarray(sorted(active), dtype=np.int64)
        self.t += count
        self.samples += count * idx.size
        self._per_arm[idx] += count

    def distances(self):
        return self._d

    @property
    def per_arm(self):
        return self._per_arm.copy()


def make_source(instance, rng=None, oracle=False):
    if oracle:
        return OracleSource(instance)
    if rng is None:
        raise CorrArmsError("a random generator is required unless oracle=True")
    return GaussianSource(instance, rng)


def _outcome(source, selected, rounds, reason="completed"):
    return AlgorithmOutcome(
        selected=tuple(sorted(int(a) for a in selected)),
        total_samples=int(source.samples),
        per_arm_samples=source.per_arm,
        rounds=rounds,
        steps=int(source.t),
        terminal_reason=reason,
    )


def _check_h(K, h):
    if not 2 <= h < K:
        raise CorrArmsError(f"need 2 <= h < K, got h={h}, K={K}")


# ---------------------------------------------------------------------------
# non-adaptive


def naive_policy(source, m, h, cap=objective.ENUMERATION_CAP):
    """Reveal every arm ``m`` times and return the empirically best subset."""
    if m < 1:
        raise CorrArmsError(f"need m >= 1, got {m}")
    if not 2 <= h <= source.K:
        raise CorrArmsError(f"need 2 <= h <= K, got h={h}")
    source.observe(range(source.K), m)
    selected = objective.best_subset(source.distances(), h, cap)
    return _outcome(source, selected, [])


# ---------------------------------------------------------------------------
# fixed budget


def sr_c_min_budget(K, h):
    return K + 1 + math.ceil(objective.log_bar(K, h) * (h + 1))


def sr_c_schedule(n, K, h):
    """Cumulative per-arm counts ``n_1 <= ... <= n_{K-h}``."""
    lb = objective.log_bar(K, h)
    return [math.ceil((n - K - 1) / (lb * (K + 1 - k))) for k in range(1, K - h + 1)]


def sr_c(source, n, h, cap=objective.U_ENUMERATION_CAP):
    """Successive rejects on a budget of ``n`` scalar samples.

    Round ``k`` tops every surviving arm up to ``n_k`` joint reveals and then
    rejects the arm with the largest max-min statistic.  Among tied
    maxima the arm with the largest index goes.
    """
    K = source.K
    _check_h(K, h)
    need = sr_c_min_budget(K, h)
    if n < need:
        raise BudgetTooSmall(f"budget {n} below the minimum {need} for K={K}, h={h}")
    active = list(range(K))
    rounds = []
    done = 0
    for k, n_k in enumerate(sr_c_schedule(n, K, h), start=1):
        source.observe(active, n_k - done)
        done = n_k
        arms, u = objective.statistic_U_all(source.distances(), active, h, cap)
        top = u.max()
        loser = max(a for a, v in zip(arms, u) if v == top)
        rounds.append(RoundRecord(k, tuple(active), (loser,), float(top)))
        active.remove(loser)
    return _outcome(source, active, rounds)


# ---------------------------------------------------------------------------
# fixed confidence


def se_c_threshold(t, K, delta):
    """``alpha_inv(g_t)^2`` with ``g_t = log(2 K^2 t^2 / delta) / t``."""
    g = math.log(2.0 * K * K * t * t / delta) / t
    return objective.alpha_inv(g) ** 2


def se_c(source, delta, h, max_steps=None, cap=objective.U_ENUMERATION_CAP):
    """Successive elimination at confidence ``1 - delta``.

    Every arm whose statistic reaches the current threshold is dropped.  If
    that would leave fewer than ``h`` arms, the would-be-eliminated arms with
    the smallest statistic (then smallest index) are spared.  ``max_steps``
    caps the number of time steps; the default allows 10^8 samples at full
    width.
    """
    K = source.K
    _check_h(K, h)
    if not 0.0 < delta < 1.0:
        raise CorrArmsError(f"need 0 < delta < 1, got {delta}")
    if max_steps is None:
        max_steps = SE_C_SAMPLE_CAP // K
    if max_steps < 1:
        raise CorrArmsError("max_steps must be positive")
    active = list(range(K))
    rounds = []
    t = 1
    source.observe(active, 1)
    while len(active) > h:
        arms, u = objective.statistic_U_all(source.distances(), active, h, cap)
        thr = se_c_threshold(t, K, delta)
        out = [(float(v), a) for a, v in zip(arms, u) if v >= thr]
        spare = h - (len(active) - len(out))
        if spare > 0:
            out = sorted(out)[spare:]
        if out:
            gone = tuple(sorted(a for _, a in out))
            rounds.append(RoundRecord(t, tuple(active), gone, thr))
            active = [a for a in active if a not in gone]
        if t >= max_steps:
            partial = _outcome(source, active, rounds, reason="max_steps")
            raise MaxStepsExceeded(f"SE-C still has {len(active)} arms after {t} steps", partial)
        source.observe(active, 1)
        t += 1
    return _outcome(source, active, rounds)


# ---------------------------------------------------------------------------
# two-arm test


def _test_threshold(rho0, rho1):
    if not (1.0 > rho0 > rho1 >= 0.0):
        raise ParameterOrderViolated(f"need 1 > rho0 > rho1 >= 0, got {rho0}, {rho1}")
    R = (1.0 - rho1) / (1.0 - rho0)
    return (1.0 - rho0) * math.sqrt(R)


def phi_star_decision(distance, rho0, rho1):
    """0 if the estimated distance ``1 - sigma_hat`` is at most ``(1 - rho0) sqrt(R)``, else 1."""
    return 0 if distance <= _test_threshold(rho0, rho1) else 1


def phi_star_test(samples, rho0, rho1):
    """Decide between correlation ``rho0`` (verdict 0) and ``rho1`` (verdict 1).

    ``samples`` is a ``(t, 2)`` array of paired observations.
    """
    x = np.asarray(samples, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != 2 or x.shape[0] < 1:
        raise CorrArmsError(f"expected a (t, 2) array of pairs, got shape {x.shape}")
    distance = float(np.mean((x[:, 0] - x[:, 1]) ** 2) / 2.0)
    return phi_star_decision(distance, rho0, rho1)
