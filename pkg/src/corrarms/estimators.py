"""Streaming pair statistics and the two correlation estimators."""

import numpy as np

from . import kernels
from .errors import IndexOutOfRange, NoObservations


class PairStatsTable:
    """Per-pair sufficient statistics over simultaneous reveals.

    For every unordered pair ``{j, l}`` the table keeps the number of time
    steps on which both arms were revealed, the running sum of
    ``(x_j - x_l)**2`` and the running sum of ``x_j * x_l``.  All three are
    stored as symmetric K x K arrays with an unused diagonal.
    """

    def __init__(self, dim):
        self.dim = int(dim)
        self.count = np.zeros((self.dim, self.dim), dtype=np.int64)
        self.sum_sq_diff = np.zeros((self.dim, self.dim))
        self.sum_prod = np.zeros((self.dim, self.dim))

    def update_batch(self, idx, values):
        """Add ``values[t, k]`` observed on arm ``idx[k]`` at each of ``len(values)`` steps."""
        idx = np.ascontiguousarray(idx, dtype=np.int64)
        if idx.size and (idx.min() < 0 or idx.max() >= self.dim):
            raise IndexOutOfRange(f"arm indices must lie in [0, {self.dim})")
        if np.unique(idx).size != idx.size:
            raise ValueError("duplicate arm in a single reveal")
        x = np.ascontiguousarray(values, dtype=np.float64).reshape(-1, idx.size)
        kernels.accumulate_pair_stats(x, idx, self.sum_sq_diff, self.sum_prod, self.count)
        return self

    def update(self, observation):
        """Add one partial observation given as ``{arm: value}``."""
        if not observation:
            return self
        arms = sorted(observation)
        return self.update_batch(arms, [[observation[a] for a in arms]])

    def _count(self, j, l):
        c = int(self.count[j, l])
        if j == l or c == 0:
            raise NoObservations(f"no simultaneous observations of arms {j} and {l}")
        return c

    def distances(self, arms=None):
        """Estimated ``1 - sigma_hat`` for every pair among ``arms`` (default: all).

        Computed directly as ``sum_sq_diff / (2 count)`` so perfectly
        correlated arms give exactly zero rather than a rounding residue of
        ``1 - (1 - x)``.
        """
        if arms is None:
            arms = range(self.dim)
        idx = np.asarray(list(arms), dtype=np.int64)
        c = self.count[np.ix_(idx, idx)]
        off = ~np.eye(idx.size, dtype=bool)
        if np.any(c[off] == 0):
            raise NoObservations("some pair among the requested arms was never observed jointly")
        out = np.zeros((idx.size, idx.size))
        out[off] = self.sum_sq_diff[np.ix_(idx, idx)][off] / (2.0 * c[off])
        return out


def diff_estimate(table, j, l):
    """Difference-based estimate ``1 - mean((x_j - x_l)^2) / 2``."""
    c = table._count(j, l)
    return 1.0 - table.sum_sq_diff[j, l] / (2.0 * c)


def classical_estimate(table, j, l):
    """Product-moment estimate ``mean(x_j * x_l)``; not clamped to [0, 1]."""
    c = table._count(j, l)
    return table.sum_prod[j, l] / c


def diff_estimator(x, y, axis=-1):
    """Vectorised difference-based estimator over paired sample arrays."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    return 1.0 - np.mean((x - y) ** 2, axis=axis) / 2.0


def classical_estimator(x, y, axis=-1):
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    return np.mean(x * y, axis=axis)


def paired_samples(rho, t, replications, rng):
    """``replications`` independent runs of ``t`` draws from a unit-variance pair with correlation ``rho``.

    Returns two arrays of shape ``(replications, t)``.
    """
    z1 = rng.standard_normal((replications, t))
    z2 = rng.standard_normal((replications, t))
    x = z1
    y = rho * z1 + np.sqrt(max(0.0, 1.0 - rho * rho)) * z2
    return x, y
