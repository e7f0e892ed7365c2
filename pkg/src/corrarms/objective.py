"""Subset scores, suboptimality ratios and the max-min statistic.

Distances are ``d[j, l] = 1 - sigma_jl`` (true or estimated).  All pair
sums run over *ordered* pairs, so every unordered pair contributes twice.
Subsets are passed as any iterable of 0-based arm indices and returned as
sorted tuples.
"""

import math
from functools import lru_cache
from itertools import combinations

import numpy as np

from . import kernels
from .errors import (
    DegenerateInstance,
    DomainError,
    EnumerationCapExceeded,
    IndexOutOfRange,
    NonUniqueOptimum,
    SizeMismatch,
    SubsetTooSmall,
)

ENUMERATION_CAP = 10**6
U_ENUMERATION_CAP = 10**7
# the max-min kernel tabulates every submask of the active set
MAX_TABLE_ARMS = 20


def distance_matrix(sigma):
    """Return ``1 - sigma`` with an exact zero diagonal."""
    d = 1.0 - np.asarray(sigma, dtype=np.float64)
    np.fill_diagonal(d, 0.0)
    return d


def _subset(S):
    return tuple(sorted(int(s) for s in S))


def subset_score(d, S):
    """Sum of ``d`` over ordered pairs of distinct arms in ``S``."""
    S = _subset(S)
    if len(S) < 2:
        raise SubsetTooSmall(f"subset needs at least 2 arms, got {len(S)}")
    total = 0.0
    for j in S:
        for l in S:
            if j != l:
                total += d[j, l]
    return total


def _check_cap(count, cap, what):
    if count > cap:
        raise EnumerationCapExceeded(f"{what}: {count} candidates exceeds cap {cap}")


def _all_scores(d, h, cap):
    d = np.asarray(d, dtype=np.float64)
    K = d.shape[0]
    if not 2 <= h <= K:
        raise SubsetTooSmall(f"need 2 <= h <= K, got h={h}, K={K}")
    _check_cap(math.comb(K, h), cap, "best_subset")
    combos = _combos(K, h)
    scores = np.zeros(combos.shape[0])
    for a in range(h):
        for b in range(h):
            if a != b:
                scores += d[combos[:, a], combos[:, b]]
    return combos, scores


def best_subset(d, h, cap=ENUMERATION_CAP):
    """Exhaustive arg-min of :func:`subset_score` over size-``h`` subsets.

    Ties go to the lexicographically smallest index tuple.
    """
    combos, scores = _all_scores(d, h, cap)
    return tuple(int(i) for i in combos[int(np.argmin(scores))])


def unique_best_subset(d, h, cap=ENUMERATION_CAP, rtol=1e-12):
    """Like :func:`best_subset` but raise if the minimum is attained twice."""
    combos, scores = _all_scores(d, h, cap)
    floor = scores.min()
    close = scores <= floor + rtol * max(1.0, abs(floor))
    if np.count_nonzero(close) > 1:
        tied = [tuple(int(v) for v in c) for c in combos[close]]
        raise NonUniqueOptimum(f"optimal subset is not unique: {tied[:4]}")
    return tuple(int(i) for i in combos[int(np.argmin(scores))])


@lru_cache(maxsize=64)
def _combos(K, h):
    out = np.array(list(combinations(range(K), h)), dtype=np.int64).reshape(-1, h)
    out.setflags(write=False)
    return out


def _ratio(num, den):
    if den == 0.0:
        return 1.0 if num == 0.0 else math.inf
    return num / den


def ratio_D(d, A, B):
    """Suboptimality ratio of ``B`` with respect to ``A``.

    Numerator sums ``d`` over ordered pairs of ``B`` not both in ``A & B``;
    the denominator does the same for ``A``.  ``0/0 = 1`` and ``x/0 = inf``.
    """
    A, B = _subset(A), _subset(B)
    if len(A) != len(B):
        raise SizeMismatch(f"|A|={len(A)} but |B|={len(B)}")
    common = set(A) & set(B)
    num = sum(d[j, l] for j in B for l in B if j != l and not (j in common and l in common))
    den = sum(d[j, l] for j in A for l in A if j != l and not (j in common and l in common))
    return _ratio(float(num), float(den))


def suboptimality_ratio_R(d, optimal, i, cap=ENUMERATION_CAP):
    """``min over B containing i, |B| = h`` of ``ratio_D(d, optimal, B)``."""
    optimal = _subset(optimal)
    h = len(optimal)
    K = d.shape[0]
    others = [a for a in range(K) if a != i]
    _check_cap(math.comb(K - 1, h - 1), cap, "suboptimality_ratio_R")
    best = math.inf
    for rest in combinations(others, h - 1):
        r = ratio_D(d, optimal, (i,) + rest)
        if r < best:
            best = r
    return best


def all_ratios(d, optimal, cap=ENUMERATION_CAP):
    """``R_i`` for every arm, as a length-K array."""
    return np.array([suboptimality_ratio_R(d, optimal, i, cap) for i in range(d.shape[0])])


# ---------------------------------------------------------------------------
# rate functions


def _alpha_scalar(theta):
    if theta == math.inf:
        return math.inf
    y = theta - 1.0
    return 0.5 * (math.log1p(y) - y / theta)


def alpha(theta):
    """``(log theta - 1 + 1/theta) / 2`` for ``theta >= 1``; vectorises over arrays."""
    if np.ndim(theta) == 0:
        theta = float(theta)
        if not theta >= 1.0:
            raise DomainError(f"alpha needs theta >= 1, got {theta}")
        return _alpha_scalar(theta)
    arr = np.asarray(theta, dtype=np.float64)
    if np.any(~(arr >= 1.0)):
        raise DomainError("alpha needs theta >= 1")
    return np.array([_alpha_scalar(v) for v in arr.ravel()]).reshape(arr.shape)


def beta(theta):
    """``theta - 1 - log theta`` for ``theta >= 1``."""
    if np.ndim(theta) == 0:
        theta = float(theta)
        if not theta >= 1.0:
            raise DomainError(f"beta needs theta >= 1, got {theta}")
        y = theta - 1.0
        return y - math.log1p(y)
    arr = np.asarray(theta, dtype=np.float64)
    if np.any(~(arr >= 1.0)):
        raise DomainError("beta needs theta >= 1")
    y = arr - 1.0
    return y - np.log1p(y)


def alpha_inv(y, tol=1e-12):
    """Unique ``theta >= 1`` with ``alpha(theta) == y``, by bisection."""
    y = float(y)
    if not y >= 0.0:
        raise DomainError(f"alpha_inv needs y >= 0, got {y}")
    if y == 0.0:
        return 1.0
    if y == math.inf:
        return math.inf
    lo, hi = 1.0, 2.0
    while _alpha_scalar(hi) < y:
        lo, hi = hi, 2.0 * hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if _alpha_scalar(mid) < y:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def log_bar(K, h):
    """``1 + sum_{i=h+1}^{K} 1/i``, the SR-C budget normaliser."""
    return 1.0 + sum(1.0 / i for i in range(h + 1, K + 1))


def hardness(ratios, h):
    """H_C from the per-arm ratios (any order)."""
    r = np.sort(np.asarray(ratios, dtype=np.float64))
    sub = r[h:]
    if sub.size == 0 or np.any(sub <= 1.0):
        raise DegenerateInstance("every suboptimal ratio must exceed 1")
    inv = [0.0 if v == math.inf else 1.0 / _alpha_scalar(v) for v in sub]
    return h * inv[0] + sum(inv)


def complexity_H_C(instance):
    return hardness(instance.ratios, instance.h)


# ---------------------------------------------------------------------------
# max-min statistic


@lru_cache(maxsize=256)
def _masks(m, h):
    out = np.array([sum(1 << i for i in c) for c in combinations(range(m), h)], dtype=np.int64)
    out.setflags(write=False)
    return out


def statistic_U_all(d, S, h, cap=U_ENUMERATION_CAP):
    """U for every arm of the active set ``S``.

    Returns ``(arms, values)`` with ``arms`` the sorted active set and
    ``values[k]`` the statistic of ``arms[k]``.
    """
    arms = _subset(S)
    m = len(arms)
    if m < h + 1:
        raise SubsetTooSmall(f"active set of {m} arms cannot reject at h={h}")
    _check_cap(math.comb(m, h) * math.comb(m - 1, h - 1), cap, "statistic_U")
    if m > MAX_TABLE_ARMS:
        raise EnumerationCapExceeded(f"statistic_U supports at most {MAX_TABLE_ARMS} active arms")
    idx = np.array(arms, dtype=np.int64)
    sub = np.ascontiguousarray(np.asarray(d, dtype=np.float64)[np.ix_(idx, idx)])
    scores = kernels.subset_score_table(sub)
    values = kernels.max_min_ratios(scores, _masks(m, h), m)
    return arms, values


def statistic_U(d, S, i, h, cap=U_ENUMERATION_CAP):
    arms, values = statistic_U_all(d, S, h, cap)
    if i not in arms:
        raise IndexOutOfRange(f"arm {i} is not in the active set")
    return float(values[arms.index(i)])
