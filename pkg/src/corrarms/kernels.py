"""Hot inner loops, in two interchangeable flavours.

Each kernel exists as a numba ``@njit`` function (suffix ``_nb``) and a
vectorised pure-numpy function (suffix ``_np``).  The public names
(``subset_score_table``, ``max_min_ratios``, ``accumulate_pair_stats``)
are bound to one of them at import time:

* ``CORRARMS_NUMBA=0`` (or ``false``/``off``/``no``) forces numpy;
* otherwise numba is used when it imports cleanly.

The score-table and max-min kernels perform the same floating point
operations in the same order in both flavours, so their outputs are
bit-identical.  The pair-statistics kernel sums in a different order and
agrees only to rounding.
"""

import os

import numpy as np

_FLAG = os.environ.get("CORRARMS_NUMBA", "1").strip().lower()
_WANT_NUMBA = _FLAG not in ("0", "false", "off", "no")

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a hard dependency in practice
    numba = None
    HAVE_NUMBA = False

USE_NUMBA = _WANT_NUMBA and HAVE_NUMBA
BACKEND = "numba" if USE_NUMBA else "numpy"


def _njit(func):
    if not HAVE_NUMBA:
        return func
    return numba.njit(cache=True, nogil=True)(func)


# ---------------------------------------------------------------------------
# subset scores: score[mask] = sum over ordered pairs j != l inside mask of d[j, l]


def subset_score_table_np(d):
    d = np.ascontiguousarray(d, dtype=np.float64)
    m = d.shape[0]
    n_masks = 1 << m
    masks = np.arange(n_masks, dtype=np.int64)
    scores = np.zeros(n_masks, dtype=np.float64)
    # masks whose lowest set bit is b only depend on masks with lowest bit > b,
    # so processing b from high to low respects the dependency order.
    lowbit = np.full(n_masks, -1, dtype=np.int64)
    for b in range(m - 1, -1, -1):
        lowbit[(masks >> b) & 1 == 1] = b
    for b in range(m - 1, -1, -1):
        sel = masks[lowbit == b]
        rest = sel ^ (1 << b)
        acc = np.zeros(sel.shape[0], dtype=np.float64)
        for j in range(b + 1, m):
            hit = ((rest >> j) & 1).astype(bool)
            acc[hit] = acc[hit] + d[b, j]
        scores[sel] = scores[rest] + 2.0 * acc
    return scores


def _subset_score_table_py(d):
    m = d.shape[0]
    n_masks = 1 << m
    scores = np.zeros(n_masks, dtype=np.float64)
    for mask in range(1, n_masks):
        b = 0
        while not (mask >> b) & 1:
            b += 1
        rest = mask ^ (1 << b)
        acc = 0.0
        for j in range(b + 1, m):
            if (rest >> j) & 1:
                acc += d[b, j]
        scores[mask] = scores[rest] + 2.0 * acc
    return scores


subset_score_table_nb = _njit(_subset_score_table_py)


# ---------------------------------------------------------------------------
# U_i = max_A min_{B containing i} D(A, B) over size-h masks A, B


def _ratio_np(num, den):
    num = np.maximum(num, 0.0)
    den = np.maximum(den, 0.0)
    out = np.empty_like(num)
    zero_den = den == 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        np.divide(num, den, out=out)
    out[zero_den & (num == 0.0)] = 1.0
    out[zero_den & (num > 0.0)] = np.inf
    return out


def max_min_ratios_np(scores, masks, m):
    masks = np.asarray(masks, dtype=np.int64)
    inter = masks[:, None] & masks[None, :]
    s_inter = scores[inter]
    s_sub = scores[masks]
    num = s_sub[None, :] - s_inter  # rows index A, columns index B
    den = s_sub[:, None] - s_inter
    ratios = _ratio_np(num, den)
    member = ((masks[:, None] >> np.arange(m)[None, :]) & 1).astype(bool)
    u = np.full(m, -np.inf)
    for i in range(m):
        u[i] = ratios[:, member[:, i]].min(axis=1).max()
    return u


def _max_min_ratios_py(scores, masks, m):
    n = masks.shape[0]
    u = np.full(m, -np.inf)
    rowmin = np.empty(m)
    for a in range(n):
        ma = masks[a]
        sa = scores[ma]
        for i in range(m):
            rowmin[i] = np.inf
        for b in range(n):
            mb = masks[b]
            si = scores[ma & mb]
            num = scores[mb] - si
            den = sa - si
            if num < 0.0:
                num = 0.0
            if den < 0.0:
                den = 0.0
            if den == 0.0:
                r = 1.0 if num == 0.0 else np.inf
            else:
                r = num / den
            for i in range(m):
                if (mb >> i) & 1 and r < rowmin[i]:
                    rowmin[i] = r
        for i in range(m):
            if rowmin[i] > u[i]:
                u[i] = rowmin[i]
    return u


max_min_ratios_nb = _njit(_max_min_ratios_py)


# ---------------------------------------------------------------------------
# streaming pair statistics, updated in place for a batch of simultaneous reveals


def accumulate_pair_stats_np(x, idx, sum_sq_diff, sum_prod, count):
    x = np.asarray(x, dtype=np.float64)
    if x.shape[0] == 0 or idx.shape[0] < 2:
        return
    diff = x[:, :, None] - x[:, None, :]
    ssd = np.einsum("tjl,tjl->jl", diff, diff)
    sp = np.einsum("tj,tl->jl", x, x)
    block = np.ix_(idx, idx)
    off = ~np.eye(idx.shape[0], dtype=bool)
    sum_sq_diff[block] += np.where(off, ssd, 0.0)
    sum_prod[block] += np.where(off, sp, 0.0)
    count[block] += np.where(off, x.shape[0], 0).astype(count.dtype)


def _accumulate_pair_stats_py(x, idx, sum_sq_diff, sum_prod, count):
    n_t = x.shape[0]
    a = idx.shape[0]
    for p in range(a):
        j = idx[p]
        for q in range(p + 1, a):
            l = idx[q]
            ssd = 0.0
            sp = 0.0
            for t in range(n_t):
                diff = x[t, p] - x[t, q]
                ssd += diff * diff
                sp += x[t, p] * x[t, q]
            sum_sq_diff[j, l] += ssd
            sum_sq_diff[l, j] = sum_sq_diff[j, l]
            sum_prod[j, l] += sp
            sum_prod[l, j] = sum_prod[j, l]
            count[j, l] += n_t
            count[l, j] = count[j, l]


accumulate_pair_stats_nb = _njit(_accumulate_pair_stats_py)


if USE_NUMBA:
    subset_score_table = subset_score_table_nb
    max_min_ratios = max_min_ratios_nb
    accumulate_pair_stats = accumulate_pair_stats_nb
else:
    subset_score_table = subset_score_table_np
    max_min_ratios = max_min_ratios_np
    accumulate_pair_stats = accumulate_pair_stats_np
