"""Time the numba and pure-numpy variants of each hot kernel.

    python benchmarks/bench_kernels.py [--repeat N]

Both variants are imported directly, so the CORRARMS_NUMBA flag does not
matter here.  Outputs are compared before timing.
"""

import argparse
import timeit

import numpy as np

from corrarms import kernels, objective


def distances(m, seed=0):
    rng = np.random.default_rng(seed)
    a = rng.uniform(0.0, 1.0, (m, m))
    d = (a + a.T) / 2
    np.fill_diagonal(d, 0.0)
    return d


def cases():
    for m in (10, 14, 18):
        d = distances(m)
        yield f"subset_score_table m={m}", kernels.subset_score_table_np, kernels.subset_score_table_nb, (d,)
    for m, h in ((8, 2), (10, 3), (12, 3)):
        d = distances(m)
        scores = kernels.subset_score_table_np(d)
        masks = objective._masks(m, h)
        yield (
            f"max_min_ratios m={m} h={h}",
            kernels.max_min_ratios_np,
            kernels.max_min_ratios_nb,
            (scores, masks, m),
        )
    for t, k in ((1, 8), (1000, 8), (1000, 20)):
        x = np.random.default_rng(1).standard_normal((t, k))
        idx = np.arange(k, dtype=np.int64)

        def make(fn, x=x, idx=idx, k=k):
            def run():
                fn(x, idx, np.zeros((k, k)), np.zeros((k, k)), np.zeros((k, k), dtype=np.int64))

            return run

        yield f"accumulate_pair_stats t={t} k={k}", make(kernels.accumulate_pair_stats_np), make(
            kernels.accumulate_pair_stats_nb
        ), ()


def best_time(fn, args, repeat):
    timer = timeit.Timer(lambda: fn(*args))
    number, _ = timer.autorange()
    return min(timer.repeat(repeat, number)) / number


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    if not kernels.HAVE_NUMBA:
        raise SystemExit("numba is not installed")
    print(f"{'kernel':<36}{'numpy':>12}{'numba':>12}{'speedup':>10}")
    for name, np_fn, nb_fn, fargs in cases():
        a, b = np_fn(*fargs), nb_fn(*fargs)  # also compiles the numba variant
        if a is not None and not np.array_equal(a, b):
            raise SystemExit(f"{name}: variants disagree")
        t_np = best_time(np_fn, fargs, args.repeat)
        t_nb = best_time(nb_fn, fargs, args.repeat)
        print(f"{name:<36}{t_np * 1e6:>10.1f}us{t_nb * 1e6:>10.1f}us{t_np / t_nb:>9.1f}x")


if __name__ == "__main__":
    main()
