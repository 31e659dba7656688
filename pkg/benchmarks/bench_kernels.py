"""Time the numba kernels against their numpy references.

    python benchmarks/bench_kernels.py [--size 200000] [--repeat 5]
"""

import argparse
import timeit

import numpy as np

from varmark import _accel


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--size", type=int, default=200_000)
    ap.add_argument("--vocab", type=int, default=2_000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    rng = np.random.default_rng(0)

    # skewed ids, roughly like code tokens
    ids = np.minimum(rng.zipf(1.3, size=args.size), args.vocab) - 1
    base = args.vocab + 1
    tri = _accel.count_table(_accel.ngram_keys(ids, 3, base))
    bi = _accel.count_table(_accel.ngram_keys(ids[:-1], 2, base))
    query = np.minimum(rng.zipf(1.3, size=args.size), args.vocab) - 1

    cases = {
        "bigram_counts": (
            lambda: _accel.bigram_counts_np(ids[:-1], ids[1:], args.vocab),
            lambda: _accel.bigram_counts(ids[:-1], ids[1:], args.vocab),
        ),
        "trigram_log2prob": (
            lambda: _accel.trigram_log2prob_np(query, *tri, *bi, args.vocab, base),
            lambda: _accel.trigram_log2prob(query, *tri, *bi, args.vocab, base),
        ),
    }
    print(f"numba active: {_accel.USING_NUMBA}  (n={args.size})")
    print(f"{'kernel':<18}{'numpy ms':>12}{'numba ms':>12}{'speedup':>10}  same")
    for name, (ref, fast) in cases.items():
        fast()  # compile outside the timed region
        same = np.allclose(ref(), fast())
        t_ref = min(timeit.repeat(ref, number=1, repeat=args.repeat)) * 1e3
        t_fast = min(timeit.repeat(fast, number=1, repeat=args.repeat)) * 1e3
        print(f"{name:<18}{t_ref:>12.2f}{t_fast:>12.2f}{t_ref / t_fast:>10.1f}x  {same}")


if __name__ == "__main__":
    main()
