"""Counting and n-gram scoring kernels.

Each kernel has a numba version and a numpy version with identical results.
Set ``VARMARK_DISABLE_NUMBA=1`` to force the numpy path.
"""

from __future__ import annotations

import os

import numpy as np

DISABLE_ENV = "VARMARK_DISABLE_NUMBA"

try:  # pragma: no cover - depends on the environment
    if os.environ.get(DISABLE_ENV, "") not in ("", "0"):
        raise ImportError
    from numba import njit

    USING_NUMBA = True
except ImportError:  # pragma: no cover
    USING_NUMBA = False


# numpy reference implementations


def bigram_counts_np(prev: np.ndarray, nxt: np.ndarray, size: int) -> np.ndarray:
    out = np.zeros((size, size), dtype=np.int64)
    np.add.at(out, (prev, nxt), 1)
    return out


def ngram_keys(ids: np.ndarray, n: int, base: int) -> np.ndarray:
    """Integer key of every n-gram window of ``ids`` (mixed radix ``base``)."""
    ids = np.asarray(ids, dtype=np.int64)
    if len(ids) < n:
        return np.zeros(0, dtype=np.int64)
    keys = np.zeros(len(ids) - n + 1, dtype=np.int64)
    for j in range(n):
        keys = keys * base + ids[j : len(ids) - n + 1 + j]
    return keys


def count_table(keys: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    uniq, counts = np.unique(keys, return_counts=True)
    return uniq.astype(np.int64), counts.astype(np.int64)


def lookup_np(table_keys: np.ndarray, table_counts: np.ndarray, queries: np.ndarray) -> np.ndarray:
    if len(table_keys) == 0:
        return np.zeros(len(queries), dtype=np.int64)
    pos = np.searchsorted(table_keys, queries)
    pos = np.minimum(pos, len(table_keys) - 1)
    hit = table_keys[pos] == queries
    return np.where(hit, table_counts[pos], 0)


def trigram_log2prob_np(
    ids: np.ndarray, tri_keys, tri_counts, bi_keys, bi_counts, vocab_size: int, base: int
) -> np.ndarray:
    """-log2 P(w_i | w_{i-2}, w_{i-1}) with add-one smoothing, for i >= 2."""
    tri = ngram_keys(ids, 3, base)
    if len(tri) == 0:
        return np.zeros(0)
    bi = ngram_keys(ids[:-1], 2, base)
    num = lookup_np(tri_keys, tri_counts, tri) + 1.0
    den = lookup_np(bi_keys, bi_counts, bi) + float(vocab_size)
    return -np.log2(num / den)


# numba versions

if USING_NUMBA:

    @njit(cache=True)
    def _bigram_counts_nb(prev, nxt, size):  # pragma: no cover - compiled
        out = np.zeros((size, size), dtype=np.int64)
        for i in range(prev.shape[0]):
            out[prev[i], nxt[i]] += 1
        return out

    @njit(cache=True)
    def _find(keys, q):  # pragma: no cover - compiled
        lo, hi = 0, keys.shape[0]
        while lo < hi:
            mid = (lo + hi) // 2
            if keys[mid] < q:
                lo = mid + 1
            else:
                hi = mid
        return lo

    @njit(cache=True)
    def _trigram_nb(ids, tri_keys, tri_counts, bi_keys, bi_counts, vocab_size, base):  # pragma: no cover
        n = ids.shape[0]
        if n < 3:
            return np.zeros(0)
        out = np.empty(n - 2)
        for i in range(2, n):
            bk = ids[i - 2] * base + ids[i - 1]
            tk = bk * base + ids[i]
            num = 1.0
            p = _find(tri_keys, tk)
            if p < tri_keys.shape[0] and tri_keys[p] == tk:
                num += tri_counts[p]
            den = float(vocab_size)
            p = _find(bi_keys, bk)
            if p < bi_keys.shape[0] and bi_keys[p] == bk:
                den += bi_counts[p]
            out[i - 2] = -np.log2(num / den)
        return out


def bigram_counts(prev: np.ndarray, nxt: np.ndarray, size: int) -> np.ndarray:
    prev = np.ascontiguousarray(prev, dtype=np.int64)
    nxt = np.ascontiguousarray(nxt, dtype=np.int64)
    if USING_NUMBA:
        return _bigram_counts_nb(prev, nxt, size)
    return bigram_counts_np(prev, nxt, size)


def trigram_log2prob(ids, tri_keys, tri_counts, bi_keys, bi_counts, vocab_size: int, base: int) -> np.ndarray:
    ids = np.ascontiguousarray(ids, dtype=np.int64)
    if USING_NUMBA:
        return _trigram_nb(ids, tri_keys, tri_counts, bi_keys, bi_counts, vocab_size, base)
    return trigram_log2prob_np(ids, tri_keys, tri_counts, bi_keys, bi_counts, vocab_size, base)
