"""Jitted filter kernels for the throughput benchmark.

These evaluate exactly the same hash/index/fingerprint arithmetic as the
pure-Python filter (same constants, imported from hashing), restricted to
items that are whole 8-byte words.  test_bench asserts outcome equivalence
against CuckooFilter.lookup, which keeps the benchmark honest about
measuring the real data structure.

The lookup kernel always reads both candidate buckets with branchless slot
comparison; the only data-dependent branch is the gather of positive
results, which is what a client does with a hit.  That branch is what the
f_p sweep exercises.
"""

import numpy as np
from numba import int64, njit, uint64

from . import hashing

GOLDEN = uint64(hashing.GOLDEN)
MIX_P2 = uint64(hashing.MIX_P2)
MIX_P3 = uint64(hashing.MIX_P3)
FP_TAG = uint64(hashing.FP_TAG)
ALT_TAG = uint64(hashing.ALT_TAG)
ONE = uint64(1)
ZERO = uint64(0)


@njit(uint64(uint64), cache=True, inline="always")
def _mix64(x):
    x ^= x >> uint64(30)
    x = x * MIX_P2
    x ^= x >> uint64(27)
    x = x * MIX_P3
    x ^= x >> uint64(31)
    return x


@njit(uint64(uint64[:], uint64), cache=True, inline="always")
def _hash_words(words, seed):
    h = seed + GOLDEN
    for i in range(words.shape[0]):
        h = _mix64(h ^ words[i])
    return _mix64(h ^ uint64(8 * words.shape[0]))


@njit(int64(uint64[:], uint64, uint64, uint64, uint64, uint64[:, :], int64[:]),
      cache=True, nogil=True)
def lookup_gather(table, bucket_count, beta, fp_bits, seed, queries, hits_out):
    """Look up every query row; indexes of positives land in hits_out.

    Returns the number of positives.  Both buckets are always read.
    """
    fp_mask = (ONE << fp_bits) - ONE
    hits = 0
    for r in range(queries.shape[0]):
        h = _hash_words(queries[r], seed)
        fp = _mix64(h ^ FP_TAG) & fp_mask
        if fp == ZERO:
            fp = ONE
        i1 = h % bucket_count
        i2 = (_mix64(fp ^ ALT_TAG) % bucket_count + bucket_count - i1) % bucket_count
        b1 = i1 * beta
        b2 = i2 * beta
        found = False
        for s1 in range(beta):
            found |= table[b1 + uint64(s1)] == fp
        for s2 in range(beta):
            found |= table[b2 + uint64(s2)] == fp
        if found:
            hits_out[hits] = r
            hits += 1
    return hits


@njit(int64(uint64[:], uint64, uint64, uint64, uint64, uint64[:, :], int64, uint64, int64),
      cache=True, nogil=True)
def insert_fill(table, bucket_count, beta, fp_bits, seed, items, max_kicks, rng_seed, target):
    """Insert items[0:target]; returns count placed before the first failure."""
    fp_mask = (ONE << fp_bits) - ONE
    state = rng_seed | ONE  # xorshift64 state for victim selection
    n = 0
    for r in range(target):
        h = _hash_words(items[r], seed)
        fp = _mix64(h ^ FP_TAG) & fp_mask
        if fp == ZERO:
            fp = ONE
        i1 = h % bucket_count
        i2 = (_mix64(fp ^ ALT_TAG) % bucket_count + bucket_count - i1) % bucket_count
        placed = False
        for s1 in range(beta):
            if table[i1 * beta + uint64(s1)] == ZERO:
                table[i1 * beta + uint64(s1)] = fp
                placed = True
                break
        if not placed:
            for s2 in range(beta):
                if table[i2 * beta + uint64(s2)] == ZERO:
                    table[i2 * beta + uint64(s2)] = fp
                    placed = True
                    break
        if not placed:
            state ^= state << uint64(13)
            state ^= state >> uint64(7)
            state ^= state << uint64(17)
            cur_bucket = i1 if (state & ONE) == ZERO else i2
            cur = fp
            for _k in range(max_kicks):
                state ^= state << uint64(13)
                state ^= state >> uint64(7)
                state ^= state << uint64(17)
                idx = cur_bucket * beta + state % beta
                victim = table[idx]
                table[idx] = cur
                cur = victim
                cur_bucket = (_mix64(cur ^ ALT_TAG) % bucket_count
                              + bucket_count - cur_bucket) % bucket_count
                for s3 in range(beta):
                    if table[cur_bucket * beta + uint64(s3)] == ZERO:
                        table[cur_bucket * beta + uint64(s3)] = cur
                        placed = True
                        break
                if placed:
                    break
            if not placed:
                return n
        n += 1
    return n


def lookup_batch(table, bucket_count, beta, fp_bits, seed, queries):
    """Convenience wrapper returning a hit count (allocates the gather buffer)."""
    out = np.empty(queries.shape[0], dtype=np.int64)
    return lookup_gather(
        table, np.uint64(bucket_count), np.uint64(beta), np.uint64(fp_bits),
        np.uint64(seed), queries, out,
    )
