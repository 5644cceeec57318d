"""Throughput benchmark: lookup MOPS vs positive-query fraction, insert MOPS vs load.

Absolute numbers are machine-specific; results carry a machine fingerprint
so downstream checks assert only shape properties (relative ordering and
ratios), never absolute MOPS.
"""

from __future__ import annotations

import platform
import threading
import time
from dataclasses import dataclass

import numpy as np

DEFAULT_SIZE_MB = 112.0  # memory-resident reference size; turn down for CI
DEFAULT_FP_FRACTIONS = (0.0, 0.25, 0.5, 0.75, 1.0)
DEFAULT_ALPHA_TARGETS = (0.1, 0.3, 0.5, 0.7, 0.9)
ITEM_WORDS = 3  # 24-byte items, same width as an encoded availability entry


def machine_fingerprint() -> str:
    import numba

    return (
        f"{platform.platform()}|{platform.machine()}|"
        f"py{platform.python_version()}|numba{numba.__version__}"
    )


@dataclass(frozen=True)
class BenchResult:
    metric: str  # "lookup_mops" | "insert_mops"
    x: float  # f_p for lookups, target load factor for inserts
    value: float  # million operations per second
    trials: int  # operations timed for this point
    machine: str

    def __post_init__(self):
        if self.value <= 0:
            raise ValueError("throughput must be positive")


def _geometry(size_mb: float, epsilon: float, beta: int):
    from .cuckoo import derive_params

    fp_bits = derive_params(epsilon, beta, 1.0, 1).fingerprint_bits
    payload_bits = size_mb * (1 << 20) * 8
    bucket_count = max(2, int(payload_bits / fp_bits) // beta)
    return bucket_count, fp_bits


def _fill_table(bucket_count, beta, fp_bits, alpha, seed):
    """Fresh table filled to alpha with random word items; returns (table, members)."""
    from . import _kernels

    rng = np.random.default_rng(seed)
    slots = bucket_count * beta
    n = int(slots * alpha)
    # members stay below 2^63 so probes with the top bit set are disjoint
    members = rng.integers(0, 1 << 63, size=(n, ITEM_WORDS), dtype=np.uint64)
    table = np.zeros(slots, dtype=np.uint64)
    placed = _kernels.insert_fill(
        table, np.uint64(bucket_count), np.uint64(beta), np.uint64(fp_bits),
        np.uint64(seed), members, 500, np.uint64(seed ^ 0xBEEF), n,
    )
    if placed != n:
        raise RuntimeError(f"benchmark fill stopped at {placed}/{n} items")
    return table, members


def run_lookup_sweep(
    size_mb: float = DEFAULT_SIZE_MB,
    fp_fractions=DEFAULT_FP_FRACTIONS,
    duration: float = 1.0,
    threads: int = 1,
    seed: int = 1,
    epsilon: float = 1e-8,
    beta: int = 4,
    alpha: float = 0.95,
    repeats: int = 1,
) -> list[BenchResult]:
    """Measure lookup throughput at each positive-query fraction."""
    from . import _kernels

    if duration < 1.0:
        raise ValueError("duration must be >= 1 s per point")
    if threads < 1:
        raise ValueError("threads must be >= 1")
    bucket_count, fp_bits = _geometry(size_mb, epsilon, beta)
    table, members = _fill_table(bucket_count, beta, fp_bits, alpha, seed)
    rng = np.random.default_rng(seed + 1)
    machine = machine_fingerprint()

    batch = 1 << 18
    results = []
    for rep in range(repeats):
        for f_p in fp_fractions:
            if not 0.0 <= f_p <= 1.0:
                raise ValueError(f"f_p must be in [0, 1], got {f_p}")
            n_pos = int(batch * f_p)
            pos = members[rng.integers(0, members.shape[0], size=n_pos)]
            neg = rng.integers(1 << 63, 1 << 64, size=(batch - n_pos, ITEM_WORDS),
                               dtype=np.uint64)
            queries = np.ascontiguousarray(
                np.concatenate([pos, neg])[rng.permutation(batch)]
            )
            ops = _timed_lookup_loop(_kernels, table, bucket_count, beta, fp_bits,
                                     seed, queries, duration, threads)
            results.append(BenchResult("lookup_mops", f_p, ops[0] / ops[1] / 1e6,
                                       ops[0], machine))
    return results


def _timed_lookup_loop(kernels, table, bucket_count, beta, fp_bits, seed, queries,
                       duration, threads):
    """Run lookup batches until `duration` elapses; returns (ops, elapsed)."""
    args = (table, np.uint64(bucket_count), np.uint64(beta), np.uint64(fp_bits),
            np.uint64(seed))
    out = np.empty(queries.shape[0], dtype=np.int64)
    kernels.lookup_gather(*args, queries[:1024], out)  # warm the jit
    total_ops = 0
    elapsed = 0.0
    if threads == 1:
        while elapsed < duration:
            t0 = time.perf_counter()
            kernels.lookup_gather(*args, queries, out)
            elapsed += time.perf_counter() - t0
            total_ops += queries.shape[0]
        return total_ops, elapsed

    # the table is immutable during lookups: shard queries across reader
    # threads (the kernel releases the GIL)
    shards = np.array_split(queries, threads)
    shards = [np.ascontiguousarray(s) for s in shards]
    outs = [np.empty(s.shape[0], dtype=np.int64) for s in shards]
    while elapsed < duration:
        ts = [
            threading.Thread(target=kernels.lookup_gather, args=(*args, s, o))
            for s, o in zip(shards, outs)
        ]
        t0 = time.perf_counter()
        for t in ts:
            t.start()
        for t in ts:
            t.join()
        elapsed += time.perf_counter() - t0
        total_ops += queries.shape[0]
    return total_ops, elapsed


def run_insert_sweep(
    size_mb: float = DEFAULT_SIZE_MB,
    alpha_targets=DEFAULT_ALPHA_TARGETS,
    duration: float = 1.0,
    seed: int = 1,
    epsilon: float = 1e-8,
    beta: int = 4,
    repeats: int = 1,
) -> list[BenchResult]:
    """Measure cumulative insert throughput filling fresh tables to each load."""
    from . import _kernels

    if duration < 1.0:
        raise ValueError("duration must be >= 1 s per point")
    bucket_count, fp_bits = _geometry(size_mb, epsilon, beta)
    slots = bucket_count * beta
    rng = np.random.default_rng(seed + 2)
    machine = machine_fingerprint()

    kargs = (np.uint64(bucket_count), np.uint64(beta), np.uint64(fp_bits), np.uint64(seed))
    results = []
    for rep in range(repeats):
        for target_alpha in alpha_targets:
            if not 0.0 < target_alpha <= 1.0:
                raise ValueError(f"alpha target must be in (0, 1], got {target_alpha}")
            n = max(1, int(slots * target_alpha))
            items = rng.integers(0, 1 << 63, size=(n, ITEM_WORDS), dtype=np.uint64)
            warm = np.zeros(slots, dtype=np.uint64)  # warm the jit
            _kernels.insert_fill(warm, *kargs, items[:16], 500, np.uint64(3), 16)
            total_ops = 0
            elapsed = 0.0
            fill = 0
            while elapsed < duration:
                table = np.zeros(slots, dtype=np.uint64)
                t0 = time.perf_counter()
                placed = _kernels.insert_fill(table, *kargs, items, 500,
                                              np.uint64(seed ^ (0xF00D + fill)), n)
                elapsed += time.perf_counter() - t0
                fill += 1
                if placed != n:
                    raise RuntimeError(f"fill to alpha={target_alpha} stopped early "
                                       f"({placed}/{n})")
                total_ops += placed
            results.append(BenchResult("insert_mops", target_alpha,
                                       total_ops / elapsed / 1e6, total_ops, machine))
    return results
