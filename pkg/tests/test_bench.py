import random

import numpy as np
import pytest

from wsprivdb import _kernels
from wsprivdb.bench import run_insert_sweep, run_lookup_sweep
from wsprivdb.cuckoo import CuckooFilter, derive_params


def test_kernel_lookup_matches_python_filter():
    # the jitted kernel must agree with the production filter bit for bit,
    # otherwise the benchmark measures a different structure
    params = derive_params(0.001, 4, 0.95, 5000)
    f = CuckooFilter(params, seed=42)
    rng = np.random.default_rng(0)
    members = rng.integers(0, 1 << 63, size=(5000, 3), dtype=np.uint64)
    for row in members:
        assert f.insert(row.tobytes())

    table = np.frombuffer(f._table, dtype=np.uint64)
    probes = np.concatenate([
        members[:5000],
        rng.integers(1 << 63, 1 << 64, size=(5000, 3), dtype=np.uint64),
    ])
    probes = np.ascontiguousarray(probes)
    out = np.empty(probes.shape[0], dtype=np.int64)
    hits = _kernels.lookup_gather(
        table, np.uint64(params.bucket_count), np.uint64(4),
        np.uint64(params.fingerprint_bits), np.uint64(42), probes, out,
    )
    kernel_found = set(out[:hits].tolist())
    for i, row in enumerate(probes):
        assert f.lookup(row.tobytes()) == (i in kernel_found)


def test_kernel_insert_no_false_negatives():
    rng = np.random.default_rng(1)
    bucket_count, beta, fp_bits, seed = 4096, 4, 16, 7
    slots = bucket_count * beta
    n = int(slots * 0.9)
    items = rng.integers(0, 1 << 63, size=(n, 3), dtype=np.uint64)
    table = np.zeros(slots, dtype=np.uint64)
    placed = _kernels.insert_fill(
        table, np.uint64(bucket_count), np.uint64(beta), np.uint64(fp_bits),
        np.uint64(seed), items, 500, np.uint64(99), n,
    )
    assert placed == n
    assert _kernels.lookup_batch(table, bucket_count, beta, fp_bits, seed, items) == n


def test_kernel_hash_matches_python_hash():
    from wsprivdb.hashing import hash_bytes

    rng = random.Random(2)
    for _ in range(200):
        words = np.array([rng.getrandbits(64) for _ in range(3)], dtype=np.uint64)
        assert _kernels._hash_words(words, np.uint64(12345)) == hash_bytes(
            words.tobytes(), 12345
        )


def test_lookup_sweep_smoke():
    res = run_lookup_sweep(size_mb=1.0, fp_fractions=(0.0, 1.0), duration=1.0, seed=3)
    assert len(res) == 2
    assert all(r.value > 0 for r in res)
    assert {r.x for r in res} == {0.0, 1.0}
    hit_like = [r for r in res if r.x == 1.0]
    assert hit_like[0].metric == "lookup_mops"


def test_insert_sweep_smoke():
    res = run_insert_sweep(size_mb=1.0, alpha_targets=(0.1, 0.9), duration=1.0, seed=4)
    assert len(res) == 2
    by_x = {r.x: r.value for r in res}
    assert by_x[0.9] < by_x[0.1]


def test_lookup_sweep_rejects_short_duration():
    with pytest.raises(ValueError, match="duration"):
        run_lookup_sweep(size_mb=1.0, duration=0.1)


def test_threaded_lookup_agrees():
    r1 = run_lookup_sweep(size_mb=1.0, fp_fractions=(0.5,), duration=1.0, threads=2, seed=5)
    assert r1[0].value > 0
